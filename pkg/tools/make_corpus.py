"""Builds src/procure/assets/corpus.jsonl from the task table below.

Each task is (task_id, prompt, canonical_solution, test, entry_point).
Run from the repository root:  python tools/make_corpus.py
"""

from __future__ import annotations

import json
from pathlib import Path

TASKS: list[dict] = []


def task(task_id: str, entry_point: str, prompt: str, solution: str, test: str) -> None:
    TASKS.append(
        {
            "task_id": task_id,
            "prompt": prompt,
            "canonical_solution": solution,
            "test": test,
            "entry_point": entry_point,
        }
    )


task(
    "bundle/0",
    "clamp",
    '''def clamp(value, low, high):
    """Clamp value into the closed interval [low, high]."""
''',
    '''    if value < low:
        result = low
    else:
        if value > high:
            result = high
        else:
            result = value
    return result
''',
    '''def check(candidate):
    assert candidate(5, 0, 10) == 5
    assert candidate(-3, 0, 10) == 0
    assert candidate(42, 0, 10) == 10
    assert candidate(0, 0, 0) == 0

check(clamp)
''',
)

task(
    "bundle/1",
    "sum_of_squares",
    '''def sum_of_squares(n):
    """Sum of k*k for k in 1..n."""
''',
    '''    total = 0
    k = 1
    while k <= n:
        square = k * k
        total = total + square
        k = k + 1
    return total
''',
    '''def check(candidate):
    assert candidate(0) == 0
    assert candidate(1) == 1
    assert candidate(3) == 14
    assert candidate(10) == 385

check(sum_of_squares)
''',
)

task(
    "bundle/2",
    "count_vowels",
    '''def count_vowels(text):
    """Number of vowel characters in text (case-insensitive)."""
''',
    '''    vowels = "aeiou"
    count = 0
    for ch in text:
        lowered = ch.lower()
        if lowered in vowels:
            count = count + 1
        else:
            count = count + 0
    return count
''',
    '''def check(candidate):
    assert candidate("") == 0
    assert candidate("xyz") == 0
    assert candidate("Audio") == 4
    assert candidate("AEIOUaeiou") == 10

check(count_vowels)
''',
)

task(
    "bundle/3",
    "absolute_difference",
    '''def absolute_difference(a, b):
    """The non-negative gap between a and b."""
''',
    '''    if a > b:
        gap = a - b
    else:
        gap = b - a
    return gap
''',
    '''def check(candidate):
    assert candidate(7, 3) == 4
    assert candidate(3, 7) == 4
    assert candidate(5, 5) == 0

check(absolute_difference)
''',
)

task(
    "bundle/4",
    "factorial",
    '''def factorial(n):
    """n! for n >= 0."""
''',
    '''    product = 1
    k = 2
    while k <= n:
        product = product * k
        k = k + 1
    return product
''',
    '''def check(candidate):
    assert candidate(0) == 1
    assert candidate(1) == 1
    assert candidate(5) == 120
    assert candidate(10) == 3628800

check(factorial)
''',
)

task(
    "bundle/5",
    "is_sorted_ascending",
    '''def is_sorted_ascending(items):
    """True when every element is <= its successor."""
''',
    '''    n = len(items)
    i = 1
    ok = True
    while i < n:
        if items[i - 1] > items[i]:
            ok = False
        else:
            ok = ok
        i = i + 1
    return ok
''',
    '''def check(candidate):
    assert candidate([]) is True
    assert candidate([1, 2, 2, 9]) is True
    assert candidate([3, 1]) is False
    assert candidate([1, 5, 4, 9]) is False

check(is_sorted_ascending)
''',
)

task(
    "bundle/6",
    "digit_sum",
    '''def digit_sum(n):
    """Sum of the decimal digits of a non-negative integer."""
''',
    '''    total = 0
    remaining = n
    while remaining > 0:
        digit = remaining % 10
        total = total + digit
        remaining = remaining // 10
    return total
''',
    '''def check(candidate):
    assert candidate(0) == 0
    assert candidate(7) == 7
    assert candidate(1234) == 10
    assert candidate(999) == 27

check(digit_sum)
''',
)

task(
    "bundle/7",
    "maximum_of_three",
    '''def maximum_of_three(a, b, c):
    """Largest of three numbers without using max()."""
''',
    '''    if a > b:
        best = a
    else:
        best = b
    if c > best:
        best = c
    else:
        best = best
    return best
''',
    '''def check(candidate):
    assert candidate(1, 2, 3) == 3
    assert candidate(9, 2, 3) == 9
    assert candidate(1, 7, 3) == 7
    assert candidate(4, 4, 4) == 4

check(maximum_of_three)
''',
)

task(
    "bundle/8",
    "reverse_string",
    '''def reverse_string(text):
    """The characters of text in reverse order."""
''',
    '''    result = ""
    for ch in text:
        result = ch + result
    return result
''',
    '''def check(candidate):
    assert candidate("") == ""
    assert candidate("a") == "a"
    assert candidate("abc") == "cba"
    assert candidate("racecar") == "racecar"

check(reverse_string)
''',
)

task(
    "bundle/9",
    "count_positive",
    '''def count_positive(numbers):
    """How many entries are strictly greater than zero."""
''',
    '''    count = 0
    for value in numbers:
        if value > 0:
            count = count + 1
        else:
            count = count
    return count
''',
    '''def check(candidate):
    assert candidate([]) == 0
    assert candidate([-1, -2]) == 0
    assert candidate([1, -2, 3, 0]) == 2
    assert candidate([5, 5, 5]) == 3

check(count_positive)
''',
)

task(
    "bundle/10",
    "fibonacci",
    '''def fibonacci(n):
    """The n-th Fibonacci number with fib(0) = 0, fib(1) = 1."""
''',
    '''    previous = 0
    current = 1
    i = 0
    while i < n:
        step = previous + current
        previous = current
        current = step
        i = i + 1
    return previous
''',
    '''def check(candidate):
    assert candidate(0) == 0
    assert candidate(1) == 1
    assert candidate(2) == 1
    assert candidate(10) == 55

check(fibonacci)
''',
)

task(
    "bundle/11",
    "strip_spaces",
    '''def strip_spaces(text):
    """text with every space character removed."""
''',
    '''    cleaned = ""
    for ch in text:
        if ch == " ":
            cleaned = cleaned
        else:
            cleaned = cleaned + ch
    return cleaned
''',
    '''def check(candidate):
    assert candidate("") == ""
    assert candidate("a b c") == "abc"
    assert candidate("   ") == ""
    assert candidate("nospace") == "nospace"

check(strip_spaces)
''',
)

task(
    "bundle/12",
    "sum_even",
    '''def sum_even(numbers):
    """Sum of the even entries."""
''',
    '''    total = 0
    for value in numbers:
        remainder = value % 2
        if remainder == 0:
            total = total + value
        else:
            total = total + 0
    return total
''',
    '''def check(candidate):
    assert candidate([]) == 0
    assert candidate([1, 3, 5]) == 0
    assert candidate([2, 4, 6]) == 12
    assert candidate([1, 2, 3, 4]) == 6

check(sum_even)
''',
)

task(
    "bundle/13",
    "power",
    '''def power(base, exponent):
    """base raised to a non-negative integer exponent."""
''',
    '''    result = 1
    count = 0
    while count < exponent:
        result = result * base
        count = count + 1
    return result
''',
    '''def check(candidate):
    assert candidate(2, 0) == 1
    assert candidate(2, 10) == 1024
    assert candidate(3, 3) == 27
    assert candidate(10, 2) == 100

check(power)
''',
)

task(
    "bundle/14",
    "find_first_negative",
    '''def find_first_negative(numbers):
    """Index of the first negative entry, or -1 when none exists."""
''',
    '''    index = 0
    found = -1
    for value in numbers:
        if value < 0:
            if found == -1:
                found = index
            else:
                found = found
        else:
            found = found
        index = index + 1
    return found
''',
    '''def check(candidate):
    assert candidate([]) == -1
    assert candidate([1, 2, 3]) == -1
    assert candidate([-5]) == 0
    assert candidate([3, 1, -2, -7]) == 2

check(find_first_negative)
''',
)

task(
    "bundle/15",
    "gcd",
    '''def gcd(a, b):
    """Greatest common divisor of two non-negative integers."""
''',
    '''    x = a
    y = b
    while y > 0:
        remainder = x % y
        x = y
        y = remainder
    return x
''',
    '''def check(candidate):
    assert candidate(12, 8) == 4
    assert candidate(8, 12) == 4
    assert candidate(7, 13) == 1
    assert candidate(10, 0) == 10

check(gcd)
''',
)

task(
    "bundle/16",
    "triangle_kind",
    '''def triangle_kind(a, b, c):
    """Classify a triangle by side lengths: 'equilateral', 'isosceles',
    or 'scalene'."""
''',
    '''    if a == b:
        if b == c:
            kind = "equilateral"
        else:
            kind = "isosceles"
    else:
        if b == c:
            kind = "isosceles"
        else:
            if a == c:
                kind = "isosceles"
            else:
                kind = "scalene"
    return kind
''',
    '''def check(candidate):
    assert candidate(2, 2, 2) == "equilateral"
    assert candidate(2, 2, 3) == "isosceles"
    assert candidate(3, 2, 2) == "isosceles"
    assert candidate(2, 3, 2) == "isosceles"
    assert candidate(2, 3, 4) == "scalene"

check(triangle_kind)
''',
)

task(
    "bundle/17",
    "count_words",
    '''def count_words(text):
    """Number of whitespace-separated words."""
''',
    '''    words = text.split()
    total = len(words)
    return total
''',
    '''def check(candidate):
    assert candidate("") == 0
    assert candidate("one") == 1
    assert candidate("one two three") == 3
    assert candidate("  spaced   out  ") == 2

check(count_words)
''',
)

task(
    "bundle/18",
    "median_of_three",
    '''def median_of_three(a, b, c):
    """The middle value of three numbers."""
''',
    '''    if a > b:
        low = b
        high = a
    else:
        low = a
        high = b
    if c < low:
        middle = low
    else:
        if c > high:
            middle = high
        else:
            middle = c
    return middle
''',
    '''def check(candidate):
    assert candidate(1, 2, 3) == 2
    assert candidate(3, 2, 1) == 2
    assert candidate(2, 3, 1) == 2
    assert candidate(5, 5, 1) == 5
    assert candidate(1, 1, 1) == 1

check(median_of_three)
''',
)

task(
    "bundle/19",
    "running_total",
    '''def running_total(numbers):
    """List of prefix sums."""
''',
    '''    sums = []
    acc = 0
    for value in numbers:
        acc = acc + value
        sums.append(acc)
    return sums
''',
    '''def check(candidate):
    assert candidate([]) == []
    assert candidate([5]) == [5]
    assert candidate([1, 2, 3]) == [1, 3, 6]
    assert candidate([2, -2, 2]) == [2, 0, 2]

check(running_total)
''',
)

task(
    "bundle/20",
    "leap_year",
    '''def leap_year(year):
    """True for Gregorian leap years."""
''',
    '''    if year % 400 == 0:
        leap = True
    else:
        if year % 100 == 0:
            leap = False
        else:
            if year % 4 == 0:
                leap = True
            else:
                leap = False
    return leap
''',
    '''def check(candidate):
    assert candidate(2000) is True
    assert candidate(1900) is False
    assert candidate(2024) is True
    assert candidate(2023) is False

check(leap_year)
''',
)

task(
    "bundle/21",
    "count_matches",
    '''def count_matches(items, target):
    """How many entries equal target."""
''',
    '''    hits = 0
    for item in items:
        if item == target:
            hits = hits + 1
        else:
            hits = hits + 0
    return hits
''',
    '''def check(candidate):
    assert candidate([], 1) == 0
    assert candidate([1, 1, 1], 1) == 3
    assert candidate([1, 2, 1], 2) == 1
    assert candidate(["a", "b"], "c") == 0

check(count_matches)
''',
)

task(
    "bundle/22",
    "interleave",
    '''def interleave(left, right):
    """Alternate elements of two equal-length lists."""
''',
    '''    merged = []
    n = len(left)
    i = 0
    while i < n:
        merged.append(left[i])
        merged.append(right[i])
        i = i + 1
    return merged
''',
    '''def check(candidate):
    assert candidate([], []) == []
    assert candidate([1], [2]) == [1, 2]
    assert candidate([1, 3], [2, 4]) == [1, 2, 3, 4]

check(interleave)
''',
)

task(
    "bundle/23",
    "collatz_steps",
    '''def collatz_steps(n):
    """Steps for n to reach 1 under the Collatz map."""
''',
    '''    steps = 0
    value = n
    while value != 1:
        remainder = value % 2
        if remainder == 0:
            value = value // 2
        else:
            value = 3 * value + 1
        steps = steps + 1
    return steps
''',
    '''def check(candidate):
    assert candidate(1) == 0
    assert candidate(2) == 1
    assert candidate(6) == 8
    assert candidate(27) == 111

check(collatz_steps)
''',
)

task(
    "bundle/24",
    "caesar_shift",
    '''def caesar_shift(text, shift):
    """Shift lowercase letters by a fixed amount, wrapping at 'z'.
    Non-lowercase characters pass through unchanged."""
''',
    '''    encoded = ""
    for ch in text:
        code = ord(ch)
        if code >= 97:
            if code <= 122:
                moved = (code - 97 + shift) % 26 + 97
                encoded = encoded + chr(moved)
            else:
                encoded = encoded + ch
        else:
            encoded = encoded + ch
    return encoded
''',
    '''def check(candidate):
    assert candidate("abc", 1) == "bcd"
    assert candidate("xyz", 3) == "abc"
    assert candidate("a b!", 2) == "c d!"
    assert candidate("", 5) == ""

check(caesar_shift)
''',
)

task(
    "bundle/25",
    "unique_in_order",
    '''def unique_in_order(items):
    """Collapse runs of equal adjacent elements to a single copy."""
''',
    '''    out = []
    previous = None
    first = True
    for item in items:
        if first:
            out.append(item)
            first = False
        else:
            if item == previous:
                out = out
            else:
                out.append(item)
        previous = item
    return out
''',
    '''def check(candidate):
    assert candidate([]) == []
    assert candidate([1, 1, 1]) == [1]
    assert candidate([1, 2, 2, 3, 1]) == [1, 2, 3, 1]
    assert candidate(["a", "a", "b"]) == ["a", "b"]

check(unique_in_order)
''',
)

task(
    "bundle/26",
    "dot_product",
    '''def dot_product(xs, ys):
    """Inner product of two equal-length numeric lists."""
''',
    '''    total = 0
    n = len(xs)
    i = 0
    while i < n:
        term = xs[i] * ys[i]
        total = total + term
        i = i + 1
    return total
''',
    '''def check(candidate):
    assert candidate([], []) == 0
    assert candidate([1, 2], [3, 4]) == 11
    assert candidate([1, 0, -1], [5, 9, 2]) == 3

check(dot_product)
''',
)

task(
    "bundle/27",
    "is_palindrome",
    '''def is_palindrome(text):
    """True when text reads the same forwards and backwards."""
''',
    '''    n = len(text)
    i = 0
    j = n - 1
    same = True
    while i < j:
        if text[i] != text[j]:
            same = False
        else:
            same = same
        i = i + 1
        j = j - 1
    return same
''',
    '''def check(candidate):
    assert candidate("") is True
    assert candidate("a") is True
    assert candidate("abba") is True
    assert candidate("abca") is False

check(is_palindrome)
''',
)

task(
    "bundle/28",
    "grade_letter",
    '''def grade_letter(score):
    """Letter grade for a 0-100 score."""
''',
    '''    if score >= 90:
        letter = "A"
    else:
        if score >= 80:
            letter = "B"
        else:
            if score >= 70:
                letter = "C"
            else:
                letter = "F"
    return letter
''',
    '''def check(candidate):
    assert candidate(95) == "A"
    assert candidate(85) == "B"
    assert candidate(75) == "C"
    assert candidate(50) == "F"
    assert candidate(90) == "A"

check(grade_letter)
''',
)

task(
    "bundle/29",
    "swap_case_count",
    '''def swap_case_count(text):
    """Count of characters whose case flips under swapcase()."""
''',
    '''    flips = 0
    swapped = text.swapcase()
    n = len(text)
    i = 0
    while i < n:
        if text[i] != swapped[i]:
            flips = flips + 1
        else:
            flips = flips
        i = i + 1
    return flips
''',
    '''def check(candidate):
    assert candidate("") == 0
    assert candidate("abc") == 3
    assert candidate("a1B") == 2
    assert candidate("123") == 0

check(swap_case_count)
''',
)

task(
    "bundle/30",
    "bounded_growth",
    '''def bounded_growth(start, rate, cap, steps):
    """Apply integer growth `rate` times `steps`, clipping at cap."""
''',
    '''    value = start
    i = 0
    while i < steps:
        grown = value + rate
        if grown > cap:
            value = cap
        else:
            value = grown
        i = i + 1
    return value
''',
    '''def check(candidate):
    assert candidate(0, 2, 100, 3) == 6
    assert candidate(0, 50, 80, 3) == 80
    assert candidate(5, 0, 10, 9) == 5
    assert candidate(0, 2, 100, 0) == 0

check(bounded_growth)
''',
)

task(
    "bundle/31",
    "histogram",
    '''def histogram(values):
    """Map each value to its number of occurrences."""
''',
    '''    counts = {}
    for value in values:
        if value in counts:
            counts[value] = counts[value] + 1
        else:
            counts[value] = 1
    return counts
''',
    '''def check(candidate):
    assert candidate([]) == {}
    assert candidate([1]) == {1: 1}
    assert candidate([1, 1, 2]) == {1: 2, 2: 1}
    assert candidate(["a", "b", "a"]) == {"a": 2, "b": 1}

check(histogram)
''',
)

task(
    "bundle/32",
    "second_largest",
    '''def second_largest(numbers):
    """Second-largest distinct value; None when fewer than two distinct."""
''',
    '''    best = None
    runner = None
    for value in numbers:
        if best is None:
            best = value
        else:
            if value > best:
                runner = best
                best = value
            else:
                if value < best:
                    if runner is None:
                        runner = value
                    else:
                        if value > runner:
                            runner = value
                        else:
                            runner = runner
                else:
                    runner = runner
    return runner
''',
    '''def check(candidate):
    assert candidate([]) is None
    assert candidate([5]) is None
    assert candidate([5, 5, 5]) is None
    assert candidate([1, 2, 3]) == 2
    assert candidate([3, 1, 2]) == 2

check(second_largest)
''',
)

task(
    "bundle/33",
    "rot_pairs",
    '''def rot_pairs(items):
    """Rotate a list left by one position."""
''',
    '''    n = len(items)
    if n == 0:
        rotated = []
    else:
        rotated = []
        i = 1
        while i < n:
            rotated.append(items[i])
            i = i + 1
        rotated.append(items[0])
    return rotated
''',
    '''def check(candidate):
    assert candidate([]) == []
    assert candidate([1]) == [1]
    assert candidate([1, 2, 3]) == [2, 3, 1]
    assert candidate(["a", "b"]) == ["b", "a"]

check(rot_pairs)
''',
)

task(
    "bundle/34",
    "price_after_discount",
    '''def price_after_discount(price, percent):
    """Integer price after an integer percentage discount, floored at 0."""
''',
    '''    reduction = price * percent // 100
    discounted = price - reduction
    if discounted < 0:
        final = 0
    else:
        final = discounted
    return final
''',
    '''def check(candidate):
    assert candidate(100, 25) == 75
    assert candidate(80, 0) == 80
    assert candidate(50, 100) == 0
    assert candidate(10, 150) == 0

check(price_after_discount)
''',
)


def main() -> None:
    out = Path(__file__).resolve().parent.parent / "src" / "procure" / "assets" / "corpus.jsonl"
    lines = [json.dumps(t, ensure_ascii=False) for t in TASKS]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(TASKS)} tasks to {out}")


if __name__ == "__main__":
    main()
