"""Record schema, persistence, grouping, and batch planning."""

from __future__ import annotations

import json

import pytest

from procure.dataset import (
    CombinedGroup,
    DatasetRecord,
    OriginalEntry,
    TaskRecord,
    build_combined,
    load_tasks,
    make_record,
    plan_batches,
    read_records,
    record_from_dict,
    split_half,
    write_records,
)
from procure.errors import GroupTooLarge, OrphanCounterfactual, SchemaError

TASK = TaskRecord(
    task_id="demo/0",
    prompt="def inc(x):\n",
    canonical_solution="    return x + 1\n",
    test="def check(f):\n    assert f(1) == 2\n\ncheck(inc)\n",
    entry_point="inc",
)


def record(task_id="demo/0", concept="NameRandom", cf="def inc(y):\n    return y + 1\n"):
    task = TaskRecord(
        task_id=task_id,
        prompt=TASK.prompt,
        canonical_solution=TASK.canonical_solution,
        test=TASK.test,
        entry_point=TASK.entry_point,
    )
    return make_record(task, concept, cf, attempts=1, verdict="AcceptedStructural", generator="rule")


class TestRecords:
    def test_make_record_computes_spans(self):
        rec = record()
        assert rec.diff_spans
        for start, end in rec.diff_spans:
            assert rec.counterfactual_code[start:end]

    def test_identical_code_rejected(self):
        with pytest.raises(SchemaError):
            make_record(TASK, "NameRandom", TASK.full_source, 1, "AcceptedStructural", "rule")

    def test_round_trip_single(self):
        rec = record()
        clone = record_from_dict(rec.to_dict(), line=1)
        assert clone == rec

    def test_field_order_is_stable(self):
        keys = list(record().to_dict().keys())
        assert keys == [
            "task_id",
            "concept",
            "instruction",
            "original_code",
            "counterfactual_code",
            "diff_spans",
            "attempts",
            "verdict",
            "generator",
        ]

    def test_bool_attempts_rejected(self):
        payload = record().to_dict()
        payload["attempts"] = True
        with pytest.raises(SchemaError):
            record_from_dict(payload, line=3)

    def test_missing_field_rejected(self):
        payload = record().to_dict()
        del payload["concept"]
        with pytest.raises(SchemaError) as err:
            record_from_dict(payload, line=9)
        assert err.value.line == 9

    def test_bad_span_shape_rejected(self):
        payload = record().to_dict()
        payload["diff_spans"] = [[3]]
        with pytest.raises(SchemaError):
            record_from_dict(payload, line=1)


class TestPersistence:
    def test_write_read_identity(self, tmp_path):
        records = [record(), record(task_id="demo/1", concept="IfElseFlip")]
        path = tmp_path / "records.jsonl"
        write_records(records, path)
        assert read_records(path) == records

    def test_write_is_deterministic(self, tmp_path):
        records = [record()]
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_records(records, p1)
        write_records(records, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_read_reports_line_numbers(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        good = json.dumps(record().to_dict())
        path.write_text(good + "\n{not json}\n", encoding="utf-8")
        with pytest.raises(SchemaError) as err:
            read_records(path)
        assert err.value.line == 2


class TestTaskLoading:
    def test_load_tasks(self, tmp_path):
        path = tmp_path / "tasks.jsonl"
        payload = {
            "task_id": "t/0",
            "prompt": "def f(x):\n",
            "canonical_solution": "    return x\n",
            "test": "assert True\n",
            "entry_point": "f",
        }
        path.write_text(json.dumps(payload) + "\n", encoding="utf-8")
        tasks = load_tasks(path)
        assert len(tasks) == 1
        assert tasks[0].full_source == "def f(x):\n    return x\n"

    def test_duplicate_task_id_rejected(self, tmp_path):
        path = tmp_path / "tasks.jsonl"
        payload = json.dumps(
            {
                "task_id": "t/0",
                "prompt": "def f(x):\n",
                "canonical_solution": "    return x\n",
                "test": "assert True\n",
                "entry_point": "f",
            }
        )
        path.write_text(payload + "\n" + payload + "\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_tasks(path)


class TestGrouping:
    def originals(self, n):
        return [
            OriginalEntry(task_id=f"t/{i}", instruction=f"prompt {i}", code=f"code {i}")
            for i in range(n)
        ]

    def cf(self, task_id, concept):
        return DatasetRecord(
            task_id=task_id,
            concept=concept,
            instruction=f"prompt {task_id.split('/')[1]}",
            original_code=f"code {task_id.split('/')[1]}",
            counterfactual_code=f"cf {concept} {task_id}",
            diff_spans=((0, 2),),
            attempts=1,
            verdict="AcceptedByTests",
            generator="rule",
        )

    def test_group_sizes(self):
        originals = self.originals(2)
        cfs = [self.cf("t/0", c) for c in ("IfElseFlip", "NameRandom", "NameShuffle")]
        groups = build_combined(originals, cfs)
        assert [g.size for g in groups] == [4, 1]

    def test_orphan_rejected(self):
        with pytest.raises(OrphanCounterfactual):
            build_combined(self.originals(1), [self.cf("t/9", "IfElseFlip")])

    def test_batches_exact_fit(self):
        originals = self.originals(2)
        cfs = [self.cf(f"t/{i}", c) for i in range(2) for c in ("A", "B", "C")]
        groups = build_combined(originals, cfs)
        plan = plan_batches(groups, batch_size=8, seed=0)
        assert len(plan.batches) == 1

    def test_batches_greedy_split(self):
        originals = self.originals(3)
        cfs = [self.cf(f"t/{i}", c) for i in range(3) for c in ("A", "B", "C")]
        groups = build_combined(originals, cfs)
        plan = plan_batches(groups, batch_size=8, seed=0)
        assert len(plan.batches) == 2
        sizes = [sum(groups[g].size for g in batch) for batch in plan.batches]
        assert sorted(sizes) == [4, 8]

    def test_group_too_large(self):
        originals = self.originals(1)
        cfs = [self.cf("t/0", c) for c in "ABCDE"]
        groups = build_combined(originals, cfs)
        assert groups[0].size == 6
        with pytest.raises(GroupTooLarge):
            plan_batches(groups, batch_size=4, seed=0)

    def test_plan_deterministic_per_seed(self):
        originals = self.originals(6)
        groups = build_combined(originals, [])
        assert plan_batches(groups, 3, seed=9).batches == plan_batches(groups, 3, seed=9).batches
        shuffled = {plan_batches(groups, 3, seed=s).batches for s in range(20)}
        assert len(shuffled) > 1

    def test_batch_integrity(self):
        originals = self.originals(5)
        cfs = [
            self.cf(f"t/{i}", c)
            for i in range(5)
            for c in ("IfElseFlip", "NameRandom")[: (i % 3)]
        ]
        groups = build_combined(originals, cfs)
        plan = plan_batches(groups, batch_size=6, seed=4)
        seen = [g for batch in plan.batches for g in batch]
        assert sorted(seen) == list(range(len(groups)))  # every group exactly once


class TestSplit:
    def test_split_half_covers_everything(self):
        originals = [
            OriginalEntry(task_id=f"t/{i}", instruction="p", code=f"c{i}") for i in range(7)
        ]
        groups = build_combined(originals, [])
        left, right = split_half(groups, seed=2)
        assert len(left) == 4 and len(right) == 3
        ids = {g.original.task_id for g in left} | {g.original.task_id for g in right}
        assert len(ids) == 7

    def test_split_deterministic(self):
        originals = [
            OriginalEntry(task_id=f"t/{i}", instruction="p", code=f"c{i}") for i in range(10)
        ]
        groups = build_combined(originals, [])
        assert split_half(groups, seed=5) == split_half(groups, seed=5)
