"""Build hook for the optional C-accelerated alignment kernel.

The package is fully functional without the extension; procure.diff falls
back to the pure-Python kernel when the import fails.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "procure._speedups",
                ["src/procure/_speedups.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
