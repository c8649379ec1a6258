"""Build script for the compiled simulation kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), but the compiled core is ~100x faster on long runs.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rshaper._simcore",
                ["src/rshaper/_simcore.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
