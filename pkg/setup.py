"""Build script for the optional compiled matching kernel.

The package works without the extension: `setmatch.assignment` falls back to
the pure-Python kernel at import time. Set SETMATCH_PURE_PYTHON=1 to skip the
build entirely (useful on machines without a C toolchain).
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("SETMATCH_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("setmatch._matching_c", ["src/setmatch/_matching_c.pyx"])],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
