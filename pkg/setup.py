"""Build script for the optional compiled kernels.

The package works without them; ``kepler_mtpi.kernels`` falls back to the
pure-Python implementation when the extension is missing.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("KEPLER_MTPI_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        print("Cython not available, building pure-Python package only", file=sys.stderr)
    else:
        # no fast-math and no FMA contraction: results must match the Python fallback bit for bit
        extra = [] if sys.platform == "win32" else ["-O2", "-ffp-contract=off", "-fno-fast-math"]
        ext_modules = cythonize(
            [
                Extension(
                    "kepler_mtpi.kernels._ckernels",
                    ["src/kepler_mtpi/kernels/_ckernels.pyx"],
                    extra_compile_args=extra,
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
