"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed. Set STEGOPIVOT_NO_EXT=1
to skip the extension entirely.
"""

import os
import sys

from setuptools import setup

ext_modules = []
if not os.environ.get("STEGOPIVOT_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "stegopivot._kernels._native",
                    ["src/stegopivot/_kernels/_native.pyx"],
                )
            ],
            language_level=3,
        )
    except Exception as exc:  # pragma: no cover
        print(f"warning: skipping native kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
