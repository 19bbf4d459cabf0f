"""Build script for the optional compiled core.

Build in place with ``python setup.py build_ext --inplace``. When Cython or a
C compiler is unavailable the package installs without the extension and
falls back to the NumPy implementation at import time.
"""
import os

import numpy as np
from setuptools import Extension, setup


def _extensions():
    if os.environ.get("RELUGP_NO_EXTENSION"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "relugp._core",
        ["src/relugp/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=_extensions())
