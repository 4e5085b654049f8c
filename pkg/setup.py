"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time); the Cython module only accelerates
the hot text-scanning loops.  Build failures are therefore non-fatal.
"""

from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "stylorisk._kernels._ckernels",
                sources=["src/stylorisk/_kernels/_ckernels.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
