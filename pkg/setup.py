"""Build script for the optional compiled kernels.

If Cython or a C compiler is unavailable the package still installs and the
pure-Python kernels are used instead.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("DISPERSED_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "dispersed._kernels",
                    ["src/dispersed/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
