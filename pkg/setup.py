"""Build hook for the optional compiled kernel extension.

The package works without the extension (a pure numpy fallback is selected
at import time); set DRIVEBOX_PURE_BUILD=1 to skip compilation entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("DRIVEBOX_PURE_BUILD"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "drivebox._kernels._compiled",
                    ["src/drivebox/_kernels/_compiled.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
