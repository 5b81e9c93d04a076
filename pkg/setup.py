"""Build script for the optional compiled kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so the extension is marked optional: a failed compile degrades
to the pure-Python kernels instead of failing the install.
"""

from setuptools import setup
from setuptools.extension import Extension

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "subnewton._kernels",
        ["src/subnewton/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
