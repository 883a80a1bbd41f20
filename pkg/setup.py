"""Builds the optional compiled flow kernel.

The package works without it (a numpy fallback is selected at import);
building it just makes the TV-L1 solver faster on large frames.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "lens.optflow._tvl1_cy",
                sources=["src/lens/optflow/_tvl1_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
