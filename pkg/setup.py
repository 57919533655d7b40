import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "windgfm._kernel._ode_cy",
                ["src/windgfm/_kernel/_ode_cy.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Cython unavailable: the package falls back to the pure-Python kernel.
    ext_modules = []

setup(ext_modules=ext_modules)
