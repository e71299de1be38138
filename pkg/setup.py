import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "specrecon.kernels.magnus_cy",
                ["src/specrecon/kernels/magnus_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python kernel is selected at import time when the compiled
    # extension is unavailable.
    ext_modules = []

setup(ext_modules=ext_modules)
