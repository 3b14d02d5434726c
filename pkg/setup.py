"""Build script for the optional Cython propagation kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes the per-particle Euler loops run at
C speed.  -ffp-contract=off keeps the extension bit-identical with the
NumPy backend: FMA contraction would round differently.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "mlpf_pricing.kernels._euler_cy",
                ["src/mlpf_pricing/kernels/_euler_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
