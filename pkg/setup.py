"""Build script for the compiled SMO core.

The extension is optional: if it fails to build or import, the package
falls back to the pure-numpy twin in clinlab.svm._smo_py (selected at
import time by clinlab.svm.smo).
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    # -ffp-contract=off keeps the C arithmetic rounding identical to the
    # numpy fallback (no fused multiply-add), so both backends follow the
    # same floating-point trajectory.
    ext_modules = cythonize(
        [
            Extension(
                "clinlab.svm._smo_cy",
                ["src/clinlab/svm/_smo_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
