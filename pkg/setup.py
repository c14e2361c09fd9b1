"""Build script: compiles the RK4 integration kernel when Cython and numpy
are available; the package falls back to the pure-Python integrator when the
extension is absent, so a plain `pip install .` always works."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("DLVERIFY_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("dlverify.sim._rk4", ["src/dlverify/sim/_rk4.pyx"],
                       include_dirs=[numpy.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API",
                                       "NPY_1_7_API_VERSION")])],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
