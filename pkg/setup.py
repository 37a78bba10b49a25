# Builds the optional Cython kernel extension. The package falls back to the
# pure-numpy kernels in onesided._kernels_py when the extension is missing,
# so a failed compile only costs speed, never functionality.
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "onesided._kernels_cy",
                ["src/onesided/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
