"""Build script for the compiled split-search kernels.

The extension is optional: if Cython or a C toolchain is unavailable the
package installs anyway and falls back to the pure-numpy kernels at import
time (see flowsieve.trees._engine).

-ffp-contract=off keeps the C kernels bit-identical to the numpy fallback:
fused multiply-adds would round differently than separate mul/add ufuncs.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "flowsieve.trees._core",
                ["src/flowsieve/trees/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
