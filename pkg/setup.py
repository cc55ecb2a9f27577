from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled RK4 kernel is optional: without Cython the package falls back
# to the pure-Python kernel selected in blockade.kernels.
extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "blockade._cykernel",
                ["src/blockade/_cykernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
