import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; _pykernels is used at runtime
    ext_modules = []
else:
    # -ffp-contract=off keeps results bit-identical to the NumPy fallback.
    flags = ["-O3", "-ffp-contract=off"]
    if not os.environ.get("DDMOD_PORTABLE"):
        flags.append("-march=native")
    ext_modules = cythonize(
        [
            Extension(
                "drawdown_modulation._kernels",
                ["src/drawdown_modulation/_kernels.pyx"],
                include_dirs=["src/drawdown_modulation"],
                extra_compile_args=flags,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
