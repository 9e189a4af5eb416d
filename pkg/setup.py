"""Builds the optional compiled kernels; without Cython the package installs
pure-Python and ``denokat.kernel`` falls back to ``_kernels_py``."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("denokat._kernels", ["src/denokat/_kernels.pyx"], extra_compile_args=["-O2"])],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )

setup(ext_modules=ext_modules)
