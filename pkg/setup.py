"""Build shim for the optional compiled cost kernels.

The package is pure Python; if Cython (or a C toolchain) is unavailable the
extension is skipped and jtree.kernels falls back to the pure implementation.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("jtree.kernels._fast", ["src/jtree/kernels/_fast.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
