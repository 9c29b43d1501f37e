from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "sparseqa.kernels._bm25",
        ["src/sparseqa/kernels/_bm25.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    # Without Cython the package installs pure-Python; the kernel shim
    # falls back at import time.
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"})
    if cythonize
    else [],
)
