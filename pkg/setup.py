from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # no build tools: install the pure-Python kernel only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sfsbc._fmm_core",
                ["src/sfsbc/_fmm_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,  # a failed compile falls back to the Python kernel
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
