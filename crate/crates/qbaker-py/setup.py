"""Build the qbaker_py extension module by delegating to cargo.

The crate is compiled as a cdylib with PyO3's extension-module feature
(no libpython link), then the shared object is copied to wherever
setuptools expects the extension artifact.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

CRATE_DIR = Path(__file__).resolve().parent


class CargoExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            [
                "cargo",
                "build",
                "--release",
                "--features",
                "extension-module",
            ],
            cwd=CRATE_DIR,
            check=True,
        )
        if sys.platform == "darwin":
            built_name = "libqbaker_py.dylib"
        elif sys.platform.startswith("win"):
            built_name = "qbaker_py.dll"
        else:
            built_name = "libqbaker_py.so"
        # the crate lives in a cargo workspace: artifacts land in the
        # workspace-level target directory
        built = CRATE_DIR.parent.parent / "target" / "release" / built_name
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[CargoExtension("qbaker_py")],
    cmdclass={"build_ext": CargoBuildExt},
)
