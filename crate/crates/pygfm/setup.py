"""Builds the pygfm extension module by delegating to cargo.

The usual Rust build-backends (setuptools-rust, maturin) are avoided on
purpose so the package installs with nothing but setuptools:

    pip install -e crates/pygfm --no-build-isolation
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

CRATE_DIR = Path(__file__).resolve().parent


class CargoBuildExt(build_ext):
    def build_extension(self, ext: Extension) -> None:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "pygfm"],
            check=True,
            cwd=CRATE_DIR,
        )
        target = CRATE_DIR.parent.parent / "target" / "release"
        for name in ("libpygfm.so", "libpygfm.dylib", "pygfm.dll"):
            built = target / name
            if built.exists():
                break
        else:
            print(f"cargo produced no cdylib under {target}", file=sys.stderr)
            raise SystemExit(1)
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[Extension("pygfm", sources=[])],
    cmdclass={"build_ext": CargoBuildExt},
    zip_safe=False,
)
