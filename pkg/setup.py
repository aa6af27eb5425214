# -*- coding: utf-8 -*-
#
# setup.py

import ast
import re

import setuptools

APPNAME = "pylethargy"


def version() -> str:
    """Read `__version__` without importing the package, which needs
    numpy and scipy to import.
    """

    with open(f"{APPNAME}/__init__.py", "r", encoding="utf-8") as init:
        match = re.search(r"^__version__ = (.+)$", init.read(), re.MULTILINE)
    return ".".join(map(str, ast.literal_eval(match.group(1))))


def readme() -> str:
    with open("README.rst", "r", encoding="utf-8") as rst:
        return rst.read()


setuptools.setup(
    name=APPNAME,
    version=version(),
    description="Numerical laboratory for Bernstein lethargy theorems.",
    long_description=readme(),
    long_description_content_type="text/x-rst",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)",
        "Programming Language :: Python :: 3.9",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    install_requires=[
        "appdirs>=1",
        "numpy>=1.22",
        "scipy>=1.9",
        "pytest>=6",
        "hypothesis>=6",
    ],
    packages=[APPNAME],
    entry_points={"console_scripts": [f"{APPNAME}={APPNAME}.cli:main"]},
    python_requires=">=3.9",
    license="GPL",
    zip_safe=True,
)
