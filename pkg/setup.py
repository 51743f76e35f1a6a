#!/usr/bin/env python
"""Setup file and install script for the fvm workbench."""

from setuptools import find_packages, setup

try:
    with open("requirements.txt") as f:
        install_requires = [x.strip() for x in f.readlines()]
except OSError:
    install_requires = []

setup(
    name="fvm",
    description="Game comonads, Kleisli laws and Feferman-Vaught-Mostowski witnesses over finite structures",
    license="MIT",
    scripts=["fvm_app.py"],
    entry_points={"console_scripts": ["fvm=fvm.cli:main"]},
    install_requires=install_requires,
    packages=find_packages(exclude=["tests"]),
)
