#!/usr/bin/env python
"""Finite model theory workbench: game comonads, Kleisli laws and FVM witnesses.

Usage: fvm_app.py COMMAND [--option=value ...] ARGS, for instance
``fvm_app.py check-law coproduct-E --size=2 --k=2`` or ``fvm_app.py suite``.
"""

import sys

from fvm.cli import main

if __name__ == "__main__":
    sys.exit(main())
