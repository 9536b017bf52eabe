"""Executable entrypoint for ``python -m santalab``."""

from __future__ import annotations

import sys

from santalab.cli import main

if __name__ == "__main__":
    sys.exit(main())
