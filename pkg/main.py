#!/usr/bin/env python3
"""Entry point script for the GC simulator."""

import sys
from pathlib import Path

# Make `src.*` importable when run from anywhere
sys.path.insert(0, str(Path(__file__).parent))

from src.main import main

if __name__ == "__main__":
    main()
