#!/usr/bin/env python3
"""
Classical P2 quantum digital signature simulator
Main application entry point
"""

import sys
from pathlib import Path

# Add src to path
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

from cli.app import main

if __name__ == "__main__":
    raise SystemExit(main())
