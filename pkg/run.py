#!/usr/bin/env python3
"""
Command line entry point for heatpack
"""
import sys
from pathlib import Path

# Add the engine directory to Python path
engine_path = Path(__file__).parent / 'engine'
sys.path.insert(0, str(engine_path))

from app import create_cli  # noqa: E402

if __name__ == '__main__':
    create_cli()(obj={})
