#!/usr/bin/env python3
"""
Decoupler - Main Entry Point

Usage:
    python run.py [--config paper.yaml] <subcommand> [options]
    python run.py --help

Environment Variables:
    DECOUPLER_ENV: development (default), production, testing
    LOG_LEVEL: DEBUG, INFO, WARNING, ERROR (optional)
    DECOUPLER_THREADS: default worker thread count for sweeps and grids
"""

import sys
from pathlib import Path

# Ensure package directory is in path
APP_DIR = Path(__file__).parent
sys.path.insert(0, str(APP_DIR))

# Load environment variables from .env file
from dotenv import load_dotenv

load_dotenv(APP_DIR / ".env")

from decoupler.cli import main

if __name__ == "__main__":
    sys.exit(main())
