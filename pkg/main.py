# main.py - Repository entry point
"""
Runs the spectral-law command line from a source checkout:

    python main.py list-models
    python main.py compare --template mar_demo --out output/mar
"""

import sys

from spectral_law.cli import main

if __name__ == '__main__':
    sys.exit(main())
