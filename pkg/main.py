#!/usr/bin/env python3
"""
Bushy-tree forcing laboratory
Command-line entry point
"""

import sys
import os

# Add the project root to the Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli.app import run_command

def main():
    """Command-line entry point"""
    sys.exit(run_command(sys.argv[1:]))

if __name__ == "__main__":
    main()
