#!/usr/bin/env python3
"""
CHC-COMP Benchmark Toolkit
Main entry point for the command-line pipeline.
"""

import sys
import os

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'src'))

# Import the main function from the src module
from chc_main import main

if __name__ == "__main__":
    sys.exit(main())
