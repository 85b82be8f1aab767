"""
Main entry point for the qqo command-line tool
"""
import sys
from pathlib import Path

# Add current directory to Python path
current_dir = Path(__file__).parent
sys.path.insert(0, str(current_dir))

from core.cli import main

if __name__ == "__main__":
    sys.exit(main())
