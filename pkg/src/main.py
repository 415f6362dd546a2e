"""Main entry point for the GC simulator."""

import sys
from pathlib import Path

# Add the repository root to the Python path so `src.*` imports resolve
root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))

from src.cli import create_app


def main():
    """Main entry point for the application."""
    app = create_app()
    app()


if __name__ == "__main__":
    main()
