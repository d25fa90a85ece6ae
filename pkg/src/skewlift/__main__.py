"""Allow `python -m skewlift` to reach the CLI."""

import sys

from skewlift.cli import main

if __name__ == "__main__":
    sys.exit(main())
