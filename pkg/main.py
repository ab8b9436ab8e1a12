"""Entry point for Tomostar."""

import sys

from tomostar.main import main

if __name__ == "__main__":
    sys.exit(main())
