"""Run the loopback reference server: python -m memaudit.serve [options]."""

import sys

from .protocol import serve_main

if __name__ == "__main__":
    sys.exit(serve_main())
