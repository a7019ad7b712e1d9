"""Gör det möjligt att köra python -m eelab."""

import sys

from .cli import main

sys.exit(main())
