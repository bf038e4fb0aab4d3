"""Permite ``python -m quantum_weather``."""

import sys

from .automation.pipeline import main

sys.exit(main())
