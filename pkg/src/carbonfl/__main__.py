"""Allow ``python -m carbonfl``."""

import sys

from .cli import main

sys.exit(main())
