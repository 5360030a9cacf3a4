"""Point d'entrée `python -m impactgame`."""

import sys

from impactgame.cli import main

if __name__ == "__main__":
    sys.exit(main())
