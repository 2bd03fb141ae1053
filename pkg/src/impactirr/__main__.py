import sys

from impactirr.cli import main

sys.exit(main())
