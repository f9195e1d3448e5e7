import sys

from mgcp.cli import main

sys.exit(main())
