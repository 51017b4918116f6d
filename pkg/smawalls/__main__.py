import sys

from smawalls.cli import main

sys.exit(main())
