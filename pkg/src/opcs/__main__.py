import sys

from opcs.cli import main

sys.exit(main())
