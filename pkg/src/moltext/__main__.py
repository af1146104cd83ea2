import sys

from moltext.cli import main

sys.exit(main())
