import sys

from waylab.cli import main

sys.exit(main())
