import sys

from gsmsim.cli import main

sys.exit(main())
