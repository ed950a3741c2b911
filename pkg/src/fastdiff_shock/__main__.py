import sys

from fastdiff_shock.cli import main

sys.exit(main())
