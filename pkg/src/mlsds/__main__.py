import sys

from mlsds.cli import main

sys.exit(main())
