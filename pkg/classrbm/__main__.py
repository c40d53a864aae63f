import sys

from classrbm.cli import main

sys.exit(main())
