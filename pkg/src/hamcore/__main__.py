import sys

from hamcore.cli import main

sys.exit(main())
