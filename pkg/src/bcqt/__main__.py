import sys

from bcqt.cli import main

sys.exit(main())
