import sys

from nhsym.cli import main

sys.exit(main())
