import sys

from mnemosim.cli import main

sys.exit(main())
