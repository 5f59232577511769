import sys

from heentangle.cli import main

sys.exit(main())
