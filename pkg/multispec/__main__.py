import sys

from multispec.cli import main

sys.exit(main())
