import sys

from bridgeinspect.cli import main

sys.exit(main())
