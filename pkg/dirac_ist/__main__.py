import sys

from dirac_ist.main import main

sys.exit(main())
