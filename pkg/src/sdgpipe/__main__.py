import sys

from sdgpipe.cli import main

sys.exit(main())
