import sys

from sparseqa.cli import main

sys.exit(main())
