import sys

from src.cli_io.main import main

sys.exit(main())
