import sys

from vbgdetect.main import main

sys.exit(main())
