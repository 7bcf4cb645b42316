import sys

from qkd_security.pipelines.cli import main

if __name__ == '__main__':
    sys.exit(main())
