"""Console entry point: forwards argv to the native CLI."""

import sys

from ._ecofair import cli


def main():
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
