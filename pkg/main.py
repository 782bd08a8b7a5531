"""
Entry point of the simulator
Execute from root dir via "python3 main.py run --scenario configs/scenario.yaml"
"""

import sys

from src.cli import cli_main


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
