"""
Wavemap Launcher
Runs a wavemap command from a source checkout without installing the package.

    python launcher.py certify
    python launcher.py scan --lo 0.05 --hi 0.95 --n 181 --workers 4
"""
import os
import sys

# Ensure project root is on the path
PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, PROJECT_ROOT)


def main() -> int:
    from wavemap.main import main as run_cli

    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
