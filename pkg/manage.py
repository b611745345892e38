#!/usr/bin/env python
"""Entry point for the fusion commands (fuse, osmosis, poisson, blend, metrics, sweep) and the test runner."""
import os
import sys


def main(argv=None):
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "osmofusion.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Django is not importable; install the packages from requirements.txt "
            "into the active environment."
        ) from exc
    execute_from_command_line(argv or sys.argv)


if __name__ == "__main__":
    main()
