#!/usr/bin/env python
"""
    example project: the classifieds fixture site plus the sitetools
    management command, e.g. ./manage.py sitetools build search_listings
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'example.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Django is required to run the example project, "
            "install requirements.txt first"
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
