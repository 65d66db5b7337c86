"""
    argv entry point around the sitetools management command
"""
import json
import sys

from django.core.management import call_command
from django.core.management.base import CommandError


def run_cli(argv, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        call_command('sitetools', *argv, stdout=stdout, stderr=stderr)
    except CommandError as e:
        code = getattr(e, 'returncode', 1) or 1
        if '--json' in argv:
            stderr.write(json.dumps({'error': {'code': code,
                                               'message': str(e)}},
                                    sort_keys=True) + '\n')
        else:
            stderr.write(f'error: {e}\n')
        return code
    return 0
