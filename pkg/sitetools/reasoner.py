"""
    Reasoners turn a natural language task plus the current page into
    ordered primitive commands.

    Request: {"task", "max_steps", "dom_snapshot", "current_url",
              "inputs", "hints"}
    Response: {"commands": [{"action": "click", "selector": ...},
                            {"action": "input", "selector", "text"},
                            {"action": "select", "selector", "option"},
                            {"action": "press", "key", "selector"?},
                            {"action": "navigate", "url"},
                            {"action": "scroll", "dx", "dy"},
                            {"action": "wait", "seconds"},
                            {"action": "extract", "goal", "output"?}]}
    String values may hold {param} placeholders rendered from inputs.
"""
import json
import logging

import requests

from . import settings as app_settings
from . exceptions import ReasonerUnavailable


logger = logging.getLogger(__name__)

COMMANDS = ('click', 'input', 'select', 'press', 'navigate', 'scroll',
            'wait', 'extract')


class StubReasoner(object):
    """
        scripted reasoner: the first rule whose "match" occurs in the
        task (case-insensitive) answers with its "commands"
    """
    def __init__(self, rules=None):
        self.rules = list(rules or [])
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        task = request.get('task', '').lower()
        for rule in self.rules:
            if rule['match'].lower() in task:
                logger.debug(f'Stub reasoner matched {rule["match"]!r}')
                return [dict(i) for i in rule['commands']]
        logger.debug(f'Stub reasoner has no rule for {task!r}')
        return []


class HttpReasoner(object):
    def __init__(self, url, timeout=30, verify=True):
        self.url = url
        self.timeout = timeout
        self.verify = verify

    def __call__(self, request):
        try:
            response = requests.post(self.url,
                                     json=request,
                                     timeout=self.timeout,
                                     verify=self.verify)
        except requests.RequestException as e:
            logger.error(f'Reasoner {self.url} unreachable: {e}')
            raise ReasonerUnavailable(str(e))
        if response.status_code != 200:
            logger.error(f'Reasoner {self.url} answered '
                         f'{response.status_code}: {response.content}')
            raise ReasonerUnavailable(f'status {response.status_code}')
        try:
            commands = json.loads(response.content.decode())['commands']
        except (ValueError, KeyError, TypeError) as e:
            logger.error(f'Something went wrong decoding the reasoner '
                         f'response: {e}')
            raise ReasonerUnavailable(f'malformed response: {e}')
        if not isinstance(commands, list):
            raise ReasonerUnavailable('"commands" must be a list')
        return commands


def load_reasoner(setting=None):
    """
        'stub', 'none' or the URL of an HTTP reasoner
    """
    setting = setting or app_settings.reasoner_setting()
    if not setting or setting == 'none':
        return None
    if setting == 'stub':
        return StubReasoner(app_settings.get('SITETOOLS_STUB_REASONER_RULES'))
    if setting.startswith(('http://', 'https://')):
        return HttpReasoner(setting)
    raise ReasonerUnavailable(f'unknown reasoner {setting}')
