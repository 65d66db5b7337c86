"""
    Application defaults, overridable in the project settings.
    Dict settings are merged key by key with the project values.
"""
import os

from django.conf import settings


SITETOOLS_REGISTRY_DIR = 'tools'

SITETOOLS_STABILIZER = {
    'scores': {
        'id': 1.0,
        'name': 0.9,
        'aria-label': 0.8,
        'attribute': 0.6,
        'dom_path': 0.3,
    },
    'unstable_depth': 8,
}

SITETOOLS_EXECUTOR = {
    'retry_wait': 0.5,
    'agentic_max_steps': 5,
    'fallback_budget': 12,
    'timeout_wait': 4,
}

SITETOOLS_BUILD = {
    'max_attempts': 4,
    'seed': 0,
}

SITETOOLS_BACKEND = {
    'function': 'classifieds.fixture.backend_factory',
    'kwargs': {'seed': 0},
}

SITETOOLS_TRACE_SOURCE = {
    'function': 'classifieds.demos.FixtureTraceSource',
    'kwargs': {'seed': 0},
}

SITETOOLS_DEMO_RECORDER = {
    'function': 'classifieds.demos.DemoRecorder',
    'kwargs': {},
}

SITETOOLS_REASONER = 'stub'

SITETOOLS_STUB_REASONER_RULES = []


def get(name):
    default = globals()[name]
    value = getattr(settings, name, default)
    if isinstance(default, dict) and isinstance(value, dict):
        merged = dict(default)
        merged.update(value)
        return merged
    return value


def reasoner_setting():
    return os.environ.get('SITETOOLS_REASONER_URL') or \
        get('SITETOOLS_REASONER')
