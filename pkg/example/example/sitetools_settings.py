SITETOOLS_REGISTRY_DIR = 'tools'

SITETOOLS_BACKEND = {
    'function': 'classifieds.fixture.backend_factory',
    'kwargs': {'seed': 0},
}

# uncomment to build against the site served by runserver
# SITETOOLS_BACKEND = {
#     'function': 'sitetools.browser.requests_backend',
#     'kwargs': {'base_url': 'http://localhost:8000'},
# }

SITETOOLS_TRACE_SOURCE = {
    'function': 'classifieds.demos.FixtureTraceSource',
    'kwargs': {'seed': 0},
}

SITETOOLS_DEMO_RECORDER = {
    'function': 'classifieds.demos.DemoRecorder',
    'kwargs': {},
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

# 'stub', 'none' or the URL of an HTTP reasoner,
# SITETOOLS_REASONER_URL in the environment wins
SITETOOLS_REASONER = 'stub'

SITETOOLS_STUB_REASONER_RULES = [
    {
        'match': 'popup',
        'commands': [
            {'action': 'click', 'selector': '#promo-popup span'},
        ]
    },
    {
        'match': 'search listings',
        'commands': [
            {'action': 'navigate',
             'url': '/search?q={query}&category={category}&sort={sort}'},
            {'action': 'extract', 'goal': 'result listings',
             'output': 'results'},
        ]
    },
]
