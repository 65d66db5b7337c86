from pathlib import Path

import classifieds

from classifieds.demos import FixtureTraceSource, record_demo
from classifieds.fixture import backend_factory
from sitetools.reasoner import load_reasoner
from sitetools.stabilizer import stabilize_trace
from sitetools.synthesizer import synthesize_script
from sitetools.trace_model import parse_candidates
from sitetools.validator import build_tool


CANDIDATES_FILE = Path(classifieds.__file__).parent / 'fixtures' / \
    'candidates.json'


def candidate(name):
    for i in parse_candidates(CANDIDATES_FILE.read_bytes()):
        if i.name == name:
            return i
    raise KeyError(name)


def script_for(demo, name=None, **env):
    trace = record_demo(demo, **env)
    stab = stabilize_trace(trace)
    return trace, stab, synthesize_script(stab, candidate(name) if name
                                          else None)


def build(name, source=None, cand=None, **variant):
    """
        builds a fixture candidate, validating on the given site variant
    """
    return build_tool(cand or candidate(name),
                      source or FixtureTraceSource(),
                      backend_factory=backend_factory(**variant),
                      reasoner=load_reasoner('stub'))
