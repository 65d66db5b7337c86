"""
    Scripted demonstrations over the fixture site, recorded as
    execution traces the way a demonstrating agent would leave them.
"""
import logging

from urllib.parse import urljoin

from sitetools.exceptions import (BackendError,
                                  DemonstrationFailed,
                                  UnknownDemo)
from sitetools.stabilizer import compute_element_hash
from sitetools.trace_model import (ActionRecord,
                                   AgentBrain,
                                   ExecutionTrace,
                                   TraceStep)

from . fixture import BASE_URL, SORTS, ids_for, seed_env


logger = logging.getLogger(__name__)


class Recorder(object):
    """
        drives a backend and records one trace step per action
    """
    def __init__(self, backend, candidate_name='', drift='none'):
        self.backend = backend
        self.candidate_name = candidate_name
        self.ids = ids_for(drift)
        self.steps = []
        self.memory = []

    def sel(self, key):
        return f'#{self.ids[key]}'

    def _title(self):
        title = self.backend.soup.title
        return title.get_text(strip=True) if title else ''

    def _element(self, selector):
        element = self.backend.describe(selector)
        return element.model_copy(
            update={'element_hash': compute_element_hash(element)}
        )

    def _record(self, kind, payload, goal, call, selector=None):
        url = self.backend.current_url() if self.backend.status else \
            'about:blank'
        title = self._title()
        try:
            element = self._element(selector) if selector else None
            extracted = call()
        except BackendError as e:
            logger.debug(f'Demo action {kind} failed: {e}')
            raise DemonstrationFailed(f'{kind} {payload}: {e}')
        brain = AgentBrain(
            evaluation_previous_goal='Success' if self.steps else '',
            memory='; '.join(self.memory),
            next_goal=goal
        )
        self.memory.append(goal)
        self.steps.append(TraceStep(
            url=url,
            title=title,
            brain=brain,
            actions=(ActionRecord(kind=kind,
                                  payload=payload,
                                  extracted=extracted,
                                  http_method=self.backend
                                  .last_http_method()), ),
            interacted=(element, ) if element else ()
        ))
        return extracted

    def navigate(self, url, goal=''):
        url = urljoin(getattr(self.backend, 'base_url', '') or BASE_URL, url)
        return self._record('go_to_url', {'url': url},
                            goal or f'Open {url}',
                            lambda: self.backend.navigate(url))

    def click(self, selector, goal=''):
        return self._record('click_element', {}, goal or f'Click {selector}',
                            lambda: self.backend.click(selector), selector)

    def input(self, selector, text, goal=''):
        return self._record('input_text', {'text': text},
                            goal or f'Type {text}',
                            lambda: self.backend.input(selector, text),
                            selector)

    def select(self, selector, option, goal=''):
        return self._record('select_change', {'selected_text': option},
                            goal or f'Choose {option}',
                            lambda: self.backend.select(selector, option),
                            selector)

    def press(self, selector, key, goal=''):
        return self._record('key_press', {'key': key},
                            goal or f'Press {key}',
                            lambda: self.backend.press(key, selector),
                            selector)

    def extract(self, goal, output):
        return self._record('extract_content',
                            {'goal': goal, 'output': output},
                            f'Extract {goal}',
                            lambda: self.backend.extract(goal))

    def trace(self, bindings):
        return ExecutionTrace(candidate_name=self.candidate_name,
                              steps=tuple(self.steps),
                              param_bindings=bindings)


def _search(rec, variant, values):
    labels = dict(SORTS)
    rec.navigate('/', 'Open the classifieds home page')
    rec.click(rec.sel('searchquery'), 'Focus the search box')
    rec.input(rec.sel('searchquery'), values['query'],
              'Type the search keywords')
    rec.select(rec.sel('category'), values['category'],
               'Restrict the search to one category')
    rec.select(rec.sel('sort'), labels[values['sort']],
               'Choose the result order')
    if variant % 2:
        rec.press(rec.sel('sort'), 'Enter', 'Submit the search form')
    else:
        rec.click(rec.sel('search_submit'), 'Submit the search form')
    rec.extract('result listings', 'results')


def _sort_results(rec, variant, values):
    rec.navigate(f'/search?q={values["query"]}',
                 'Open the search results')
    rec.select(rec.sel('sort_results'), dict(SORTS)[values['sort']],
               'Sort the results')
    rec.click(rec.sel('sort_apply'), 'Apply the new order')
    rec.extract('result listings', 'results')


def _create_listing(rec, variant, values):
    rec.navigate('/listing/new', 'Open the new listing form')
    rec.click(rec.sel('title'), 'Focus the title field')
    rec.input(rec.sel('title'), values['title'], 'Fill in the title')
    rec.input(rec.sel('description'), values['description'],
              'Fill in the description')
    rec.input(rec.sel('price'), values['price'], 'Fill in the price')
    rec.select(rec.sel('listing_category'), values['category'],
               'Pick the category')
    rec.input(rec.sel('color'), values['color'], 'Fill in the color')
    rec.click(rec.sel('listing_submit'), 'Save the listing')
    rec.extract('listing details', 'listing')


def _edit_listing(rec, variant, values):
    rec.navigate(f'/listing/{values["listing_id"]}/edit',
                 'Open the edit form of the listing')
    rec.input(rec.sel('price'), values['price'], 'Lower the price')
    rec.click(rec.sel('listing_submit'), 'Save the changes')
    rec.extract('listing details', 'listing')


def _post_comment(rec, variant, values):
    rec.navigate(f'/listing/{values["listing_id"]}', 'Open the listing')
    rec.click('#promo-popup span', 'Dismiss the promotional popup')
    rec.input(rec.sel('comment_text'), values['comment'],
              'Write the comment')
    rec.click(rec.sel('comment_submit'), 'Post the comment')
    rec.extract('comments', 'comments')


# name -> (demonstration, demonstrated values)
DEMOS = {
    'search': (_search, {'query': 'blue kayak',
                         'category': 'Boats',
                         'sort': 'price_asc'}),
    'sort_results': (_sort_results, {'query': 'kayak',
                                     'sort': 'price_desc'}),
    'create_listing': (_create_listing, {'title': 'Teak rocking chair',
                                         'description': 'Solid teak, '
                                                        'lightly used',
                                         'price': '120',
                                         'category': 'Furniture',
                                         'color': 'brown'}),
    'edit_listing': (_edit_listing, {'listing_id': '3', 'price': '95'}),
    'post_comment': (_post_comment, {'listing_id': '7',
                                     'comment': 'offer $10 under'}),
}

# candidate name -> demo
CANDIDATE_DEMOS = {
    'search_listings': 'search',
    'sort_results': 'sort_results',
    'create_listing': 'create_listing',
    'edit_listing': 'edit_listing',
    'post_comment': 'post_comment',
}


def scripted_demo(name, backend, variant=0, candidate_name=None,
                  drift='none', **values):
    """
        values override the demonstrated literals, which become the
        trace bindings
    """
    if name not in DEMOS:
        raise UnknownDemo(f'no scripted demo named {name}')
    demo, defaults = DEMOS[name]
    bindings = {**defaults, **values}
    recorder = Recorder(backend, candidate_name or name, drift)
    demo(recorder, variant, bindings)
    logger.debug(f'Recorded {name} (variant {variant}): '
                 f'{len(recorder.steps)} steps')
    return recorder.trace(bindings)


def explore(candidate, backend):
    """
        generic demonstration for candidates without a scripted demo
    """
    recorder = Recorder(backend, candidate.name)
    recorder.navigate(candidate.start_url, candidate.description)
    recorder.extract(candidate.description or 'page content', 'content')
    return recorder.trace({})


def record_demo(name, seed=0, variant=0, **env):
    state, backend = seed_env(seed, **env)
    return scripted_demo(name, backend, variant, drift=state.drift)


class DemoRecorder(object):
    """
        callable recorder configured by SITETOOLS_DEMO_RECORDER
    """
    def __init__(self, **env):
        self.env = env

    def __call__(self, name, seed=0, variant=0):
        return record_demo(name, seed, variant, **self.env)


class FixtureTraceSource(object):
    """
        attempt k demonstrates on seed + k - 1 with variant k - 1;
        variants maps attempt numbers to the site variant demonstrated
        on, env is used for the other attempts
    """
    def __init__(self, seed=0, variants=None, env=None, values=None):
        self.seed = seed
        self.variants = variants or {}
        self.env = env or {}
        self.values = values or {}

    def __call__(self, candidate, attempt):
        env = self.variants.get(attempt, self.env)
        state, backend = seed_env(self.seed + attempt - 1, **env)
        name = CANDIDATE_DEMOS.get(candidate.name, candidate.name)
        if name in DEMOS:
            return scripted_demo(name, backend, attempt - 1, candidate.name,
                                 drift=state.drift, **self.values)
        return explore(candidate, backend)
