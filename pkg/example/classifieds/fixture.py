"""
    Deterministic mini classifieds site. All content is a pure
    function of the seed and of the request sequence; created_at is a
    logical clock.

    Variants: drift ('none', 'renamed': control ids change,
    'rewritten': ids, names and DOM nesting change), persist_sort (the
    search form posts to /search-nosort, which ignores the sort query
    parameter and reads a cookie set by the sort select) and loading
    (the next N GET requests answer a loading page).
"""
import logging
import random
import re

from typing import NamedTuple, Optional
from urllib.parse import parse_qsl, urlsplit

from django.template.loader import render_to_string
from pydantic import BaseModel, Field

from sitetools.browser import SessionBackend, TransportResponse


logger = logging.getLogger(__name__)

BASE_URL = 'http://classifieds.test'
CATALOG_SIZE = 40
CATEGORIES = ('Boats', 'Electronics', 'Furniture')
SORTS = (('newest', 'Newly listed'),
         ('price_asc', 'Lower price first'),
         ('price_desc', 'Higher price first'))

COLORS = ('blue', 'red', 'green', 'black', 'white', 'grey')
ADJECTIVES = ('vintage', 'compact', 'sturdy', 'modern', 'classic',
              'portable', 'refurbished', 'lightweight')
NOUNS = {
    'Boats': ('canoe', 'rowboat', 'sailboat', 'dinghy', 'paddle board',
              'outboard motor'),
    'Electronics': ('laptop', 'camera', 'speaker', 'monitor', 'headphones',
                    'turntable'),
    'Furniture': ('armchair', 'bookshelf', 'dining table', 'desk', 'sofa',
                  'dresser'),
}
CONDITIONS = ('like new', 'good', 'fair', 'well used')

# present in every catalog: two blue kayaks, the older one cheaper
ANCHORS = {
    5: ('Blue kayak, 10ft', 'Stable sit-on-top for lakes.', 45000,
        'Boats', 'blue'),
    18: ('Blue kayak with paddles', 'Touring model, two paddles included.',
         72000, 'Boats', 'blue'),
    30: ('Red kayak', 'Whitewater kayak, some scratches.', 39000,
         'Boats', 'red'),
}

IDS = {
    'search_form': 'search-form',
    'searchquery': 'searchquery',
    'category': 'category',
    'sort': 'sort',
    'search_submit': 'search-submit',
    'sort_form': 'sort-form',
    'sort_results': 'sort-results',
    'sort_apply': 'sort-apply',
    'edit_link': 'edit-link',
    'delete_submit': 'delete-submit',
    'comment_form': 'comment-form',
    'comment_text': 'comment-text',
    'comment_submit': 'comment-submit',
    'listing_form': 'listing-form',
    'title': 'title',
    'description': 'description',
    'price': 'price',
    'listing_category': 'listing-category',
    'color': 'color',
    'listing_submit': 'listing-submit',
}

RENAMED_IDS = {k: f'{v}-v2' for k, v in IDS.items()}
RENAMED_IDS.update(searchquery='search-box',
                   category='category-select',
                   sort='sort-select',
                   search_submit='search-button')

NAMES = {i: i for i in ('q', 'category', 'sort', 'title', 'description',
                        'price', 'color', 'text')}

REWRITTEN_NAMES = {
    'q': 'keywords',
    'category': 'cat',
    'sort': 'order',
    'title': 'listing_title',
    'description': 'listing_description',
    'price': 'listing_price',
    'color': 'listing_color',
    'text': 'body',
}
REWRITTEN_IDS = {k: f'x-{v}' for k, v in RENAMED_IDS.items()}

# every alias the site accepts, whatever the variant
ALIASES = {v: k for k, v in REWRITTEN_NAMES.items()}


class Listing(BaseModel):
    id: int
    title: str
    description: str = ''
    price: int = Field(gt=0)
    category: str
    color: str = ''
    created_at: int
    comments: list[str] = Field(default_factory=list)
    deleted: bool = False

    @property
    def price_display(self):
        return f'${self.price / 100:,.2f}'


class FixtureState(BaseModel):
    seed: int = 0
    listings: list[Listing] = Field(default_factory=list)
    next_id: int = 1
    clock: int = 0
    drift: str = 'none'
    persist_sort: bool = False
    loading: int = 0

    def listing(self, listing_id):
        for i in self.listings:
            if i.id == listing_id and not i.deleted:
                return i
        return None

    def tick(self):
        self.clock += 1
        return self.clock


class FixtureResponse(NamedTuple):
    status: int
    html: str
    location: Optional[str] = None


def generate_catalog(seed):
    rng = random.Random(seed)
    listings = []
    for n in range(1, CATALOG_SIZE + 1):
        if n in ANCHORS:
            title, description, price, category, color = ANCHORS[n]
        else:
            category = rng.choice(CATEGORIES)
            color = rng.choice(COLORS)
            adjective = rng.choice(ADJECTIVES)
            noun = rng.choice(NOUNS[category])
            title = f'{color.capitalize()} {adjective} {noun}'
            description = f'{adjective.capitalize()} {noun} in ' \
                          f'{rng.choice(CONDITIONS)} condition.'
            price = rng.randint(5, 1500) * 100
        listings.append(Listing(id=n, title=title, description=description,
                                price=price, category=category, color=color,
                                created_at=n))
    return listings


def new_state(seed=0, drift='none', persist_sort=False, loading=0):
    if drift not in ('none', 'renamed', 'rewritten'):
        raise ValueError(f'unknown drift {drift}')
    return FixtureState(seed=seed,
                        listings=generate_catalog(seed),
                        next_id=CATALOG_SIZE + 1,
                        clock=CATALOG_SIZE,
                        drift=drift,
                        persist_sort=persist_sort,
                        loading=loading)


def ids_for(drift='none'):
    return {'none': IDS, 'renamed': RENAMED_IDS,
            'rewritten': REWRITTEN_IDS}[drift]


def _context(state, **extra):
    ids = ids_for(state.drift)
    names = REWRITTEN_NAMES if state.drift == 'rewritten' else NAMES
    context = {
        'ids': ids,
        'names': names,
        'wrap': state.drift == 'rewritten',
        'categories': CATEGORIES,
        'sort_options': SORTS,
        'persist_sort': state.persist_sort,
        'search_action': '/search-nosort' if state.persist_sort
        else '/search',
    }
    context.update(extra)
    return context


def _page(state, template, status=200, **extra):
    html = render_to_string(f'classifieds/{template}',
                            _context(state, **extra))
    return FixtureResponse(status, html)


def _redirect(location):
    return FixtureResponse(302, '', location)


def canonical(params):
    return {ALIASES.get(k, k): v for k, v in (params or {}).items()}


def search(state, q='', category='', sort='newest'):
    """
        the catalog query behind /search, usable as a direct oracle
    """
    needle = q.lower()
    found = [i for i in state.listings if not i.deleted and
             (needle in i.title.lower() or needle in i.description.lower())]
    if category and category != 'All':
        found = [i for i in found if i.category == category]
    if sort == 'price_asc':
        found.sort(key=lambda i: (i.price, i.id))
    elif sort == 'price_desc':
        found.sort(key=lambda i: (-i.price, i.id))
    else:
        found.sort(key=lambda i: (-i.created_at, i.id))
    return found


def _search(state, params, sort):
    names = _context(state)['names']
    errors = {}
    category = params.get('category', '')
    if category and category != 'All' and category not in CATEGORIES:
        errors[names['category']] = 'Select a valid category.'
    if sort not in dict(SORTS):
        errors[names['sort']] = 'Select a valid sort order.'
    if errors:
        return _page(state, 'results.html', status=400, errors=errors,
                     results=[], q=params.get('q', ''), category=category,
                     sort='newest')
    return _page(state, 'results.html',
                 results=search(state, params.get('q', ''), category, sort),
                 q=params.get('q', ''), category=category, sort=sort)


def _listing_errors(state, values):
    names = _context(state)['names']
    errors = {}
    if not values.get('title', '').strip():
        errors[names['title']] = 'This field is required.'
    price = values.get('price', '')
    if not price:
        errors[names['price']] = 'This field is required.'
    elif not re.fullmatch(r'\d+', price) or int(price) <= 0:
        errors[names['price']] = 'Enter a positive whole number.'
    if values.get('category') not in CATEGORIES:
        errors[names['category']] = 'Select a valid category.'
    return errors


def _listing_values(listing):
    return {'title': listing.title,
            'description': listing.description,
            'price': str(listing.price // 100),
            'category': listing.category,
            'color': listing.color}


def _save_listing(state, method, values, listing=None):
    action = f'/listing/{listing.id}/edit' if listing else '/listing/new'
    if method == 'GET':
        return _page(state, 'listing_form.html', action=action,
                     listing=listing,
                     values=_listing_values(listing) if listing else {})
    errors = _listing_errors(state, values)
    if errors:
        return _page(state, 'listing_form.html', status=400, action=action,
                     listing=listing, values=values, errors=errors)
    fields = {'title': values['title'].strip(),
              'description': values.get('description', '').strip(),
              'price': int(values['price']) * 100,
              'category': values['category'],
              'color': values.get('color', '').strip()}
    if listing is None:
        listing = Listing(id=state.next_id, created_at=state.tick(), **fields)
        state.listings.append(listing)
        state.next_id += 1
        logger.debug(f'Created listing {listing.id}')
    else:
        for key, value in fields.items():
            setattr(listing, key, value)
        logger.debug(f'Updated listing {listing.id}')
    return _redirect(f'/listing/{listing.id}')


LISTING_ROUTE = re.compile(r'/listing/(\d+)(?:/(edit|delete|comment))?/?')


def handle_request(state, method, path, params=None, cookies=None):
    """
        (FixtureResponse, state); state is mutated in place
    """
    method = method.upper()
    params = canonical(params)
    cookies = cookies or {}
    if method == 'GET' and state.loading > 0:
        state.loading -= 1
        return _page(state, 'loading.html'), state

    if path in ('/', ''):
        if method != 'GET':
            return _page(state, 'error.html', status=405), state
        return _page(state, 'index.html'), state

    if path in ('/search', '/search-nosort'):
        if method != 'GET':
            return _page(state, 'error.html', status=405), state
        if path == '/search':
            sort = params.get('sort') or 'newest'
        else:
            sort = cookies.get('sort') or 'newest'
        return _search(state, params, sort), state

    if path == '/listing/new':
        if method not in ('GET', 'POST'):
            return _page(state, 'error.html', status=405), state
        return _save_listing(state, method, params), state

    match = LISTING_ROUTE.fullmatch(path)
    listing = state.listing(int(match.group(1))) if match else None
    if listing is None:
        return _page(state, 'error.html', status=404), state
    action = match.group(2)
    if action is None and method == 'GET':
        return _page(state, 'listing.html', listing=listing), state
    if action == 'edit' and method in ('GET', 'POST'):
        return _save_listing(state, method, params, listing), state
    if action == 'delete' and method == 'POST':
        listing.deleted = True
        return _redirect('/'), state
    if action == 'comment' and method == 'POST':
        text = params.get('text', '').strip()
        if not text:
            names = _context(state)['names']
            return _page(state, 'listing.html', status=400, listing=listing,
                         errors={names['text']: 'This field is required.'}
                         ), state
        listing.comments.append(text)
        return _redirect(f'/listing/{listing.id}'), state
    return _page(state, 'error.html', status=405), state


class FixtureTransport(object):
    """
        in-process transport straight into handle_request
    """
    def __init__(self, state):
        self.state = state

    def request(self, method, url, data=None, cookies=None):
        parts = urlsplit(url)
        params = data if method == 'POST' else \
            dict(parse_qsl(parts.query, keep_blank_values=True))
        response, self.state = handle_request(self.state, method,
                                              parts.path or '/',
                                              params, cookies)
        return TransportResponse(response.status, response.html,
                                 response.location or '')


def seed_env(seed=0, **variant):
    state = new_state(seed, **variant)
    return state, SessionBackend(FixtureTransport(state), base_url=BASE_URL)


def backend_factory(seed=0, **variant):
    """
        zero-argument factory of identically seeded sessions
    """
    def factory():
        return seed_env(seed, **variant)[1]
    return factory
