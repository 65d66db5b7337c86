"""
    Browser session over plain HTTP: pages are fetched through a
    transport and interacted with as BeautifulSoup trees.

    Transports answer request(method, url, data, cookies) with a
    TransportResponse and never follow redirects themselves.
"""
import logging
import math
import time

from typing import NamedTuple
from urllib.parse import urlencode, urljoin, urlsplit

import requests

from . dom import describe_element, parse_html, project, select_all
from . exceptions import (BackendError,
                          BackendUnavailable,
                          ElementNotFound,
                          NavigationFailed,
                          OptionNotFound)


logger = logging.getLogger(__name__)

MAX_REDIRECTS = 5
REDIRECTS = (301, 302, 303, 307, 308)


class TransportResponse(NamedTuple):
    status: int
    html: str
    location: str = ''


class RequestsTransport(object):
    def __init__(self, session=None, timeout=10, verify=True):
        self.session = session or requests.Session()
        self.timeout = timeout
        self.verify = verify

    def request(self, method, url, data=None, cookies=None):
        try:
            response = self.session.request(method, url,
                                            data=data,
                                            cookies=cookies,
                                            allow_redirects=False,
                                            timeout=self.timeout,
                                            verify=self.verify)
        except requests.RequestException as e:
            logger.error(f'Something went wrong with {method} {url}: {e}')
            raise BackendUnavailable(f'{url}: {e}')
        return TransportResponse(response.status_code,
                                 response.text,
                                 response.headers.get('Location', ''))


class ClientTransport(object):
    """
        django.test.Client binding, for in-process sites
    """
    def __init__(self, client):
        self.client = client

    def request(self, method, url, data=None, cookies=None):
        parts = urlsplit(url)
        path = f'{parts.path}?{parts.query}' if parts.query else parts.path
        for key, value in (cookies or {}).items():
            self.client.cookies[key] = value
        if method == 'GET':
            response = self.client.get(path)
        else:
            response = self.client.post(path, data=data or {})
        return TransportResponse(response.status_code,
                                 response.content.decode(),
                                 response.get('Location', ''))


def form_data(form):
    pairs = []
    for field in form.find_all(['input', 'textarea', 'select']):
        name = field.get('name')
        if not name or field.has_attr('disabled'):
            continue
        if field.name == 'textarea':
            pairs.append((name, field.get_text()))
        elif field.name == 'select':
            options = field.find_all('option')
            chosen = [i for i in options if i.has_attr('selected')] or \
                options[:1]
            for option in chosen:
                pairs.append((name, option.get('value', option.get_text())))
        else:
            kind = field.get('type', 'text').lower()
            if kind in ('submit', 'button', 'reset', 'image'):
                continue
            if kind in ('checkbox', 'radio') and \
                    not field.has_attr('checked'):
                continue
            pairs.append((name, field.get('value', '')))
    return pairs


class SessionBackend(object):
    """
        One single-threaded browsing session. Every public action is a
        primitive call; last_http_method() reports the method of the
        request caused by the most recent action, if any.
    """
    def __init__(self, transport, base_url='', realtime=False):
        self.transport = transport
        self.base_url = base_url
        self.realtime = realtime
        self.url = base_url
        self.soup = parse_html('')
        self.status = None
        self.cookies = {}
        self.focused = None
        self.scroll_position = (0, 0)
        self.primitive_calls = 0
        self._last_method = None

    def __repr__(self):
        return f'<SessionBackend {self.url}>'

    def _action(self):
        self.primitive_calls += 1
        self._last_method = None

    def _request(self, method, url, data=None):
        self._last_method = method
        for _ in range(MAX_REDIRECTS + 1):
            logger.debug(f'{method} {url} {data or ""}')
            response = self.transport.request(method, url, data=data,
                                              cookies=dict(self.cookies))
            if response.status in REDIRECTS and response.location:
                url = urljoin(url, response.location)
                method, data = 'GET', None
                continue
            break
        self.url = url
        self.status = response.status
        self.soup = parse_html(response.html)
        self.focused = None
        if response.status >= 400:
            field_errors = {
                i['data-field']: ' '.join(i.get_text().split())
                for i in self.soup.select('ul.errors li[data-field]')
            }
            raise NavigationFailed(url, response.status, field_errors)

    def _submit(self, form):
        action = urljoin(self.url, form.get('action') or self.url)
        pairs = form_data(form)
        if form.get('method', 'get').lower() == 'post':
            self._request('POST', action, data=dict(pairs))
        else:
            base = action.split('?')[0]
            query = urlencode(pairs)
            self._request('GET', f'{base}?{query}' if query else base)

    # primitives
    def navigate(self, url):
        self._action()
        self._request('GET', urljoin(self.url or self.base_url, url))

    def click(self, selector):
        self._action()
        element = self.element(selector)
        popup = element if element.has_attr('data-dismissable') else \
            element.find_parent(attrs={'data-dismissable': True})
        if popup is not None:
            logger.debug(f'Dismissed {popup.get("id", popup.name)}')
            popup.decompose()
            return
        kind = element.get('type', 'submit' if element.name == 'button'
                           else '').lower()
        if element.name == 'a' and element.get('href'):
            self._request('GET', urljoin(self.url, element['href']))
        elif element.name in ('button', 'input') and kind == 'submit':
            form = element.find_parent('form')
            if form is not None:
                self._submit(form)
        else:
            self.focused = element

    def input(self, selector, text):
        self._action()
        element = self.element(selector)
        if element.name == 'textarea':
            element.string = str(text)
        elif element.name == 'input':
            element['value'] = str(text)
        else:
            raise BackendError(f'{selector} is a {element.name}, '
                               'not a text control')
        self.focused = element

    def select(self, selector, option_text):
        self._action()
        element = self.element(selector)
        if element.name != 'select':
            raise OptionNotFound(selector, option_text)
        options = element.find_all('option')
        wanted = str(option_text)

        def _value(option):
            return option.get('value', option.get_text(strip=True))

        match = next(
            (i for i in options
             if wanted in (i.get_text(strip=True), _value(i))), None
        ) or next(
            (i for i in options
             if wanted.lower() in (i.get_text(strip=True).lower(),
                                   _value(i).lower())), None
        )
        if match is None:
            raise OptionNotFound(selector, option_text)
        for option in options:
            if option.has_attr('selected'):
                del option['selected']
        match['selected'] = 'selected'
        if element.get('data-persist'):
            self.cookies[element['data-persist']] = _value(match)
        self.focused = element

    def press(self, key, selector=None):
        self._action()
        target = self.element(selector) if selector else self.focused
        if key != 'Enter' or target is None:
            return
        form = target.find_parent('form')
        if form is not None:
            self._submit(form)

    def scroll(self, dx=0, dy=0):
        self._action()
        x, y = self.scroll_position
        self.scroll_position = (x + int(dx), max(0, y + int(dy)))

    def wait(self, seconds):
        """
            polls the current page once per second while it is busy
        """
        self._action()
        for _ in range(max(1, math.ceil(seconds))):
            if not self.is_busy():
                return
            if self.realtime:
                time.sleep(1)
            self._request('GET', self.url)

    def current_url(self):
        return self.url

    def dom_snapshot(self):
        return str(self.soup)

    def extract(self, goal):
        self._action()
        return project(self.soup, goal)

    def last_http_method(self):
        return self._last_method

    # inspection, not counted as primitives
    def is_busy(self):
        return self.soup.select_one('[data-loading]') is not None

    def element(self, selector):
        found = select_all(self.soup, selector)
        if not found:
            raise ElementNotFound(selector)
        return found[0]

    def tag_of(self, selector):
        found = select_all(self.soup, selector)
        return found[0].name if found else None

    def describe(self, selector):
        return describe_element(self.soup, self.element(selector))


def requests_backend(base_url, **kwargs):
    """
        zero-argument factory of sessions against a live site
    """
    def factory():
        return SessionBackend(RequestsTransport(**kwargs), base_url=base_url)
    return factory
