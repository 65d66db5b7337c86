"""
    DOM helpers over BeautifulSoup: parsing, selector building and
    resolution, element descriptions for the trace recorder and the
    deterministic extraction projections.
"""
import logging
import re

from bs4 import BeautifulSoup
from soupsieve import SelectorSyntaxError

from . trace_model import InteractedElement, SelectOption


logger = logging.getLogger(__name__)

IDENT = re.compile(r'[A-Za-z_][\w-]*')
SKIPPED_TYPES = ('text', 'hidden')


def parse_html(html):
    return BeautifulSoup(html or '', 'html.parser')


def select_all(soup, selector):
    try:
        return soup.select(selector)
    except (SelectorSyntaxError, ValueError) as e:
        logger.debug(f'Invalid selector {selector}: {e}')
        return []


def select_one(soup, selector):
    found = select_all(soup, selector)
    return found[0] if found else None


def css_attr(tag, attr, value):
    if IDENT.fullmatch(value):
        return f'{tag}[{attr}={value}]'
    escaped = value.replace('\\', '\\\\').replace('"', '\\"')
    return f'{tag}[{attr}="{escaped}"]'


def id_selector(value):
    if IDENT.fullmatch(value):
        return f'#{value}'
    escaped = value.replace('\\', '\\\\').replace('"', '\\"')
    return f'[id="{escaped}"]'


def dom_path_selector(dom_path, tag):
    """
        html > :nth-child(2) > ... > input:nth-child(4)
    """
    if not dom_path:
        return 'html'
    parts = ['html']
    for n, index in enumerate(dom_path):
        last = n == len(dom_path) - 1
        parts.append(f'{tag if last else ""}:nth-child({index + 1})')
    return ' > '.join(parts)


def attribute_selectors(tag, attributes):
    """
        selectors derivable from the element's own attributes,
        strongest first
    """
    selectors = []
    if attributes.get('id'):
        selectors.append(id_selector(attributes['id']))
    if attributes.get('name'):
        selectors.append(css_attr(tag, 'name', attributes['name']))
    if attributes.get('aria-label'):
        selectors.append(css_attr(tag, 'aria-label',
                                  attributes['aria-label']))
    classes = attributes.get('class', '').split()
    if classes and all(IDENT.fullmatch(i) for i in classes):
        selectors.append(tag + ''.join(f'.{i}' for i in classes))
    if attributes.get('type') and attributes['type'] not in SKIPPED_TYPES:
        selectors.append(css_attr(tag, 'type', attributes['type']))
    if attributes.get('placeholder'):
        selectors.append(css_attr(tag, 'placeholder',
                                  attributes['placeholder']))
    if tag == 'a' and attributes.get('href'):
        selectors.append(css_attr(tag, 'href', attributes['href']))
    return selectors


def element_attributes(element):
    attributes = {}
    for key, value in element.attrs.items():
        if isinstance(value, list):
            value = ' '.join(value)
        attributes[key] = '' if value is None else str(value)
    return attributes


def element_dom_path(element):
    path = []
    node = element
    while node.parent is not None and node.parent.name != '[document]':
        siblings = [i for i in node.parent.children
                    if getattr(i, 'name', None)]
        path.insert(0, next(n for n, i in enumerate(siblings)
                            if i is node))
        node = node.parent
    return tuple(path)


def normalized_text(element, limit=80):
    return ' '.join(element.get_text(' ', strip=True).split())[:limit]


def select_options(element):
    if element.name != 'select':
        return ()
    return tuple(
        SelectOption(value=i.get('value', i.get_text(strip=True)),
                     text=i.get_text(strip=True),
                     selected=i.has_attr('selected'))
        for i in element.find_all('option')
    )


def _only(found, element):
    return len(found) == 1 and found[0] is element


def describe_element(soup, element, element_hash='pending'):
    """
        InteractedElement for a live node; only selectors that are
        unique in this DOM are offered.
    """
    attributes = element_attributes(element)
    unique = [i for i in attribute_selectors(element.name, attributes)
              if _only(select_all(soup, i), element)]
    dom_path = element_dom_path(element)
    path_selector = dom_path_selector(dom_path, element.name)
    return InteractedElement(
        element_hash=element_hash,
        tag=element.name,
        attributes=attributes,
        dom_path=dom_path,
        css_selector=unique[0] if unique else path_selector,
        alternates=tuple(unique[1:]),
        text=normalized_text(element),
        parent_tag=element.parent.name if element.parent else '',
        options=select_options(element),
    )


# extraction projections
def listing_rows(soup):
    rows = []
    for card in soup.select('li.listing-card'):
        fields = [normalized_text(i) for i in
                  card.select('.title, .price, .category, .color')]
        link = card.select_one('a[href]')
        if link:
            fields.append(link['href'])
        rows.append(' | '.join(fields))
    return rows


def project(soup, goal):
    """
        deterministic extraction: the goal keywords choose a projection
    """
    goal = (goal or '').lower()
    if 'comment' in goal:
        return '\n'.join(normalized_text(i, limit=500)
                         for i in soup.select('li.comment'))
    if any(i in goal for i in ('listing', 'result', 'item')) and \
            soup.select('li.listing-card'):
        return '\n'.join(listing_rows(soup))
    article = soup.select_one('article')
    if article is not None:
        return '\n'.join(normalized_text(i, limit=500)
                         for i in article.find_all(recursive=False))
    main = soup.select_one('main') or soup.body or soup
    return normalized_text(main, limit=2000)
