import json
import re

from urllib.parse import (parse_qsl,
                          quote,
                          quote_plus,
                          unquote_plus,
                          urlencode,
                          urlsplit)

from django.utils.module_loading import import_string
from django.utils.safestring import mark_safe

from . exceptions import UnboundPlaceholder


PLACEHOLDER = re.compile(r'\{([A-Za-z_][A-Za-z0-9_]*)\}')


def placeholders(text):
    return PLACEHOLDER.findall(text or '')


def whole_placeholder(text):
    """
        returns the param name if text is exactly one "{param}"
    """
    match = PLACEHOLDER.fullmatch(text or '')
    return match.group(1) if match else None


def render_text(template, bindings):
    def _sub(match):
        name = match.group(1)
        if bindings.get(name) is None:
            raise UnboundPlaceholder(name)
        return str(bindings[name])
    return PLACEHOLDER.sub(_sub, template)


def split_url(url):
    """
        (base, [(key, value), ...]) with decoded query values
    """
    parts = urlsplit(url)
    base = f'{parts.scheme}://{parts.netloc}{parts.path}' \
        if parts.scheme else parts.path
    return base, parse_qsl(parts.query, keep_blank_values=True)


def normalize_url(url):
    """
        percent-decoded and '+'-as-space form for comparisons
    """
    base, query = split_url(url)
    return unquote_plus(base), tuple(query)


def same_url(a, b):
    return normalize_url(a) == normalize_url(b)


def join_template(base, pairs):
    """
        pairs are (key, literal) or (key, "{param}") entries
    """
    query = []
    for key, value in pairs:
        if whole_placeholder(value):
            query.append(f'{quote_plus(key)}={value}')
        else:
            query.append(urlencode([(key, value)]))
    return f'{base}?{"&".join(query)}' if query else base


def render_url(template, bindings):
    """
        Placeholders in the path are mandatory, query pairs whose
        placeholder has no value are dropped.
    """
    base, _, query = template.partition('?')

    def _path_sub(match):
        name = match.group(1)
        if bindings.get(name) in (None, ''):
            raise UnboundPlaceholder(name)
        return quote(str(bindings[name]), safe='')

    base = PLACEHOLDER.sub(_path_sub, base)
    pairs = []
    for item in filter(None, query.split('&')):
        key, _, value = item.partition('=')
        key = unquote_plus(key)
        name = whole_placeholder(value)
        if name:
            if bindings.get(name) in (None, ''):
                continue
            pairs.append((key, str(bindings[name])))
        else:
            pairs.append((key, unquote_plus(value)))
    return f'{base}?{urlencode(pairs)}' if pairs else base


def normalize_items(text):
    return [i.strip() for i in (text or '').splitlines() if i.strip()]


def html_json_preview(value):
    msg = json.loads(value or '{}')
    dumps = json.dumps(msg, indent=2)
    return mark_safe(dumps.replace('\n', '<br>').replace(' ', '&nbsp;'))


def template_url(url, bindings, path_names=None):
    """
        query values equal to a binding become placeholders; path
        segments only for the bindings named in path_names (all of
        them when omitted)
    """
    by_value = {}
    for name, value in bindings.items():
        by_value.setdefault(str(value), name)
    in_path = {str(v): k for k, v in reversed(bindings.items())
               if path_names is None or k in path_names}
    parts = urlsplit(url)
    segments = [f'{{{in_path[unquote_plus(i)]}}}'
                if i and unquote_plus(i) in in_path else i
                for i in parts.path.split('/')]
    base = f'{parts.scheme}://{parts.netloc}{"/".join(segments)}'
    pairs = [(k, f'{{{by_value[v]}}}' if v in by_value else v)
             for k, v in parse_qsl(parts.query, keep_blank_values=True)]
    return join_template(base, pairs)


def from_setting(conf, **overrides):
    """
        {'function': dotted.path, 'kwargs': {...}} -> called object
    """
    kwargs = dict(conf.get('kwargs', {}))
    kwargs.update(overrides)
    return import_string(conf['function'])(**kwargs)
