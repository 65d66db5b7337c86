"""
    Second generation pass: a run of UI interactions whose only effect
    is a GET navigation becomes one templated URL navigation, kept only
    when replaying both scripts gives the same extraction output.
"""
import logging
import re

from typing import NamedTuple, Optional
from urllib.parse import unquote_plus, urlsplit

from pydantic import Field, model_validator

from . exceptions import BackendError, BackendUnavailable
from . executor import run_script
from . synthesizer import (ActionScript,
                          Interaction,
                          Navigation,
                          ordered_params,
                          url_params)
from . trace_model import FrozenModel
from . utils import (join_template,
                     normalize_items,
                     placeholders,
                     render_url,
                     same_url,
                     split_url)


logger = logging.getLogger(__name__)

NUMERIC = re.compile(r'\d+')


class UrlTemplate(FrozenModel):
    origin: str = ''
    base_path: str
    query_params: tuple[tuple[str, str], ...] = ()
    # param -> trace step index where its value was observed
    evidence: dict[str, int] = Field(default_factory=dict)

    @model_validator(mode='after')
    def evidenced(self):
        for name in placeholders(self.url):
            if name not in self.evidence:
                raise ValueError(f'{{{name}}} has no evidence')
        return self

    @property
    def url(self):
        return join_template(f'{self.origin}{self.base_path}',
                             list(self.query_params))

    @property
    def params(self):
        return set(placeholders(self.url))

    def render(self, bindings):
        return render_url(self.url, bindings)


class InferredPromotion(NamedTuple):
    # inclusive script step range
    start: int
    end: int
    template: UrlTemplate


def _url_after(trace, si):
    if si + 1 < len(trace.steps):
        return trace.steps[si + 1].url
    return None


def interaction_runs(script, trace):
    """
        (start, end, pre_url, post_url) for every contiguous run of
        Interaction steps whose last step changed the page URL
    """
    runs = []
    start = None
    for index, step in enumerate(script.steps):
        if not isinstance(step, Interaction) or step.trace_ref is None:
            start = None
            continue
        if start is None:
            start = index
        pre = trace.steps[script.steps[start].trace_ref[0]].url
        post = _url_after(trace, step.trace_ref[0])
        # only the last action of a trace step can move the page
        last = step.trace_ref[1] == len(trace.steps[step.trace_ref[0]]
                                        .actions) - 1
        if post and last and not same_url(pre, post):
            runs.append((start, index, pre, post))
            start = None
    return runs


def _name_score(name, key):
    name, key = name.lower(), key.lower()
    if name == key:
        return 2
    if name in key or key in name:
        return 1
    return 0


def _binding_for(key, value, bindings):
    """
        binding name explaining a URL value; ambiguity answers None
    """
    value = unquote_plus(value)
    matches = [i for i, v in bindings.items() if str(v) == value]
    if not matches:
        return None
    if len(matches) == 1:
        return matches[0]
    ranked = sorted(((_name_score(i, key), i) for i in matches),
                    reverse=True)
    if ranked[0][0] == ranked[1][0]:
        logger.warning(f'{key}={value} matches {matches} equally')
        raise LookupError(key)
    return ranked[0][1]


def _side_effects(trace, first_ref, last_ref):
    for si, ai, action in trace.actions():
        if first_ref <= (si, ai) <= last_ref and \
                action.http_method not in (None, 'GET'):
            return True
    return False


def _template_path(path, pre_path, path_names):
    """
        segments explained by a URL-sourced binding become placeholders;
        an unexplained resource id the previous page did not carry
        answers None
    """
    pre_segments = set(pre_path.split('/'))
    segments, names = [], []
    previous = ''
    for segment in path.split('/'):
        name = _binding_for(previous, segment, path_names) \
            if segment else None
        if name is not None:
            segments.append(f'{{{name}}}')
            names.append(name)
        elif NUMERIC.fullmatch(segment) and segment not in pre_segments:
            logger.warning(f'{path} adds the resource id {segment}')
            return None, names
        else:
            segments.append(segment)
        previous = segment
    return '/'.join(segments) or '/', names


def _template_for(trace, pre, post, bindings):
    pre_base, pre_pairs = split_url(pre)
    post_base, post_pairs = split_url(post)
    pre_parts, post_parts = urlsplit(pre), urlsplit(post)
    path_names = {i: bindings[i] for i in url_params(trace, bindings)}
    query, evidence = [], {}
    try:
        base_path, names = _template_path(post_parts.path or '/',
                                          pre_parts.path, path_names)
        if base_path is None:
            return None
        for name in names:
            evidence[name] = trace.locate(str(bindings[name]))[0]
        for key, value in post_pairs:
            name = _binding_for(key, value, bindings) if value else None
            if name is not None:
                query.append((key, f'{{{name}}}'))
                evidence[name] = trace.locate(str(bindings[name]))[0]
            elif (key, value) in pre_pairs or value == '':
                query.append((key, value))
            else:
                logger.warning(f'{key}={value} of {post} is unexplained')
                return None
    except LookupError:
        return None
    return UrlTemplate(origin=f'{post_parts.scheme}://{post_parts.netloc}'
                       if post_parts.scheme else '',
                       base_path=base_path,
                       query_params=tuple(query),
                       evidence=evidence)


def infer_url_template(script, stab, bindings=None) -> Optional[
        InferredPromotion]:
    trace = stab.base
    if bindings is None:
        bindings = dict(trace.param_bindings)
    runs = interaction_runs(script, trace)
    if not runs:
        return None
    start, end, pre, post = max(runs, key=lambda i: (i[1] - i[0], -i[0]))
    if _side_effects(trace, script.steps[start].trace_ref,
                     script.steps[end].trace_ref):
        logger.info(f'Run {start}-{end} of {trace.candidate_name} '
                    'crossed a mutating request')
        return None
    template = _template_for(trace, pre, post, bindings)
    if template is None:
        return None
    run_params = set(ordered_params(script.steps[start:end + 1]))
    if not run_params <= template.params:
        logger.warning(f'{sorted(run_params - template.params)} do not '
                       f'reach {template.url}')
        return None
    if not same_url(template.render(bindings), post):
        logger.warning(f'{template.url} does not reproduce {post}')
        return None
    logger.debug(f'Inferred {template.url} for steps {start}-{end}')
    return InferredPromotion(start, end, template)


def _equivalent(a, b):
    if not (a.ok and b.ok):
        return False
    if not a.outputs and not b.outputs:
        return same_url(a.final_url, b.final_url)
    keys = set(a.outputs) | set(b.outputs)
    return all(normalize_items(a.outputs.get(i)) ==
               normalize_items(b.outputs.get(i)) for i in keys)


def promote_script(script, inferred, env, bindings, reasoner=None):
    """
        env is a zero-argument factory of identically seeded sessions
    """
    if inferred is None:
        return script
    start, end, template = inferred
    if start > 0 and isinstance(script.steps[start - 1], Navigation) and \
            set(script.steps[start - 1].placeholders) <= template.params:
        start -= 1
    navigation = Navigation(
        url_template=template.url,
        description=f'Open {template.base_path} with the form values '
                    'in the query string',
        trace_ref=script.steps[inferred.start].trace_ref
    )
    steps = script.steps[:start] + (navigation, ) + script.steps[end + 1:]
    promoted = ActionScript(steps=steps, params=ordered_params(steps))
    if set(promoted.params) != set(script.params):
        logger.warning('Promotion would change the parameters '
                       f'{script.params} -> {promoted.params}')
        return script
    if promoted.step_count >= script.step_count:
        logger.info(f'Promotion to {template.url} saves no step')
        return script
    if env is None:
        logger.warning('No environment to replay the promotion on')
        return script
    try:
        original = run_script(script, bindings, env(), reasoner)
        candidate = run_script(promoted, bindings, env(), reasoner)
    except (BackendUnavailable, BackendError) as e:
        logger.warning(f'Promotion refused, replay impossible: {e}')
        return script
    if not _equivalent(original, candidate):
        logger.warning(f'Promotion to {template.url} refused: outputs '
                       'differ from the UI path')
        return script
    logger.info(f'Promoted steps {start}-{end} to {template.url} '
                f'({script.step_count} -> {promoted.step_count} steps)')
    return promoted
