"""
    First generation pass: classify every recorded action, turn the
    trace into an ordered action script, parameterize literals and
    extract the test inputs the tool is validated against.
"""
import enum
import logging
import re

from typing import Annotated, Literal, Optional, Union
from urllib.parse import urlsplit

from pydantic import Field, model_validator

from . import settings as app_settings
from . exceptions import EmptyScript, UnboundPlaceholder
from . stabilizer import StableLocator
from . trace_model import FrozenModel, identifier
from . utils import (placeholders,
                     same_url,
                     template_url,
                     whole_placeholder)


logger = logging.getLogger(__name__)

ELEMENT_KINDS = ('click', 'input', 'select_change', 'key_press')

INTERACTION_KIND = {
    'click_element': 'click',
    'input_text': 'input',
    'select_change': 'select_change',
    'key_press': 'key_press',
    'scroll': 'scroll',
    'wait': 'wait',
}


class StepKind(str, enum.Enum):
    NAVIGATION = 'navigation'
    EXTRACTION = 'extraction'
    INTERACTION = 'interaction'
    AGENTIC = 'agentic'
    SKIP = 'skip'


class StepBase(FrozenModel):
    description: str = ''
    # (trace step, action) the step was generated from
    trace_ref: Optional[tuple[int, int]] = Field(default=None, exclude=True)

    def templates(self):
        return []

    @property
    def placeholders(self):
        names = []
        for text in self.templates():
            names.extend(placeholders(text))
        return names


class Navigation(StepBase):
    type: Literal['navigation'] = 'navigation'
    url_template: str

    def templates(self):
        return [self.url_template]


class Interaction(StepBase):
    type: Literal['interaction'] = 'interaction'
    kind: Literal['click', 'input', 'select_change', 'key_press',
                  'scroll', 'wait']
    locator: Optional[StableLocator] = None
    value: Optional[str] = None
    selected_text: Optional[str] = None
    key: Optional[str] = None
    scroll_x: Optional[int] = None
    scroll_y: Optional[int] = None
    seconds: Optional[float] = None
    recovery_hint: str = ''

    @model_validator(mode='after')
    def element_kinds_have_locator(self):
        if self.kind in ELEMENT_KINDS and self.locator is None:
            raise ValueError(f'{self.kind} interaction needs a locator')
        return self

    def templates(self):
        return [i for i in (self.value, self.selected_text, self.key) if i]


class Extraction(StepBase):
    type: Literal['extraction'] = 'extraction'
    goal: str
    output: str


class Agentic(StepBase):
    type: Literal['agentic'] = 'agentic'
    task: str
    max_steps: int = Field(ge=1, le=8)

    def templates(self):
        return [self.task]


Step = Annotated[Union[Navigation, Interaction, Extraction, Agentic],
                 Field(discriminator='type')]


class ActionScript(FrozenModel):
    steps: tuple[Step, ...] = Field(min_length=1)
    params: tuple[str, ...] = ()

    @model_validator(mode='after')
    def unique_params(self):
        if len(set(self.params)) != len(self.params):
            raise ValueError('params must be duplicate-free')
        return self

    @property
    def step_count(self):
        return len(self.steps)

    @property
    def agentic_count(self):
        return sum(1 for i in self.steps if isinstance(i, Agentic))

    @property
    def agentic_ratio(self):
        return self.agentic_count / self.step_count

    @property
    def extracts(self):
        return any(isinstance(i, Extraction) for i in self.steps)

    def placeholders(self):
        return ordered_params(self.steps)


class Expectation(FrozenModel):
    kind: Literal['completes', 'extraction_nonempty', 'url_matches']
    pattern: Optional[str] = None


class SuiteCase(FrozenModel):
    inputs: dict[str, Union[bool, int, float, str]]
    expectations: tuple[Expectation, ...] = (Expectation(kind='completes'),)


class TestSuite(FrozenModel):
    cases: tuple[SuiteCase, ...] = Field(min_length=1)

    __test__ = False


def ordered_params(steps):
    names = []
    for step in steps:
        for name in step.placeholders:
            if name not in names:
                names.append(name)
    return tuple(names)


def classify_action(record, locator=None, essential=False):
    """
        navigation -> extraction -> deterministic interaction when a
        locator exists -> agentic when essential -> skip
    """
    if not record.success:
        return StepKind.SKIP
    if record.kind == 'go_to_url':
        return StepKind.NAVIGATION
    if record.kind == 'extract_content':
        return StepKind.EXTRACTION
    if record.kind in ('scroll', 'wait'):
        return StepKind.INTERACTION
    if record.is_ui:
        if locator is not None:
            return StepKind.INTERACTION
        if essential:
            return StepKind.AGENTIC
    return StepKind.SKIP


def _option_value(element, literal):
    for option in element.options:
        if literal in (option.text, option.value):
            return option.value
    for option in element.options:
        if option.text.lower() == literal.lower():
            return option.value
    return None


def resolve_bindings(trace, candidate=None):
    """
        explicit bindings win; otherwise typed and selected literals
        become parameters named after their form fields
    """
    if trace.param_bindings:
        return dict(trace.param_bindings)
    bindings = {}
    for si, ai, action in trace.actions():
        if action.kind not in ('input_text', 'select_change'):
            continue
        element = trace.steps[si].element_for(ai)
        literal = action.payload.get('text',
                                     action.payload.get('selected_text'))
        if action.kind == 'select_change':
            literal = _option_value(element, literal) or literal
        name = identifier(element.attributes.get('name') or
                          element.attributes.get('id') or
                          f'param_{len(bindings) + 1}')
        while name in bindings:
            name = f'{name}_{len(bindings) + 1}'
        bindings[name] = literal
    logger.debug(f'Inferred bindings for {trace.candidate_name}: {bindings}')
    return bindings


def template_literal(literal, bindings, element=None):
    """
        exact binding match first, then select option text
        (case-insensitive) whose value is bound; never fuzzy
    """
    if literal is None:
        return None
    for name, value in bindings.items():
        if str(value) == literal:
            return f'{{{name}}}'
    if element is not None and element.options:
        value = _option_value(element, literal)
        for name, bound in bindings.items():
            if value is not None and str(bound) == value:
                return f'{{{name}}}'
    return literal


def _template_task(task, bindings):
    for name, value in sorted(bindings.items(),
                              key=lambda i: -len(str(i[1]))):
        value = str(value)
        if len(value) >= 3 and value in task:
            task = task.replace(value, f'{{{name}}}')
    return task


def _essential_positions(trace):
    """
        an action is essential if a later extraction or a later
        page-changing interaction depends on it
    """
    flat = list(trace.actions())
    essential = set()
    for n, (si, ai, action) in enumerate(flat):
        later = flat[n + 1:]
        if any(i[2].kind == 'extract_content' or
               (i[2].is_ui and i[2].http_method) for i in later):
            essential.add((si, ai))
    return essential


def _focus_clicks(trace):
    flat = [(si, ai, a) for si, ai, a in trace.actions() if a.is_ui]
    skipped = set()
    for (si, ai, action), nxt in zip(flat, flat[1:]):
        if action.kind != 'click_element' or nxt[2].kind != 'input_text':
            continue
        element = trace.steps[si].element_for(ai)
        following = trace.steps[nxt[0]].element_for(nxt[1])
        if element.tag in ('input', 'textarea') and \
                element.element_hash == following.element_hash:
            skipped.add((si, ai))
    return skipped


class _Hints:
    """
        hands out candidate element purposes in order, per hint type
    """
    def __init__(self, candidate):
        self.pending = {}
        for hint in (candidate.elements if candidate else ()):
            self.pending.setdefault(hint.type, []).append(hint.purpose)

    def take(self, *types):
        for kind in types:
            if self.pending.get(kind):
                return self.pending[kind].pop(0)
        return ''


HINT_TYPES = {
    ('input_text', 'input'): ('input', 'textarea'),
    ('input_text', 'textarea'): ('textarea', 'input'),
    ('select_change', 'select'): ('select', ),
    ('click_element', 'a'): ('link', 'button'),
    ('click_element', 'button'): ('button', 'link'),
}


def _label(element):
    attrs = element.attributes
    return (attrs.get('aria-label') or attrs.get('placeholder') or
            element.text or attrs.get('name') or attrs.get('id') or
            element.tag)


def _interaction(action, element, locator, bindings, hints):
    kind = INTERACTION_KIND[action.kind]
    payload = action.payload
    fields = {}
    if kind == 'input':
        fields['value'] = template_literal(str(payload['text']), bindings)
        verb = f'Type {fields["value"]} into'
    elif kind == 'select_change':
        fields['selected_text'] = template_literal(
            str(payload['selected_text']), bindings, element)
        verb = f'Choose {fields["selected_text"]} in'
    elif kind == 'key_press':
        fields['key'] = str(payload['key'])
        verb = f'Press {fields["key"]} on'
    elif kind == 'click':
        verb = 'Click'
    elif kind == 'scroll':
        fields.update(scroll_x=int(payload.get('dx', 0)),
                      scroll_y=int(payload.get('dy', 0)))
        return Interaction(kind=kind,
                           description='Scroll the page',
                           **fields)
    else:
        fields['seconds'] = float(payload['seconds'])
        return Interaction(kind=kind,
                           description=f'Wait {fields["seconds"]:g}s',
                           **fields)

    purpose = hints.take(*HINT_TYPES.get((action.kind, element.tag), ()))
    hint = f'{verb} the {_label(element)} {element.tag}'
    return Interaction(kind=kind,
                       locator=locator,
                       description=purpose or hint,
                       recovery_hint=hint,
                       **fields)


def url_params(trace, bindings):
    """
        bindings never typed or selected whose value is first seen in
        a URL; only these may stand for a path segment
    """
    typed = set()
    for si, ai, action in trace.actions():
        if action.kind not in ('input_text', 'select_change'):
            continue
        element = trace.steps[si].element_for(ai)
        literal = action.payload.get('text',
                                     action.payload.get('selected_text'))
        name = whole_placeholder(template_literal(literal, bindings,
                                                  element))
        if name:
            typed.add(name)
    names = set()
    for name, value in bindings.items():
        found = trace.locate(str(value))
        if name not in typed and found and found[1] == 'url':
            names.add(name)
    return names


def synthesize_script(stab, candidate=None, agentic_max_steps=None):
    trace = stab.base
    bindings = resolve_bindings(trace, candidate)
    max_steps = agentic_max_steps or \
        app_settings.get('SITETOOLS_EXECUTOR')['agentic_max_steps']
    max_steps = min(max(int(max_steps), 1), 8)
    path_names = url_params(trace, bindings)
    essential = _essential_positions(trace)
    focus_clicks = _focus_clicks(trace)
    hints = _Hints(candidate)

    steps = []
    for si, ai, action in trace.actions():
        ref = (si, ai)
        locator = stab.locator_for(si, ai)
        kind = classify_action(action, locator, ref in essential)
        if kind == StepKind.SKIP or ref in focus_clicks:
            logger.debug(f'Skipped {action.kind} at {ref}')
            continue
        trace_step = trace.steps[si]
        if kind == StepKind.NAVIGATION:
            url = action.payload['url']
            if same_url(url, trace_step.url):
                logger.debug(f'Elided navigation to current URL {url}')
                continue
            path = urlsplit(url).path or '/'
            url_template = template_url(url, bindings, path_names)
            steps.append(Navigation(url_template=url_template,
                                    description=f'Navigate to {path}',
                                    trace_ref=ref))
        elif kind == StepKind.EXTRACTION:
            goal = action.payload['goal']
            output = action.payload.get('output') or identifier(goal)
            steps.append(Extraction(goal=goal,
                                    output=output,
                                    description=f'Extract {goal}',
                                    trace_ref=ref))
        elif kind == StepKind.AGENTIC:
            element = trace_step.element_for(ai)
            task = trace_step.brain.next_goal or \
                f'{action.kind.replace("_", " ")} on the ' \
                f'{_label(element)} {element.tag}'
            steps.append(Agentic(
                task=_template_task(task, bindings),
                max_steps=max_steps,
                description=('No stable selector was found for the '
                             f'{element.tag}; a reasoner performs it'),
                trace_ref=ref
            ))
        else:
            element = trace_step.element_for(ai) if action.is_ui else None
            step = _interaction(action, element, locator, bindings, hints)
            steps.append(step.model_copy(update={'trace_ref': ref}))

    if not steps:
        raise EmptyScript(f'every action of {trace.candidate_name} '
                          'was skipped')
    params = ordered_params(steps)
    for name in params:
        if name not in bindings:
            raise UnboundPlaceholder(name)
    script = ActionScript(steps=tuple(steps), params=params)
    logger.info(f'Synthesized {trace.candidate_name}: '
                f'{script.step_count} steps, params {list(params)}')
    return script


def route_pattern(url):
    path = urlsplit(url).path or '/'
    return '^' + re.sub(r'\d+', r'\\d+', re.escape(path)) + '$'


def extract_test_inputs(trace, schema, script=None):
    """
        the demonstrated bindings, one case per enum option the
        demonstration did not exercise and one case changing every
        typed text value
    """
    bindings = resolve_bindings(trace)
    demo = {}
    for field in schema.fields:
        if field.name in bindings:
            demo[field.name] = field.coerce(bindings[field.name])
    expectations = [Expectation(kind='completes')]
    if script is None or script.extracts:
        expectations.append(Expectation(kind='extraction_nonempty'))
    expectations.append(Expectation(kind='url_matches',
                                    pattern=route_pattern(
                                        trace.steps[-1].url)))
    cases = [SuiteCase(inputs=demo, expectations=tuple(expectations))]
    for field in schema.fields:
        if field.value_type != 'enum':
            continue
        for option in field.options:
            if option == demo.get(field.name):
                continue
            cases.append(SuiteCase(inputs={**demo, field.name: option}))
    from_url = url_params(trace, bindings)
    typed = {i.name: f'{demo[i.name]} alt' for i in schema.fields
             if i.value_type == 'text' and demo.get(i.name) and
             i.name not in from_url}
    if typed:
        cases.append(SuiteCase(inputs={**demo, **typed}))
    return TestSuite(cases=tuple(cases))
