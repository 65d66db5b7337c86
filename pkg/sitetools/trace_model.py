"""
    Canonical trace (.trace.json) and candidate (.candidates.json) formats.

    Trace file:
        {"candidate": str,
         "steps": [{"url", "title", "agent_brain": {...},
                    "actions": [{"kind", "payload", "success", "extracted",
                                 "http_method"}],
                    "interacted_elements": [...],
                    "screenshot": ignored}],
         "bindings": {param: literal}}

    Candidate file: Listing-style {"tools": [{"name", "start_url",
    "description", "elements": [{"type", "purpose", "options"?}]}]}
"""
import json
import logging
import re

from typing import Any, Literal, Optional
from urllib.parse import unquote_plus, urlsplit

from pydantic import (BaseModel,
                      ConfigDict,
                      Field,
                      ValidationError,
                      field_validator,
                      model_validator)

from . exceptions import (AlignmentError,
                          DuplicateName,
                          MalformedCandidates,
                          MalformedTrace)


logger = logging.getLogger(__name__)

UI_ACTIONS = ('click_element', 'input_text', 'select_change', 'key_press')

PAYLOAD_KEYS = {
    'go_to_url': ({'url'}, set()),
    'click_element': (set(), set()),
    'input_text': ({'text'}, set()),
    'select_change': ({'selected_text'}, set()),
    'key_press': ({'key'}, set()),
    'scroll': (set(), {'dx', 'dy'}),
    'extract_content': ({'goal'}, {'output'}),
    'wait': ({'seconds'}, set()),
}


def is_absolute_url(url):
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return bool(parts.scheme and parts.netloc)


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True,
                              extra='ignore',
                              populate_by_name=True)


class ElementHint(FrozenModel):
    type: Literal['input', 'select', 'button', 'link', 'textarea']
    purpose: str = ''
    options: Optional[tuple[str, ...]] = None

    @model_validator(mode='after')
    def select_options(self):
        if self.type == 'select' and self.options is not None \
                and not self.options:
            raise ValueError('select hint options must not be empty')
        return self


class ToolCandidate(FrozenModel):
    name: str = Field(min_length=1)
    start_url: str
    description: str = ''
    elements: tuple[ElementHint, ...] = ()

    @field_validator('start_url')
    @classmethod
    def absolute_start_url(cls, value):
        if not is_absolute_url(value):
            raise ValueError(f'{value} is not an absolute URL')
        return value

    def hints(self, kind):
        return [i for i in self.elements if i.type == kind]


class AgentBrain(FrozenModel):
    evaluation_previous_goal: str = ''
    memory: str = ''
    next_goal: str = ''


class ActionRecord(FrozenModel):
    kind: Literal['go_to_url', 'click_element', 'input_text',
                  'select_change', 'key_press', 'scroll',
                  'extract_content', 'wait']
    payload: dict[str, Any] = Field(default_factory=dict)
    success: bool = True
    extracted: Optional[str] = None
    # method of the request this action caused, if any
    http_method: Optional[str] = None

    @model_validator(mode='after')
    def payload_matches_kind(self):
        required, optional = PAYLOAD_KEYS[self.kind]
        keys = set(self.payload)
        missing = required - keys
        if missing:
            raise ValueError(f'{self.kind} payload misses {sorted(missing)}')
        unknown = keys - required - optional
        if unknown:
            raise ValueError(f'{self.kind} payload has unexpected '
                             f'{sorted(unknown)}')
        if self.kind == 'go_to_url' and \
                not is_absolute_url(self.payload['url']):
            raise ValueError(f"{self.payload['url']} is not a parseable URL")
        return self

    @property
    def is_ui(self):
        return self.kind in UI_ACTIONS

    def literals(self):
        return [str(v) for v in self.payload.values()
                if isinstance(v, (str, int, float))]


class SelectOption(FrozenModel):
    value: str
    text: str
    selected: bool = False


class InteractedElement(FrozenModel):
    element_hash: str = Field(min_length=1)
    tag: str = Field(min_length=1)
    attributes: dict[str, str] = Field(default_factory=dict)
    dom_path: tuple[int, ...] = ()
    css_selector: str = ''
    alternates: tuple[str, ...] = ()
    bounding_box: Optional[tuple[float, float, float, float]] = None
    text: str = ''
    parent_tag: str = ''
    options: tuple[SelectOption, ...] = ()

    @field_validator('dom_path')
    @classmethod
    def nonnegative_path(cls, value):
        if any(i < 0 for i in value):
            raise ValueError('dom_path indices must be nonnegative')
        return value


class TraceStep(FrozenModel):
    url: str
    title: str = ''
    brain: AgentBrain = Field(default_factory=AgentBrain,
                              alias='agent_brain')
    actions: tuple[ActionRecord, ...] = ()
    interacted: tuple[InteractedElement, ...] = Field(
        default=(), alias='interacted_elements')

    @property
    def ui_count(self):
        return sum(1 for i in self.actions if i.is_ui)

    def element_for(self, action_index):
        """
            interacted elements are aligned to UI actions only
        """
        if not self.actions[action_index].is_ui:
            return None
        position = sum(1 for i in self.actions[:action_index] if i.is_ui)
        return self.interacted[position]


class ExecutionTrace(FrozenModel):
    candidate_name: str = Field(default='', alias='candidate')
    steps: tuple[TraceStep, ...] = Field(min_length=1)
    param_bindings: dict[str, str] = Field(default_factory=dict,
                                           alias='bindings')

    def actions(self):
        for si, step in enumerate(self.steps):
            for ai, action in enumerate(step.actions):
                yield si, ai, action

    def locate(self, literal):
        """
            first (step index, where) in which a literal was observed
        """
        for si, step in enumerate(self.steps):
            for action in step.actions:
                if literal in action.literals():
                    return si, 'payload'
                url = action.payload.get('url', '')
                if literal in url or literal in unquote_plus(url):
                    return si, 'url'
            if literal in step.url or literal in unquote_plus(step.url):
                return si, 'url'
        return None


def check_alignment(trace):
    for si, step in enumerate(trace.steps):
        if len(step.interacted) != step.ui_count:
            raise AlignmentError(
                f'step {si}: {step.ui_count} UI actions but '
                f'{len(step.interacted)} interacted elements'
            )


def check_bindings(trace):
    for name, value in trace.param_bindings.items():
        if trace.locate(value) is None:
            raise MalformedTrace(f'bindings.{name}',
                                 f'{value!r} does not occur in the trace')


def _error_position(error):
    return '.'.join(str(i) for i in error['loc']) or '$'


def _loads(raw, exc_factory):
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = raw.decode('utf-8')
        except UnicodeDecodeError as e:
            raise exc_factory(f'byte {e.start}', 'not UTF-8')
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise exc_factory(f'{e.lineno}:{e.colno}', e.msg)


def parse_trace(raw):
    data = _loads(raw, MalformedTrace)
    if not isinstance(data, dict):
        raise MalformedTrace('$', 'top level must be an object')
    try:
        trace = ExecutionTrace.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise MalformedTrace(_error_position(first), first['msg'])
    check_alignment(trace)
    check_bindings(trace)
    logger.debug(f'Parsed trace of {trace.candidate_name}: '
                 f'{len(trace.steps)} steps')
    return trace


def serialize_trace(trace):
    data = trace.model_dump(mode='json', by_alias=True)
    return json.dumps(data, indent=2, sort_keys=True).encode('utf-8')


def parse_candidates(raw):
    data = _loads(raw, lambda pos, reason: MalformedCandidates(
        f'{pos}: {reason}'))
    if not isinstance(data, dict) or not isinstance(data.get('tools'), list):
        raise MalformedCandidates('top-level "tools" array is required')
    candidates, seen = [], set()
    for n, entry in enumerate(data['tools']):
        try:
            candidate = ToolCandidate.model_validate(entry)
        except ValidationError as e:
            first = e.errors()[0]
            raise MalformedCandidates(
                f'tools.{n}.{_error_position(first)}: {first["msg"]}')
        if candidate.name in seen:
            raise DuplicateName(candidate.name)
        seen.add(candidate.name)
        candidates.append(candidate)
    return candidates


def serialize_candidates(candidates):
    data = {'tools': [i.model_dump(mode='json', exclude_none=True)
                      for i in candidates]}
    return json.dumps(data, indent=2, sort_keys=True).encode('utf-8')


def identifier(text, default='value'):
    slug = re.sub(r'[^0-9a-zA-Z]+', '_', text).strip('_').lower()
    if not slug:
        return default
    if slug[0].isdigit():
        slug = f'{default}_{slug}'
    return slug
