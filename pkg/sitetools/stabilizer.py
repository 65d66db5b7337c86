import hashlib
import json
import logging
import re

from typing import Optional
from urllib.parse import urlsplit

from pydantic import Field, model_validator

from . import settings as app_settings
from . dom import attribute_selectors, dom_path_selector
from . exceptions import WhollyUnstable
from . trace_model import ExecutionTrace, FrozenModel


logger = logging.getLogger(__name__)

HASHED_ATTRIBUTES = ('id', 'name', 'type', 'aria-label', 'placeholder')


class StableLocator(FrozenModel):
    element_hash: str
    primary: str
    alternates: tuple[str, ...] = ()
    stability_score: float = Field(ge=0, le=1)
    tag: str = ''

    @model_validator(mode='after')
    def distinct_selectors(self):
        if self.primary in self.alternates:
            raise ValueError('primary selector repeated in alternates')
        if len(set(self.alternates)) != len(self.alternates):
            raise ValueError('alternates must be duplicate-free')
        return self

    @property
    def selectors(self):
        return (self.primary, ) + self.alternates


class LocatorEntry(FrozenModel):
    step: int
    action: int
    locator: StableLocator


class StabilizedTrace(FrozenModel):
    base: ExecutionTrace
    entries: tuple[LocatorEntry, ...] = ()
    unstable_actions: tuple[tuple[int, int], ...] = ()

    def locator_for(self, step, action) -> Optional[StableLocator]:
        for i in self.entries:
            if (i.step, i.action) == (step, action):
                return i.locator
        return None

    @property
    def locators(self):
        return {(i.step, i.action): i.locator for i in self.entries}

    @property
    def unstable_segments(self):
        """
            inclusive step-index ranges holding unstable actions
        """
        segments = []
        for step in sorted({i[0] for i in self.unstable_actions}):
            if segments and segments[-1][1] == step - 1:
                segments[-1] = (segments[-1][0], step)
            else:
                segments.append((step, step))
        return segments


def compute_element_hash(element):
    attributes = {}
    for key in HASHED_ATTRIBUTES:
        if element.attributes.get(key):
            attributes[key] = element.attributes[key]
    if element.attributes.get('href'):
        attributes['href-path'] = urlsplit(element.attributes['href']).path
    content = [element.tag.lower(),
               sorted(attributes.items()),
               ' '.join(element.text.split()).lower(),
               element.parent_tag.lower()]
    digest = hashlib.sha256(
        json.dumps(content, sort_keys=True).encode('utf-8')
    )
    return digest.hexdigest()[:20]


def selector_class(selector):
    if re.fullmatch(r'#[A-Za-z_][\w-]*', selector) or \
            selector.startswith('[id='):
        return 'id'
    if '[name=' in selector:
        return 'name'
    if '[aria-label=' in selector:
        return 'aria-label'
    if selector == 'html' or selector.startswith('html >'):
        return 'dom_path'
    return 'attribute'


def rank_selectors(selectors, scores, distrusted=frozenset()):
    unique = list(dict.fromkeys(i for i in selectors if i))
    return sorted(unique,
                  key=lambda i: (i in distrusted,
                                 -scores[selector_class(i)],
                                 len(i),
                                 i))


def element_selectors(element):
    candidates = [element.css_selector, *element.alternates]
    anchors = {k: v for k, v in element.attributes.items()
               if k in ('id', 'name', 'aria-label')}
    candidates.extend(attribute_selectors(element.tag, anchors))
    candidates.append(dom_path_selector(element.dom_path, element.tag))
    return candidates


def stabilize_trace(trace, distrusted=frozenset(), config=None):
    config = config or app_settings.get('SITETOOLS_STABILIZER')
    scores = config['scores']
    depth = config['unstable_depth']
    entries, unstable, ui_actions = [], [], 0
    for si, ai, action in trace.actions():
        if not action.is_ui:
            continue
        ui_actions += 1
        element = trace.steps[si].element_for(ai)
        ranked = rank_selectors(element_selectors(element), scores,
                                distrusted)
        anchored = [i for i in ranked if selector_class(i) != 'dom_path']
        if not anchored and len(element.dom_path) > depth:
            logger.warning(f'Unstable element at step {si}, '
                           f'action {ai}: {ranked}')
            unstable.append((si, ai))
            continue
        entries.append(LocatorEntry(
            step=si, action=ai,
            locator=StableLocator(
                element_hash=element.element_hash,
                primary=ranked[0],
                alternates=tuple(ranked[1:]),
                stability_score=scores[selector_class(ranked[0])],
                tag=element.tag
            )
        ))
    if ui_actions and not entries:
        raise WhollyUnstable(f'all {ui_actions} UI actions are unstable')
    logger.debug(f'Stabilized {trace.candidate_name}: {len(entries)} '
                 f'locators, {len(unstable)} unstable')
    return StabilizedTrace(base=trace,
                           entries=tuple(entries),
                           unstable_actions=tuple(unstable))
