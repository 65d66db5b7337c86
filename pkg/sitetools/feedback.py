"""
    Structured feedback produced by failing executions.
"""
import enum
import logging
import re

from typing import Any

from pydantic import Field, model_validator

from . exceptions import (LocatorUnresolved,
                          NavigationFailed,
                          OptionNotFound,
                          PageBusy)
from . trace_model import FrozenModel
from . utils import split_url, whole_placeholder


logger = logging.getLogger(__name__)


class FeedbackKind(str, enum.Enum):
    SELECTOR_DRIFT = 'SelectorDrift'
    UNCOVERED_ENUM = 'UncoveredEnum'
    TIMEOUT = 'Timeout'
    SEMANTIC_MISMATCH = 'SemanticMismatch'
    REQUIREDNESS_MISMATCH = 'RequirednessMismatch'


DETAIL_KEYS = {
    FeedbackKind.SELECTOR_DRIFT: {'step', 'selectors'},
    FeedbackKind.UNCOVERED_ENUM: {'field', 'value'},
    FeedbackKind.TIMEOUT: {'step'},
    FeedbackKind.SEMANTIC_MISMATCH: {'reason'},
    FeedbackKind.REQUIREDNESS_MISMATCH: {'field', 'required'},
}


class FeedbackItem(FrozenModel):
    kind: FeedbackKind
    detail: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode='after')
    def detail_matches_kind(self):
        missing = DETAIL_KEYS[self.kind] - set(self.detail)
        if missing:
            raise ValueError(f'{self.kind.value} detail misses '
                             f'{sorted(missing)}')
        return self

    def __str__(self):
        return f'{self.kind.value}({self.detail})'


def selector_drift(step, selectors):
    return FeedbackItem(kind=FeedbackKind.SELECTOR_DRIFT,
                        detail={'step': step, 'selectors': list(selectors)})


def uncovered_enum(field, value):
    return FeedbackItem(kind=FeedbackKind.UNCOVERED_ENUM,
                        detail={'field': field, 'value': value})


def timeout(step):
    return FeedbackItem(kind=FeedbackKind.TIMEOUT, detail={'step': step})


def semantic_mismatch(reason, **detail):
    return FeedbackItem(kind=FeedbackKind.SEMANTIC_MISMATCH,
                        detail={'reason': reason, **detail})


def requiredness_mismatch(field, required):
    return FeedbackItem(kind=FeedbackKind.REQUIREDNESS_MISMATCH,
                        detail={'field': field, 'required': required})


def _names_field(selector, site_field):
    return re.search(rf'\[name="?{re.escape(site_field)}"?\]',
                     selector) is not None


def param_for_site_field(script, site_field):
    """
        the script parameter feeding a form field the site complained about
    """
    for step in script.steps:
        if step.type == 'navigation':
            for key, value in split_url(step.url_template)[1]:
                name = whole_placeholder(value)
                if key == site_field and name:
                    return name
        elif step.type == 'interaction' and step.locator is not None:
            name = whole_placeholder(step.value or step.selected_text)
            if name and any(_names_field(i, site_field)
                            for i in step.locator.selectors):
                return name
    if site_field in script.params:
        return site_field
    return None


def classify_step_error(error, step_index, step=None, inputs=None,
                        script=None):
    """
        FeedbackItem for a step error, None when it cannot be classified
    """
    inputs = inputs or {}
    if isinstance(error, PageBusy):
        return timeout(step_index)
    if isinstance(error, LocatorUnresolved):
        if error.busy:
            return timeout(step_index)
        return selector_drift(step_index, error.selectors)
    if isinstance(error, OptionNotFound) and step is not None:
        name = whole_placeholder(getattr(step, 'selected_text', None))
        if name:
            return uncovered_enum(name, inputs.get(name))
        return selector_drift(step_index, [error.selector])
    if isinstance(error, NavigationFailed) and error.field_errors \
            and script is not None:
        for site_field, message in sorted(error.field_errors.items()):
            name = param_for_site_field(script, site_field)
            if name is None:
                continue
            if 'required' in message.lower():
                return requiredness_mismatch(name, True)
            return uncovered_enum(name, inputs.get(name))
    logger.debug(f'Unclassified step error at {step_index}: {error!r}')
    return None
