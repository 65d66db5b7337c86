"""
    Action script interpreter. Tools run as atomic actions: every step
    is executed strictly in order over one backend session and the
    first unrecoverable failure ends the run.
"""
import logging

from typing import NamedTuple, Optional

from pydantic import Field, model_validator

from . import settings as app_settings
from . exceptions import (AgenticBudgetExhausted,
                          BackendError,
                          BackendUnavailable,
                          FallbackExhausted,
                          InputInvalid,
                          LocatorUnresolved,
                          PageBusy,
                          ReasonerUnavailable,
                          StepError,
                          UnboundPlaceholder)
from . feedback import FeedbackItem, classify_step_error
from . schema import InputSchema, validate_input
from . synthesizer import Agentic, Extraction, Interaction, Navigation
from . tools import Tool
from . trace_model import FrozenModel
from . utils import PLACEHOLDER, render_url, whole_placeholder


logger = logging.getLogger(__name__)

STEP_ERRORS = (StepError, BackendError, BackendUnavailable,
               ReasonerUnavailable, UnboundPlaceholder)


class StepFailure(FrozenModel):
    step_index: int
    error: str
    message: str = ''
    selectors: tuple[str, ...] = ()
    feedback: Optional[FeedbackItem] = None


class ExecutionOutcome(FrozenModel):
    status: str = Field(pattern='^(success|failed)$')
    steps_executed: int = 0
    agentic_steps_executed: int = 0
    outputs: dict[str, str] = Field(default_factory=dict)
    failure: Optional[StepFailure] = None
    final_url: str = ''
    fallback: bool = False
    primitive_calls: int = 0

    @model_validator(mode='after')
    def consistent(self):
        if self.agentic_steps_executed > self.steps_executed:
            raise ValueError('more agentic steps than steps')
        if self.status == 'failed' and self.failure is None:
            raise ValueError('failed outcomes carry their failure')
        return self

    @property
    def ok(self):
        return self.status == 'success'


class StepResult(NamedTuple):
    output: Optional[tuple[str, str]] = None
    skipped: bool = False


def _config(config=None):
    return config or app_settings.get('SITETOOLS_EXECUTOR')


def render_value(template, bindings):
    """
        like render_text, unbound placeholders stay as they are
    """
    def _sub(match):
        value = bindings.get(match.group(1))
        return match.group(0) if value is None else _string(value)
    return PLACEHOLDER.sub(_sub, str(template))


def _string(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value)


def resolve_locator(locator, backend, retry_wait=0.5):
    """
        primary first, then alternates; a selector counts only when it
        finds an element of the recorded tag. One retry after a wait.
    """
    for attempt in range(2):
        for selector in locator.selectors:
            tag = backend.tag_of(selector)
            if tag and (not locator.tag or tag == locator.tag):
                if selector != locator.primary:
                    logger.info(f'Recovered {locator.primary} '
                                f'with alternate {selector}')
                return selector
        if attempt == 0:
            backend.wait(retry_wait)
    busy = getattr(backend, 'is_busy', lambda: False)()
    raise LocatorUnresolved(locator.selectors, busy=busy)


def run_command(command, backend, bindings):
    """
        one reasoner command; returns (output, text) for extractions
    """
    values = {k: render_value(v, bindings) if isinstance(v, str) else v
              for k, v in command.items()}
    action = values.get('action')
    try:
        if action == 'click':
            backend.click(values['selector'])
        elif action == 'input':
            backend.input(values['selector'], values['text'])
        elif action == 'select':
            backend.select(values['selector'], values['option'])
        elif action == 'press':
            backend.press(values['key'], values.get('selector'))
        elif action == 'navigate':
            backend.navigate(values['url'])
        elif action == 'scroll':
            backend.scroll(values.get('dx', 0), values.get('dy', 0))
        elif action == 'wait':
            backend.wait(float(values['seconds']))
        elif action == 'extract':
            goal = values['goal']
            return values.get('output') or 'result', backend.extract(goal)
        else:
            raise StepError(f'unknown reasoner command {action!r}')
    except KeyError as e:
        raise StepError(f'{action} command misses {e}')
    except (TypeError, ValueError) as e:
        raise StepError(f'{action} command is malformed: {e}')
    return None


def run_commands(commands, backend, bindings):
    outputs = {}
    for command in commands:
        logger.debug(f'Reasoner command {command}')
        result = run_command(command, backend, bindings)
        if result:
            outputs[result[0]] = result[1]
    return outputs


def _skippable(step, bindings):
    """
        input and select steps of optional parameters left empty
    """
    if step.kind not in ('input', 'select_change'):
        return False
    name = whole_placeholder(step.value if step.kind == 'input'
                             else step.selected_text)
    return name is not None and bindings.get(name) in (None, '')


def _agentic(step, bindings, backend, reasoner):
    if reasoner is None:
        raise ReasonerUnavailable(f'no reasoner for "{step.task}"')
    request = {
        'task': render_value(step.task, bindings),
        'max_steps': step.max_steps,
        'dom_snapshot': backend.dom_snapshot(),
        'current_url': backend.current_url(),
        'inputs': {k: _string(v) for k, v in bindings.items()},
        'hints': [step.description] if step.description else [],
    }
    commands = reasoner(request)
    if not commands:
        raise StepError(f'the reasoner had no plan for "{step.task}"')
    if len(commands) > step.max_steps:
        raise AgenticBudgetExhausted(
            f'{len(commands)} commands exceed max_steps {step.max_steps}')
    return run_commands(commands, backend, bindings)


def execute_step(step, bindings, backend, reasoner=None, config=None):
    config = _config(config)
    if isinstance(step, Navigation):
        backend.navigate(render_url(step.url_template, bindings))
    elif isinstance(step, Extraction):
        if getattr(backend, 'is_busy', lambda: False)():
            backend.wait(config['retry_wait'])
            if backend.is_busy():
                raise PageBusy(f'page still loading before "{step.goal}"')
        return StepResult(output=(step.output, backend.extract(step.goal)))
    elif isinstance(step, Agentic):
        outputs = _agentic(step, bindings, backend, reasoner)
        if outputs:
            return StepResult(output=next(iter(outputs.items())))
    elif isinstance(step, Interaction):
        if step.kind == 'wait':
            backend.wait(step.seconds)
        elif step.kind == 'scroll':
            backend.scroll(step.scroll_x or 0, step.scroll_y or 0)
        elif _skippable(step, bindings):
            logger.debug(f'Skipped "{step.description}", no value given')
            return StepResult(skipped=True)
        else:
            selector = resolve_locator(step.locator, backend,
                                       config['retry_wait'])
            if step.kind == 'click':
                backend.click(selector)
            elif step.kind == 'input':
                backend.input(selector, render_value(step.value, bindings))
            elif step.kind == 'select_change':
                backend.select(selector,
                               render_value(step.selected_text, bindings))
            else:
                backend.press(render_value(step.key, bindings), selector)
    return StepResult()


def _failure(error, index, step, bindings, script):
    feedback = classify_step_error(error, index, step, bindings, script)
    return StepFailure(step_index=index,
                       error=type(error).__name__,
                       message=str(error),
                       selectors=getattr(error, 'selectors', ()),
                       feedback=feedback)


def execute_tool(tool, inputs, backend, reasoner=None, fallback=False,
                 config=None):
    violations = validate_input(tool.input_schema, inputs)
    if violations:
        raise InputInvalid(violations)
    bindings = tool.input_schema.apply_defaults(inputs)
    return _run(tool, bindings, backend, reasoner, fallback, config)


def run_script(script, bindings, backend, reasoner=None, config=None):
    """
        executes a bare script with raw bindings, no schema involved
    """
    tool = Tool(name='script', start_url='', script=script,
                input_schema=InputSchema(static=True))
    return _run(tool, dict(bindings), backend, reasoner, False, config)


def _run(tool, bindings, backend, reasoner, fallback, config):
    steps = tool.script.steps
    executed = agentic = 0
    outputs = {}
    for index, step in enumerate(steps):
        executed += 1
        agentic += isinstance(step, Agentic)
        try:
            result = execute_step(step, bindings, backend, reasoner, config)
        except STEP_ERRORS as e:
            failure = _failure(e, index, step, bindings, tool.script)
            logger.debug(f'{tool.name} failed at step {index}: {e}')
            if fallback:
                try:
                    return agentic_fallback(tool, failure, backend, reasoner,
                                            inputs=bindings,
                                            outputs=outputs,
                                            config=config)
                except FallbackExhausted as fe:
                    logger.warning(f'Fallback for {tool.name} exhausted: '
                                   f'{fe}')
            return ExecutionOutcome(
                status='failed',
                steps_executed=executed,
                agentic_steps_executed=agentic,
                outputs=outputs,
                failure=failure,
                final_url=backend.current_url(),
                primitive_calls=getattr(backend, 'primitive_calls', 0)
            )
        if result.output:
            outputs[result.output[0]] = result.output[1]
    return ExecutionOutcome(
        status='success',
        steps_executed=executed,
        agentic_steps_executed=agentic,
        outputs=outputs,
        final_url=backend.current_url(),
        primitive_calls=getattr(backend, 'primitive_calls', 0)
    )


def agentic_fallback(tool, failure, backend, reasoner, inputs=None,
                     outputs=None, budget=None, config=None):
    """
        a reasoner-driven session resumes the tool's goal from the
        failing step, bounded by a global command budget
    """
    config = _config(config)
    budget = config['fallback_budget'] if budget is None else budget
    if reasoner is None:
        raise FallbackExhausted('no reasoner configured')
    if budget <= 0:
        raise FallbackExhausted('fallback budget is 0')
    bindings = dict(inputs or {})
    remaining = tool.script.steps[failure.step_index:]
    request = {
        'task': tool.description or tool.name,
        'max_steps': budget,
        'dom_snapshot': backend.dom_snapshot(),
        'current_url': backend.current_url(),
        'inputs': {k: _string(v) for k, v in bindings.items()},
        'hints': [getattr(i, 'recovery_hint', '') or i.description
                  for i in remaining],
        'failure': {'step': failure.step_index,
                    'error': failure.error,
                    'message': failure.message},
    }
    try:
        commands = reasoner(request)
    except ReasonerUnavailable as e:
        raise FallbackExhausted(f'reasoner unavailable: {e}')
    if not commands:
        raise FallbackExhausted('the reasoner had no plan')
    if len(commands) > budget:
        raise FallbackExhausted(f'{len(commands)} commands exceed the '
                                f'budget of {budget}')
    try:
        produced = run_commands(commands, backend, bindings)
    except STEP_ERRORS as e:
        raise FallbackExhausted(f'fallback command failed: {e}')
    steps = tool.script.step_count
    logger.info(f'{tool.name} completed by agentic fallback '
                f'from step {failure.step_index}')
    return ExecutionOutcome(
        status='success',
        steps_executed=steps,
        agentic_steps_executed=steps,
        outputs={**(outputs or {}), **produced},
        final_url=backend.current_url(),
        fallback=True,
        primitive_calls=getattr(backend, 'primitive_calls', 0)
    )

