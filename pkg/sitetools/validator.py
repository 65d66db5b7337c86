"""
    Build orchestration: demonstrate, synthesize, promote, test,
    diagnose failures into feedback and refine within an attempt
    budget.
"""
import logging
import re

from typing import Literal, NamedTuple, Optional
from urllib.parse import urlsplit

from pydantic import Field

from . import settings as app_settings
from . exceptions import (DemonstrationFailed,
                          EmptyScript,
                          InputInvalid,
                          MissingParamSource,
                          SchemaMismatch,
                          UnboundPlaceholder,
                          UnclassifiedFailure,
                          UnknownField,
                          WhollyUnstable)
from . executor import ExecutionOutcome, StepFailure, execute_tool
from . feedback import FeedbackItem, FeedbackKind, semantic_mismatch
from . registry import StagingRegistry
from . schema import amend_schema, induce_schema
from . stabilizer import stabilize_trace
from . synthesizer import (ActionScript,
                           Interaction,
                           SuiteCase,
                           TestSuite,
                           extract_test_inputs,
                           resolve_bindings,
                           synthesize_script)
from . tools import Tool, assemble_tool
from . trace_model import FrozenModel
from . url_promoter import infer_url_template, promote_script
from . utils import normalize_items


logger = logging.getLogger(__name__)


class CaseResult(FrozenModel):
    case: SuiteCase
    outcome: ExecutionOutcome
    feedback: Optional[FeedbackItem] = None

    @property
    def passed(self):
        return self.feedback is None


class ValidationReport(FrozenModel):
    fail_rate: float = Field(ge=0, le=1)
    step_count: int = Field(ge=1)
    agentic_ratio: float = Field(ge=0, le=1)
    per_case: tuple[CaseResult, ...] = ()
    feedback: tuple[FeedbackItem, ...] = ()

    @property
    def failing(self):
        return sum(1 for i in self.per_case if not i.passed)

    def summary(self):
        return {'fail_rate': self.fail_rate,
                'step_count': self.step_count,
                'agentic_ratio': self.agentic_ratio,
                'cases': len(self.per_case),
                'failing': self.failing,
                'feedback': [i.model_dump(mode='json')
                             for i in self.feedback]}


class Objective(NamedTuple):
    """
        compared lexicographically, lower is better
    """
    fail_rate: float
    step_count: int
    agentic_ratio: float

    @property
    def accepted(self):
        return self.fail_rate == 0


class BuildBudget(FrozenModel):
    max_attempts: int = Field(default=4, ge=1)


class AttemptRecord(FrozenModel):
    attempt: int
    status: Literal['validated', 'failed', 'unstable', 'error']
    message: str = ''
    objective: Optional[tuple[float, int, float]] = None
    promoted: bool = False
    feedback: tuple[FeedbackItem, ...] = ()


class BuildResult(FrozenModel):
    candidate: str
    status: Literal['validated', 'failed']
    tool: Optional[Tool] = None
    attempts: tuple[AttemptRecord, ...] = ()
    report: Optional[ValidationReport] = None
    pass1_step_count: Optional[int] = None
    suite: Optional[TestSuite] = None

    @property
    def ok(self):
        return self.status == 'validated'

    def as_dict(self):
        data = {
            'candidate': self.candidate,
            'status': self.status,
            'attempts': [i.model_dump(mode='json') for i in self.attempts],
            'pass1_step_count': self.pass1_step_count,
        }
        if self.report is not None:
            data['final'] = self.report.summary()
            data['final']['promoted'] = bool(self.tool and
                                             self.tool.promoted)
        return data


def check_expectations(outcome, case):
    for expectation in case.expectations:
        if expectation.kind == 'extraction_nonempty':
            if not outcome.outputs or \
                    not all(normalize_items(i)
                            for i in outcome.outputs.values()):
                return semantic_mismatch('empty_extraction',
                                         outputs=outcome.outputs)
        elif expectation.kind == 'url_matches':
            path = urlsplit(outcome.final_url).path or '/'
            if not re.search(expectation.pattern, path):
                return semantic_mismatch('url_mismatch',
                                         expected=expectation.pattern,
                                         actual=outcome.final_url)
    return None


def diagnose_failure(outcome, case=None, tool=None):
    if outcome.failure is not None and outcome.failure.feedback is not None:
        return outcome.failure.feedback
    raise UnclassifiedFailure(outcome)


def _outputs_differ(a, b):
    keys = set(a.outputs) | set(b.outputs)
    return any(normalize_items(a.outputs.get(i)) !=
               normalize_items(b.outputs.get(i)) for i in keys)


def _run_case(tool, case, backend_factory, reasoner):
    try:
        outcome = execute_tool(tool, case.inputs, backend_factory(), reasoner)
    except InputInvalid as e:
        outcome = ExecutionOutcome(
            status='failed',
            failure=StepFailure(step_index=0, error='InputInvalid',
                                message=str(e))
        )
    if not outcome.ok:
        try:
            return outcome, diagnose_failure(outcome, case, tool)
        except UnclassifiedFailure:
            return outcome, semantic_mismatch(
                'unclassified',
                step=outcome.failure.step_index,
                error=outcome.failure.error,
                message=outcome.failure.message
            )
    feedback = check_expectations(outcome, case)
    if feedback is None and tool.promoted:
        oracle = execute_tool(tool.as_ui_tool(), case.inputs,
                              backend_factory(), reasoner)
        if oracle.ok and _outputs_differ(outcome, oracle):
            feedback = semantic_mismatch('promotion',
                                         expected=oracle.outputs,
                                         actual=outcome.outputs)
    return outcome, feedback


def validate_tool(tool, suite, backend_factory, reasoner=None):
    """
        every case runs on a freshly seeded session; failures are data
    """
    results = []
    for case in suite.cases:
        outcome, feedback = _run_case(tool, case, backend_factory, reasoner)
        if feedback is not None:
            logger.debug(f'{tool.name} failed {case.inputs}: {feedback}')
        results.append(CaseResult(case=case, outcome=outcome,
                                  feedback=feedback))
    failing = [i.feedback for i in results if i.feedback is not None]
    report = ValidationReport(fail_rate=len(failing) / len(results),
                              step_count=tool.step_count,
                              agentic_ratio=tool.agentic_ratio,
                              per_case=tuple(results),
                              feedback=tuple(failing))
    logger.info(f'Validated {tool.name}: fail_rate {report.fail_rate:.2f} '
                f'over {len(results)} cases')
    return report


def compute_objective(report):
    return Objective(report.fail_rate, report.step_count,
                     report.agentic_ratio)


def _wait_key(step):
    """
        promoted steps keep the trace position of the steps they replace
    """
    if step.trace_ref is not None:
        return step.trace_ref
    return step.type, step.description


class Refinement(object):
    """
        what earlier attempts taught about the candidate
    """
    def __init__(self, wait_seconds=4):
        self.wait_seconds = wait_seconds
        self.distrusted = set()
        self.pruned_options = set()
        self.amendments = []
        self.demote = False
        # trace positions, or (type, description), of steps to wait before
        self.waits = set()

    def refine_candidate(self, candidate):
        if not self.pruned_options:
            return candidate
        elements = []
        for hint in candidate.elements:
            if hint.options:
                options = tuple(i for i in hint.options
                                if i not in self.pruned_options)
                hint = hint.model_copy(update={'options': options or None})
            elements.append(hint)
        return candidate.model_copy(update={'elements': tuple(elements)})

    def insert_waits(self, script):
        if not self.waits:
            return script
        steps = []
        for step in script.steps:
            if _wait_key(step) in self.waits:
                steps.append(Interaction(
                    kind='wait',
                    seconds=self.wait_seconds,
                    description='Wait for the page to finish loading',
                    trace_ref=step.trace_ref
                ))
            steps.append(step)
        return ActionScript(steps=tuple(steps), params=script.params)

    def absorb(self, feedback, tool, candidate):
        hint_options = {i for h in candidate.elements
                        for i in (h.options or ())}
        for item in feedback:
            detail = item.detail
            if item.kind == FeedbackKind.SELECTOR_DRIFT:
                self.distrusted.update(detail['selectors'])
            elif item.kind == FeedbackKind.UNCOVERED_ENUM:
                if detail['value'] in hint_options:
                    self.pruned_options.add(detail['value'])
                else:
                    self.amendments.append(item)
            elif item.kind == FeedbackKind.REQUIREDNESS_MISMATCH:
                self.amendments.append(item)
            elif item.kind == FeedbackKind.TIMEOUT:
                step = tool.script.steps[detail['step']]
                self.waits.add(_wait_key(step))
            elif tool.promoted:
                self.demote = True
        logger.debug(f'Refinement: distrusted {sorted(self.distrusted)}, '
                     f'pruned {sorted(self.pruned_options)}, '
                     f'demote {self.demote}, '
                     f'waits {sorted(map(str, self.waits))}')


def _generate(candidate, trace, refinement, backend_factory, reasoner):
    stab = stabilize_trace(trace, distrusted=frozenset(refinement.distrusted))
    refined = refinement.refine_candidate(candidate)
    script = refinement.insert_waits(synthesize_script(stab, refined))
    bindings = resolve_bindings(trace, refined)
    promoted = script
    if not refinement.demote:
        promoted = promote_script(
            script, infer_url_template(script, stab, bindings),
            backend_factory, bindings, reasoner
        )
    schema = induce_schema(trace, script, refined)
    for item in refinement.amendments:
        try:
            schema = amend_schema(schema, item)
        except UnknownField as e:
            logger.warning(f'Amendment for unknown field {e} ignored')
    tool = assemble_tool(refined, promoted, schema,
                         ui_script=script if promoted is not script else None)
    suite = extract_test_inputs(trace, schema, promoted)
    return tool, suite, script.step_count


def build_tool(candidate, trace_source, budget=None, backend_factory=None,
               reasoner=None, staging=None):
    """
        Returns a BuildResult: validated with the tool, or failed with
        the full attempt history.
    """
    build_conf = app_settings.get('SITETOOLS_BUILD')
    budget = budget or BuildBudget(max_attempts=build_conf['max_attempts'])
    refinement = Refinement(
        app_settings.get('SITETOOLS_EXECUTOR')['timeout_wait']
    )
    staging = staging if staging is not None else StagingRegistry()
    history, best, best_report = [], None, None
    pass1 = None

    for attempt in range(1, budget.max_attempts + 1):
        logger.info(f'Building {candidate.name}, attempt {attempt}')
        try:
            trace = trace_source(refinement.refine_candidate(candidate),
                                 attempt)
            tool, suite, pass1 = _generate(candidate, trace, refinement,
                                           backend_factory, reasoner)
        except WhollyUnstable as e:
            history.append(AttemptRecord(attempt=attempt, status='unstable',
                                         message=str(e)))
            continue
        except (DemonstrationFailed, EmptyScript, UnboundPlaceholder,
                MissingParamSource, SchemaMismatch) as e:
            logger.warning(f'Attempt {attempt} of {candidate.name}: {e}')
            history.append(AttemptRecord(attempt=attempt, status='error',
                                         message=f'{type(e).__name__}: {e}'))
            continue

        staging.stage(tool)
        report = validate_tool(tool, suite, backend_factory, reasoner)
        objective = compute_objective(report)
        previous = best
        if best is None or objective < best:
            best, best_report = objective, report
        assert previous is None or best <= previous
        history.append(AttemptRecord(
            attempt=attempt,
            status='validated' if objective.accepted else 'failed',
            objective=tuple(objective),
            promoted=tool.promoted,
            feedback=report.feedback
        ))
        if objective.accepted:
            logger.info(f'{candidate.name} validated on attempt {attempt}: '
                        f'{tool.step_count} steps')
            return BuildResult(candidate=candidate.name,
                               status='validated',
                               tool=tool,
                               attempts=tuple(history),
                               report=report,
                               pass1_step_count=pass1,
                               suite=suite)
        refinement.absorb(report.feedback, tool,
                          refinement.refine_candidate(candidate))

    logger.warning(f'{candidate.name} failed after {len(history)} attempts')
    return BuildResult(candidate=candidate.name,
                       status='failed',
                       attempts=tuple(history),
                       report=best_report,
                       pass1_step_count=pass1)


class StaticTraceSource(object):
    """
        the same recorded trace for every attempt
    """
    def __init__(self, trace):
        self.trace = trace

    def __call__(self, candidate, attempt):
        return self.trace

