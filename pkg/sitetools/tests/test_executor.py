from django.test import TestCase

from classifieds.fixture import backend_factory
from sitetools.exceptions import FallbackExhausted, InputInvalid, StepError
from sitetools.executor import (StepFailure,
                                agentic_fallback,
                                execute_tool,
                                render_value,
                                run_command,
                                run_script)
from sitetools.feedback import FeedbackKind
from sitetools.reasoner import StubReasoner, load_reasoner
from sitetools.schema import induce_schema
from sitetools.tools import assemble_tool

from . base import candidate, script_for


LISTING = {'title': 'Teak rocking chair',
           'description': 'Solid teak, lightly used',
           'price': 120,
           'category': 'Furniture',
           'color': 'brown'}

# completes a listing on the rewritten site variant
LISTING_PLAN = [
    {'action': 'input', 'selector': '[name=listing_title]',
     'text': '{title}'},
    {'action': 'input', 'selector': '[name=listing_price]',
     'text': '{price}'},
    {'action': 'select', 'selector': '[name=cat]', 'option': '{category}'},
    {'action': 'click', 'selector': 'button[type=submit]'},
    {'action': 'extract', 'goal': 'listing details', 'output': 'listing'},
]


def tool_for(demo, name):
    trace, stab, script = script_for(demo, name)
    schema = induce_schema(trace, script, candidate(name))
    return assemble_tool(candidate(name), script, schema)


def session(**variant):
    return backend_factory(**variant)()


class ExecuteToolTest(TestCase):

    def setUp(self):
        self.search = tool_for('search', 'search_listings')
        self.listing = tool_for('create_listing', 'create_listing')

    def test_search(self):
        outcome = execute_tool(self.search, {'query': 'blue kayak',
                                             'category': 'Boats',
                                             'sort': 'price_asc'},
                               session())
        self.assertTrue(outcome.ok)
        self.assertEqual(outcome.steps_executed, 6)
        self.assertEqual(outcome.agentic_steps_executed, 0)
        self.assertEqual(outcome.primitive_calls, 6)
        rows = outcome.outputs['results'].splitlines()
        self.assertEqual(len(rows), 2)
        self.assertTrue(rows[0].startswith('Blue kayak, 10ft'))
        self.assertIn('/search?', outcome.final_url)

    def test_optional_inputs_are_skipped(self):
        outcome = execute_tool(self.search, {'query': 'blue kayak',
                                             'category': 'Boats'},
                               session())
        self.assertTrue(outcome.ok)
        rows = outcome.outputs['results'].splitlines()
        # newest first when no order is given
        self.assertTrue(rows[0].startswith('Blue kayak with paddles'))

    def test_invalid_inputs(self):
        with self.assertRaises(InputInvalid) as ctx:
            execute_tool(self.search, {'category': 'Boats'}, session())
        self.assertEqual(ctx.exception.violations[0].rule,
                         'missing_required')

    def test_alternate_selectors_absorb_renamed_ids(self):
        outcome = execute_tool(self.listing, LISTING,
                               session(drift='renamed'))
        self.assertTrue(outcome.ok)
        self.assertIn('Teak rocking chair', outcome.outputs['listing'])
        self.assertRegex(outcome.final_url, r'/listing/\d+$')

    def test_selector_drift(self):
        outcome = execute_tool(self.listing, LISTING,
                               session(drift='rewritten'))
        self.assertFalse(outcome.ok)
        failure = outcome.failure
        self.assertEqual(failure.step_index, 1)
        self.assertEqual(failure.error, 'LocatorUnresolved')
        self.assertEqual(failure.feedback.kind, FeedbackKind.SELECTOR_DRIFT)
        self.assertIn('#title', failure.feedback.detail['selectors'])
        self.assertEqual(outcome.steps_executed, 2)

    def test_short_loading_is_retried(self):
        outcome = execute_tool(self.listing, LISTING, session(loading=1))
        self.assertTrue(outcome.ok)

    def test_long_loading_times_out(self):
        outcome = execute_tool(self.listing, LISTING, session(loading=2))
        self.assertFalse(outcome.ok)
        self.assertEqual(outcome.failure.feedback.kind, FeedbackKind.TIMEOUT)
        self.assertEqual(outcome.failure.feedback.detail, {'step': 1})

    def test_rejected_option(self):
        outcome = run_script(self.search.script,
                             {'query': 'lamp', 'category': 'Vehicles',
                              'sort': 'newest'},
                             session())
        self.assertFalse(outcome.ok)
        self.assertEqual(outcome.failure.error, 'OptionNotFound')
        feedback = outcome.failure.feedback
        self.assertEqual(feedback.kind, FeedbackKind.UNCOVERED_ENUM)
        self.assertEqual(feedback.detail, {'field': 'category',
                                           'value': 'Vehicles'})


class AgenticStepTest(TestCase):

    def setUp(self):
        self.tool = tool_for('post_comment', 'post_comment')
        self.inputs = {'listing_id': '7', 'comment': 'is it still there?'}

    def test_reasoner_performs_the_step(self):
        reasoner = load_reasoner('stub')
        outcome = execute_tool(self.tool, self.inputs, session(), reasoner)
        self.assertTrue(outcome.ok)
        self.assertEqual(outcome.agentic_steps_executed, 1)
        self.assertIn('is it still there?', outcome.outputs['comments'])
        request = reasoner.requests[0]
        self.assertEqual(request['task'], 'Dismiss the promotional popup')
        self.assertEqual(request['max_steps'], 5)
        self.assertIn('promo-popup', request['dom_snapshot'])

    def test_without_reasoner(self):
        outcome = execute_tool(self.tool, self.inputs, session())
        self.assertFalse(outcome.ok)
        self.assertEqual(outcome.failure.error, 'ReasonerUnavailable')
        self.assertEqual(outcome.failure.step_index, 1)
        self.assertIsNone(outcome.failure.feedback)

    def test_no_plan(self):
        outcome = execute_tool(self.tool, self.inputs, session(),
                               StubReasoner())
        self.assertEqual(outcome.failure.error, 'StepError')

    def test_malformed_command_fails_the_step(self):
        for command in ({'action': 'wait', 'seconds': 'soon'},
                        {'action': 'scroll', 'dy': 'down'},
                        {'action': 'wait', 'seconds': None}):
            reasoner = StubReasoner([{'match': 'popup',
                                      'commands': [command]}])
            outcome = execute_tool(self.tool, self.inputs, session(),
                                   reasoner)
            self.assertFalse(outcome.ok, command)
            self.assertEqual(outcome.failure.error, 'StepError')
            self.assertEqual(outcome.failure.step_index, 1)

    def test_budget_exhausted(self):
        waits = [{'action': 'wait', 'seconds': 0}] * 6
        reasoner = StubReasoner([{'match': 'popup', 'commands': waits}])
        outcome = execute_tool(self.tool, self.inputs, session(), reasoner)
        self.assertEqual(outcome.failure.error, 'AgenticBudgetExhausted')


class FallbackTest(TestCase):

    def setUp(self):
        self.tool = tool_for('create_listing', 'create_listing')

    def test_fallback_completes_the_task(self):
        reasoner = StubReasoner([{'match': 'new listing',
                                  'commands': LISTING_PLAN}])
        outcome = execute_tool(self.tool, LISTING,
                               session(drift='rewritten'), reasoner,
                               fallback=True)
        self.assertTrue(outcome.ok)
        self.assertTrue(outcome.fallback)
        self.assertEqual(outcome.agentic_steps_executed,
                         self.tool.step_count)
        self.assertIn('Teak rocking chair', outcome.outputs['listing'])
        request = reasoner.requests[0]
        self.assertEqual(request['failure']['step'], 1)
        self.assertEqual(request['inputs']['price'], '120')
        self.assertEqual(request['hints'][0], 'Type {title} into the title '
                                              'input')

    def test_fallback_without_plan(self):
        outcome = execute_tool(self.tool, LISTING,
                               session(drift='rewritten'), StubReasoner(),
                               fallback=True)
        self.assertFalse(outcome.ok)
        self.assertFalse(outcome.fallback)

    def test_fallback_budget(self):
        failure = StepFailure(step_index=1, error='LocatorUnresolved')
        reasoner = StubReasoner([{'match': 'new listing',
                                  'commands': LISTING_PLAN}])
        with self.assertRaises(FallbackExhausted):
            agentic_fallback(self.tool, failure, session(), reasoner,
                             LISTING, budget=3)
        with self.assertRaises(FallbackExhausted):
            agentic_fallback(self.tool, failure, session(), None, LISTING)


class CommandTest(TestCase):

    def test_render_value(self):
        self.assertEqual(render_value('{a} and {b}', {'a': True}),
                         'true and {b}')

    def test_unknown_command(self):
        with self.assertRaises(StepError):
            run_command({'action': 'teleport'}, session(), {})
        with self.assertRaises(StepError):
            run_command({'action': 'click'}, session(), {})

    def test_run_script_with_raw_bindings(self):
        trace, stab, script = script_for('sort_results')
        outcome = run_script(script, {'query': 'kayak',
                                      'sort': 'price_desc'}, session())
        self.assertTrue(outcome.ok)
        rows = outcome.outputs['results'].splitlines()
        self.assertTrue(rows[0].startswith('Blue kayak with paddles'))
