from django.test import TestCase

from classifieds.demos import record_demo
from classifieds.fixture import seed_env
from sitetools.exceptions import WhollyUnstable
from sitetools.executor import resolve_locator
from sitetools.stabilizer import (compute_element_hash,
                                  rank_selectors,
                                  selector_class,
                                  stabilize_trace)
from sitetools.trace_model import ExecutionTrace


SCORES = {'id': 1.0, 'name': 0.9, 'aria-label': 0.8, 'attribute': 0.6,
          'dom_path': 0.3}


class StabilizerTest(TestCase):

    def test_hash_ignores_seed_and_position(self):
        a = record_demo('search', seed=0)
        b = record_demo('search', seed=7)
        hashes_a = [i.element_hash for s in a.steps for i in s.interacted]
        hashes_b = [i.element_hash for s in b.steps for i in s.interacted]
        self.assertEqual(hashes_a, hashes_b)
        self.assertEqual(len(set(hashes_a)), 4)

    def test_hash_changes_with_identity(self):
        element = record_demo('search').steps[2].interacted[0]
        other = element.model_copy(
            update={'attributes': {**element.attributes, 'id': 'other'}})
        self.assertNotEqual(compute_element_hash(element),
                            compute_element_hash(other))

    def test_id_selectors_win(self):
        stab = stabilize_trace(record_demo('search'))
        locator = stab.locator_for(2, 0)
        self.assertEqual(locator.primary, '#searchquery')
        self.assertIn('input[name=q]', locator.alternates)
        self.assertEqual(locator.stability_score, 1.0)
        self.assertEqual(locator.tag, 'input')
        self.assertEqual(stab.unstable_actions, ())
        # navigation and extraction carry no locator
        self.assertIsNone(stab.locator_for(0, 0))
        self.assertIsNone(stab.locator_for(6, 0))

    def test_deep_anonymous_element_is_unstable(self):
        stab = stabilize_trace(record_demo('post_comment'))
        self.assertEqual(stab.unstable_actions, ((1, 0), ))
        self.assertEqual(stab.unstable_segments, [(1, 1)])
        self.assertIsNone(stab.locator_for(1, 0))
        self.assertIsNotNone(stab.locator_for(2, 0))

    def test_distrusted_selectors_rank_last(self):
        stab = stabilize_trace(record_demo('search'),
                               distrusted={'#searchquery'})
        locator = stab.locator_for(2, 0)
        self.assertEqual(locator.primary, 'input[name=q]')
        self.assertEqual(locator.alternates[-1], '#searchquery')

    def test_wholly_unstable(self):
        trace = record_demo('post_comment')
        popup_only = ExecutionTrace(candidate_name='popup',
                                    steps=trace.steps[:2])
        with self.assertRaises(WhollyUnstable):
            stabilize_trace(popup_only)

    def test_no_ui_actions(self):
        trace = record_demo('search')
        stab = stabilize_trace(ExecutionTrace(steps=(trace.steps[0], )))
        self.assertEqual(stab.entries, ())

    def test_rank_selectors(self):
        ranked = rank_selectors(
            ['html > :nth-child(2) > input:nth-child(1)',
             'input[name=q]', '#q', 'input[type=search]', '#q'],
            SCORES)
        self.assertEqual(ranked, ['#q', 'input[name=q]',
                                  'input[type=search]',
                                  'html > :nth-child(2) > '
                                  'input:nth-child(1)'])
        self.assertEqual(selector_class('[id="a b"]'), 'id')
        self.assertEqual(selector_class('button[aria-label=Go]'),
                         'aria-label')


class LocatorResolutionTest(TestCase):

    def page_for(self, trace, step):
        _, backend = seed_env()
        backend.navigate(trace.steps[step].url)
        return backend

    def test_every_selector_finds_the_recorded_element(self):
        for demo in ('search', 'create_listing', 'edit_listing'):
            trace = record_demo(demo)
            stab = stabilize_trace(trace)
            self.assertTrue(stab.entries, demo)
            for entry in stab.entries:
                backend = self.page_for(trace, entry.step)
                locator = entry.locator
                node = backend.element(locator.primary)
                self.assertEqual(
                    compute_element_hash(backend.describe(locator.primary)),
                    locator.element_hash, locator.primary)
                for selector in locator.selectors:
                    self.assertIs(backend.element(selector), node, selector)

    def test_alternates_survive_a_removed_id(self):
        trace = record_demo('search')
        stab = stabilize_trace(trace)
        named = [i for i in stab.entries
                 if 'name' in trace.steps[i.step]
                 .element_for(i.action).attributes]
        self.assertGreaterEqual(len(named), 3)
        for entry in named:
            backend = self.page_for(trace, entry.step)
            node = backend.element(entry.locator.primary)
            del node['id']
            selector = resolve_locator(entry.locator, backend, retry_wait=0)
            self.assertNotEqual(selector, entry.locator.primary)
            self.assertIs(backend.element(selector), node)

    def test_hash_ignores_attribute_order(self):
        for step in record_demo('create_listing').steps:
            for element in step.interacted:
                shuffled = element.model_copy(update={'attributes': dict(
                    reversed(list(element.attributes.items())))})
                self.assertEqual(compute_element_hash(shuffled),
                                 element.element_hash)
