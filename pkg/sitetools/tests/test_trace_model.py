import json
import random

from django.test import TestCase

from classifieds.demos import DEMOS, record_demo
from sitetools.exceptions import (AlignmentError,
                                  DuplicateName,
                                  MalformedCandidates,
                                  MalformedTrace)
from sitetools.trace_model import (identifier,
                                   parse_candidates,
                                   parse_trace,
                                   serialize_candidates,
                                   serialize_trace)

from . base import CANDIDATES_FILE


def _trace_dict(**overrides):
    data = {
        'candidate': 'search_listings',
        'steps': [
            {'url': 'about:blank',
             'agent_brain': {'next_goal': 'Open the site'},
             'actions': [{'kind': 'go_to_url',
                          'payload': {'url': 'http://classifieds.test/'}}]},
            {'url': 'http://classifieds.test/',
             'actions': [{'kind': 'input_text',
                          'payload': {'text': 'lamp'}}],
             'interacted_elements': [{'element_hash': 'abc',
                                      'tag': 'input',
                                      'attributes': {'id': 'searchquery'},
                                      'dom_path': [1, 1, 1, 1]}],
             'screenshot': 'ignored'},
        ],
        'bindings': {'query': 'lamp'},
    }
    data.update(overrides)
    return data


class TraceModelTest(TestCase):

    def test_parse_minimal(self):
        trace = parse_trace(json.dumps(_trace_dict()))
        self.assertEqual(trace.candidate_name, 'search_listings')
        self.assertEqual(len(trace.steps), 2)
        self.assertEqual(trace.steps[1].interacted[0].tag, 'input')
        self.assertEqual(trace.param_bindings, {'query': 'lamp'})
        self.assertEqual(trace.locate('lamp'), (1, 'payload'))

    def test_recorded_demo_survives_serialization(self):
        trace = record_demo('search')
        raw = serialize_trace(trace)
        self.assertEqual(serialize_trace(parse_trace(raw)), raw)

    def test_search_demo_shape(self):
        trace = record_demo('search')
        self.assertEqual(len(trace.steps), 7)
        self.assertEqual(sum(len(i.interacted) for i in trace.steps), 5)

    def test_demo_bindings_are_locatable(self):
        rng = random.Random(7)
        for _ in range(12):
            name = rng.choice(sorted(DEMOS))
            trace = record_demo(name, seed=rng.randrange(100),
                                variant=rng.randrange(2))
            raw = serialize_trace(trace)
            self.assertEqual(serialize_trace(parse_trace(raw)), raw)
            for value in trace.param_bindings.values():
                self.assertIsNotNone(trace.locate(value), (name, value))

    def test_not_json(self):
        with self.assertRaises(MalformedTrace) as ctx:
            parse_trace('{"steps": [')
        self.assertIn(':', ctx.exception.position)

    def test_not_utf8(self):
        with self.assertRaises(MalformedTrace):
            parse_trace(b'\xff\xfe{}')

    def test_empty_steps(self):
        with self.assertRaises(MalformedTrace) as ctx:
            parse_trace(json.dumps(_trace_dict(steps=[])))
        self.assertEqual(ctx.exception.position, 'steps')

    def test_unknown_action_kind(self):
        data = _trace_dict()
        data['steps'][0]['actions'][0]['kind'] = 'teleport'
        with self.assertRaises(MalformedTrace) as ctx:
            parse_trace(json.dumps(data))
        self.assertTrue(ctx.exception.position.startswith('steps.0'))

    def test_payload_keys(self):
        data = _trace_dict()
        data['steps'][1]['actions'][0]['payload'] = {'value': 'lamp'}
        with self.assertRaises(MalformedTrace):
            parse_trace(json.dumps(data))

    def test_relative_navigation_url(self):
        data = _trace_dict()
        data['steps'][0]['actions'][0]['payload']['url'] = '/search'
        with self.assertRaises(MalformedTrace):
            parse_trace(json.dumps(data))

    def test_misaligned_elements(self):
        data = _trace_dict()
        data['steps'][1]['interacted_elements'] = []
        with self.assertRaises(AlignmentError):
            parse_trace(json.dumps(data))

    def test_binding_absent_from_trace(self):
        data = _trace_dict(bindings={'query': 'sofa'})
        with self.assertRaises(MalformedTrace) as ctx:
            parse_trace(json.dumps(data))
        self.assertEqual(ctx.exception.position, 'bindings.query')

    def test_negative_dom_path(self):
        data = _trace_dict()
        data['steps'][1]['interacted_elements'][0]['dom_path'] = [1, -1]
        with self.assertRaises(MalformedTrace):
            parse_trace(json.dumps(data))

    def test_identifier(self):
        self.assertEqual(identifier('Search Query!'), 'search_query')
        self.assertEqual(identifier('2nd field'), 'value_2nd_field')
        self.assertEqual(identifier('***'), 'value')


class CandidatesTest(TestCase):

    def test_fixture_candidates(self):
        candidates = parse_candidates(CANDIDATES_FILE.read_bytes())
        names = [i.name for i in candidates]
        self.assertEqual(names, ['search_listings', 'sort_results',
                                 'create_listing', 'edit_listing',
                                 'post_comment'])
        search = candidates[0]
        self.assertEqual(len(search.hints('select')), 2)
        self.assertEqual(search.hints('select')[0].options,
                         ('All', 'Boats', 'Electronics', 'Furniture'))
        again = parse_candidates(serialize_candidates(candidates))
        self.assertEqual(again, candidates)

    def test_missing_tools(self):
        with self.assertRaises(MalformedCandidates):
            parse_candidates('{"candidates": []}')

    def test_duplicate_name(self):
        entry = {'name': 'a', 'start_url': 'http://classifieds.test/'}
        raw = json.dumps({'tools': [entry, entry]})
        with self.assertRaises(DuplicateName) as ctx:
            parse_candidates(raw)
        self.assertEqual(ctx.exception.name, 'a')

    def test_relative_start_url(self):
        raw = json.dumps({'tools': [{'name': 'a', 'start_url': '/'}]})
        with self.assertRaises(MalformedCandidates):
            parse_candidates(raw)

    def test_empty_select_options(self):
        raw = json.dumps({'tools': [{
            'name': 'a', 'start_url': 'http://classifieds.test/',
            'elements': [{'type': 'select', 'options': []}]
        }]})
        with self.assertRaises(MalformedCandidates):
            parse_candidates(raw)
