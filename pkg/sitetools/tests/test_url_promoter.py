from django.test import TestCase

from classifieds.demos import Recorder
from classifieds.fixture import backend_factory, seed_env
from sitetools.exceptions import BackendUnavailable
from sitetools.stabilizer import stabilize_trace
from sitetools.synthesizer import Navigation, synthesize_script
from sitetools.url_promoter import (InferredPromotion,
                                    UrlTemplate,
                                    infer_url_template,
                                    interaction_runs,
                                    promote_script)

from . base import script_for


SEARCH_TEMPLATE = ('http://classifieds.test/search'
                   '?q={query}&category={category}&sort={sort}')


def _unreachable():
    raise BackendUnavailable('site is down')


class InferTemplateTest(TestCase):

    def test_search_form(self):
        trace, stab, script = script_for('search')
        self.assertEqual(interaction_runs(script, trace)[0][:2], (1, 4))
        inferred = infer_url_template(script, stab)
        self.assertEqual((inferred.start, inferred.end), (1, 4))
        self.assertEqual(inferred.template.url, SEARCH_TEMPLATE)
        self.assertEqual(inferred.template.params,
                         {'query', 'category', 'sort'})
        self.assertEqual(inferred.template.evidence['query'], 2)
        self.assertEqual(
            inferred.template.render({'query': 'red kayak',
                                      'category': 'Boats',
                                      'sort': 'newest'}),
            'http://classifieds.test/search'
            '?q=red+kayak&category=Boats&sort=newest')

    def test_sort_form(self):
        trace, stab, script = script_for('sort_results')
        inferred = infer_url_template(script, stab)
        self.assertEqual(inferred.template.url,
                         'http://classifieds.test/search'
                         '?q={query}&sort={sort}')

    def test_mutating_runs_are_refused(self):
        for demo in ('edit_listing', 'create_listing', 'post_comment'):
            trace, stab, script = script_for(demo)
            self.assertIsNone(infer_url_template(script, stab), demo)

    def test_ambiguous_binding(self):
        trace, stab, script = script_for('search')
        twins = {**trace.param_bindings, 'q_copy': 'blue kayak'}
        self.assertIsNone(infer_url_template(script, stab, twins))

    def test_unexplained_parameter(self):
        trace, stab, script = script_for('search')
        # category no longer bound: Boats reaches the URL unexplained
        partial = {'query': 'blue kayak', 'sort': 'price_asc'}
        self.assertIsNone(infer_url_template(script, stab, partial))

    def test_template_needs_evidence(self):
        with self.assertRaises(ValueError):
            UrlTemplate(base_path='/search',
                        query_params=(('q', '{query}'), ))


class PromoteScriptTest(TestCase):

    def test_promotion_keeps_outputs(self):
        trace, stab, script = script_for('search')
        inferred = infer_url_template(script, stab)
        promoted = promote_script(script, inferred, backend_factory(),
                                  trace.param_bindings)
        self.assertEqual([i.type for i in promoted.steps],
                         ['navigation', 'extraction'])
        self.assertIsInstance(promoted.steps[0], Navigation)
        self.assertEqual(promoted.steps[0].url_template, SEARCH_TEMPLATE)
        self.assertEqual(set(promoted.params), set(script.params))
        self.assertLess(promoted.step_count, script.step_count)
        self.assertLessEqual(promoted.agentic_ratio, script.agentic_ratio)

    def test_leading_navigation_is_kept_when_templated(self):
        trace, stab, script = script_for('sort_results')
        promoted = promote_script(script, infer_url_template(script, stab),
                                  backend_factory(), trace.param_bindings)
        # the results page navigation is absorbed by the template
        self.assertEqual(promoted.step_count, 2)

    def test_nothing_to_promote(self):
        trace, stab, script = script_for('edit_listing')
        self.assertIs(promote_script(script, None, backend_factory(),
                                     trace.param_bindings), script)

    def test_ignored_sort_parameter_is_refused(self):
        trace, stab, script = script_for('search', persist_sort=True)
        inferred = infer_url_template(script, stab)
        self.assertTrue(inferred.template.base_path.endswith('nosort'))
        promoted = promote_script(script, inferred,
                                  backend_factory(persist_sort=True),
                                  trace.param_bindings)
        self.assertIs(promoted, script)

    def test_unreplayable_promotion_is_refused(self):
        trace, stab, script = script_for('search')
        inferred = infer_url_template(script, stab)
        self.assertIs(promote_script(script, inferred, _unreachable,
                                     trace.param_bindings), script)
        self.assertIs(promote_script(script, inferred, None,
                                     trace.param_bindings), script)


def _edit_link_flow():
    _, backend = seed_env()
    rec = Recorder(backend, 'open_edit_form')
    rec.navigate('/listing/3', 'Open the listing')
    rec.click(rec.sel('edit_link'), 'Open the edit form')
    rec.extract('listing details', 'listing')
    trace = rec.trace({'listing_id': '3'})
    stab = stabilize_trace(trace)
    return trace, stab, synthesize_script(stab)


class PathPromotionTest(TestCase):

    def test_resource_id_in_the_path_is_templated(self):
        trace, stab, script = _edit_link_flow()
        self.assertEqual(script.step_count, 3)
        inferred = infer_url_template(script, stab)
        self.assertEqual(inferred.template.url,
                         'http://classifieds.test/listing/{listing_id}/edit')
        self.assertEqual(inferred.template.evidence, {'listing_id': 0})
        promoted = promote_script(script, inferred, backend_factory(),
                                  trace.param_bindings)
        self.assertEqual(promoted.step_count, 2)
        self.assertEqual(promoted.params, ('listing_id', ))
        self.assertEqual(promoted.steps[0].url_template,
                         inferred.template.url)

    def test_promotion_saving_no_step_is_refused(self):
        trace, stab, script = _edit_link_flow()
        literal = UrlTemplate(origin='http://classifieds.test',
                              base_path='/listing/3/edit')
        inferred = InferredPromotion(1, 1, literal)
        self.assertIs(promote_script(script, inferred, backend_factory(),
                                     trace.param_bindings), script)
