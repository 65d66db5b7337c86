import json

from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout

from django.test import LiveServerTestCase, RequestFactory, TestCase

from sitetools.browser import (ClientTransport,
                               SessionBackend,
                               requests_backend)
from sitetools.reasoner import HttpReasoner
from sitetools.tests.base import candidate
from sitetools.validator import build_tool

from . import views
from . demos import scripted_demo
from . fixture import (generate_catalog,
                       handle_request,
                       new_state,
                       search)


class FixtureTest(TestCase):

    def test_catalog_is_a_function_of_the_seed(self):
        self.assertEqual(generate_catalog(3), generate_catalog(3))
        self.assertNotEqual(generate_catalog(3), generate_catalog(4))
        self.assertEqual(generate_catalog(3)[4].title, 'Blue kayak, 10ft')

    def test_search_oracle(self):
        state = new_state()
        found = search(state, 'blue kayak', 'Boats', 'price_asc')
        self.assertEqual([i.id for i in found], [5, 18])
        found = search(state, 'blue kayak', 'All', 'newest')
        self.assertEqual([i.id for i in found], [18, 5])

    def test_routes(self):
        state = new_state()
        response, _ = handle_request(state, 'GET', '/listing/999')
        self.assertEqual(response.status, 404)
        response, _ = handle_request(state, 'POST', '/')
        self.assertEqual(response.status, 405)
        response, _ = handle_request(state, 'GET', '/search',
                                     {'q': 'kayak', 'category': 'Cars'})
        self.assertEqual(response.status, 400)
        self.assertIn('Select a valid category.', response.html)

    def test_loading_pages(self):
        state = new_state(loading=1)
        response, _ = handle_request(state, 'GET', '/')
        self.assertIn('data-loading', response.html)
        response, _ = handle_request(state, 'GET', '/')
        self.assertIn('search-form', response.html)

    def test_persisted_sort_ignores_the_query(self):
        state = new_state(persist_sort=True)
        response, _ = handle_request(state, 'GET', '/search-nosort',
                                     {'q': 'blue kayak',
                                      'sort': 'price_asc'})
        self.assertLess(response.html.index('Blue kayak with paddles'),
                        response.html.index('Blue kayak, 10ft'))
        response, _ = handle_request(state, 'GET', '/search-nosort',
                                     {'q': 'blue kayak'},
                                     {'sort': 'price_asc'})
        self.assertLess(response.html.index('Blue kayak, 10ft'),
                        response.html.index('Blue kayak with paddles'))

    def test_rewritten_names_are_accepted(self):
        state = new_state(drift='rewritten')
        response, _ = handle_request(state, 'POST', '/listing/new',
                                     {'listing_title': 'Oak desk',
                                      'listing_price': '80',
                                      'cat': 'Furniture'})
        self.assertEqual(response.location, '/listing/41')
        self.assertEqual(state.listing(41).price, 8000)


class ViewsTest(TestCase):

    def setUp(self):
        views.reset()

    def test_home(self):
        response = self.client.get('/')
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, 'id="search-form"')

    def test_create_listing(self):
        response = self.client.post('/listing/new',
                                    {'title': 'Oak desk',
                                     'price': '80',
                                     'category': 'Furniture'})
        self.assertRedirects(response, '/listing/41',
                             fetch_redirect_response=False)
        self.assertEqual(views.STATE.listing(41).title, 'Oak desk')

        response = self.client.post('/listing/new', {'title': 'Oak desk',
                                                     'price': 'cheap'})
        self.assertEqual(response.status_code, 400)

    def test_requests_are_serialized_on_the_state(self):
        factory = RequestFactory()

        def create(n):
            request = factory.post('/listing/new', {'title': f'Desk {n}',
                                                    'price': '80',
                                                    'category': 'Furniture'})
            return views.site(request, 'listing/new')['Location']

        with ThreadPoolExecutor(max_workers=8) as pool:
            locations = list(pool.map(create, range(12)))
        self.assertEqual(sorted(locations),
                         sorted(f'/listing/{i}' for i in range(41, 53)))

        late = ThreadPoolExecutor(max_workers=1)
        with views.STATE_LOCK:
            future = late.submit(create, 'late')
            with self.assertRaises(FutureTimeout):
                future.result(timeout=0.2)
        self.assertEqual(future.result(timeout=5), '/listing/53')
        late.shutdown()

    def test_session_over_the_test_client(self):
        backend = SessionBackend(ClientTransport(self.client),
                                 base_url='http://testserver')
        backend.navigate('/listing/3/edit')
        backend.input('#price', '95')
        backend.click('#listing-submit')
        self.assertEqual(backend.last_http_method(), 'POST')
        self.assertEqual(backend.current_url(), 'http://testserver/listing/3')
        self.assertEqual(views.STATE.listing(3).price, 9500)
        self.assertTrue(backend.extract('listing details'))

    def test_reasoner(self):
        response = self.client.post(
            '/reasoner', json.dumps({'task': 'Close the popup'}),
            content_type='application/json')
        self.assertEqual(response.json(), {'commands': [
            {'action': 'click', 'selector': '#promo-popup span'}]})

        response = self.client.post('/reasoner', '{',
                                    content_type='application/json')
        self.assertEqual(response.status_code, 400)
        self.assertEqual(self.client.get('/reasoner').status_code, 405)


class LiveSiteTest(LiveServerTestCase):

    def setUp(self):
        views.reset()

    def test_build_against_the_served_site(self):
        factory = requests_backend(self.live_server_url)
        result = build_tool(
            candidate('post_comment'),
            lambda cand, attempt: scripted_demo('post_comment', factory()),
            backend_factory=factory,
            reasoner=HttpReasoner(f'{self.live_server_url}/reasoner')
        )
        self.assertTrue(result.ok)
        self.assertEqual(result.tool.step_count, 5)
        self.assertEqual(result.tool.script.agentic_count, 1)
        self.assertIn('offer $10 under', views.STATE.listing(7).comments)
