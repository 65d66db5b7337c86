import json
import tempfile

from io import StringIO
from pathlib import Path

from django.test import TestCase

from sitetools.cli import run_cli
from sitetools.models import ToolBuild
from sitetools.trace_model import parse_trace

from . base import CANDIDATES_FILE


class CliTest(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.registry = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def cli(self, *argv):
        stdout, stderr = StringIO(), StringIO()
        code = run_cli(['--json', '--registry', self.registry, *argv],
                       stdout=stdout, stderr=stderr)
        out = stdout.getvalue()
        err = stderr.getvalue()
        return (code,
                json.loads(out) if out.strip() else None,
                json.loads(err) if err.strip() else None)

    def ingest(self):
        code, data, _ = self.cli('ingest-candidates', str(CANDIDATES_FILE))
        self.assertEqual(code, 0)
        return data

    def test_ingest(self):
        data = self.ingest()
        self.assertIn('search_listings', data['candidates'])
        self.assertTrue((Path(self.registry) / 'candidates.json').is_file())

    def test_ingest_errors(self):
        code, _, err = self.cli('ingest-candidates',
                                f'{self.registry}/missing.json')
        self.assertEqual(code, 4)
        self.assertEqual(err['error']['code'], 4)

        broken = Path(self.registry) / 'broken.json'
        broken.write_text('{"candidates": ')
        code, _, err = self.cli('ingest-candidates', str(broken))
        self.assertEqual(code, 2)

    def test_build_run_and_report(self):
        self.ingest()
        code, data, _ = self.cli('build', 'search_listings')
        self.assertEqual(code, 0)
        self.assertEqual(data['status'], 'validated')
        self.assertEqual(data['version'], 1)
        self.assertEqual(ToolBuild.objects.get().status, 'validated')

        code, data, _ = self.cli('list')
        self.assertEqual([i['name'] for i in data['tools']],
                         ['search_listings'])

        code, data, _ = self.cli('run', 'search_listings', '--input',
                                 'query=kayak', 'category=Boats',
                                 'sort=price_asc')
        self.assertEqual(code, 0)
        self.assertEqual(data['status'], 'success')
        self.assertTrue(data['outputs']['results'])

        code, data, _ = self.cli('validate', 'search_listings')
        self.assertEqual(code, 0)
        self.assertEqual(data['fail_rate'], 0)

        code, data, _ = self.cli('report')
        self.assertEqual(code, 0)
        self.assertEqual(data['tries_until_success'], {'1': 1})
        self.assertEqual(data['tools'][0]['step_count'], 2)
        self.assertEqual(data['diagnostics'], [])

    def test_run_errors(self):
        self.ingest()
        self.cli('build', 'search_listings')
        code, _, err = self.cli('run', 'search_listings', '--input',
                                'sort=cheapest')
        self.assertEqual(code, 2)
        self.assertIn('invalid input', err['error']['message'])

        code, _, _ = self.cli('run', 'search_listings', '--input', 'sort')
        self.assertEqual(code, 2)

        code, _, _ = self.cli('run', 'list_everything')
        self.assertEqual(code, 4)

    def test_validate_without_stored_cases(self):
        self.ingest()
        self.cli('build', 'search_listings')
        stored = Path(self.registry) / 'search_listings.tool.json'
        data = json.loads(stored.read_text())
        data['versions'][0]['provenance']['suite'] = []
        stored.write_text(json.dumps(data))
        code, _, err = self.cli('validate', 'search_listings')
        self.assertEqual(code, 2)
        self.assertIn('no usable test suite', err['error']['message'])

    def test_unknown_candidate(self):
        self.ingest()
        code, _, _ = self.cli('build', 'buy_everything')
        self.assertEqual(code, 4)

    def test_demo_record(self):
        stdout = StringIO()
        code = run_cli(['demo-record', 'edit_listing'], stdout=stdout,
                       stderr=StringIO())
        self.assertEqual(code, 0)
        trace = parse_trace(stdout.getvalue().encode())
        self.assertEqual(trace.candidate_name, 'edit_listing')

        output = Path(self.registry) / 'trace.json'
        code, data, _ = self.cli('demo-record', 'sort_results', '--output',
                                 str(output))
        self.assertEqual(code, 0)
        self.assertEqual(data['steps'],
                         len(parse_trace(output.read_bytes()).steps))

        code, _, _ = self.cli('demo-record', 'juggle')
        self.assertEqual(code, 4)

    def test_build_from_trace_file(self):
        self.ingest()
        output = Path(self.registry) / 'trace.json'
        self.cli('demo-record', 'sort_results', '--output', str(output))
        code, data, _ = self.cli('build', 'sort_results', '--trace',
                                 str(output))
        self.assertEqual(code, 0)
        self.assertEqual(data['final']['step_count'], 2)

        code, _, _ = self.cli('build', 'sort_results', '--trace',
                              f'{self.registry}/nowhere.json')
        self.assertEqual(code, 2)
