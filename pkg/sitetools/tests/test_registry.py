import json
import tempfile

from pathlib import Path

from django.contrib.auth.models import User
from django.test import TestCase
from django.urls import reverse
from pydantic import ValidationError

from classifieds.fixture import backend_factory, new_state, search
from sitetools.exceptions import (Conflict,
                                  RegistryLocked,
                                  UnknownTool,
                                  UnvalidatedTool)
from sitetools.executor import execute_tool
from sitetools.models import ToolBuild
from sitetools.registry import (Registry,
                                RegistryLock,
                                ToolRecord,
                                load_registry,
                                make_record,
                                register_tool)

from . base import build


class RegistryTest(TestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.result = build('search_listings')
        cls.record = make_record(cls.result, cls.result.suite)

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_versions_are_appended(self):
        registry = load_registry(self.path)
        register_tool(registry, self.record)
        register_tool(registry, self.record)
        self.assertEqual([i.version for i in registry.versions(
            'search_listings')], [1, 2])
        self.assertTrue((self.path / 'search_listings.tool.json').is_file())

        reloaded = load_registry(self.path)
        self.assertEqual(len(reloaded), 2)
        self.assertEqual(reloaded.latest('search_listings').version, 2)
        self.assertEqual(
            reloaded.latest('search_listings').tool.model_dump(),
            self.record.tool.model_dump())
        self.assertFalse(reloaded.diagnostics)

    def test_stale_handles_never_reuse_a_version(self):
        first = load_registry(self.path)
        second = load_registry(self.path)
        register_tool(first, self.record)
        register_tool(second, self.record)
        register_tool(first, self.record)
        self.assertEqual([i.version for i in first.versions(
            'search_listings')], [1, 2, 3])
        stored = load_registry(self.path)
        self.assertEqual([i.version for i in stored.versions(
            'search_listings')], [1, 2, 3])
        self.assertFalse(stored.diagnostics)
        with self.assertRaises(Conflict):
            register_tool(second,
                          self.record.model_copy(update={'version': 3}))

    def test_registered_search_agrees_with_the_catalog(self):
        register_tool(load_registry(self.path), self.record)
        tool = load_registry(self.path).latest('search_listings').tool
        self.assertTrue(tool.promoted)
        self.assertEqual(tool.step_count, 2)
        outcome = execute_tool(tool, {'query': 'blue kayak',
                                      'category': 'Boats',
                                      'sort': 'price_asc'},
                               backend_factory()())
        self.assertTrue(outcome.ok)
        rows = outcome.outputs['results'].splitlines()
        expected = search(new_state(), 'blue kayak', 'Boats', 'price_asc')
        self.assertEqual([i.id for i in expected], [5, 18])
        self.assertEqual([i.split(' | ')[0] for i in rows],
                         [i.title for i in expected])
        self.assertEqual([i.split(' | ')[-1] for i in rows],
                         ['/listing/5', '/listing/18'])

    def test_conflict(self):
        registry = load_registry(self.path)
        register_tool(registry, self.record)
        with self.assertRaises(Conflict):
            register_tool(registry,
                          self.record.model_copy(update={'version': 1}))

    def test_unvalidated(self):
        provenance = self.record.provenance.model_copy(
            update={'report': {'fail_rate': 0.5}})
        record = self.record.model_copy(update={'provenance': provenance})
        with self.assertRaises(UnvalidatedTool):
            register_tool(Registry(self.path), record)
        self.assertFalse(list(self.path.glob('*.tool.json')))

    def test_unknown_tool(self):
        registry = Registry(self.path)
        with self.assertRaises(UnknownTool):
            registry.latest('search_listings')
        with self.assertRaises(UnknownTool):
            registry.versions('search_listings')

    def test_schema_must_match_placeholders(self):
        data = self.record.model_dump(mode='json', by_alias=True)
        data['tool']['input_schema'] = {'fields': [], 'static': True}
        with self.assertRaises(ValidationError):
            ToolRecord.model_validate(data)

    def test_corrupt_file_is_a_diagnostic(self):
        register_tool(load_registry(self.path), self.record)
        (self.path / 'broken.tool.json').write_text('{not json')
        (self.path / 'renamed.tool.json').write_text(
            (self.path / 'search_listings.tool.json').read_text())
        registry = load_registry(self.path)
        self.assertEqual(registry.names(), ['search_listings'])
        self.assertEqual(sorted(Path(i.path).name
                                for i in registry.diagnostics),
                         ['broken.tool.json', 'renamed.tool.json'])

    def test_descriptors(self):
        registry = load_registry(self.path)
        register_tool(registry, self.record)
        descriptor, = registry.descriptors()
        self.assertEqual(descriptor['name'], 'search_listings')
        self.assertEqual(sorted(descriptor['input_schema']['properties']),
                         ['category', 'query', 'sort'])

    def test_metrics(self):
        registry = load_registry(self.path)
        register_tool(registry, self.record)
        metrics = registry.latest('search_listings').metrics()
        self.assertEqual(metrics['step_count'], 2)
        self.assertEqual(metrics['pass1_step_count'], 6)
        self.assertEqual(metrics['agentic_ratio'], 0)
        self.assertEqual(metrics['fail_rate'], 0)
        self.assertEqual(metrics['attempts'], 1)
        self.assertTrue(metrics['promoted'])

    def test_stored_file_is_sorted_json(self):
        registry = load_registry(self.path)
        register_tool(registry, self.record)
        text = (self.path / 'search_listings.tool.json').read_text()
        data = json.loads(text)
        self.assertEqual(data['name'], 'search_listings')
        self.assertEqual(text, json.dumps(data, indent=2,
                                          sort_keys=True) + '\n')

    def test_lock(self):
        with RegistryLock(self.path):
            with self.assertRaises(RegistryLocked):
                with RegistryLock(self.path, timeout=0.1, poll=0.02):
                    pass
        with RegistryLock(self.path, timeout=0.1):
            pass

    def test_build_audit_row(self):
        row = ToolBuild.from_result(self.result, version=1)
        self.assertEqual(row.status, 'validated')
        self.assertEqual(row.step_count, 2)
        self.assertTrue(row.promoted)
        self.assertEqual(row.get_report()['candidate'], 'search_listings')
        self.assertEqual(str(row), 'search_listings validated (1)')


class ToolBuildAdminTest(TestCase):

    def test_report_preview(self):
        User.objects.create_superuser('admin', 'admin@classifieds.test',
                                      'secret')
        self.client.login(username='admin', password='secret')
        row = ToolBuild.objects.create(candidate_name='search_listings',
                                       status='failed', attempts=4,
                                       report='{"status": "failed"}')
        response = self.client.get(
            reverse('admin:sitetools_toolbuild_change', args=[row.pk]))
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, '"status":&nbsp;"failed"')
        response = self.client.get(
            reverse('admin:sitetools_toolbuild_changelist'))
        self.assertContains(response, 'search_listings')
