"""
    ./manage.py sitetools <subcommand>

    exit codes: 0 ok, 1 generic failure, 2 invalid input,
                3 build or validation failed, 4 not found
"""
import argparse
import json
import logging

from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from pydantic import ValidationError

from sitetools import settings as app_settings
from sitetools.exceptions import (DemonstrationFailed,
                                  DuplicateName,
                                  InputInvalid,
                                  MalformedCandidates,
                                  MalformedTrace,
                                  ReasonerUnavailable,
                                  UnknownDemo,
                                  UnknownTool)
from sitetools.executor import execute_tool
from sitetools.models import ToolBuild
from sitetools.reasoner import load_reasoner
from sitetools.registry import load_registry, make_record, register_tool
from sitetools.synthesizer import TestSuite
from sitetools.trace_model import (parse_candidates,
                                   parse_trace,
                                   serialize_trace)
from sitetools.utils import from_setting
from sitetools.validator import (BuildBudget,
                                 StaticTraceSource,
                                 build_tool,
                                 validate_tool)


logger = logging.getLogger(__name__)

OK, FAILED, INVALID, BUILD_FAILED, NOT_FOUND = 0, 1, 2, 3, 4


def parse_inputs(pairs):
    inputs = {}
    for pair in pairs or ():
        key, sep, value = pair.partition('=')
        if not sep or not key:
            raise CommandError(f'--input expects key=value, got {pair!r}',
                               returncode=INVALID)
        inputs[key] = value
    return inputs


class Command(BaseCommand):
    help = 'Build, validate, run and inspect website tools'

    def add_arguments(self, parser):
        parser.add_argument('--json', action='store_true',
                            help='machine readable output')
        parser.add_argument('--registry',
                            help='registry directory, '
                                 'defaults to SITETOOLS_REGISTRY_DIR')
        sub = parser.add_subparsers(dest='subcommand', required=True)

        ingest = sub.add_parser('ingest-candidates')
        ingest.add_argument('file')

        demo = sub.add_parser('demo-record')
        demo.add_argument('name')
        demo.add_argument('--seed', type=int, default=0)
        demo.add_argument('--variant', type=int, default=0)
        demo.add_argument('--output', help='trace file, stdout if missing')

        build = sub.add_parser('build')
        build.add_argument('candidate')
        build.add_argument('--max-attempts', type=int)
        build.add_argument('--reasoner', help='"stub" or an HTTP URL')
        build.add_argument('--trace', help='use this recorded trace')

        validate = sub.add_parser('validate')
        validate.add_argument('tool')

        run = sub.add_parser('run')
        run.add_argument('tool')
        run.add_argument('--input', nargs='+', action='extend',
                         dest='inputs', default=[], metavar='KEY=VALUE')
        run.add_argument('--reasoner', help='"stub" or an HTTP URL')
        run.add_argument('--fallback', action='store_true',
                         help='hand failures over to the reasoner')

        sub.add_parser('list')
        sub.add_parser('report')
        for subparser in sub.choices.values():
            # accepted after the subcommand too
            subparser.add_argument('--json', action='store_true',
                                   default=argparse.SUPPRESS)

    def emit(self, data, text=None):
        if self.as_json:
            self.stdout.write(json.dumps(data, indent=2, sort_keys=True))
        else:
            self.stdout.write(text if text is not None else str(data))

    def handle(self, *args, **options):
        self.as_json = options['json']
        self.registry_dir = options.get('registry') or \
            str(getattr(settings, 'SITETOOLS_REGISTRY_DIR',
                        app_settings.SITETOOLS_REGISTRY_DIR))
        subcommand = options['subcommand'].replace('-', '_')
        try:
            return getattr(self, f'do_{subcommand}')(**options)
        except (UnknownTool, UnknownDemo) as e:
            raise CommandError(str(e), returncode=NOT_FOUND)
        except ReasonerUnavailable as e:
            raise CommandError(f'reasoner: {e}', returncode=INVALID)

    # subcommands
    def do_ingest_candidates(self, file, **options):
        path = Path(file)
        if not path.is_file():
            raise CommandError(f'{file} not found', returncode=NOT_FOUND)
        try:
            candidates = parse_candidates(path.read_bytes())
        except (MalformedCandidates, DuplicateName) as e:
            raise CommandError(f'invalid candidates: {e}',
                               returncode=INVALID)
        registry = load_registry(self.registry_dir)
        registry.save_candidates(candidates)
        names = [i.name for i in candidates]
        logger.info(f'Ingested {len(names)} candidates from {file}')
        self.emit({'candidates': names},
                  f'{len(names)} candidates: {", ".join(names)}')

    def do_demo_record(self, name, seed, variant, output=None, **options):
        recorder = from_setting(app_settings.get('SITETOOLS_DEMO_RECORDER'))
        try:
            trace = recorder(name, seed=seed, variant=variant)
        except DemonstrationFailed as e:
            raise CommandError(f'demo {name} failed: {e}',
                               returncode=FAILED)
        raw = serialize_trace(trace)
        if output:
            Path(output).write_bytes(raw)
            self.emit({'trace': output, 'steps': len(trace.steps)},
                      f'{len(trace.steps)} steps written to {output}')
        else:
            self.stdout.write(raw.decode())

    def do_build(self, candidate, max_attempts=None, reasoner=None,
                 trace=None, **options):
        registry = load_registry(self.registry_dir)
        try:
            tool_candidate = registry.candidate(candidate)
        except MalformedCandidates as e:
            raise CommandError(str(e), returncode=NOT_FOUND)
        if trace:
            try:
                source = StaticTraceSource(
                    parse_trace(Path(trace).read_bytes()))
            except (OSError, MalformedTrace) as e:
                raise CommandError(f'trace {trace}: {e}',
                                   returncode=INVALID)
        else:
            source = from_setting(app_settings.get('SITETOOLS_TRACE_SOURCE'))
        budget = BuildBudget(max_attempts=max_attempts) if max_attempts \
            else None
        backend_factory = from_setting(app_settings.get('SITETOOLS_BACKEND'))
        result = build_tool(
            tool_candidate, source, budget,
            backend_factory=backend_factory,
            reasoner=load_reasoner(reasoner)
        )
        version = None
        if result.ok:
            register_tool(registry, make_record(result, result.suite))
            version = registry.latest(candidate).version
        ToolBuild.from_result(result, version)
        report = result.as_dict()
        report['version'] = version
        self.emit(report, f'{candidate}: {result.status} after '
                          f'{len(result.attempts)} attempt(s)')
        if not result.ok:
            raise CommandError(f'{candidate} failed validation',
                               returncode=BUILD_FAILED)

    def do_validate(self, tool, **options):
        record = load_registry(self.registry_dir).latest(tool)
        try:
            suite = TestSuite.model_validate(
                {'cases': record.provenance.suite})
        except ValidationError as e:
            raise CommandError(f'{tool} v{record.version} has no usable '
                               f'test suite: {e.error_count()} errors',
                               returncode=INVALID)
        report = validate_tool(
            record.tool, suite,
            from_setting(app_settings.get('SITETOOLS_BACKEND')),
            load_reasoner()
        )
        self.emit(report.summary(),
                  f'{tool} v{record.version}: fail rate '
                  f'{report.fail_rate:.2f} over {len(report.per_case)} cases')
        if report.fail_rate:
            raise CommandError(f'{tool} fails {report.failing} cases',
                               returncode=BUILD_FAILED)

    def do_run(self, tool, inputs=None, reasoner=None, fallback=False,
               **options):
        record = load_registry(self.registry_dir).latest(tool)
        backend = from_setting(app_settings.get('SITETOOLS_BACKEND'))()
        try:
            outcome = execute_tool(record.tool, parse_inputs(inputs), backend,
                                   load_reasoner(reasoner),
                                   fallback=fallback)
        except InputInvalid as e:
            raise CommandError(f'invalid input: {e}', returncode=INVALID)
        self.emit(outcome.model_dump(mode='json'),
                  '\n'.join(outcome.outputs.values()) or outcome.status)
        if not outcome.ok:
            raise CommandError(f'{tool} failed at step '
                               f'{outcome.failure.step_index}: '
                               f'{outcome.failure.message}',
                               returncode=FAILED)

    def do_list(self, **options):
        registry = load_registry(self.registry_dir)
        descriptors = registry.descriptors()
        lines = [f'{i["name"]}({", ".join(i["input_schema"]["properties"])})'
                 f' {i["description"]}' for i in descriptors]
        self.emit({'tools': descriptors}, '\n'.join(lines))

    def do_report(self, **options):
        registry = load_registry(self.registry_dir)
        metrics = [registry.latest(i).metrics() for i in registry.names()]
        tries = {}
        for i in metrics:
            tries[str(i['attempts'])] = tries.get(str(i['attempts']), 0) + 1
        data = {'tools': metrics,
                'tries_until_success': tries,
                'diagnostics': [i._asdict() for i in registry.diagnostics]}
        lines = [f'{i["name"]} v{i["version"]}: {i["step_count"]} steps '
                 f'(pass 1: {i["pass1_step_count"]}), agentic ratio '
                 f'{i["agentic_ratio"]:.2f}, {i["attempts"]} attempt(s)'
                 for i in metrics]
        self.emit(data, '\n'.join(lines))
