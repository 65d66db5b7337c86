"""
    Tool registry: one {name}.tool.json file per tool holding every
    registered version, plus the ingested candidates.json.
"""
import json
import logging
import os
import time

from pathlib import Path
from typing import NamedTuple, Optional

from pydantic import Field, ValidationError, model_validator

from . exceptions import (Conflict,
                          MalformedCandidates,
                          RegistryLocked,
                          UnknownTool,
                          UnvalidatedTool)
from . schema import schema_placeholders
from . tools import Tool
from . trace_model import (FrozenModel,
                           parse_candidates,
                           serialize_candidates)


logger = logging.getLogger(__name__)

SUFFIX = '.tool.json'
CANDIDATES = 'candidates.json'
LOCK = '.lock'

READ_ERRORS = (ValueError, ValidationError, UnicodeDecodeError)


class Provenance(FrozenModel):
    candidate: str
    attempts: int = Field(ge=1)
    pass1_step_count: Optional[int] = None
    report: dict = Field(default_factory=dict)
    suite: list = Field(default_factory=list)


class ToolRecord(FrozenModel):
    version: Optional[int] = Field(default=None, ge=1)
    tool: Tool
    provenance: Provenance

    @model_validator(mode='after')
    def bijection(self):
        for script in filter(None, (self.tool.script, self.tool.ui_script)):
            missing, unused = schema_placeholders(self.tool.input_schema,
                                                  script)
            if missing or unused:
                raise ValueError(f'placeholders {missing} without field, '
                                 f'fields {unused} without placeholder')
        return self

    @property
    def name(self):
        return self.tool.name

    @property
    def validated(self):
        return self.provenance.report.get('fail_rate') == 0

    def descriptor(self):
        """
            what an agent needs to call the tool as one action
        """
        return {'name': self.tool.name,
                'description': self.tool.description,
                'input_schema': self.tool.input_schema.json_schema()}

    def metrics(self):
        """
            recomputed from the stored tool and provenance
        """
        report = self.provenance.report
        cases = report.get('cases', 0)
        steps = self.tool.script.step_count
        return {'name': self.name,
                'version': self.version,
                'step_count': steps,
                'pass1_step_count': self.provenance.pass1_step_count,
                'agentic_ratio': self.tool.script.agentic_count / steps,
                'fail_rate': report.get('failing', 0) / cases
                if cases else None,
                'attempts': self.provenance.attempts,
                'promoted': self.tool.promoted}


class ToolFile(FrozenModel):
    name: str
    versions: tuple[ToolRecord, ...] = Field(min_length=1)

    @model_validator(mode='after')
    def consistent(self):
        numbers = [i.version for i in self.versions]
        if None in numbers or len(set(numbers)) != len(numbers):
            raise ValueError('versions must be numbered and unique')
        if any(i.tool.name != self.name for i in self.versions):
            raise ValueError(f'every version must be named {self.name}')
        return self


class Diagnostic(NamedTuple):
    path: str
    message: str


def make_record(result, suite=None):
    """
        ToolRecord of a validated BuildResult
    """
    report = result.as_dict()
    final = dict(report.get('final', {}))
    final['history'] = report['attempts']
    return ToolRecord(
        tool=result.tool,
        provenance=Provenance(
            candidate=result.candidate,
            attempts=len(result.attempts),
            pass1_step_count=result.pass1_step_count,
            report=final,
            suite=[i.model_dump(mode='json')
                   for i in (suite.cases if suite else ())]
        )
    )


def dumps(data):
    return json.dumps(data, indent=2, sort_keys=True) + '\n'


class Registry(object):
    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self.records = {}
        self.diagnostics = []

    def __len__(self):
        return sum(len(i) for i in self.records.values())

    def __contains__(self, name):
        return name in self.records

    def names(self):
        return sorted(self.records)

    def versions(self, name):
        if name not in self.records:
            raise UnknownTool(name)
        return list(self.records[name])

    def latest(self, name):
        """
            highest validated version
        """
        validated = [i for i in self.versions(name) if i.validated]
        if not validated:
            raise UnknownTool(name)
        return validated[-1]

    def descriptors(self):
        return [self.latest(i).descriptor() for i in self.names()]

    def add(self, record):
        versions = self.records.setdefault(record.name, [])
        versions.append(record)
        versions.sort(key=lambda i: i.version)

    # persistence
    def file_for(self, name):
        return self.path / f'{name}{SUFFIX}'

    def serialize(self, name):
        data = {'name': name,
                'versions': [i.model_dump(mode='json', by_alias=True)
                             for i in self.records[name]]}
        return dumps(data)

    def refresh(self, name):
        """
            replaces the versions of name with the ones on disk
        """
        item = self.file_for(name)
        if not item.exists():
            return
        try:
            tool_file = read_tool_file(item)
        except READ_ERRORS as e:
            logger.warning(f'Kept in-memory versions of {name}, {item} '
                           f'is unreadable: {str(e).splitlines()[0]}')
            return
        self.records[name] = sorted(tool_file.versions,
                                    key=lambda i: i.version)

    def write(self, name):
        # caller holds the RegistryLock
        _atomic_write(self.file_for(name), self.serialize(name))
        logger.debug(f'Wrote {self.file_for(name)}')

    def save_candidates(self, candidates):
        self.path.mkdir(parents=True, exist_ok=True)
        with RegistryLock(self.path):
            _atomic_write(self.path / CANDIDATES,
                          serialize_candidates(candidates).decode() + '\n')

    def candidates(self):
        path = self.path / CANDIDATES if self.path else None
        if path is None or not path.exists():
            return []
        return parse_candidates(path.read_bytes())

    def candidate(self, name):
        for i in self.candidates():
            if i.name == name:
                return i
        raise MalformedCandidates(f'no ingested candidate named {name}')


class StagingRegistry(object):
    """
        in-memory registry of provisional tools under validation
    """
    def __init__(self):
        self.tools = {}

    def stage(self, tool):
        staged = self.tools.setdefault(tool.name, [])
        staged.append(tool)
        logger.debug(f'Staged {tool.name} #{len(staged)}')
        return len(staged)


class RegistryLock(object):
    """
        directory-level exclusive commit
    """
    def __init__(self, path, timeout=10, poll=0.05):
        self.lockfile = Path(path) / LOCK
        self.timeout = timeout
        self.poll = poll

    def __enter__(self):
        deadline = time.monotonic() + self.timeout
        while True:
            try:
                fd = os.open(self.lockfile,
                             os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                if time.monotonic() > deadline:
                    raise RegistryLocked(f'{self.lockfile} is held')
                time.sleep(self.poll)
                continue
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            return self

    def __exit__(self, *exc):
        try:
            self.lockfile.unlink()
        except FileNotFoundError:  # pragma: no cover
            pass


def _atomic_write(path, text):
    tmp = path.with_name(f'.{path.name}.tmp')
    tmp.write_text(text, encoding='utf-8')
    os.replace(tmp, path)


def register_tool(registry, record):
    """
        appends the record, numbering it when it has no version; the
        stored tool file is re-read under the lock first
    """
    if not record.validated:
        raise UnvalidatedTool(f'{record.name} did not pass validation')
    if registry.path is None:
        record = _append(registry, record)
    else:
        registry.path.mkdir(parents=True, exist_ok=True)
        with RegistryLock(registry.path):
            registry.refresh(record.name)
            record = _append(registry, record)
            registry.write(record.name)
    logger.info(f'Registered {record.name} version {record.version}')
    return registry


def _append(registry, record):
    numbers = [i.version for i in registry.records.get(record.name, [])]
    if record.version is None:
        record = record.model_copy(update={'version': max(numbers,
                                                          default=0) + 1})
    elif record.version in numbers:
        raise Conflict(f'{record.name} version {record.version} exists')
    registry.add(record)
    return record


def read_tool_file(item):
    """
        ToolFile stored at item; its tool name must match the file name
    """
    name = item.name[:-len(SUFFIX)]
    data = json.loads(item.read_text(encoding='utf-8'))
    tool_file = ToolFile.model_validate(data)
    if tool_file.name != name:
        raise ValueError(f'file holds tool {tool_file.name}')
    return tool_file


def load_registry(path):
    """
        loads every readable tool file; the others become diagnostics
    """
    registry = Registry(path)
    directory = Path(path)
    if not directory.is_dir():
        return registry
    for item in sorted(directory.glob(f'*{SUFFIX}')):
        try:
            tool_file = read_tool_file(item)
        except READ_ERRORS as e:
            message = str(e).splitlines()[0]
            logger.warning(f'Skipped corrupt tool file {item}: {message}')
            registry.diagnostics.append(Diagnostic(str(item), message))
            continue
        for record in tool_file.versions:
            registry.add(record)
    logger.debug(f'Loaded {len(registry)} tool versions from {path}')
    return registry
