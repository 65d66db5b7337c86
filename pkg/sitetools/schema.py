"""
    Input schema induction, validation and feedback-driven amendment.
"""
import logging
import re

from typing import Literal, NamedTuple, Optional, Union

from pydantic import Field, model_validator

from . exceptions import MissingParamSource, UnknownField
from . feedback import FeedbackKind
from . synthesizer import resolve_bindings, template_literal
from . trace_model import FrozenModel
from . utils import placeholders, whole_placeholder


logger = logging.getLogger(__name__)

Scalar = Union[bool, int, float, str]

INTEGER = re.compile(r'-?\d+')
BOOLEANS = {'true': True, 'false': False}

JSON_TYPES = {
    'text': 'string',
    'integer': 'integer',
    'number': 'number',
    'boolean': 'boolean',
    'enum': 'string',
}


def conforms(value_type, value, options=None):
    if value_type == 'integer':
        if isinstance(value, bool):
            return False
        return isinstance(value, int) or \
            (isinstance(value, str) and INTEGER.fullmatch(value) is not None)
    if value_type == 'number':
        if isinstance(value, bool):
            return False
        if isinstance(value, (int, float)):
            return True
        try:
            float(value)
        except (TypeError, ValueError):
            return False
        return True
    if value_type == 'boolean':
        return isinstance(value, bool) or \
            (isinstance(value, str) and value.lower() in BOOLEANS)
    if value_type == 'enum':
        return str(value) in (options or ())
    return isinstance(value, str)


class FieldSpec(FrozenModel):
    name: str = Field(pattern=r'^[A-Za-z_][A-Za-z0-9_]*$')
    value_type: Literal['text', 'integer', 'number', 'boolean', 'enum']
    required: bool = False
    options: Optional[tuple[str, ...]] = None
    default: Optional[Scalar] = None
    description: str = ''
    example: Optional[Scalar] = None

    @model_validator(mode='after')
    def consistent(self):
        if self.value_type == 'enum':
            if not self.options or len(self.options) < 2:
                raise ValueError(f'enum {self.name} needs two options')
        elif self.options is not None:
            raise ValueError(f'{self.name} is not an enum')
        for label in ('default', 'example'):
            value = getattr(self, label)
            if value is not None and \
                    not conforms(self.value_type, value, self.options):
                raise ValueError(f'{label} of {self.name} does not conform')
        return self

    def coerce(self, value):
        if self.value_type == 'integer':
            return int(value)
        if self.value_type == 'number':
            return float(value)
        if self.value_type == 'boolean' and isinstance(value, str):
            return BOOLEANS[value.lower()]
        return value if isinstance(value, bool) else str(value)

    def json_schema(self):
        schema = {'type': JSON_TYPES[self.value_type],
                  'description': self.description}
        if self.options:
            schema['enum'] = list(self.options)
        if self.default is not None:
            schema['default'] = self.default
        if self.example is not None:
            schema['examples'] = [self.example]
        return schema


class InputSchema(FrozenModel):
    fields: tuple[FieldSpec, ...] = ()
    static: bool = False

    @model_validator(mode='after')
    def consistent(self):
        names = [i.name for i in self.fields]
        if len(set(names)) != len(names):
            raise ValueError('field names must be duplicate-free')
        if not self.fields and not self.static:
            raise ValueError('a schema without fields must be static')
        return self

    @property
    def names(self):
        return [i.name for i in self.fields]

    def field(self, name):
        for i in self.fields:
            if i.name == name:
                return i
        raise UnknownField(name)

    def apply_defaults(self, inputs):
        values = dict(inputs)
        for i in self.fields:
            if values.get(i.name) in (None, '') and i.default is not None:
                values[i.name] = i.default
        return values

    def json_schema(self):
        return {
            'type': 'object',
            'properties': {i.name: i.json_schema() for i in self.fields},
            'required': [i.name for i in self.fields if i.required],
            'additionalProperties': False,
        }


class Violation(NamedTuple):
    field: str
    rule: str
    message: str

    def __str__(self):
        return f'{self.field}: {self.message}'


class _Source(NamedTuple):
    element: object
    hint: object
    origin: str


def _hint_for(trace, candidate, si, ai):
    """
        candidate hints are paired with recorded elements of the same
        type in order of appearance
    """
    if candidate is None:
        return None
    element = trace.steps[si].element_for(ai)
    kind = {'select': 'select', 'textarea': 'textarea'}.get(element.tag,
                                                             'input')
    hints = candidate.hints(kind)
    position = 0
    for i, j, action in trace.actions():
        if (i, j) == (si, ai):
            break
        other = trace.steps[i].element_for(j)
        if action.kind in ('input_text', 'select_change') and \
                other.tag == element.tag:
            position += 1
    return hints[position] if position < len(hints) else None


def param_sources(trace, bindings, candidate=None):
    sources = {}
    for si, ai, action in trace.actions():
        if action.kind not in ('input_text', 'select_change'):
            continue
        element = trace.steps[si].element_for(ai)
        literal = str(action.payload.get('text',
                                         action.payload.get('selected_text')))
        name = whole_placeholder(template_literal(literal, bindings,
                                                  element))
        if name and name not in sources:
            sources[name] = _Source(element,
                                    _hint_for(trace, candidate, si, ai),
                                    'element')
    return sources


def _enum_options(element, hint):
    options = [i.value for i in element.options]
    known = {i.lower() for i in options} | \
        {i.text.lower() for i in element.options}
    for extra in (hint.options or ()) if hint else ():
        if extra.lower() not in known:
            options.append(extra)
            known.add(extra.lower())
    return tuple(options)


def _enum_value(element, literal):
    for option in element.options:
        if literal in (option.value, option.text):
            return option.value
    for option in element.options:
        if literal.lower() == option.text.lower():
            return option.value
    return literal


def _element_field(name, literal, source, description):
    element, hint = source.element, source.hint
    attributes = element.attributes
    # captured attributes carry the form's required marker
    required = 'required' in attributes if attributes else True
    description = (hint.purpose if hint and hint.purpose else description)
    if element.tag == 'select':
        options = _enum_options(element, hint)
        default = next((i.value for i in element.options if i.selected),
                       None)
        value = _enum_value(element, literal)
        if len(options) >= 2 and value in options:
            return FieldSpec(name=name, value_type='enum',
                             required=required, options=options,
                             default=default, description=description,
                             example=value)
    value_type = 'text'
    if attributes.get('type') == 'number' and INTEGER.fullmatch(literal):
        value_type = 'integer'
    spec = FieldSpec(name=name, value_type=value_type, required=required,
                     description=description, example=literal)
    return spec.model_copy(update={'example': spec.coerce(literal)})


def induce_schema(trace, script, candidate=None):
    bindings = resolve_bindings(trace, candidate)
    sources = param_sources(trace, bindings, candidate)
    url_params = set()
    task_params = set()
    descriptions = {}
    for step in script.steps:
        for name in step.placeholders:
            descriptions.setdefault(name, step.description)
            if step.type == 'navigation':
                url_params.add(name)
            elif step.type == 'agentic':
                task_params.add(name)
    fields = []
    for name in script.params:
        literal = str(bindings[name])
        description = descriptions.get(name, '')
        if name in sources:
            fields.append(_element_field(name, literal, sources[name],
                                         description))
        elif name in url_params or name in task_params \
                or trace.locate(literal):
            # path and query values carry no form markers
            fields.append(FieldSpec(name=name, value_type='text',
                                    required=True, example=literal,
                                    description=description or
                                    f'{name} taken from the page URL'))
        else:
            raise MissingParamSource(f'{name} has no element or URL source')
    schema = InputSchema(fields=tuple(fields), static=not fields)
    logger.debug(f'Induced schema {schema.json_schema()}')
    return schema


def validate_input(schema, inputs):
    """
        [] when inputs satisfy the schema, otherwise one Violation per
        broken rule
    """
    violations = []
    known = set(schema.names)
    for key in sorted(set(inputs) - known):
        violations.append(Violation(key, 'unknown_field',
                                    f'{key} is not an input of this tool'))
    for field in schema.fields:
        value = inputs.get(field.name)
        if value is None or value == '':
            if field.required:
                violations.append(Violation(field.name, 'missing_required',
                                            f'{field.name} is required'))
            continue
        if field.value_type == 'enum':
            if not conforms('enum', value, field.options):
                violations.append(Violation(
                    field.name, 'enum',
                    f'{value!r} is not one of {list(field.options)}'))
        elif not conforms(field.value_type, value):
            violations.append(Violation(
                field.name, 'type',
                f'{value!r} is not a valid {field.value_type}'))
    return violations


def amend_schema(schema, feedback):
    """
        UncoveredEnum appends the value, RequirednessMismatch sets the
        observed requiredness; other kinds leave the schema untouched
    """
    if feedback.kind not in (FeedbackKind.UNCOVERED_ENUM,
                             FeedbackKind.REQUIREDNESS_MISMATCH):
        return schema
    field = schema.field(feedback.detail['field'])
    if feedback.kind == FeedbackKind.UNCOVERED_ENUM:
        value = feedback.detail['value']
        if field.value_type != 'enum' or value is None or \
                str(value) in field.options:
            return schema
        update = {'options': field.options + (str(value), )}
    else:
        required = feedback.detail.get('required')
        update = {'required': (not field.required) if required is None
                  else bool(required)}
    amended = field.model_copy(update=update)
    logger.info(f'Amended schema field {field.name}: {update}')
    return schema.model_copy(update={
        'fields': tuple(amended if i.name == field.name else i
                        for i in schema.fields)
    })


def schema_placeholders(schema, script):
    """
        (params without field, fields without param)
    """
    params = set(script.params)
    for step in script.steps:
        for template in step.templates():
            params.update(placeholders(template))
    names = set(schema.names)
    return sorted(params - names), sorted(names - params)
