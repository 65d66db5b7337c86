import logging

from typing import Optional

from pydantic import Field

from . exceptions import SchemaMismatch
from . schema import InputSchema, schema_placeholders
from . synthesizer import ActionScript
from . trace_model import FrozenModel


logger = logging.getLogger(__name__)


class Tool(FrozenModel):
    name: str = Field(min_length=1)
    description: str = ''
    start_url: str
    script: ActionScript
    input_schema: InputSchema
    # pre-promotion script, the oracle of promoted tools
    ui_script: Optional[ActionScript] = None

    @property
    def promoted(self):
        return self.ui_script is not None

    @property
    def step_count(self):
        return self.script.step_count

    @property
    def agentic_ratio(self):
        return self.script.agentic_ratio

    def as_ui_tool(self):
        """
            the same tool executed through its recorded UI path
        """
        return self.model_copy(update={'script': self.ui_script or
                                       self.script,
                                       'ui_script': None})


def assemble_tool(candidate, script, schema, ui_script=None):
    missing, unused = schema_placeholders(schema, script)
    if missing or unused:
        raise SchemaMismatch(f'placeholders without field {missing}, '
                             f'fields without placeholder {unused}')
    if ui_script is not None:
        missing, unused = schema_placeholders(schema, ui_script)
        if missing or unused:
            raise SchemaMismatch(f'UI path placeholders {missing} / '
                                 f'unused fields {unused}')
    tool = Tool(name=candidate.name,
                description=candidate.description,
                start_url=candidate.start_url,
                script=script,
                input_schema=schema,
                ui_script=ui_script)
    logger.debug(f'Assembled {tool.name}: {tool.step_count} steps, '
                 f'promoted={tool.promoted}')
    return tool
