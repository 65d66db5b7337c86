class MalformedTrace(Exception):
    def __init__(self, position, reason):
        self.position = position
        self.reason = reason
        super().__init__(f'{position}: {reason}')


class AlignmentError(Exception):
    pass


class MalformedCandidates(Exception):
    pass


class DuplicateName(Exception):
    def __init__(self, name):
        self.name = name
        super().__init__(f'duplicate tool candidate name: {name}')


class WhollyUnstable(Exception):
    pass


class EmptyScript(Exception):
    pass


class UnboundPlaceholder(Exception):
    def __init__(self, name):
        self.name = name
        super().__init__(f'placeholder {{{name}}} is not bound')


class MissingParamSource(Exception):
    pass


class UnknownField(Exception):
    pass


class SchemaMismatch(Exception):
    pass


class BackendUnavailable(Exception):
    pass


# browser session errors
class BackendError(Exception):
    pass


class ElementNotFound(BackendError):
    def __init__(self, selector):
        self.selector = selector
        super().__init__(f'no element matches {selector}')


class OptionNotFound(BackendError):
    def __init__(self, selector, option):
        self.selector = selector
        self.option = option
        super().__init__(f'{selector} has no option {option!r}')


class NavigationFailed(BackendError):
    def __init__(self, url, status, field_errors=None):
        self.url = url
        self.status = status
        self.field_errors = field_errors or {}
        super().__init__(f'{url} answered {status}')


# step execution errors
class StepError(Exception):
    pass


class LocatorUnresolved(StepError):
    def __init__(self, selectors, busy=False):
        self.selectors = tuple(selectors)
        self.busy = busy
        super().__init__(f'none of {list(self.selectors)} resolved')


class AgenticBudgetExhausted(StepError):
    pass


class InputInvalid(Exception):
    def __init__(self, violations):
        self.violations = violations
        super().__init__('; '.join(str(i) for i in violations))


class FallbackExhausted(Exception):
    pass


class ReasonerUnavailable(Exception):
    pass


class UnclassifiedFailure(Exception):
    def __init__(self, outcome):
        self.outcome = outcome
        super().__init__('failure could not be classified')


class DemonstrationFailed(Exception):
    pass


class UnknownDemo(Exception):
    pass


class Conflict(Exception):
    pass


class UnvalidatedTool(Exception):
    pass


class PageBusy(StepError):
    pass


class UnknownTool(Exception):
    def __init__(self, name):
        self.name = name
        super().__init__(f'no registered tool named {name}')


class RegistryLocked(Exception):
    pass
