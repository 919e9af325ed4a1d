from tunnel.error_map import DEFAULT_ERROR_MESSAGE, ERROR_MAP


class EcanError(Exception):
    code = None

    def __init__(self, detail=None):
        self.detail = detail
        message = ERROR_MAP.get(self.code, DEFAULT_ERROR_MESSAGE)
        super().__init__(f"{message} {detail}" if detail else message)


class DimensionMismatch(EcanError, ValueError):
    code = 'DimensionMismatch'


class DegenerateQuadric(EcanError):
    code = 'DegenerateQuadric'


class DegenerateEllipsoid(EcanError):
    code = 'DegenerateEllipsoid'


class DomainViolation(EcanError, ValueError):
    code = 'DomainViolation'


class NoFeasibleEllipsoid(EcanError):
    code = 'NoFeasibleEllipsoid'

    def __init__(self, detail=None, slack=None):
        self.slack = slack
        super().__init__(detail)


class AgentAtBoundaryTarget(EcanError):
    code = 'AgentAtBoundaryTarget'


class CollisionError(EcanError, ValueError):
    code = 'CollisionError'


class EmptyAxisError(EcanError, ValueError):
    code = 'EmptyAxisError'


class ScenarioError(EcanError, ValueError):
    code = 'ScenarioError'

    def __init__(self, detail=None, field=None, line=None):
        self.field = field
        self.line = line
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        if location:
            detail = f"{', '.join(location)}: {detail}"
        super().__init__(detail)


class TraceFormatError(EcanError, ValueError):
    code = 'TraceFormatError'
