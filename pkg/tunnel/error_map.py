ERROR_MAP = {
    'DimensionMismatch': 'The point, vector or matrix dimensions do not agree.',
    'DegenerateQuadric': 'The quadric matrix is singular; the ellipsoid has no unique center.',
    'DegenerateEllipsoid': 'The quadric is not negative at its center; the ellipsoid interior is empty.',
    'DomainViolation': 'The starting point is outside the ball or the logarithm domain.',
    'NoFeasibleEllipsoid': 'No ellipsoid separates the agent from the sensed obstacles.',
    'AgentAtBoundaryTarget': 'The boundary target coincides with the agent position.',
    'CollisionError': 'An obstacle point coincides with or overlaps the agent body.',
    'EmptyAxisError': 'A field-of-view discretization step is larger than its range.',
    'ScenarioError': 'The scenario file is malformed or invalid.',
    'TraceFormatError': 'The trace file is malformed.',
}

DEFAULT_ERROR_MESSAGE = 'An unknown planner error occurred.'
