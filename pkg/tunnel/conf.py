from dataclasses import dataclass, fields, replace

from django.conf import settings


@dataclass(frozen=True)
class SolverSettings:
    mu0: float = 1.0
    kappa: float = 10.0
    newton_tol: float = 1e-9
    merit_rtol: float = 1e-13
    gap_tol: float = 1e-7
    max_newton: int = 60
    max_outer: int = 40
    psd_margin: float = 1e-9
    phase_one_tol: float = 1e-6
    feas_tol: float = 1e-7
    kkt_active_tol: float = 1e-5
    kkt_tol: float = 1e-6
    variable_bound: float = 1e6
    regularization: float = 1e-10
    ls_alpha: float = 0.25
    ls_beta: float = 0.5
    min_step: float = 1e-14


@dataclass(frozen=True)
class GeometryTolerances:
    symmetry: float = 1e-12
    eigen_degenerate: float = 1e-9
    singular: float = 1e-12
    occupancy: float = 1e-9
    frame: float = 1e-10


GEOMETRY = GeometryTolerances()


def solver_settings(**overrides):
    """Build the solver schedule from defaults, the ECAN_SOLVER setting and explicit overrides."""
    configured = getattr(settings, 'ECAN_SOLVER', {}) if settings.configured else {}
    known = {f.name for f in fields(SolverSettings)}
    values = {k: v for k, v in {**configured, **overrides}.items() if k in known}
    return replace(SolverSettings(), **values)
