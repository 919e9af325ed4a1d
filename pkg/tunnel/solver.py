"""
Log-barrier interior-point engine for the small dense convex programs of the planner.

Two problem shapes are supported:

* ConeProgram -- a smooth convex objective plus absolute-value terms, linear
  inequalities a'x <= b, convex quadratic inequalities x'Qx + a'x <= b and an
  optional symmetric block S(x) >= I.  Houses the ellipsoid fit and the
  step-length program.
* BallProgram -- a smooth convex objective with an open log domain over the
  unit ball |x| <= 1.  Houses the direction programs.

Both run through the same barrier method: Newton centering with backtracking,
mu <- kappa * mu, stop when (barrier weight) / mu <= gap_tol.
"""
import logging
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import nnls

from tunnel.conf import solver_settings
from tunnel.exceptions import DimensionMismatch, DomainViolation

audit_logger = logging.getLogger('audit_logger')


class Status(str, Enum):
    OPTIMAL = 'Optimal'
    INFEASIBLE = 'Infeasible'
    MAX_ITERATIONS = 'MaxIterations'


class QuadraticObjective:
    """f(x) = x'Hx / 2 + c'x + constant."""

    def __init__(self, H, c, constant=0.0):
        self.H = np.asarray(H, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.constant = float(constant)

    def value(self, x):
        return float(0.5 * x @ self.H @ x + self.c @ x + self.constant)

    def gradient(self, x):
        return self.H @ x + self.c

    def hessian(self, x):
        return self.H


class LinearLogObjective:
    """f(x) = -p'x - sum_i w_i log(d_i'x); +inf outside the log domain."""

    def __init__(self, linear, log_terms):
        self.linear = np.asarray(linear, dtype=float)
        self.weights = np.array([w for w, _ in log_terms], dtype=float)
        self.directions = np.array([d for _, d in log_terms], dtype=float).reshape(len(log_terms), -1)

    def in_domain(self, x):
        return bool(np.all(self.directions @ x > 0))

    def value(self, x):
        projections = self.directions @ x
        if np.any(projections <= 0):
            return np.inf
        return float(-self.linear @ x - self.weights @ np.log(projections))

    def gradient(self, x):
        projections = self.directions @ x
        return -self.linear - self.directions.T @ (self.weights / projections)

    def hessian(self, x):
        projections = self.directions @ x
        scaled = self.directions * np.sqrt(self.weights / projections ** 2)[:, None]
        return scaled.T @ scaled


@dataclass(frozen=True, eq=False)
class LinearInequality:
    a: np.ndarray
    b: float


@dataclass(frozen=True, eq=False)
class QuadraticInequality:
    Q: np.ndarray
    a: np.ndarray
    b: float


@dataclass(frozen=True, eq=False)
class PsdBlock:
    """S(x) = offset + sum_j x[indices[j]] * basis[j], required to satisfy S(x) >= I."""
    indices: tuple
    basis: tuple
    offset: np.ndarray = None

    @property
    def dim(self):
        return self.basis[0].shape[0]

    def matrix(self, x):
        S = np.zeros((self.dim, self.dim)) if self.offset is None else np.array(self.offset, dtype=float)
        for index, E in zip(self.indices, self.basis):
            S = S + x[index] * E
        return S


@dataclass(frozen=True, eq=False)
class AbsTerm:
    """weight * |c'x + e|, lifted to an epigraph variable."""
    weight: float
    c: np.ndarray
    e: float = 0.0


@dataclass(eq=False)
class ConeProgram:
    objective: object
    n: int
    linear_inequalities: list = field(default_factory=list)
    quadratic_inequalities: list = field(default_factory=list)
    psd_block: PsdBlock = None
    epigraph_terms: list = field(default_factory=list)

    def constraint_count(self):
        """Scalar inequalities, not counting the PSD block."""
        return len(self.linear_inequalities) + len(self.quadratic_inequalities)

    def objective_value(self, x):
        x = np.asarray(x, dtype=float)
        value = self.objective.value(x)
        for term in self.epigraph_terms:
            value += term.weight * abs(float(term.c @ x) + term.e)
        return value


@dataclass(frozen=True, eq=False)
class BallProgram:
    objective: object
    dim: int

    def as_cone(self):
        ball = QuadraticInequality(np.eye(self.dim), np.zeros(self.dim), 1.0)
        return ConeProgram(self.objective, self.dim, quadratic_inequalities=[ball])


@dataclass(frozen=True, eq=False)
class Solution:
    x: np.ndarray
    objective_value: float
    status: Status
    kkt_residual: float
    iterations: int
    wall_time: float
    duality_gap: float = float('nan')
    phase_one_slack: float = None
    outer_objectives: tuple = ()

    @property
    def optimal(self):
        return self.status == Status.OPTIMAL


class _LiftedObjective:
    """Objective over y = (x, t): base(x) + weights't."""

    def __init__(self, base, n, weights):
        self.base = base
        self.n = n
        self.weights = np.asarray(weights, dtype=float)

    def value(self, y):
        return self.base.value(y[:self.n]) + float(self.weights @ y[self.n:])

    def gradient(self, y):
        return np.concatenate([self.base.gradient(y[:self.n]), self.weights])

    def hessian(self, y):
        H = np.zeros((y.shape[0], y.shape[0]))
        H[:self.n, :self.n] = self.base.hessian(y[:self.n])
        return H


class _SlackObjective:
    def __init__(self, index):
        self.index = index

    def value(self, y):
        return float(y[self.index])

    def gradient(self, y):
        g = np.zeros(y.shape[0])
        g[self.index] = 1.0
        return g

    def hessian(self, y):
        return np.zeros((y.shape[0], y.shape[0]))


class _Problem:
    """Canonical barrier problem: G y <= h, y'Qy + a'y <= b, M(y) = S(y) - floor*I > 0."""

    def __init__(self, objective, N, G, h, quads, psd, floor):
        self.objective = objective
        self.N = N
        self.G = np.asarray(G, dtype=float).reshape(-1, N)
        self.h = np.asarray(h, dtype=float).reshape(-1)
        self.quads = quads
        self.psd = psd
        self.floor = floor

    @property
    def barrier_weight(self):
        return self.G.shape[0] + len(self.quads) + (self.psd.dim if self.psd else 0)

    def linear_slacks(self, y):
        return self.h - self.G @ y

    def quadratic_slacks(self, y):
        return np.array([b - y @ Q @ y - a @ y for Q, a, b in self.quads])

    def psd_matrix(self, y):
        return self.psd.matrix(y) - self.floor * np.eye(self.psd.dim)

    def worst_violation(self, y):
        violations = [-np.min(self.linear_slacks(y))] if self.G.shape[0] else []
        if self.quads:
            violations.append(-np.min(self.quadratic_slacks(y)))
        if self.psd:
            violations.append(-np.min(np.linalg.eigvalsh(self.psd_matrix(y))))
        return max(violations) if violations else -np.inf

    def barrier(self, y):
        total = 0.0
        if self.G.shape[0]:
            slacks = self.linear_slacks(y)
            if np.any(slacks <= 0):
                return np.inf
            total -= np.sum(np.log(slacks))
        if self.quads:
            slacks = self.quadratic_slacks(y)
            if np.any(slacks <= 0):
                return np.inf
            total -= np.sum(np.log(slacks))
        if self.psd:
            try:
                L = np.linalg.cholesky(self.psd_matrix(y))
            except np.linalg.LinAlgError:
                return np.inf
            total -= 2.0 * np.sum(np.log(np.diag(L)))
        return total

    def strictly_feasible(self, y):
        return np.isfinite(self.barrier(y)) and np.isfinite(self.objective.value(y))

    def barrier_derivatives(self, y):
        grad = np.zeros(self.N)
        hess = np.zeros((self.N, self.N))
        if self.G.shape[0]:
            inv = 1.0 / self.linear_slacks(y)
            grad += self.G.T @ inv
            scaled = self.G * inv[:, None]
            hess += scaled.T @ scaled
        for Q, a, b in self.quads:
            slack = b - y @ Q @ y - a @ y
            dg = 2.0 * Q @ y + a
            grad += dg / slack
            hess += np.outer(dg, dg) / slack ** 2 + 2.0 * Q / slack
        if self.psd:
            M_inv = np.linalg.inv(self.psd_matrix(y))
            products = [M_inv @ E for E in self.psd.basis]
            for j, index in enumerate(self.psd.indices):
                grad[index] -= np.trace(products[j])
                for k, other in enumerate(self.psd.indices):
                    hess[index, other] += np.sum(products[j] * products[k].T)
        return grad, hess

    def relaxed(self, shift):
        quads = [(Q, a, b + shift) for Q, a, b in self.quads]
        return _Problem(self.objective, self.N, self.G, self.h + shift, quads, self.psd, self.floor - shift)


def _newton_direction(H, g):
    try:
        return np.linalg.solve(H, -g)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(H, -g, rcond=None)[0]


def _centering(problem, y, mu, cfg, stop=None):
    """Damped Newton on mu * f + barrier. Returns (y, steps, converged, stopped)."""
    objective = problem.objective

    def merit(z):
        barrier = problem.barrier(z)
        if not np.isfinite(barrier):
            return np.inf
        return mu * objective.value(z) + barrier

    current = merit(y)
    for step in range(1, cfg.max_newton + 1):
        bg, bH = problem.barrier_derivatives(y)
        g = mu * objective.gradient(y) + bg
        H = mu * objective.hessian(y) + bH
        dy = _newton_direction(H, g)
        decrement = -float(g @ dy)
        # Below the rounding of the merit itself Newton only chases noise.
        floor = max(cfg.newton_tol, cfg.merit_rtol * abs(current))
        if decrement <= 0 or decrement / 2.0 <= floor:
            return y, step, True, False
        t = 1.0
        while True:
            candidate = y + t * dy
            value = merit(candidate)
            if np.isfinite(value) and value <= current - cfg.ls_alpha * t * decrement:
                break
            t *= cfg.ls_beta
            if t < cfg.min_step:
                # No representable decrease left at this barrier weight.
                return y, step, True, False
        y, current = candidate, value
        if stop is not None and stop(y):
            return y, step, True, True
    return y, cfg.max_newton, False, False


@dataclass
class _EngineResult:
    y: np.ndarray
    status: Status
    iterations: int
    gap: float
    history: list
    stopped: bool = False


def _barrier_method(problem, y, cfg, stop=None, label='program'):
    mu = cfg.mu0
    weight = problem.barrier_weight
    iterations = 0
    history = []
    converged = True
    gap = np.inf
    for outer in range(cfg.max_outer):
        y, steps, converged, stopped = _centering(problem, y, mu, cfg, stop)
        iterations += steps
        history.append(problem.objective.value(y))
        gap = weight / mu
        audit_logger.debug(
            f"{label}: outer {outer} mu={mu:.1e} newton={steps} objective={history[-1]:.9g} gap={gap:.1e}")
        if stopped:
            return _EngineResult(y, Status.OPTIMAL, iterations, gap, history, stopped=True)
        if gap <= cfg.gap_tol:
            status = Status.OPTIMAL if converged else Status.MAX_ITERATIONS
            return _EngineResult(y, status, iterations, gap, history)
        mu *= cfg.kappa
    return _EngineResult(y, Status.MAX_ITERATIONS, iterations, gap, history)


def _settled(result, kkt, cfg):
    """Optimal exactly when the gap is closed and the KKT residual is within kkt_tol."""
    if result.gap <= cfg.gap_tol and kkt <= cfg.kkt_tol:
        return Status.OPTIMAL
    if result.status == Status.OPTIMAL:
        audit_logger.warning(f"gap closed but KKT residual {kkt:.2e} exceeds {cfg.kkt_tol:.0e}")
    return Status.MAX_ITERATIONS


def _canonical(prog, cfg):
    """Lift absolute-value terms and collect every constraint over y = (x, t)."""
    n = prog.n
    terms = prog.epigraph_terms
    N = n + len(terms)
    rows, rhs = [], []
    for inequality in prog.linear_inequalities:
        a = np.zeros(N)
        a[:n] = inequality.a
        rows.append(a)
        rhs.append(inequality.b)
    for j, term in enumerate(terms):
        for sign in (1.0, -1.0):
            # sign * (c'x + e) - t_j <= 0
            a = np.zeros(N)
            a[:n] = sign * np.asarray(term.c, dtype=float)
            a[n + j] = -1.0
            rows.append(a)
            rhs.append(-sign * term.e)
    quads = []
    for inequality in prog.quadratic_inequalities:
        Q = np.zeros((N, N))
        Q[:n, :n] = inequality.Q
        a = np.zeros(N)
        a[:n] = inequality.a
        quads.append((Q, a, float(inequality.b)))
    objective = _LiftedObjective(prog.objective, n, [t.weight for t in terms]) if terms else prog.objective
    floor = 1.0 - cfg.psd_margin
    return _Problem(objective, N, np.array(rows).reshape(-1, N), np.array(rhs), quads, prog.psd_block, floor)


def _lift(prog, x, margin=0.0):
    x = np.asarray(x, dtype=float)
    if x.shape[0] != prog.n:
        raise DimensionMismatch(f"point has length {x.shape[0]}, program has {prog.n} variables")
    t = [abs(float(term.c @ x) + term.e) + margin for term in prog.epigraph_terms]
    return np.concatenate([x, t])


def _phase_one(problem, y0, cfg):
    """Minimise the worst constraint violation s; stop at the first strictly feasible point."""
    N = problem.N
    s0 = max(problem.worst_violation(y0), 0.0) + 1.0
    G = np.hstack([problem.G, -np.ones((problem.G.shape[0], 1))])
    h = problem.h.copy()
    bound = cfg.variable_bound
    box = np.hstack([np.vstack([np.eye(N), -np.eye(N)]), np.zeros((2 * N, 1))])
    floor_row = np.zeros((1, N + 1))
    floor_row[0, N] = -1.0
    G = np.vstack([G, box, floor_row])
    h = np.concatenate([h, np.full(2 * N, bound), [1.0]])
    quads = []
    for Q, a, b in problem.quads:
        Q1 = np.zeros((N + 1, N + 1))
        Q1[:N, :N] = Q
        quads.append((Q1, np.append(a, -1.0), b))
    psd = None
    if problem.psd:
        psd = PsdBlock(
            tuple(problem.psd.indices) + (N,),
            tuple(problem.psd.basis) + (np.eye(problem.psd.dim),),
            problem.psd.offset,
        )
    auxiliary = _Problem(_SlackObjective(N), N + 1, G, h, quads, psd, problem.floor)

    def stop(z):
        return z[N] < 0 and problem.strictly_feasible(z[:N])

    z0 = np.append(np.clip(y0, -0.5 * bound, 0.5 * bound), s0)
    result = _barrier_method(auxiliary, z0, cfg, stop, label='phase-I')
    return result.y[:N], float(result.y[N]), result.iterations, result.stopped


def solve_cone(prog, x0=None, settings=None):
    """Solve a ConeProgram; runs phase I when x0 is absent or not strictly feasible."""
    cfg = settings or solver_settings()
    started = time.perf_counter()
    problem = _canonical(prog, cfg)
    y = _lift(prog, np.zeros(prog.n) if x0 is None else x0, margin=1.0)
    iterations = 0
    phase_one_slack = None
    if not problem.strictly_feasible(y):
        y, phase_one_slack, iterations, stopped = _phase_one(problem, y, cfg)
        if not stopped:
            if phase_one_slack > cfg.phase_one_tol:
                audit_logger.debug(f"phase-I slack {phase_one_slack:.3e} exceeds {cfg.phase_one_tol:.1e}")
                return Solution(
                    x=y[:prog.n], objective_value=float('nan'), status=Status.INFEASIBLE,
                    kkt_residual=float('inf'), iterations=iterations,
                    wall_time=time.perf_counter() - started, phase_one_slack=phase_one_slack,
                )
            problem = problem.relaxed(max(phase_one_slack, 0.0) + 1e-9)
    result = _barrier_method(problem, y, cfg)
    x = result.y[:prog.n]
    kkt = check_kkt(prog, x, cfg)
    return Solution(
        x=x,
        objective_value=prog.objective_value(x),
        status=_settled(result, kkt, cfg),
        kkt_residual=kkt,
        iterations=iterations + result.iterations,
        wall_time=time.perf_counter() - started,
        duality_gap=result.gap,
        phase_one_slack=phase_one_slack,
        outer_objectives=tuple(result.history),
    )


def solve_ball(prog, x0, settings=None):
    """Minimise a log-domain objective over the unit ball, starting strictly inside."""
    cfg = settings or solver_settings()
    started = time.perf_counter()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape[0] != prog.dim:
        raise DimensionMismatch(f"start has length {x0.shape[0]}, program is {prog.dim}D")
    if x0 @ x0 >= 1.0 or not np.isfinite(prog.objective.value(x0)):
        raise DomainViolation(f"x0 = {x0.tolist()}")
    cone = prog.as_cone()
    problem = _canonical(cone, cfg)
    result = _barrier_method(problem, x0, cfg, label='ball')
    x = result.y
    # Polish onto the sphere when the objective keeps decreasing along the outward ray.
    radial = x / np.linalg.norm(x)
    if prog.objective.value(radial) <= prog.objective.value(x):
        x = radial
    kkt = check_kkt(cone, x, cfg)
    return Solution(
        x=x,
        objective_value=prog.objective.value(x),
        status=_settled(result, kkt, cfg),
        kkt_residual=kkt,
        iterations=result.iterations,
        wall_time=time.perf_counter() - started,
        duality_gap=result.gap,
        outer_objectives=tuple(result.history),
    )


def check_kkt(prog, x, settings=None):
    """
    KKT residual at x with nonnegative multipliers fitted by least squares.

    Constraints whose slack is within kkt_active_tol get free multipliers.
    Every other constraint still gets a multiplier, priced by a
    complementarity row holding its slack, so barely-active constraints with
    small multipliers are not lost. The residual is
    |(stationarity, complementarity)| / max(1, |grad f|).
    """
    if isinstance(prog, BallProgram):
        prog = prog.as_cone()
    cfg = settings or solver_settings()
    problem = _canonical(prog, cfg)
    y = _lift(prog, x)
    grad = problem.objective.gradient(y)
    tol = cfg.kkt_active_tol
    columns, prices = [], []

    def add(column, slack, bound):
        columns.append(column)
        prices.append(0.0 if slack <= tol * (1.0 + abs(bound)) else abs(slack))

    if problem.G.shape[0]:
        for row, slack, b in zip(problem.G, problem.linear_slacks(y), problem.h):
            add(row, slack, b)
    for Q, a, b in problem.quads:
        add(2.0 * Q @ y + a, b - y @ Q @ y - a @ y, b)
    if problem.psd:
        values, vectors = np.linalg.eigh(problem.psd_matrix(y))

        def psd_column(Z):
            column = np.zeros(problem.N)
            for index, E in zip(problem.psd.indices, problem.psd.basis):
                column[index] -= np.sum(E * Z)
            return column

        for value, v in zip(values, vectors.T):
            add(psd_column(np.outer(v, v)), value, problem.floor)
        null = vectors[:, values <= tol * (1.0 + problem.floor)]
        for i in range(null.shape[1]):
            for j in range(i + 1, null.shape[1]):
                cross = np.outer(null[:, i], null[:, j])
                add(psd_column(cross + cross.T), 0.0, problem.floor)
                add(-psd_column(cross + cross.T), 0.0, problem.floor)
    scale = max(1.0, float(np.linalg.norm(grad)))
    if not columns:
        return float(np.linalg.norm(grad)) / scale
    C = np.vstack([np.array(columns).T, np.diag(prices)])
    rhs = np.concatenate([-grad, np.zeros(len(prices))])
    _, residual = nnls(C, rhs, maxiter=10 * C.shape[1])
    return float(residual) / scale
