"""Galerkin / Crank-Nicolson time stepping for u_t + xi u_x - lam u_xx = 0
with Dirichlet ends.

Coefficient vectors are stored with basis index ``i`` at array position
``i + 1`` (``delta_{-1} .. delta_{N+1}``).
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .assembly import DEFAULT_QUAD_ORDER, assemble_global, reference_element_matrices
from .basis import BasisConstants, Mesh, centered_profile, derive_constants
from .linalg import (
    BandedLU,
    BandedMatrix,
    TridiagonalSystem,
    banded_lu_factor,
    banded_lu_solve,
    thomas_solve,
)

MAX_STEPS = 10**8


def _zero(t):
    return 0.0


def one_sided_derivative(f: Callable, x: float, h: float, direction: int) -> float:
    """Fourth-order one-sided difference of ``f`` at ``x`` stepping in
    ``direction`` (+1 forwards, -1 backwards)."""
    s = direction * h
    f0, f1, f2, f3, f4 = (float(f(x + k * s)) for k in range(5))
    return direction * (-25 * f0 + 48 * f1 - 36 * f2 + 16 * f3 - 3 * f4) / (12 * h)


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients, data and discretisation of one run."""

    xi: float
    lam: float
    a: float
    b: float
    n: int
    p: float
    dt: float
    t_final: float
    u0: Callable
    du0_a: float | None = None
    du0_b: float | None = None
    f0: Callable = _zero
    fl: Callable = _zero
    exact: Callable | None = None

    def __post_init__(self):
        if not (math.isfinite(self.xi) and math.isfinite(self.lam)):
            raise ValueError("xi and lambda must be finite")
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_final >= 0:
            raise ValueError(f"t_final must be non-negative, got {self.t_final}")
        ratio = self.t_final / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"t_final/dt = {ratio} is not a whole number of steps")
        if round(ratio) > MAX_STEPS:
            raise ValueError(f"{round(ratio)} steps exceeds the limit {MAX_STEPS}")

    @property
    def mesh(self) -> Mesh:
        return Mesh(self.a, self.b, self.n)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def initial_slopes(self) -> tuple[float, float]:
        h = self.mesh.h
        left = self.du0_a
        right = self.du0_b
        if left is None:
            left = one_sided_derivative(self.u0, self.a, h / 4, +1)
        if right is None:
            right = one_sided_derivative(self.u0, self.b, h / 4, -1)
        return float(left), float(right)


@dataclass(frozen=True)
class CoefficientVector:
    values: np.ndarray
    t: float = 0.0


@dataclass
class SolutionHistory:
    mesh: Mesh
    constants: BasisConstants
    snapshots: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> CoefficientVector:
        return self.snapshots[-1]

    def knot_values(self, index: int = -1) -> np.ndarray:
        return knot_values(self.snapshots[index], self.constants)


def knot_values(state: CoefficientVector, constants: BasisConstants) -> np.ndarray:
    """Nodal values ``U_i = a1 d_{i-1} + d_i + a1 d_{i+1}``, ``i = 0..N``."""
    d = state.values
    return constants.alpha1 * (d[:-2] + d[2:]) + d[1:-1]


def fit_initial(problem: ProblemSpec, constants: BasisConstants) -> CoefficientVector:
    """Interpolate ``u0`` at the knots with the end slopes prescribed.

    The two slope equations eliminate ``delta_{-1}`` and ``delta_{N+1}``,
    leaving a tridiagonal system in ``delta_0 .. delta_N``.
    """
    a1, a2 = constants.alpha1, constants.alpha2
    assert 0.0 < a1 < 0.5, "interpolation matrix must be diagonally dominant"
    mesh = problem.mesh
    n = mesh.n
    g_left, g_right = problem.initial_slopes()
    rhs = np.asarray(problem.u0(mesh.knots), dtype=float).copy()
    sub = np.full(n + 1, a1)
    sup = np.full(n + 1, a1)
    diag = np.ones(n + 1)
    # delta_{-1} = delta_1 + g_left / a2;  delta_{N+1} = delta_{N-1} - g_right / a2
    sup[0] = 2 * a1
    rhs[0] -= a1 * g_left / a2
    sub[-1] = 2 * a1
    rhs[-1] += a1 * g_right / a2
    inner = thomas_solve(TridiagonalSystem(sub, diag, sup), rhs)
    values = np.empty(n + 3)
    values[1:-1] = inner
    values[0] = inner[1] + g_left / a2
    values[-1] = inner[-2] - g_right / a2
    return CoefficientVector(values, 0.0)


def build_crank_nicolson(A: BandedMatrix, B: BandedMatrix, C: BandedMatrix, xi, lam, dt):
    """``lhs = A + dt/2 (xi B - lam C)``, ``rhs_mat = A - dt/2 (xi B - lam C)``."""
    if not (A.n == B.n == C.n and A.bandwidth == B.bandwidth == C.bandwidth):
        raise ValueError("mass, advection and diffusion matrices are not conformable")
    op = BandedMatrix(xi * B.data - lam * C.data, A.bandwidth)
    half = 0.5 * dt
    return A.combine(op, half), A.combine(op, -half)


@dataclass(frozen=True)
class DirichletElimination:
    """How the exterior coefficients enter the reduced system.

    ``left``/``right`` are the deleted columns of the full left-hand matrix
    (rows ``0..N``) divided by ``alpha1``; the boundary values contribute
    ``-(left * beta1 + right * beta2)`` to the reduced right-hand side.
    """

    alpha1: float
    left: np.ndarray
    right: np.ndarray

    def boundary_rhs(self, beta1: float, beta2: float) -> np.ndarray:
        return -(self.left * beta1 + self.right * beta2)

    def rebuild(self, inner: np.ndarray, beta1: float, beta2: float) -> np.ndarray:
        a1 = self.alpha1
        full = np.empty(inner.size + 2)
        full[1:-1] = inner
        full[0] = (beta1 - inner[0] - a1 * inner[1]) / a1
        full[-1] = (beta2 - inner[-1] - a1 * inner[-2]) / a1
        return full


def apply_dirichlet(lhs: BandedMatrix, rhs_mat: BandedMatrix, constants: BasisConstants):
    """Drop the first and last Galerkin rows and substitute the boundary
    relations for ``delta_{-1}`` and ``delta_{N+1}``.

    Returns the ``(N+1)``-dimensional banded matrix and the elimination
    record.  ``rhs_mat`` is used unchanged by :func:`step` (the old time
    level is kept in full), and is accepted here for conformity checks.
    """
    a1 = constants.alpha1
    assert a1 > 0.0, "alpha1 must be positive to eliminate exterior coefficients"
    if lhs.n != rhs_mat.n or lhs.bandwidth != rhs_mat.bandwidth:
        raise ValueError("left and right matrices are not conformable")
    bw = lhs.bandwidth
    n_full = lhs.n
    m = n_full - 2
    red = BandedMatrix(lhs.data[:, 1:-1].copy(), bw)
    # clear storage slots that referred to the deleted rows 0 and N+2
    for k in range(1, bw + 1):
        red.data[bw - k, :k] = 0.0
        red.data[bw + k, m - k :] = 0.0
    left = np.zeros(m)
    right = np.zeros(m)
    for r in range(1, bw + 1):
        left[r - 1] = lhs.entry(r, 0) / a1
        right[m - r] = lhs.entry(n_full - 1 - r, n_full - 1) / a1
    # delta_{-1} = beta1/a1 - delta_0/a1 - delta_1
    for r in range(bw):
        red.data[bw + r - 0, 0] -= left[r]
        red.data[bw + r - 1, 1] -= left[r] * a1
    # delta_{N+1} = beta2/a1 - delta_N/a1 - delta_{N-1}
    for r in range(m - bw, m):
        red.data[bw + r - (m - 1), m - 1] -= right[r]
        red.data[bw + r - (m - 2), m - 2] -= right[r] * a1
    return red, DirichletElimination(a1, left, right)


@dataclass(frozen=True)
class Stepper:
    """Time-independent machinery for repeated Crank-Nicolson steps."""

    lu: BandedLU
    rhs_mat: BandedMatrix
    elimination: DirichletElimination
    dt: float
    f0: Callable = _zero
    fl: Callable = _zero

    @classmethod
    def build(cls, problem: ProblemSpec, constants: BasisConstants, quad_order=DEFAULT_QUAD_ORDER):
        elem = reference_element_matrices(constants, quad_order)
        A, B, C = assemble_global(problem.mesh, elem)
        lhs, rhs_mat = build_crank_nicolson(A, B, C, problem.xi, problem.lam, problem.dt)
        reduced, record = apply_dirichlet(lhs, rhs_mat, constants)
        return cls(banded_lu_factor(reduced), rhs_mat, record, problem.dt, problem.f0, problem.fl)


def step(state: CoefficientVector, machinery: Stepper, beta_new=None) -> CoefficientVector:
    """Advance one time step.  ``beta_new`` overrides the boundary values at
    the new time level; otherwise they come from the problem's boundary data."""
    t_new = state.t + machinery.dt
    if beta_new is None:
        beta_new = (float(machinery.f0(t_new)), float(machinery.fl(t_new)))
    b1, b2 = beta_new
    rhs = machinery.rhs_mat.matvec(state.values)[1:-1]
    rhs += machinery.elimination.boundary_rhs(b1, b2)
    inner = banded_lu_solve(machinery.lu, rhs)
    return CoefficientVector(machinery.elimination.rebuild(inner, b1, b2), t_new)


def _snapshot_steps(problem: ProblemSpec, output_times: Sequence[float]) -> set[int]:
    n = problem.n_steps
    steps = {0, n}
    for t in output_times:
        if not 0 <= t <= problem.t_final + 0.5 * problem.dt:
            raise ValueError(f"snapshot time {t} lies outside [0, {problem.t_final}]")
        steps.add(min(n, int(round(t / problem.dt))))
    return steps


def run(problem: ProblemSpec, output_times: Sequence[float] = (), quad_order=DEFAULT_QUAD_ORDER):
    """Fit, assemble, factor once, and march to ``t_final``."""
    mesh = problem.mesh
    constants = derive_constants(problem.p, mesh.h)
    history = SolutionHistory(mesh, constants)
    record_at = _snapshot_steps(problem, output_times)
    state = fit_initial(problem, constants)
    history.snapshots.append(state)
    n_steps = problem.n_steps
    if n_steps == 0:
        return history
    machinery = Stepper.build(problem, constants, quad_order)
    for k in range(1, n_steps + 1):
        state = step(state, machinery)
        # timestamps from the step count, free of accumulated rounding
        state = CoefficientVector(state.values, k * problem.dt)
        if k in record_at:
            history.snapshots.append(state)
    return history


def evaluate(state: CoefficientVector, mesh: Mesh, constants: BasisConstants, x):
    """Spline value ``U(x)`` summed over the four active basis functions."""
    x = np.asarray(x, dtype=float)
    if np.any((x < mesh.a) | (x > mesh.b)):
        raise ValueError(f"evaluation points must lie in [{mesh.a}, {mesh.b}]")
    m = np.clip(np.floor((x - mesh.a) / mesh.h).astype(int), 0, mesh.n - 1)
    total = np.zeros_like(x)
    for j in range(4):
        i = m - 1 + j
        total = total + state.values[i + 1] * centered_profile(constants, x - mesh.knot(i))
    return total[()] if total.ndim == 0 else total
