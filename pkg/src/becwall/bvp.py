"""Finite-difference Newton solver for the wall on a truncated slow domain.

Unknowns are interleaved as (u0, v0, u1, v1, ...), so the Jacobian of the
three-point discretization has two sub- and two super-diagonals and is
factored with ``scipy.linalg.solve_banded``.  The far-field limits are
imposed as Dirichlet rows; the free translate is fixed afterwards by
:func:`recenter`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgError, solve_banded
from scipy.optimize import brentq

from .errors import DegenerateRadius, MultipleCrossings, NoConvergence, SingularJacobian
from .model import CartesianProfile, Mesh, ModelParams
from .singular import composite_guess, solve_reduced

__all__ = [
    "SolverConfig",
    "NewtonRecord",
    "assemble_residual",
    "assemble_jacobian",
    "newton_solve",
    "solve_heteroclinic",
    "recenter",
    "locate_center",
    "solver_mesh",
    "EPS_ENVELOPE",
]

log = logging.getLogger(__name__)

EPS_ENVELOPE = 0.5
DEFAULT_LADDER = (0.4, 0.3, 0.2, 0.15, 0.1, 0.07, 0.05)
# left state (u, v) = (0, 1), right state (1, 0)
_BOUNDARY = (0.0, 1.0, 1.0, 0.0)


@dataclass(frozen=True)
class SolverConfig:
    """Newton/continuation settings.  ``L=None`` means 24 max(1, lam)."""

    L: float | None = None
    n: int = 2401
    newton_tol: float = 1e-10
    max_iter: int = 25
    damping: float = 0.5
    continuation_steps: tuple[float, ...] = DEFAULT_LADDER
    min_step: float = 2.0**-30

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must lie in (0, 1)")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")
        object.__setattr__(self, "continuation_steps", tuple(float(e) for e in self.continuation_steps))

    def half_length(self, lam: float) -> float:
        return float(self.L) if self.L is not None else 24.0 * max(1.0, lam)


@dataclass(frozen=True)
class NewtonRecord:
    eps: float
    converged: bool
    iterations: int
    residuals: tuple[float, ...] = field(default=())


def solver_mesh(lam: float, config: SolverConfig) -> Mesh:
    return Mesh.uniform_on(config.half_length(lam), config.n)


def _nonlinear_terms(u, v, eps2):
    fu = u**3 - u + v**2 * u + eps2 * v**2 * u
    fv = v**3 - v + u**2 * v + eps2 * u**2 * v
    return fu, fv


def _residual(u, v, h, lam, eps) -> np.ndarray:
    eps2 = eps * eps
    r = np.empty(2 * u.size)
    d2u = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    d2v = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    fu, fv = _nonlinear_terms(u[1:-1], v[1:-1], eps2)
    r[2:-2:2] = lam * lam * eps2 * d2u - fu
    r[3:-2:2] = eps2 * d2v - fv
    r[0], r[1] = u[0] - _BOUNDARY[0], v[0] - _BOUNDARY[1]
    r[-2], r[-1] = u[-1] - _BOUNDARY[2], v[-1] - _BOUNDARY[3]
    return r


def assemble_residual(profile: CartesianProfile) -> np.ndarray:
    """Interleaved residual of the discretized slow-frame system.

    Rows 2i, 2i+1 hold the u- and v-equations at node i; the first and last
    pair are the Dirichlet rows.
    """
    if not profile.mesh.uniform:
        raise ValueError("the residual assumes a uniform mesh")
    p = profile.params
    return _residual(np.asarray(profile.u), np.asarray(profile.v), profile.mesh.h, p.lam, p.eps)


def _jacobian(u, v, h, lam, eps) -> np.ndarray:
    n = u.size
    N = 2 * n
    eps2 = eps * eps
    coup = 1.0 + eps2
    a = lam * lam * eps2 / (h * h)
    b = eps2 / (h * h)
    # band storage: ab[2 + i - j, j] = J[i, j]
    ab = np.zeros((5, N))
    ui, vi = u[1:-1], v[1:-1]
    iu = np.arange(2, N - 2, 2)
    iv = iu + 1
    ab[2, iu] = -2.0 * a - (3.0 * ui**2 - 1.0 + coup * vi**2)
    ab[2, iv] = -2.0 * b - (3.0 * vi**2 - 1.0 + coup * ui**2)
    # dF_u/dv at the same node sits one column right; dF_v/du one column left
    ab[1, iv] = -2.0 * coup * ui * vi
    ab[3, iu] = -2.0 * coup * ui * vi
    # neighbours two columns away
    ab[0, iu + 2] = a
    ab[4, iu - 2] = a
    ab[0, iv + 2] = b
    ab[4, iv - 2] = b
    for k in (0, 1, N - 2, N - 1):
        ab[2, k] = 1.0
    return ab


def assemble_jacobian(profile: CartesianProfile) -> np.ndarray:
    """Analytic Jacobian of :func:`assemble_residual` in (2, 2) band storage."""
    p = profile.params
    return _jacobian(np.asarray(profile.u), np.asarray(profile.v), profile.mesh.h, p.lam, p.eps)


def banded_to_dense(ab: np.ndarray) -> np.ndarray:
    N = ab.shape[1]
    J = np.zeros((N, N))
    for d in range(-2, 3):
        row = 2 - d
        idx = np.arange(max(0, d), min(N, N + d))
        J[idx - d, idx] = ab[row, idx]
    return J


def newton_solve(guess: CartesianProfile, config: SolverConfig | None = None) -> CartesianProfile:
    """Damped Newton on the banded system until the residual sup-norm <= newton_tol.

    Steps are halved (factor ``damping``) until the residual does not grow.
    """
    config = config or SolverConfig()
    p = guess.params
    lam, eps, h = p.lam, p.eps, guess.mesh.h
    u, v = np.array(guess.u), np.array(guess.v)
    if (u[0], v[0], u[-1], v[-1]) != _BOUNDARY:
        raise ValueError("guess must satisfy the Dirichlet rows")

    r = _residual(u, v, h, lam, eps)
    norm = float(np.max(np.abs(r)))
    norms = [norm]

    def current(converged: bool) -> CartesianProfile:
        rec = NewtonRecord(eps, converged, len(norms) - 1, tuple(norms))
        prof = replace(guess, u=u, v=v, history=guess.history + (rec,))
        return prof

    for _ in range(config.max_iter):
        if norm <= config.newton_tol:
            break
        try:
            step = solve_banded((2, 2), _jacobian(u, v, h, lam, eps), -r, check_finite=False)
        except (LinAlgError, ValueError) as exc:
            raise SingularJacobian(f"banded elimination failed: {exc}", current(False), eps) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("banded elimination produced non-finite values", current(False), eps)
        t = 1.0
        while True:
            u_try = u + t * step[0::2]
            v_try = v + t * step[1::2]
            # the boundary rows give a zero step up to elimination roundoff
            u_try[0], v_try[0], u_try[-1], v_try[-1] = _BOUNDARY
            r_try = _residual(u_try, v_try, h, lam, eps)
            norm_try = float(np.max(np.abs(r_try)))
            if norm_try <= norm:
                break
            t *= config.damping
            if t < config.min_step:
                raise NoConvergence(
                    f"line search stalled at residual {norm:.3e}", current(False), eps
                )
        u, v, r, norm = u_try, v_try, r_try, norm_try
        norms.append(norm)
        log.debug("eps=%g iter=%d step=%g residual=%.3e", eps, len(norms) - 1, t, norm)

    if not norm <= config.newton_tol:
        raise NoConvergence(
            f"residual {norm:.3e} above {config.newton_tol:.1e} after {config.max_iter} iterations",
            current(False),
            eps,
        )
    out = current(True)
    try:
        center = locate_center(out)
    except (MultipleCrossings, ValueError):
        return out
    return replace(out, center=center)


def _sign_changes(d: np.ndarray) -> list[int]:
    """Indices i such that d changes sign between node i and the next nonzero node."""
    nz = np.flatnonzero(d != 0.0)
    s = np.sign(d[nz])
    flips = np.flatnonzero(s[1:] != s[:-1])
    return [int(nz[k]) for k in flips]


def locate_center(profile: CartesianProfile) -> float:
    """x where u = v: linear interpolation, refined on the cubic spline of u - v."""
    x = profile.x
    d = np.asarray(profile.u) - np.asarray(profile.v)
    flips = _sign_changes(d)
    if not flips:
        raise ValueError("u - v does not change sign")
    if len(flips) > 1:
        raise MultipleCrossings(f"u - v changes sign {len(flips)} times")
    i = flips[0]
    j = i + 1
    while d[j] == 0.0:
        j += 1
    if j > i + 1:
        # exact zero(s) between the sign change; take the middle one
        return float(x[(i + 1 + j - 1) // 2])
    x_lin = x[i] - d[i] * (x[j] - x[i]) / (d[j] - d[i])
    spline = CubicSpline(x, d)
    try:
        return float(brentq(spline, x[i], x[j], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    except ValueError:
        return float(x_lin)


def recenter(profile: CartesianProfile) -> CartesianProfile:
    """Translate the profile so that u = v at x = 0.

    Values are resampled from cubic splines; points pushed past the
    truncated domain take the Dirichlet data there.
    """
    x0 = locate_center(profile)
    if x0 == 0.0:
        return replace(profile, center=0.0)
    x = profile.x
    L = profile.mesh.L
    target = np.clip(x + x0, -L, L)
    u = CubicSpline(x, profile.u)(target)
    v = CubicSpline(x, profile.v)(target)
    u[0], v[0], u[-1], v[-1] = _BOUNDARY
    return replace(profile, u=u, v=v, center=0.0)


def solve_heteroclinic(params: ModelParams, config: SolverConfig | None = None) -> CartesianProfile:
    """Compute the centered wall for ``params``.

    The leading-order composite profile seeds Newton.  If that fails, the
    continuation ladder is walked downward from its largest rung that
    converges, each solution seeding the next, finishing at the target eps.
    """
    config = config or SolverConfig()
    lam, eps = params.lam, params.eps
    if eps > EPS_ENVELOPE:
        raise ValueError(f"eps = {eps} is outside the solver envelope eps <= {EPS_ENVELOPE}")
    reduced = solve_reduced(lam)
    mesh = solver_mesh(lam, config)
    failures = (NoConvergence, SingularJacobian, DegenerateRadius)

    history: tuple = ()
    try:
        solved = newton_solve(composite_guess(reduced, params, mesh), config)
    except failures as exc:
        log.info("direct solve at eps=%g failed (%s); walking the ladder", eps, exc)
        last = getattr(exc, "profile", None)
        history = (last.history[-1],) if last is not None and last.history else (
            NewtonRecord(eps, False, 0),
        )
        solved = None

    if solved is None:
        rungs = [e for e in sorted(set(config.continuation_steps), reverse=True) if e > eps]
        prev: CartesianProfile | None = None
        for rung in rungs + [eps]:
            rung_params = params if rung == eps else ModelParams.from_eps(lam, rung)
            try:
                if prev is None:
                    guess = composite_guess(reduced, rung_params, mesh)
                else:
                    guess = replace(prev, params=rung_params, history=())
                prof = newton_solve(guess, config)
            except failures as exc:
                last = getattr(exc, "profile", None)
                rec = last.history[-1] if last is not None and last.history else NewtonRecord(rung, False, 0)
                history += (rec,)
                if prev is None and rung != eps:
                    continue
                raise NoConvergence(
                    f"continuation stalled at eps = {rung}", last if last is not None else prev, rung
                ) from exc
            history += prof.history
            prev = prof
        solved = replace(prev, history=())
    else:
        history = history + solved.history

    return replace(recenter(solved), history=history)
