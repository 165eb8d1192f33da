"""The eps = 0 skeleton of the wall.

At eps = 0 the fast pair (w1, w2) is slaved to the angle through the
critical manifold, and the angle obeys the scalar first-order problem

    phi' = -(1 / (2 lam)) sin(2 phi) / sqrt(1 + (1/lam^2 - 1) cos^2 phi),

which runs from pi/2 at x = -inf to 0 at x = +inf.  Its translate is
fixed by phi(0) = pi/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .errors import DegenerateRadius, MeshTooCoarse
from .model import CartesianProfile, Mesh, ModelParams, SlowFastProfile

__all__ = [
    "ReducedSolution",
    "critical_manifold_point",
    "reduced_rhs",
    "solve_reduced",
    "singular_lift",
    "composite_guess",
    "reduced_energy_integral",
    "reduced_energy_quadrature",
    "default_reduced_mesh",
]

REDUCED_NODES = 4801
RK4_LOCAL_TOL = 1e-9


def critical_manifold_point(phi1, phi2, lam: float):
    """(w1, w2) on the critical manifold above the slow point (phi1, phi2)."""
    c2 = np.cos(phi1) ** 2
    s2 = np.sin(phi1) ** 2
    inv = 1.0 / lam**2
    w1 = (np.square(phi2) + (inv + 1.0) * s2 * c2) / (2.0 * (1.0 + (inv - 1.0) * c2))
    w2 = np.zeros_like(w1)
    if np.ndim(w1) == 0:
        return float(w1), 0.0
    return w1, w2


def reduced_rhs(phi1, lam: float):
    stiff = 1.0 + (1.0 / lam**2 - 1.0) * np.cos(phi1) ** 2
    out = -np.sin(2.0 * phi1) / (2.0 * lam) / np.sqrt(stiff)
    return float(out) if np.ndim(out) == 0 else out


def _rhs_scalar(phi: float, a: float, b: float) -> float:
    # a = 1/(2 lam), b = 1/lam^2 - 1
    c = math.cos(phi)
    return -a * math.sin(2.0 * phi) / math.sqrt(1.0 + b * c * c)


def _rk4_step(y: float, h: float, a: float, b: float) -> float:
    k1 = _rhs_scalar(y, a, b)
    k2 = _rhs_scalar(y + 0.5 * h * k1, a, b)
    k3 = _rhs_scalar(y + 0.5 * h * k2, a, b)
    k4 = _rhs_scalar(y + h * k3, a, b)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True, eq=False)
class ReducedSolution:
    """Reduced heteroclinic phi(x) and phi'(x) on a mesh containing x = 0."""

    x: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    lam: float

    def __post_init__(self):
        for name in ("x", "phi1", "phi2"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def L(self) -> float:
        return float(self.x[-1])

    def angle(self, x) -> np.ndarray:
        """Interpolate phi1 at arbitrary x, continuing with the linear tail laws
        e^{-x} on the right and e^{x/lam} on the left beyond the mesh."""
        x = np.asarray(x, dtype=float)
        spline = CubicSpline(self.x, self.phi1)
        out = np.empty_like(x)
        lo, hi = self.x[0], self.x[-1]
        inside = (x >= lo) & (x <= hi)
        out[inside] = spline(x[inside])
        right = x > hi
        out[right] = self.phi1[-1] * np.exp(-(x[right] - hi))
        left = x < lo
        out[left] = math.pi / 2 - (math.pi / 2 - self.phi1[0]) * np.exp((x[left] - lo) / self.lam)
        return out


def default_reduced_mesh(lam: float) -> tuple[float, int]:
    return 12.0 * max(1.0, lam), REDUCED_NODES


def solve_reduced(
    lam: float,
    L: float | None = None,
    n: int = REDUCED_NODES,
    tol: float = RK4_LOCAL_TOL,
) -> ReducedSolution:
    """Integrate the reduced problem outward from phi(0) = pi/4 with classical RK4.

    Every step is checked against two half steps; a difference above
    ``tol`` raises :class:`MeshTooCoarse`.
    """
    if lam < 1.0:
        raise ValueError("lam must be >= 1")
    if L is None:
        L = default_reduced_mesh(lam)[0]
    if L <= 0:
        raise ValueError("half-length must be positive")
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and at least 3")
    x = np.linspace(-L, L, n)
    mid = n // 2
    x[mid] = 0.0
    a, b = 1.0 / (2.0 * lam), 1.0 / lam**2 - 1.0
    phi = np.empty(n)
    phi[mid] = math.pi / 4
    for start, stop, step in ((mid, n - 1, 1), (mid, 0, -1)):
        for i in range(start, stop, step):
            j = i + step
            h = x[j] - x[i]
            y = phi[i]
            full = _rk4_step(y, h, a, b)
            half = _rk4_step(_rk4_step(y, 0.5 * h, a, b), 0.5 * h, a, b)
            err = abs(full - half) * 16.0 / 15.0
            if not err <= tol:
                raise MeshTooCoarse(
                    f"local RK4 error {err:.3e} > {tol:.1e} at x = {x[j]:.4g} (h = {abs(h):.3g})"
                )
            phi[j] = full
    return ReducedSolution(x, phi, reduced_rhs(phi, lam), float(lam))


def singular_lift(reduced: ReducedSolution) -> SlowFastProfile:
    """Lift (phi1, phi2) onto the critical manifold (eps = 0, so no params)."""
    w1, w2 = critical_manifold_point(reduced.phi1, reduced.phi2, reduced.lam)
    return SlowFastProfile(Mesh(reduced.x), w1, w2, reduced.phi1, reduced.phi2, params=None)


def composite_guess(
    reduced: ReducedSolution, params: ModelParams, mesh: Mesh | None = None
) -> CartesianProfile:
    """Leading-order wall: reduced angle, radius pulled in by eps^2 w1 on M0.

    ``mesh`` defaults to the reduced mesh; beyond the reduced domain the
    angle continues with its exponential tail laws.
    """
    if params.lam != reduced.lam:
        raise ValueError("reduced solution and params disagree on lam")
    if mesh is None:
        mesh = Mesh(reduced.x)
    if mesh.n == reduced.x.size and np.array_equal(mesh.nodes, reduced.x):
        phi1, phi2 = np.array(reduced.phi1), np.array(reduced.phi2)
    else:
        phi1 = reduced.angle(mesh.nodes)
        phi2 = reduced_rhs(phi1, reduced.lam)
    w1, _ = critical_manifold_point(phi1, phi2, reduced.lam)
    R = 1.0 - params.eps**2 * w1
    if np.any(R <= 0):
        raise DegenerateRadius("eps too large for the leading-order radius")
    u, v = R * np.cos(phi1), R * np.sin(phi1)
    u[0], v[0], u[-1], v[-1] = 0.0, 1.0, 1.0, 0.0
    return CartesianProfile(mesh, u, v, params)


def reduced_energy_integral(lam: float) -> float:
    """Integral of sin^2(2 phi) over the line, (4/3)(1 - lam^3)/(1 - lam^2).

    Written as 4(1 + lam + lam^2) / (3(1 + lam)), which is regular at lam = 1.
    A single division keeps integer lam exact to the last bit (lam = 2 gives
    the float nearest 28/9).
    """
    if lam < 1.0:
        raise ValueError("lam must be >= 1")
    return 4.0 * (1.0 + lam + lam * lam) / (3.0 * (1.0 + lam))


def reduced_energy_quadrature(reduced: ReducedSolution) -> float:
    """Composite Simpson of sin^2(2 phi) over the reduced mesh."""
    return float(simpson(np.sin(2.0 * reduced.phi1) ** 2, x=reduced.x))
