"""Model parameters, state containers and the two coordinate systems.

The wall solves

    lam^2 u'' = u^3 - u + Lam v^2 u,     v'' = v^3 - v + Lam u^2 v

with (u, v) -> (0, 1) on the left and (1, 0) on the right.  With
eps = sqrt(Lam - 1) and the slow variable x = eps z the same problem is
written either in Cartesian form or in the polar slow-fast variables
(w1, w2, phi1, phi2), where u = R cos(phi1), v = R sin(phi1) and
R = 1 - eps^2 w1.

Everything in here is a pure function of its inputs.  The state
containers accept scalars or equally shaped numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Literal

import numpy as np

from .errors import AngleOutOfRange, DegenerateRadius, EpsilonZero

__all__ = [
    "Frame",
    "ModelParams",
    "CartesianState",
    "SlowFastState",
    "EquilibriumSpec",
    "Mesh",
    "CartesianProfile",
    "SlowFastProfile",
    "mesh_derivative",
    "rhs_cartesian",
    "hamiltonian_residual",
    "cartesian_to_slowfast",
    "slowfast_to_cartesian",
    "slowfast_rhs",
    "linearize_slowfast",
    "analytic_spectrum",
    "LEFT_EQUILIBRIUM",
    "RIGHT_EQUILIBRIUM",
    "equilibrium",
]

# Angles this far outside [0, pi/2] are clamped silently.
ANGLE_CLAMP_TOL = 1e-12

Side = Literal["left", "right"]


class Frame(str, Enum):
    """Which independent variable the derivatives of a state refer to."""

    FAST_Z = "fast-z"
    SLOW_X = "slow-x"


@dataclass(frozen=True)
class ModelParams:
    """Stiffness ratio ``lam`` >= 1 and coupling ``coupling`` = Lambda > 1.

    ``eps`` = sqrt(coupling - 1) is filled in when omitted.  Passing it
    explicitly (see ``from_eps``) keeps the exact value the caller asked
    for instead of sqrt((1 + eps^2) - 1).
    """

    lam: float
    coupling: float
    eps: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.lam) or self.lam < 1.0:
            raise ValueError(f"lam must be >= 1, got {self.lam!r}")
        if not math.isfinite(self.coupling) or self.coupling < 1.0:
            raise ValueError(f"coupling must be > 1, got {self.coupling!r}")
        if self.coupling == 1.0 or self.eps == 0.0:
            raise EpsilonZero("coupling = 1 is the eps = 0 limit")
        if self.eps is None:
            object.__setattr__(self, "eps", math.sqrt(self.coupling - 1.0))
        elif abs(self.eps**2 - (self.coupling - 1.0)) > 8 * np.finfo(float).eps * self.coupling:
            raise ValueError("eps^2 must equal coupling - 1")

    @classmethod
    def from_eps(cls, lam: float, eps: float) -> "ModelParams":
        if eps == 0.0:
            raise EpsilonZero("eps = 0 has no finite-coupling model")
        if not eps > 0.0:
            raise ValueError(f"eps must be positive, got {eps!r}")
        return cls(float(lam), 1.0 + float(eps) ** 2, float(eps))


@dataclass(frozen=True)
class CartesianState:
    u: float | np.ndarray
    v: float | np.ndarray
    du: float | np.ndarray = 0.0
    dv: float | np.ndarray = 0.0
    frame: Frame = Frame.FAST_Z


@dataclass(frozen=True)
class SlowFastState:
    """Polar slow-fast coordinates: w2 = eps dw1/dx and phi2 = dphi1/dx."""

    w1: float | np.ndarray
    w2: float | np.ndarray
    phi1: float | np.ndarray
    phi2: float | np.ndarray

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.phi1, self.phi2], dtype=float)

    @classmethod
    def from_array(cls, y) -> "SlowFastState":
        return cls(*(float(c) for c in y))


LEFT_EQUILIBRIUM = SlowFastState(0.0, 0.0, math.pi / 2, 0.0)
RIGHT_EQUILIBRIUM = SlowFastState(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class EquilibriumSpec:
    side: str
    eigenvalues: tuple[float, float, float, float]
    eigendirections: tuple[tuple[float, float, float, float], ...]


def _freeze(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform symmetric mesh on [-L, L] with an odd node count."""

    nodes: np.ndarray
    uniform: bool = True

    def __post_init__(self):
        nodes = _freeze(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 101:
            raise ValueError("a mesh needs at least 101 nodes")
        if nodes.size % 2 == 0:
            raise ValueError("node count must be odd so that x = 0 is a node")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        if nodes[nodes.size // 2] != 0.0 or not np.allclose(nodes, -nodes[::-1], rtol=0, atol=1e-12):
            raise ValueError("mesh must be symmetric about 0 with x = 0 as its middle node")

    @classmethod
    def uniform_on(cls, L: float, n: int) -> "Mesh":
        if L <= 0:
            raise ValueError("half-length must be positive")
        nodes = np.linspace(-L, L, n)
        nodes[n // 2] = 0.0
        return cls(nodes)

    @property
    def h(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def L(self) -> float:
        return float(self.nodes[-1])

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    def __eq__(self, other):
        return isinstance(other, Mesh) and np.array_equal(self.nodes, other.nodes)

    __hash__ = None


def mesh_derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Second-order central differences, one-sided second order at the ends."""
    return np.gradient(np.asarray(f, dtype=float), h, edge_order=2)


@dataclass(frozen=True, eq=False)
class CartesianProfile:
    """Discrete (u, v) wall in the slow variable x on a truncated mesh."""

    mesh: Mesh
    u: np.ndarray
    v: np.ndarray
    params: ModelParams
    center: float = 0.0
    bc: str = "dirichlet"
    history: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "u", _freeze(self.u))
        object.__setattr__(self, "v", _freeze(self.v))
        if self.u.shape != self.mesh.nodes.shape or self.v.shape != self.mesh.nodes.shape:
            raise ValueError("u and v must have one value per mesh node")

    @property
    def x(self) -> np.ndarray:
        return self.mesh.nodes

    @property
    def du(self) -> np.ndarray:
        return mesh_derivative(self.u, self.mesh.h)

    @property
    def dv(self) -> np.ndarray:
        return mesh_derivative(self.v, self.mesh.h)

    def state(self) -> CartesianState:
        return CartesianState(self.u, self.v, self.du, self.dv, Frame.SLOW_X)

    def __eq__(self, other):
        return (
            isinstance(other, CartesianProfile)
            and self.mesh == other.mesh
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and self.params == other.params
            and self.center == other.center
            and self.bc == other.bc
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SlowFastProfile:
    mesh: Mesh
    w1: np.ndarray
    w2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    # None for the eps = 0 lift
    params: ModelParams | None = None

    def __post_init__(self):
        for name in ("w1", "w2", "phi1", "phi2"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    def state(self) -> SlowFastState:
        return SlowFastState(self.w1, self.w2, self.phi1, self.phi2)


def rhs_cartesian(state: CartesianState, params: ModelParams):
    """Second derivatives (u'', v'') in the frame recorded on ``state``."""
    u, v = np.asarray(state.u, dtype=float), np.asarray(state.v, dtype=float)
    lam2 = params.lam**2
    if Frame(state.frame) is Frame.FAST_Z:
        Lam = params.coupling
        fu = u**3 - u + Lam * v**2 * u
        fv = v**3 - v + Lam * u**2 * v
        return fu / lam2, fv
    eps2 = params.eps**2
    fu = u**3 - u + v**2 * u + eps2 * v**2 * u
    fv = v**3 - v + u**2 * v + eps2 * u**2 * v
    return fu / (lam2 * eps2), fv / eps2


def hamiltonian_residual(state: CartesianState, params: ModelParams):
    """First integral of the wall equations; zero along exact walls.

    In the slow frame the identity is evaluated after dividing by eps^2/2,
    so the two tails of the potential read (1-u^2-v^2)^2/(2 eps^2) + u^2 v^2.
    """
    u, v = np.asarray(state.u, dtype=float), np.asarray(state.v, dtype=float)
    du, dv = np.asarray(state.du, dtype=float), np.asarray(state.dv, dtype=float)
    lam2 = params.lam**2
    gap = 1.0 - u**2 - v**2
    if Frame(state.frame) is Frame.FAST_Z:
        return (
            lam2 * du**2 / 2 + dv**2 / 2 - gap**2 / 4 - (params.coupling - 1.0) / 2 * u**2 * v**2
        )
    eps2 = params.eps**2
    return lam2 * du**2 + dv**2 - gap**2 / (2 * eps2) - u**2 * v**2


def _polar_angle(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    phi = np.arctan2(v, u)
    bad = (phi < -ANGLE_CLAMP_TOL) | (phi > math.pi / 2 + ANGLE_CLAMP_TOL)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise AngleOutOfRange(f"angle {phi.flat[i]!r} at node {i} is outside [0, pi/2]")
    return np.clip(phi, 0.0, math.pi / 2)


def cartesian_to_slowfast(profile: CartesianProfile) -> SlowFastProfile:
    u, v = profile.u, profile.v
    R = np.hypot(u, v)
    if np.any(R <= 0):
        raise DegenerateRadius(f"R vanishes at node {int(np.argmin(R))}")
    eps = profile.params.eps
    phi1 = _polar_angle(u, v)
    w1 = (1.0 - R) / eps**2
    h = profile.mesh.h
    return SlowFastProfile(
        profile.mesh,
        w1=w1,
        w2=eps * mesh_derivative(w1, h),
        phi1=phi1,
        phi2=mesh_derivative(phi1, h),
        params=profile.params,
    )


def slowfast_to_cartesian(state: SlowFastState, params: ModelParams) -> CartesianState:
    """Invert the polar map; derivatives are d/dx."""
    eps = params.eps
    w1, w2 = np.asarray(state.w1, dtype=float), np.asarray(state.w2, dtype=float)
    phi, dphi = np.asarray(state.phi1, dtype=float), np.asarray(state.phi2, dtype=float)
    R = 1.0 - eps**2 * w1
    if np.any(R <= 0):
        raise DegenerateRadius("1 - eps^2 w1 must be positive")
    c, s = np.cos(phi), np.sin(phi)
    du = -eps * w2 * c - R * dphi * s
    dv = -eps * w2 * s + R * dphi * c
    out = [R * c, R * s, du, dv]
    if all(a.ndim == 0 for a in out):
        out = [float(a) for a in out]
    return CartesianState(*out, frame=Frame.SLOW_X)


def slowfast_rhs(state: SlowFastState, params: ModelParams) -> np.ndarray:
    """d/dx of (w1, w2, phi1, phi2) for the slow-fast system."""
    eps = params.eps
    if eps == 0.0:
        raise EpsilonZero("the slow-fast field divides by eps")
    lam2inv = 1.0 / params.lam**2
    w1, w2, phi1, phi2 = (np.asarray(a, dtype=float) for a in (state.w1, state.w2, state.phi1, state.phi2))
    c, s = np.cos(phi1), np.sin(phi1)
    R = 1.0 - eps**2 * w1
    q = eps**2 * w1**2 - 2.0 * w1
    stiff = 1.0 + (lam2inv - 1.0) * c**2
    dw1 = w2 / eps
    dw2 = (-R * phi2**2 - R * q * stiff - R**3 * (lam2inv + 1.0) * s**2 * c**2) / eps
    dphi1 = phi2
    dphi2 = (
        2.0 * eps * w2 * phi2 / R
        + (1.0 - lam2inv) * q * s * c
        + R**2 * (s * c**3 - lam2inv * c * s**3)
    )
    return np.array([dw1, dw2, dphi1, dphi2], dtype=float)


def linearize_slowfast(
    state: SlowFastState,
    params: ModelParams,
    rhs: Callable[[SlowFastState, ModelParams], np.ndarray] = slowfast_rhs,
) -> np.ndarray:
    """Central-difference Jacobian of ``rhs`` at ``state``."""
    if params.eps == 0.0:
        raise EpsilonZero("the slow-fast field divides by eps")
    y0 = state.as_array()
    base = np.finfo(float).eps ** (1.0 / 3.0)
    J = np.empty((4, 4))
    for j in range(4):
        step = base * max(1.0, abs(y0[j]))
        yp, ym = y0.copy(), y0.copy()
        yp[j] += step
        ym[j] -= step
        fp = np.asarray(rhs(SlowFastState.from_array(yp), params), dtype=float)
        fm = np.asarray(rhs(SlowFastState.from_array(ym), params), dtype=float)
        J[:, j] = (fp - fm) / (yp[j] - ym[j])
    return J


def analytic_spectrum(side: Side, params: ModelParams) -> EquilibriumSpec:
    """Eigenpairs of the slow-fast linearization at an end state.

    Order is (+fast, -fast, +slow, -slow); directions carry a unit in the
    second (w2) or last (phi2) slot.
    """
    lam, eps = params.lam, params.eps
    r2 = math.sqrt(2.0)
    if side == "left":
        values = (r2 / eps, -r2 / eps, 1.0 / lam, -1.0 / lam)
        dirs = (
            (1.0 / r2, 1.0, 0.0, 0.0),
            (-1.0 / r2, 1.0, 0.0, 0.0),
            (0.0, 0.0, lam, 1.0),
            (0.0, 0.0, -lam, 1.0),
        )
    elif side == "right":
        values = (r2 / (lam * eps), -r2 / (lam * eps), 1.0, -1.0)
        dirs = (
            (lam / r2, 1.0, 0.0, 0.0),
            (-lam / r2, 1.0, 0.0, 0.0),
            (0.0, 0.0, 1.0, 1.0),
            (0.0, 0.0, -1.0, 1.0),
        )
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return EquilibriumSpec(side, values, dirs)


def equilibrium(side: Side) -> SlowFastState:
    if side == "left":
        return LEFT_EQUILIBRIUM
    if side == "right":
        return RIGHT_EQUILIBRIUM
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")
