"""Diagnostics over computed walls.

Every check here is a nodewise or integral statement about a
:class:`~becwall.model.CartesianProfile`: the first integral, sign and
monotonicity structure, distance to the critical manifold, weighted
deviation from the reduced wall, and the wall energy.  Rates in eps come
from :func:`rate_study`.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson

from .bvp import SolverConfig, solve_heteroclinic
from .errors import BecWallError
from .model import (
    CartesianProfile,
    ModelParams,
    cartesian_to_slowfast,
    hamiltonian_residual,
)
from .singular import (
    ReducedSolution,
    critical_manifold_point,
    reduced_energy_integral,
    reduced_rhs,
    solve_reduced,
)

__all__ = [
    "ValidationReport",
    "RateStudy",
    "REPORT_KEYS",
    "validate_profile",
    "weighted_deviation",
    "energy_of_profile",
    "sigma_limit",
    "rate_study",
    "SATURATION",
]

log = logging.getLogger(__name__)

# Values closer than this to their far-field limit sit below what double
# precision resolves between neighbouring nodes; strictness is not checked there.
SATURATION = 1e-11
# Tail exclusions: outer slow units for angle deviations, outer fraction for w.
ANGLE_TAIL_BAND = 2.0
W_INTERIOR_FRACTION = 0.9
# Weighted deviations are not evaluated where the decay weight drops below this.
WEIGHT_FLOOR = 1e-8

REPORT_KEYS = (
    "lambda",
    "coupling",
    "eps",
    "L",
    "n",
    "hamiltonian_sup",
    "monotone_u",
    "monotone_v",
    "disk_bound",
    "angle_decreasing",
    "phi2_negative",
    "symmetry_defect",
    "manifold_distance",
    "weighted_deviations",
    "energy",
    "sigma_ratio",
    "passed",
)


@dataclass(frozen=True)
class ValidationReport:
    lam: float
    coupling: float
    eps: float
    L: float
    n: int
    hamiltonian_sup: float
    monotone_u: bool
    monotone_v: bool
    disk_bound: bool
    angle_decreasing: bool
    phi2_negative: bool
    symmetry_defect: float | None
    manifold_distance: float | None
    weighted_deviations: dict | None
    energy: float | None
    sigma_ratio: float | None

    @property
    def passed(self) -> bool:
        return all(
            (self.monotone_u, self.monotone_v, self.disk_bound, self.angle_decreasing, self.phi2_negative)
        )

    def to_dict(self) -> dict:
        out = {
            "lambda": self.lam,
            "coupling": self.coupling,
            "eps": self.eps,
            "L": self.L,
            "n": self.n,
            "hamiltonian_sup": self.hamiltonian_sup,
            "monotone_u": self.monotone_u,
            "monotone_v": self.monotone_v,
            "disk_bound": self.disk_bound,
            "angle_decreasing": self.angle_decreasing,
            "phi2_negative": self.phi2_negative,
            "symmetry_defect": self.symmetry_defect,
            "manifold_distance": self.manifold_distance,
            "weighted_deviations": dict(self.weighted_deviations) if self.weighted_deviations else None,
            "energy": self.energy,
            "sigma_ratio": self.sigma_ratio,
            "passed": self.passed,
        }
        assert tuple(out) == REPORT_KEYS
        return out


def _strict_monotone(f: np.ndarray, increasing: bool, limits) -> bool:
    """Nodewise strict monotonicity, relaxed between nodes that both sit
    within SATURATION of a far-field limit."""
    d = np.diff(f) if increasing else -np.diff(f)
    near = np.zeros(f.shape, dtype=bool)
    for lim in limits:
        near |= np.abs(f - lim) <= SATURATION
    saturated = near[:-1] & near[1:]
    if np.all(saturated):
        return False
    return bool(np.all(d[~saturated] > 0) and np.all(d[saturated] > -SATURATION))


def _disk_bound(u: np.ndarray, v: np.ndarray, eps: float) -> bool:
    # the gap 1 - R^2 is about 2 eps^2 w ~ eps^2 u^2 v^2 on the wall
    ui, vi = u[1:-1], v[1:-1]
    r2 = ui**2 + vi**2
    resolved = eps**2 * ui**2 * vi**2 >= SATURATION
    if not np.any(resolved):
        return False
    return bool(np.all(r2[resolved] < 1.0) and np.all(r2 <= 1.0 + SATURATION))


def _phi2_negative(phi1: np.ndarray, phi2: np.ndarray) -> bool:
    near = (np.abs(phi1 - math.pi / 2) <= SATURATION) | (phi1 <= SATURATION)
    return bool(np.all(phi2[~near] < 0) and np.all(phi2[near] <= SATURATION))


def energy_of_profile(profile: CartesianProfile) -> float:
    """Wall energy, integrated in the slow variable (dz = dx/eps) by Simpson."""
    p = profile.params
    eps, lam2 = p.eps, p.lam**2
    u, v = np.asarray(profile.u), np.asarray(profile.v)
    du, dv = profile.du, profile.dv
    dens = (
        lam2 * eps * du**2 / 2
        + eps * dv**2 / 2
        + (1.0 - u**2 - v**2) ** 2 / (4 * eps)
        + eps / 2 * u**2 * v**2
    )
    return float(simpson(dens, x=profile.x))


def sigma_limit(lam: float) -> float:
    """eps -> 0 limit of energy/eps, (1/3)(1 + lam + lam^2)/(1 + lam)."""
    return reduced_energy_integral(lam) / 4.0


def _decay_weight(x: np.ndarray, lam: float, power: float = 1.0) -> np.ndarray:
    return np.minimum(np.exp(power * x / lam), np.exp(-power * x))


def weighted_deviation(profile: CartesianProfile, reduced: ReducedSolution) -> dict[str, float]:
    """Sup over the core of |profile - reduced| divided by its decay weight.

    Angles use min(e^{x/lam}, e^{-x}); w1 is compared with the critical
    manifold over the reduced wall and uses the squared weight.
    """
    lam = profile.params.lam
    if reduced.lam != lam:
        raise ValueError("reduced solution and profile disagree on lam")
    sf = cartesian_to_slowfast(profile)
    x = profile.x
    L = profile.mesh.L
    base = (np.abs(x) <= L - ANGLE_TAIL_BAND) & (x >= reduced.x[0]) & (x <= reduced.x[-1])

    wgt = _decay_weight(x, lam)
    m = base & (wgt >= WEIGHT_FLOOR)
    ref1 = reduced.angle(x[m])
    ref2 = reduced_rhs(ref1, lam)
    d1 = np.abs(sf.phi1[m] - ref1) / wgt[m]
    d2 = np.abs(sf.phi2[m] - ref2) / wgt[m]

    wgt2 = _decay_weight(x, lam, 2.0)
    mw = base & (np.abs(x) <= W_INTERIOR_FRACTION * L) & (wgt2 >= WEIGHT_FLOOR)
    r1 = reduced.angle(x[mw])
    w_ref, _ = critical_manifold_point(r1, reduced_rhs(r1, lam), lam)
    dw = np.abs(sf.w1[mw] - w_ref) / wgt2[mw]
    return {
        "phi1": float(d1.max()) if d1.size else 0.0,
        "phi2": float(d2.max()) if d2.size else 0.0,
        "w1": float(dw.max()) if dw.size else 0.0,
    }


@lru_cache(maxsize=16)
def _reduced_for(lam: float) -> ReducedSolution:
    return solve_reduced(lam)


def validate_profile(profile: CartesianProfile) -> ValidationReport:
    """Run every check on ``profile``; failures are reported, never raised."""
    p = profile.params
    lam, eps = p.lam, p.eps
    u, v = np.asarray(profile.u), np.asarray(profile.v)
    ham = hamiltonian_residual(profile.state(), p)
    ham_sup = float(np.max(np.abs(ham)))

    monotone_u = _strict_monotone(u, True, (0.0, 1.0))
    monotone_v = _strict_monotone(v, False, (0.0, 1.0))
    disk = _disk_bound(u, v, eps)

    symmetry = float(np.max(np.abs(u - v[::-1]))) if lam == 1.0 else None

    angle_ok = phi2_ok = False
    manifold = deviations = None
    try:
        sf = cartesian_to_slowfast(profile)
        angle_ok = _strict_monotone(sf.phi1, False, (0.0, math.pi / 2))
        phi2_ok = _phi2_negative(sf.phi1, sf.phi2)
        core = np.abs(profile.x) <= W_INTERIOR_FRACTION * profile.mesh.L
        w_star, _ = critical_manifold_point(sf.phi1[core], sf.phi2[core], lam)
        manifold = float(np.max(np.abs(sf.w1[core] - w_star)))
        deviations = weighted_deviation(profile, _reduced_for(lam))
    except (BecWallError, ValueError) as exc:
        log.warning("slow-fast diagnostics unavailable: %s", exc)

    energy = energy_of_profile(profile)
    return ValidationReport(
        lam=lam,
        coupling=p.coupling,
        eps=eps,
        L=profile.mesh.L,
        n=profile.mesh.n,
        hamiltonian_sup=ham_sup,
        monotone_u=monotone_u,
        monotone_v=monotone_v,
        disk_bound=disk,
        angle_decreasing=angle_ok,
        phi2_negative=phi2_ok,
        symmetry_defect=symmetry,
        manifold_distance=manifold,
        weighted_deviations=deviations,
        energy=energy,
        sigma_ratio=energy / eps,
    )


@dataclass(frozen=True)
class RateStudy:
    lam: float
    eps_list: tuple[float, ...]
    deviations: tuple[dict, ...]
    sigma_ratio: tuple[float, ...]
    sigma_limit: float
    sigma_deviation: tuple[float, ...]
    slopes: dict
    halving_ratios: dict
    profiles: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "eps_list": list(self.eps_list),
            "deviations": [dict(d) for d in self.deviations],
            "sigma_ratio": list(self.sigma_ratio),
            "sigma_limit": self.sigma_limit,
            "sigma_deviation": list(self.sigma_deviation),
            "slopes": dict(self.slopes),
            "halving_ratios": {k: list(v) for k, v in self.halving_ratios.items()},
        }


def _loglog_slope(eps, values) -> float:
    eps, values = np.asarray(eps, dtype=float), np.abs(np.asarray(values, dtype=float))
    if len(eps) < 2 or np.any(values <= 0):
        return float("nan")
    return float(np.polyfit(np.log(eps), np.log(values), 1)[0])


def _solve_point(args):
    lam, eps, config = args
    try:
        return solve_heteroclinic(ModelParams.from_eps(lam, eps), config)
    except BecWallError as exc:
        raise type(exc)(f"eps = {eps}: {exc}") from exc


def rate_study(
    lam: float,
    eps_list,
    config: SolverConfig | None = None,
    workers: int = 1,
) -> RateStudy:
    """Solve along ``eps_list`` and fit how deviations and energy approach their limits."""
    eps_list = tuple(float(e) for e in eps_list)
    if len(eps_list) < 2 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing with at least two entries")
    config = config or SolverConfig()
    jobs = [(lam, e, config) for e in eps_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            profiles = tuple(pool.map(_solve_point, jobs))
    else:
        profiles = tuple(_solve_point(j) for j in jobs)

    reduced = _reduced_for(float(lam))
    deviations = tuple(weighted_deviation(p, reduced) for p in profiles)
    sigma = tuple(energy_of_profile(p) / e for p, e in zip(profiles, eps_list))
    limit = sigma_limit(lam)
    sigma_dev = tuple(s - limit for s in sigma)

    series = {k: [d[k] for d in deviations] for k in ("phi1", "phi2", "w1")}
    series["sigma"] = list(sigma_dev)
    slopes = {k: _loglog_slope(eps_list, vals) for k, vals in series.items()}
    halving = {
        k: [float(abs(b) / abs(a)) if a != 0 else float("nan") for a, b in zip(vals, vals[1:])]
        for k, vals in series.items()
    }
    return RateStudy(
        lam=float(lam),
        eps_list=eps_list,
        deviations=deviations,
        sigma_ratio=sigma,
        sigma_limit=limit,
        sigma_deviation=sigma_dev,
        slopes=slopes,
        halving_ratios=halving,
        profiles=profiles,
    )
