"""``becwall`` command-line front end.

Subcommands::

    becwall solve    --lambda 1 --eps 0.2 --out p.csv --report r.json
    becwall reduced  --lambda 1 --out red.csv
    becwall validate --profile p.csv --report r.json
    becwall sweep    --lambda 1 --eps-list 0.4 0.2 0.1 0.05 --outdir runs/
    becwall spectrum --lambda 2 --eps 0.1 --side left

Exit status: 0 success, 1 solver failure, 2 a validation boolean is false,
64 usage error.  Relative output paths resolve against $BECWALL_OUTPUT_DIR
when it is set.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bvp import SolverConfig, solve_heteroclinic
from .errors import BecWallError, MalformedFile, NoConvergence, SchemaMismatch, SingularJacobian
from .io import profile_table, read_profile, write_json, write_profile, write_reduced
from .model import ModelParams, analytic_spectrum, equilibrium, linearize_slowfast
from .singular import critical_manifold_point, solve_reduced
from .validation import rate_study, validate_profile

__all__ = ["RunConfig", "build_parser", "parse_config", "run", "main"]

log = logging.getLogger("becwall")

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_VALIDATION = 2
EXIT_USAGE = 64
OUTPUT_DIR_ENV = "BECWALL_OUTPUT_DIR"
COMMANDS = ("solve", "reduced", "validate", "sweep", "spectrum")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    lam: float | None = None
    eps: float | None = None
    coupling: float | None = None
    L: float | None = None
    n: int | None = None
    tol: float | None = None
    out: Path | None = None
    report: Path | None = None
    profile: Path | None = None
    outdir: Path | None = None
    eps_list: tuple[float, ...] = ()
    workers: int = 1
    side: str = "both"
    fmt: str = "csv"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.fmt!r}")
        if self.command in ("solve", "spectrum") and (self.eps is None) == (self.coupling is None):
            raise UsageError("give exactly one of --eps / --coupling")

    def params(self) -> ModelParams:
        if self.eps is not None:
            return ModelParams.from_eps(self.lam, self.eps)
        return ModelParams(self.lam, self.coupling)

    def solver(self) -> SolverConfig:
        kw = {}
        if self.L is not None:
            kw["L"] = self.L
        if self.n is not None:
            kw["n"] = self.n
        if self.tol is not None:
            kw["newton_tol"] = self.tol
        return SolverConfig(**kw)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _output_path(p: str | None, default: str | None) -> Path | None:
    name = p if p is not None else default
    if name is None or name == "-":
        return None if name is None else Path("-")
    path = Path(name)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="becwall", description="Two-component condensate domain walls near weak segregation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def physical(p, need_eps=True):
        p.add_argument("--lambda", dest="lam", type=float, required=True, help="ratio lambda >= 1")
        if need_eps:
            g = p.add_mutually_exclusive_group(required=True)
            g.add_argument("--eps", type=float, help="eps = sqrt(coupling - 1)")
            g.add_argument("--coupling", type=float, help="coupling Lambda > 1")

    def solver_flags(p):
        p.add_argument("--L", type=float, help="half-length of the slow domain")
        p.add_argument("--n", type=int, help="number of mesh nodes (odd)")
        p.add_argument("--tol", type=float, help="Newton residual tolerance")

    def fmt_flag(p):
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    p = sub.add_parser("solve", help="compute one wall")
    physical(p)
    solver_flags(p)
    p.add_argument("--out", help="profile file (default profile.csv)")
    p.add_argument("--report", help="validation JSON (default report.json)")
    fmt_flag(p)

    p = sub.add_parser("reduced", help="solve the eps = 0 problem")
    physical(p, need_eps=False)
    p.add_argument("--L", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--out", help="reduced solution file (default reduced.csv)")
    fmt_flag(p)

    p = sub.add_parser("validate", help="validate a stored profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--report", help="validation JSON (default: standard output)")

    p = sub.add_parser("sweep", help="rate study over a list of eps")
    physical(p, need_eps=False)
    solver_flags(p)
    p.add_argument("--eps-list", type=float, nargs="+", required=True)
    p.add_argument("--outdir", help="output directory (default .)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    fmt_flag(p)

    p = sub.add_parser("spectrum", help="end-state eigenvalues, analytic and numerical")
    physical(p)
    p.add_argument("--side", choices=("left", "right", "both"), default="both")
    p.add_argument("--out", help="JSON file (default: standard output)")
    return parser


def parse_config(argv) -> tuple[RunConfig, int]:
    """Parse ``argv`` into a config and a verbosity count; raises UsageError."""
    ns = build_parser().parse_args(argv)
    cmd = ns.command
    get = lambda k, d=None: getattr(ns, k, d)  # noqa: E731
    defaults = {"solve": "profile.csv", "reduced": "reduced.csv"}
    cfg = RunConfig(
        command=cmd,
        lam=get("lam"),
        eps=get("eps"),
        coupling=get("coupling"),
        L=get("L"),
        n=get("n"),
        tol=get("tol"),
        out=_output_path(get("out"), defaults.get(cmd)),
        report=_output_path(get("report"), "report.json" if cmd == "solve" else None),
        profile=Path(ns.profile) if get("profile") else None,
        outdir=_output_path(get("outdir"), "." if cmd == "sweep" else None),
        eps_list=tuple(get("eps_list") or ()),
        workers=get("workers", 1),
        side=get("side", "both"),
        fmt=get("fmt", "csv"),
    )
    if cfg.workers < 1:
        raise UsageError("--workers must be positive")
    return cfg, ns.verbose


def _save_profile(path: Path, profile, fmt: str) -> None:
    if fmt == "csv":
        write_profile(path, profile)
        return
    p = profile.params
    payload = {
        "lambda": p.lam,
        "coupling": p.coupling,
        "eps": p.eps,
        "L": profile.mesh.L,
        "n": profile.mesh.n,
        "center": profile.center,
        "columns": {k: np.asarray(v).tolist() for k, v in profile_table(profile).items()},
    }
    write_json(path, payload)


def _numerical_eigenvalues(side: str, params: ModelParams) -> list[float]:
    ev = np.linalg.eigvals(linearize_slowfast(equilibrium(side), params))
    return sorted((float(e.real) for e in ev), reverse=True)


def spectrum_payload(params: ModelParams, side: str) -> dict:
    sides = ("left", "right") if side == "both" else (side,)
    out = {"lambda": params.lam, "coupling": params.coupling, "eps": params.eps, "sides": {}}
    for s in sides:
        spec = analytic_spectrum(s, params)
        analytic = list(spec.eigenvalues)
        numerical = _numerical_eigenvalues(s, params)
        # pair each analytic value with the closest numerical one
        pool = list(numerical)
        matched = []
        for a in analytic:
            k = int(np.argmin([abs(a - b) for b in pool]))
            matched.append(pool.pop(k))
        rel = max(abs(a - b) / abs(a) for a, b in zip(analytic, matched))
        out["sides"][s] = {
            "analytic": analytic,
            "numerical": matched,
            "eigendirections": [list(d) for d in spec.eigendirections],
            "max_relative_error": rel,
        }
    return out


def _cmd_solve(cfg: RunConfig) -> int:
    profile = solve_heteroclinic(cfg.params(), cfg.solver())
    _save_profile(cfg.out, profile, cfg.fmt)
    report = validate_profile(profile)
    write_json(cfg.report, report.to_dict())
    log.info("wrote %s and %s", cfg.out, cfg.report)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _cmd_reduced(cfg: RunConfig) -> int:
    kw = {}
    if cfg.L is not None:
        kw["L"] = cfg.L
    if cfg.n is not None:
        kw["n"] = cfg.n
    reduced = solve_reduced(cfg.lam, **kw)
    if cfg.fmt == "csv":
        write_reduced(cfg.out, reduced)
    else:
        w1, w2 = critical_manifold_point(reduced.phi1, reduced.phi2, reduced.lam)
        write_json(
            cfg.out,
            {
                "lambda": reduced.lam,
                "L": reduced.L,
                "n": int(reduced.x.size),
                "columns": {
                    "x": reduced.x.tolist(),
                    "phi1": reduced.phi1.tolist(),
                    "phi2": reduced.phi2.tolist(),
                    "w1": w1.tolist(),
                    "w2": w2.tolist(),
                },
            },
        )
    return EXIT_OK


def _cmd_validate(cfg: RunConfig) -> int:
    report = validate_profile(read_profile(cfg.profile))
    write_json(cfg.report, report.to_dict())
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _fmt_eps(e: float) -> str:
    return repr(float(e)).replace(".", "p")


def _cmd_sweep(cfg: RunConfig) -> int:
    study = rate_study(cfg.lam, cfg.eps_list, cfg.solver(), workers=cfg.workers)
    outdir = cfg.outdir
    outdir.mkdir(parents=True, exist_ok=True)
    # single writer: workers only return profiles
    for eps, prof in zip(study.eps_list, study.profiles):
        _save_profile(outdir / f"profile_eps{_fmt_eps(eps)}.{cfg.fmt}", prof, cfg.fmt)
    write_json(outdir / "rate_study.json", study.to_dict())
    passed = all(validate_profile(p).passed for p in study.profiles)
    return EXIT_OK if passed else EXIT_VALIDATION


def _cmd_spectrum(cfg: RunConfig) -> int:
    write_json(cfg.out, spectrum_payload(cfg.params(), cfg.side))
    return EXIT_OK


_HANDLERS = {
    "solve": _cmd_solve,
    "reduced": _cmd_reduced,
    "validate": _cmd_validate,
    "sweep": _cmd_sweep,
    "spectrum": _cmd_spectrum,
}


def run(config: RunConfig) -> int:
    """Execute one command and map failures onto exit codes."""
    try:
        return _HANDLERS[config.command](config)
    except (NoConvergence, SingularJacobian) as exc:
        print(f"becwall: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (MalformedFile, SchemaMismatch, FileNotFoundError, IsADirectoryError) as exc:
        print(f"becwall: bad input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # bad parameters: eps outside the envelope, lam < 1, ...
        print(f"becwall: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BecWallError as exc:
        print(f"becwall: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main(argv=None) -> int:
    try:
        cfg, verbose = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"becwall: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(name)s: %(message)s")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
