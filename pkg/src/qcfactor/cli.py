"""Command-line frontend.

Subcommands
-----------
convert   tensor <-> dilatation with ellipticity and det check
verify    residual campaign for a catalog entry over several grids
solve     Dirichlet solve on a disk through the factorization pipeline
heat      space-time residual of the heat kernel

Coefficient grammar (``--nu``, and the argument of ``radial:``/``horizontal:``)::

    <v> | const:<v> | table:<path>

``table:`` reads a two-column CSV ``t,nu`` (optional header) and
interpolates linearly, holding end values.  Tensor grammar (``--tensor``)::

    identity | spiral | radial:<coef> | horizontal:<coef>
    | const:<v> | const:<a11>,<a12>,<a22>

``const:<v>`` is the constant volume-preserving tensor with ``nu = v``.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 divergence.
Reports go to stdout as JSON and, with ``--out DIR``, to files there.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .disk_solver import SolveOptions, SolverDivergence, factorize, map_for_tensor
from .domains import DomainDescriptor
from .exact_solutions import HeatKernel, catalog
from .fields import Nonlinearity
from .serialize import dumps, fmt, write_csv
from .tensor_beltrami import (ConductivityTensor, TensorError, ellipticity_constant,
                              horizontal_tensor, mu_from_tensor, radial_tensor, spiral_tensor,
                              tensor_from_mu, volume_preserving_coefficient)
from .verifier import GridSpec, convergence_order, heat_residual, random_bumps, strong_residual
from .verifier import weak_residual

__all__ = ["main", "RunConfig", "parse_coefficient", "parse_tensor", "parse_nonlinearity",
           "parse_h_list", "thread_count", "EXIT_PASS", "EXIT_FAIL", "EXIT_USAGE",
           "EXIT_DIVERGENCE"]

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_DIVERGENCE = 0, 1, 2, 3
ORDER_RANGE = (1.8, 2.2)
DEFAULT_NU = "const:0.70710678118654757"
DEFAULT_HS = "1/64,1/128,1/256"
DEFAULT_TIMES = "0.5,1,2"
SINGLE_GRID_WARNING = "order needs at least three grids"


class UsageError(Exception):
    """Bad command-line input; maps to exit code 2."""


# ---------------------------------------------------------------------------
# mini-languages
# ---------------------------------------------------------------------------
def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip())) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def parse_h_list(text: str) -> tuple[float, ...]:
    """``"1/64,1/128"`` -> ``(0.015625, 0.0078125)``."""
    hs = tuple(_number(t) for t in text.split(",") if t.strip())
    if not hs or any(not h > 0 for h in hs):
        raise UsageError(f"grid spacings must be positive: {text!r}")
    return hs


@dataclass(frozen=True)
class TableProfile:
    """Piecewise-linear profile read from a ``t,nu`` CSV."""

    t: np.ndarray
    nu: np.ndarray

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.t, self.nu)

    @classmethod
    def load(cls, path: str) -> "TableProfile":
        try:
            data = np.genfromtxt(path, delimiter=",", comments="#", dtype=float)
        except OSError as exc:
            raise UsageError(f"cannot read table {path!r}: {exc}") from None
        data = np.atleast_2d(data)
        if data.shape[1] < 2:
            raise UsageError(f"table {path!r} needs two columns t,nu")
        data = data[np.all(np.isfinite(data[:, :2]), axis=1), :2]
        if data.shape[0] < 2 or np.any(np.diff(data[:, 0]) <= 0):
            raise UsageError(f"table {path!r} needs >= 2 rows with increasing t")
        if np.any(np.abs(data[:, 1]) >= 1):
            raise UsageError(f"table {path!r} has |nu| >= 1")
        return cls(data[:, 0].copy(), data[:, 1].copy())


def parse_coefficient(text: str):
    """``<v>``, ``const:<v>`` or ``table:<path>`` -> float or callable."""
    text = text.strip()
    if text.startswith("table:"):
        return TableProfile.load(text[len("table:"):])
    if text.startswith("const:"):
        text = text[len("const:"):]
    v = _number(text)
    if not abs(v) < 1:
        raise UsageError(f"coefficient must satisfy |nu| < 1, got {v}")
    return v


def parse_tensor(text: str, sign: int = 1) -> ConductivityTensor:
    """Build a tensor from the ``--tensor`` grammar in the module docstring."""
    text = text.strip()
    kind, _, arg = text.partition(":")
    try:
        if kind == "identity" and not arg:
            return ConductivityTensor.identity()
        if kind == "spiral" and not arg:
            return spiral_tensor()
        if kind == "radial" and arg:
            return radial_tensor(parse_coefficient(arg), sign, name=text)
        if kind == "horizontal" and arg:
            return horizontal_tensor(parse_coefficient(arg), sign, name=text)
        if kind == "const" and arg:
            parts = arg.split(",")
            if len(parts) == 3:
                return ConductivityTensor.constant(*(_number(p) for p in parts), name=text)
            if len(parts) == 1:
                mu = complex(volume_preserving_coefficient(parse_coefficient(arg), sign))
                return ConductivityTensor.from_mu(mu, name=text)
    except TensorError as exc:
        raise UsageError(f"invalid tensor {text!r}: {exc}") from None
    raise UsageError(f"unknown tensor {text!r}")


def parse_nonlinearity(text: str) -> Nonlinearity:
    """``zero``, ``exp``, ``exp:<a>`` or ``power:<q>``."""
    kind, _, arg = text.strip().partition(":")
    try:
        if kind in ("zero", "exp") and not arg:
            return Nonlinearity(kind)
        if kind == "exp" and arg:
            return Nonlinearity.exp_scaled(_number(arg))
        if kind == "power" and arg:
            return Nonlinearity.power(_number(arg))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown nonlinearity {text!r}")


def thread_count(n_tasks: int) -> int:
    """Worker count, capped by ``QCFACTOR_THREADS`` when set."""
    raw = os.environ.get("QCFACTOR_THREADS")
    cap = os.cpu_count() or 1
    if raw is not None and raw.strip():
        try:
            cap = int(raw)
        except ValueError:
            raise UsageError(f"QCFACTOR_THREADS must be an integer, got {raw!r}") from None
        if cap < 1:
            raise UsageError("QCFACTOR_THREADS must be >= 1")
    return max(1, min(cap, n_tasks))


def _parallel_map(func, items):
    items = list(items)
    workers = thread_count(len(items))
    if workers == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))  # results keep input order


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's report.

    ``to_text`` gives a canonical ``key=value`` form (fields in declaration
    order, floats with 17 significant digits); ``from_text`` inverts it.
    """

    command: str
    problem: str = ""
    tensor: str = ""
    nu: str = ""
    f: str = ""
    hs: tuple[float, ...] = ()
    margin: float | None = None
    rho: float = 0.9
    center: tuple[float, float] = (0.0, 0.0)
    q: float = 0.5
    r: float = 0.25
    lam: float = 1.0
    a: float = 1.0
    sign: int = 1
    times: tuple[float, ...] = ()
    scheme: str = "picard"
    relaxation: float = 0.8
    max_iter: int = 2000
    tol: float = 1e-8
    closure: str = "cubic"
    bound: float | None = None
    bumps: int = 0
    seed: int = 0
    out: str | None = None
    values: tuple[float, ...] = ()

    _FLOAT_TUPLES = ("hs", "center", "times", "values")
    _FLOATS = ("margin", "rho", "q", "r", "lam", "a", "relaxation", "tol", "bound")
    _INTS = ("sign", "max_iter", "bumps", "seed")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                s = "none"
            elif f.name in self._FLOAT_TUPLES:
                s = ",".join(fmt(x) for x in v)
            elif f.name in self._FLOATS:
                s = fmt(v)
            else:
                s = str(v)
            lines.append(f"{f.name}={s}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        kwargs = {}
        names = {f.name for f in dataclasses.fields(cls)}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, sep, s = line.partition("=")
            if not sep or key not in names:
                raise ValueError(f"bad config line {line!r}")
            if s == "none":
                v = None
            elif key in cls._FLOAT_TUPLES:
                v = tuple(float(x) for x in s.split(",")) if s else ()
            elif key in cls._FLOATS:
                v = float(s)
            elif key in cls._INTS:
                v = int(s)
            else:
                v = s
            kwargs[key] = v
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# report helpers
# ---------------------------------------------------------------------------
def _emit(cfg: RunConfig, report: dict, files: dict[str, str] | None = None) -> None:
    text = dumps(report) + "\n"
    sys.stdout.write(text)
    if cfg.out:
        out = Path(cfg.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.json").write_text(text, encoding="utf-8")
            (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
            for name, body in (files or {}).items():
                (out / name).write_text(body, encoding="utf-8", newline="")
        except OSError as exc:
            raise UsageError(f"cannot write reports to {cfg.out!r}: {exc}") from None


def _h_label(h: float) -> str:
    n = 1.0 / h
    return str(int(round(n))) if abs(n - round(n)) < 1e-9 else fmt(h)


def _order_summary(reports, bound: float | None):
    if len(reports) >= 3:
        est = convergence_order(reports)
        order, warning = est.order, est.warning
        order_ok = ORDER_RANGE[0] <= order <= ORDER_RANGE[1]
    else:
        order, warning, order_ok = None, SINGLE_GRID_WARNING, True
    final = min(reports, key=lambda r: r.h)
    bound_ok = bound is None or final.linf <= bound
    return order, warning, bool(order_ok and bound_ok)


def _campaign_report(cfg: RunConfig, pid: str, reports, extra_rows=None) -> tuple[dict, dict, bool]:
    order, warning, ok = _order_summary(reports, cfg.bound)
    results, files = [], {}
    for k, rep in enumerate(reports):
        row = {"id": pid, "h": rep.h, "linf": rep.linf, "l2": rep.l2, "order": order,
               "pass": ok, "count": rep.count}
        if extra_rows:
            row.update(extra_rows[k])
        results.append(row)
        files[f"residual_{pid}_h{_h_label(rep.h)}.csv"] = write_csv(
            None, ("x", "y", "value"), rep.samples)
    report = {"command": cfg.command, "config": cfg.to_dict(), "results": results,
              "summary": {"order": order, "warning": warning, "pass": ok}}
    if warning:
        print(f"warning: {warning}", file=sys.stderr)
    return report, files, ok


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_convert(args) -> int:
    if args.mu is not None:
        mu = complex(args.mu[0], args.mu[1])
        if not abs(mu) < 1:
            raise UsageError(f"|mu| = {abs(mu):.17g} must be < 1")
        a11, a12, a22 = (float(v) for v in tensor_from_mu(mu))
        back = complex(mu_from_tensor(a11, a12, a22))
        K = ellipticity_constant(mu)
        print(f"a11={fmt(a11)} a12={fmt(a12)} a22={fmt(a22)}")
        print(f"K={fmt(K)}")
        print(f"det={fmt(a11 * a22 - a12 * a12)}")
        print(f"mu_check={fmt(back.real)},{fmt(back.imag)}")
        return EXIT_PASS
    a11, a12, a22 = args.tensor
    try:
        mu = complex(mu_from_tensor(a11, a12, a22))
    except (TensorError, ValueError) as exc:
        raise UsageError(f"invalid tensor: {exc}") from None
    print(f"mu={fmt(mu.real)},{fmt(mu.imag)}")
    print(f"K={fmt(ellipticity_constant(mu))}")
    print(f"det={fmt(a11 * a22 - a12 * a12)}")
    return EXIT_PASS


def _catalog_for(cfg: RunConfig):
    nu = parse_coefficient(cfg.nu or DEFAULT_NU)
    try:
        return catalog(r=cfg.r, lam=cfg.lam, q=cfg.q, nu=nu, a=cfg.a, sign=cfg.sign), nu
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _verify_config(args) -> RunConfig:
    return RunConfig(command="verify", problem=args.id, tensor=args.tensor or "",
                     nu=args.nu or "", hs=parse_h_list(args.h), margin=args.margin, q=args.q,
                     r=args.r, lam=args.lam, a=args.a, sign=args.sign,
                     times=parse_h_list(args.t) if args.id == "heat-kernel" else (),
                     bound=args.bound, bumps=args.bumps, seed=args.seed, out=args.out)


def _default_margin(cfg: RunConfig, base: float) -> float:
    """Explicit ``--margin``, else ``base`` widened to 2h for coarse grids."""
    if cfg.margin is not None:
        return cfg.margin
    return max(base, 2 * max(cfg.hs))


def _heat_campaign(cfg: RunConfig, A: ConductivityTensor, pid: str) -> int:
    u = HeatKernel(cfg.a)
    margin = _default_margin(cfg, 0.1)
    domain = DomainDescriptor.disk(1.0)

    def run(h):
        grid = GridSpec(domain, h, margin, singular_points=(0j,))
        return heat_residual(u, A, cfg.a, Nonlinearity.zero(), grid, cfg.times, problem_id=pid)

    reports = _parallel_map(run, cfg.hs)
    report, files, ok = _campaign_report(cfg, pid, reports)
    _emit(cfg, report, files)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    cfg = _verify_config(args)
    return run_verify(cfg)


def run_verify(cfg: RunConfig) -> int:
    entries, nu = _catalog_for(cfg)
    if cfg.problem not in entries:
        raise UsageError(f"unknown catalog id {cfg.problem!r}; choose from {', '.join(entries)}")
    entry = entries[cfg.problem]
    if cfg.problem == "dead-zone":
        if cfg.tensor and not cfg.tensor.startswith("horizontal"):
            raise UsageError("dead-zone is verified under the horizontal tensor built from --nu")
        A = horizontal_tensor(nu, cfg.sign)
    else:
        A = parse_tensor(cfg.tensor, cfg.sign) if cfg.tensor else next(iter(entry.tensors.values()))()
    if entry.equation == "heat":
        if not cfg.times:
            raise UsageError("heat-kernel needs --t")
        return _heat_campaign(cfg, A, entry.id)

    margin = _default_margin(cfg, entry.margin)
    distance = None
    if "phi" in entry.extra:
        distance = entry.extra["phi"].distance

    def run(h):
        grid = GridSpec(entry.domain, h, margin, entry.singular_points, distance)
        rep = strong_residual(entry.field, A, entry.nonlinearity, grid, problem_id=entry.id)
        extra = {}
        if cfg.bumps > 0:
            bumps = random_bumps(entry.domain, cfg.bumps, seed=cfg.seed,
                                 singular_points=entry.singular_points, gap=margin)
            wv = weak_residual(entry.field, A, entry.nonlinearity, bumps, hq=h)
            extra = {"weak_relative": max(v.relative for v in wv)}
        return rep, extra

    try:
        pairs = _parallel_map(run, cfg.hs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    reports = [p[0] for p in pairs]
    report, files, ok = _campaign_report(cfg, entry.id, reports, [p[1] for p in pairs])
    _emit(cfg, report, files)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_heat(args) -> int:
    cfg = RunConfig(command="heat", problem="heat-kernel", tensor=args.tensor,
                    hs=parse_h_list(args.h), margin=args.margin, a=args.a, sign=args.sign,
                    times=parse_h_list(args.t), bound=args.bound, out=args.out)
    return run_heat(cfg)


def run_heat(cfg: RunConfig) -> int:
    if not cfg.a > 0:
        raise UsageError("--a must be positive")
    A = parse_tensor(cfg.tensor, cfg.sign)
    try:
        return _heat_campaign(cfg, A, "heat-kernel")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# boundary data accepted by ``solve --bc``: harmonic closed forms and catalog ids
_HARMONIC = {
    "re": lambda z: np.real(z),
    "im": lambda z: np.imag(z),
    "zero": lambda z: np.zeros(np.shape(z)),
}
_SOLVE_CATALOG = ("lb-disk", "lb-annulus", "lb-punctured-disk", "halfplane-log",
                  "halfplane-lambda")


def _is_identity(A: ConductivityTensor) -> bool:
    return A.structure == "constant" and abs(complex(A.mu(np.array(0.5 + 0j)))) == 0


def _boundary_data(cfg: RunConfig, f: Nonlinearity, A: ConductivityTensor):
    """Return ``(phi, exact)``; ``exact`` is None unless ``phi`` solves the problem."""
    bc = cfg.problem
    if bc in _HARMONIC or bc.startswith("const:"):
        if bc.startswith("const:"):
            c = _number(bc[len("const:"):])
            phi = lambda z: np.full(np.shape(z), c)  # noqa: E731
        else:
            phi = _HARMONIC[bc]
        # linear data solves div(A grad u) = 0 only for constant A
        linear_ok = bc == "zero" or bc.startswith("const:") or A.structure == "constant"
        return phi, (phi if f.tag == "zero" and linear_ok else None)
    if bc in _SOLVE_CATALOG:
        entries, _ = _catalog_for(cfg)
        entry = entries[bc]
        if entry.family.startswith("radial"):
            fits = A.structure == "radial" or _is_identity(A)
        else:
            fits = A.structure in ("x-only", "constant")
        return entry.field, (entry.field if fits and f == entry.nonlinearity else None)
    raise UsageError(f"unknown boundary data {bc!r}")


def cmd_solve(args) -> int:
    try:
        cx, cy = (float(v) for v in args.center.split(","))
    except ValueError:
        raise UsageError(f"--center expects x,y, got {args.center!r}") from None
    cfg = RunConfig(command="solve", problem=args.bc, tensor=args.tensor, nu=args.nu or "",
                    f=args.f, hs=parse_h_list(args.h), rho=args.rho, center=(cx, cy),
                    r=args.r, lam=args.lam, sign=args.sign, scheme=args.scheme,
                    relaxation=args.relaxation, max_iter=args.max_iter, tol=args.tol,
                    closure=args.closure, bound=args.bound, out=args.out)
    return run_solve(cfg)


def run_solve(cfg: RunConfig) -> int:
    if len(cfg.hs) != 1:
        raise UsageError("solve takes a single --h")
    f = parse_nonlinearity(cfg.f)
    A = parse_tensor(cfg.tensor, cfg.sign)
    phi, exact = _boundary_data(cfg, f, A)
    try:
        opts = SolveOptions(cfg.scheme, cfg.relaxation, cfg.max_iter, cfg.tol, cfg.hs[0],
                            cfg.closure)
        G = DomainDescriptor.disk(cfg.rho, complex(*cfg.center))
        map_for_tensor(A)
    except (ValueError, NotImplementedError) as exc:
        raise UsageError(str(exc)) from None
    try:
        res = factorize(A, G, f, phi, opts)
    except SolverDivergence as exc:
        best = exc.best
        report = {"command": cfg.command, "config": cfg.to_dict(),
                  "results": [{"id": cfg.problem, "h": cfg.hs[0], "linf": None, "l2": None,
                               "order": None, "pass": False}],
                  "solver": best.header(), "error": str(exc)}
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        _emit(cfg, report, {"best_T.csv": best.to_csv(None)})
        return EXIT_DIVERGENCE
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    T = res.T
    w = T.active_points
    tv = T.active_values
    z = w if res.omega.family == "identity" else res.omega.inverse(w)
    row = {"id": cfg.problem, "h": T.h, "linf": None, "l2": None, "order": None}
    if exact is not None:
        err = tv - np.asarray(exact(z), dtype=float)
        row["linf"] = float(np.max(np.abs(err)))
        row["l2"] = float(np.sqrt(T.h * T.h * np.sum(err * err)))
    checks = {"converged": T.converged}
    if f.tag == "zero":
        theta = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
        ring = T.center + T.rho * np.exp(1j * theta)
        data = np.asarray(T.boundary(ring), dtype=float)
        slack = 1e-10 * max(1.0, float(np.max(np.abs(data))))
        checks["max_principle"] = bool(np.min(tv) >= np.min(data) - slack
                                       and np.max(tv) <= np.max(data) + slack)
    if f.tag != "zero" and T.monotone is not None:
        checks["monotone"] = T.monotone
    ok = all(checks.values())
    if cfg.bound is not None:
        ok = ok and row["linf"] is not None and row["linf"] <= cfg.bound
    row["pass"] = bool(ok)
    report = {"command": cfg.command, "config": cfg.to_dict(), "results": [row],
              "solver": T.header(), "checks": checks, "map": res.omega.family}
    files = {
        "T.csv": T.to_csv(None),
        "u.csv": write_csv(None, ("x", "y", "value"), (z.real, z.imag, tv)),
        "iterations.csv": write_csv(None, ("iteration", "residual"),
                                    (np.arange(len(T.residual_log)), T.residual_log)),
    }
    _emit(cfg, report, files)
    return EXIT_PASS if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qcfactor", description="Quasiconformal factorization toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("convert", help="tensor <-> dilatation")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--mu", nargs=2, type=float, metavar=("RE", "IM"))
    g.add_argument("--tensor", nargs=3, type=float, metavar=("A11", "A12", "A22"))
    c.set_defaults(func=cmd_convert)

    v = sub.add_parser("verify", help="residual campaign for a catalog entry")
    v.add_argument("id")
    v.add_argument("--tensor", default=None, help="tensor; default: first of the family")
    v.add_argument("--nu", default=None, help=f"coefficient (default {DEFAULT_NU})")
    v.add_argument("--h", default=DEFAULT_HS)
    v.add_argument("--margin", type=float, default=None, help="default: catalog margin")
    v.add_argument("--q", type=float, default=0.5)
    v.add_argument("--r", type=float, default=0.25)
    v.add_argument("--lam", type=float, default=1.0)
    v.add_argument("--a", type=float, default=1.0)
    v.add_argument("--t", default=DEFAULT_TIMES, help="times for heat-kernel")
    v.add_argument("--sign", type=int, choices=(-1, 1), default=1)
    v.add_argument("--bound", type=float, default=None, help="max final L-inf residual")
    v.add_argument("--bumps", type=int, default=0, help="also report a weak residual")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="Dirichlet solve through the factorization")
    s.add_argument("--f", default="exp")
    s.add_argument("--bc", default="lb-disk")
    s.add_argument("--tensor", default="identity")
    s.add_argument("--nu", default=None)
    s.add_argument("--rho", type=float, default=0.9)
    s.add_argument("--center", default="0,0")
    s.add_argument("--h", default="1/64")
    s.add_argument("--r", type=float, default=0.25)
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--sign", type=int, choices=(-1, 1), default=1)
    s.add_argument("--scheme", choices=("picard", "newton"), default="picard")
    s.add_argument("--relaxation", type=float, default=0.8)
    s.add_argument("--max-iter", type=int, default=2000)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--closure", choices=("cubic", "sw"), default="cubic")
    s.add_argument("--bound", type=float, default=None, help="max L-inf error vs exact")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    h = sub.add_parser("heat", help="heat kernel space-time residual")
    h.add_argument("--a", type=float, default=1.0)
    h.add_argument("--tensor", default="identity")
    h.add_argument("--t", default=DEFAULT_TIMES)
    h.add_argument("--h", default=DEFAULT_HS)
    h.add_argument("--margin", type=float, default=None)
    h.add_argument("--sign", type=int, choices=(-1, 1), default=1)
    h.add_argument("--bound", type=float, default=None)
    h.add_argument("--out", default=None)
    h.set_defaults(func=cmd_heat)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
