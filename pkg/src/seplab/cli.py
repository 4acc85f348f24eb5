"""Command-line frontend: ``seplab <command> --potential SPEC [options]``.

Table artifacts are CSV (header row, 17 significant digits); scalar results
and verdicts are JSON validated against the versioned schemas in
``seplab/schemas``.  Without ``--out`` the primary artifact goes to stdout;
with ``--out DIR`` every artifact is written into DIR under a fixed name.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  Errors
are reported on stderr as one JSON object (schema ``seplab/error/v1``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError, NumericFailure, SeplabError
from .flow import PhasePoint, classify, integrate
from .potential import Monomial, PotentialSpec, classify_class_alpha, parse_potential
from .resum import educated_match, pade, quartic_approximant
from .separatrix import (SeparatrixResult, find_separatrix_backward, find_separatrix_shooting,
                         separatrix_series)
from .series import Fraction, evaluate_series, tail
from .timedomain import blow_up, reconstruct_time

COMMANDS = ("describe", "classify", "portrait", "separatrix", "series", "resum", "compare", "timedomain")


@dataclass
class RunConfig:
    """Validated CLI configuration; every numeric option has a default."""

    command: str
    potential: PotentialSpec
    phi0: float | None = None
    h0: float | None = None
    horizon: float | None = None
    tol: float = 1e-10
    order: int = 4
    method: str = "backward"
    out: Path | None = None
    format: str | None = None
    phi_max: float | None = None
    points: int = 201
    h0_list: list = field(default_factory=list)
    pade_order: tuple = (1, 1)
    phi_list: list = field(default_factory=list)


# -- formatting ---------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return buf.getvalue()


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("seplab").joinpath("schemas", f"{name}.v1.json").read_text()
    return json.loads(text)


def make_doc(name: str, payload: dict) -> dict:
    doc = _clean({"schema": f"seplab/{name}/v1", **payload})
    jsonschema.validate(doc, load_schema(name))
    return doc


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


class Output:
    """Collects artifacts; writes them to --out or the primary one to stdout."""

    def __init__(self, cfg: RunConfig, stdout):
        self.cfg, self.stdout = cfg, stdout
        self.files: dict[str, str] = {}
        self.primary: str | None = None

    def add(self, name: str, text: str, primary: bool = False):
        self.files[name] = text
        if primary or self.primary is None:
            self.primary = name

    def flush(self):
        if self.cfg.out is not None:
            self.cfg.out.mkdir(parents=True, exist_ok=True)
            for name, text in self.files.items():
                (self.cfg.out / name).write_text(text)
        elif self.primary is not None:
            self.stdout.write(self.files[self.primary])


def _want_csv(cfg: RunConfig, default: str) -> bool:
    return (cfg.format or default) == "csv"


# -- commands -------------------------------------------------------------

def cmd_describe(cfg: RunConfig, out: Output):
    pot = cfg.potential
    lo = pot.phi0 if cfg.phi0 is None else cfg.phi0
    hi = lo + 20.0 if cfg.phi_max is None else cfg.phi_max
    grid = np.linspace(lo, hi, cfg.points)
    with np.errstate(all="ignore"):
        rows = [(x, float(pot.v(x)), float(pot.dv(x)), float(pot.frak_v(x))) for x in grid]
    verdict = classify_class_alpha(pot)
    doc = make_doc("describe", {"potential": pot.describe(), "in_class": verdict.in_class,
                                "alpha": verdict.alpha, "lambda_inf": verdict.lambda_inf,
                                "limit": verdict.limit})
    table = to_csv(["phi", "v", "vp", "frakv"], rows)
    out.add("describe.csv", table, primary=_want_csv(cfg, "csv"))
    out.add("describe.json", dump_json(doc), primary=not _want_csv(cfg, "csv"))


def _phi0(cfg):
    return cfg.potential.phi0 if cfg.phi0 is None else cfg.phi0


def cmd_classify(cfg: RunConfig, out: Output):
    if cfg.h0 is None:
        raise ConfigError("classify needs --h0")
    phi0 = _phi0(cfg)
    res = classify(cfg.potential, PhasePoint(phi0, cfg.h0), cfg.horizon)
    doc = make_doc("classify", {"potential": cfg.potential.describe(), "phi0": phi0, "h0": cfg.h0,
                                **res.to_dict()})
    out.add("classify.json", dump_json(doc), primary=True)
    if res.trajectory is not None:
        out.add("trajectory.csv", to_csv(["phi", "h", "hprime"], res.trajectory.samples))


def _threads() -> int:
    raw = os.environ.get("SEPLAB_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SEPLAB_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("SEPLAB_THREADS must be at least 1")
    return n


def _try_separatrix(pot: PotentialSpec, phi0: float) -> SeparatrixResult | None:
    try:
        return find_separatrix_backward(pot, phi0=phi0)
    except SeplabError:
        return None


def cmd_portrait(cfg: RunConfig, out: Output):
    pot = cfg.potential
    phi0 = _phi0(cfg)
    horizon = phi0 + 10.0 if cfg.horizon is None else cfg.horizon
    sep = _try_separatrix(pot, phi0)
    if cfg.h0_list:
        h0s = list(cfg.h0_list)
    else:
        center = sep.r if sep is not None else max(float(pot.u(phi0)), 1.0) * 1.5
        h0s = [center * f for f in (0.6, 0.8, 0.9, 0.95, 0.99, 1.01, 1.05, 1.1, 1.2, 1.5)]
        u0 = float(pot.u(phi0))
        h0s = [h for h in h0s if h > u0]

    def run(h0):
        res = classify(pot, PhasePoint(phi0, h0))
        traj = res.trajectory
        if traj is None:
            traj = integrate(pot, PhasePoint(phi0, h0), horizon)
        return res, traj.samples[traj.phi <= horizon]

    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        results = list(ex.map(run, h0s))
    entries = []
    for i, (h0, (res, traj)) in enumerate(zip(h0s, results)):
        name = f"trajectory_{i:03d}.csv"
        out.add(name, to_csv(["phi", "h", "hprime"], traj))
        entries.append({"file": name, "h0": h0, "verdict": res.verdict.value})
    sep_doc = None
    if sep is not None:
        sep_traj = sep.trajectory
        m = sep_traj.phi <= horizon
        out.add("separatrix.csv", to_csv(["phi", "h", "hprime"], sep_traj.samples[m]))
        sep_doc = {"file": "separatrix.csv", "r": sep.r, "method": sep.method}
    doc = make_doc("portrait", {"potential": pot.describe(), "phi0": phi0, "horizon": horizon,
                                "separatrix": sep_doc, "trajectories": entries})
    out.add("index.json", dump_json(doc), primary=True)


def _series_separatrix(cfg: RunConfig, phi0: float, kind: str):
    pot = cfg.potential
    if kind == "series":
        s = separatrix_series(pot, cfg.order)
        fn = lambda x: evaluate_series(s, x, mode="optimal_truncation").value  # noqa: E731
        return fn(phi0), fn, "Series"
    approx = _approximant(pot)
    return float(approx(phi0)), approx, "Resum"


def cmd_separatrix(cfg: RunConfig, out: Output):
    pot = cfg.potential
    phi0 = _phi0(cfg)
    method = cfg.method
    if method in ("shoot", "shooting"):
        res = find_separatrix_shooting(pot, phi0=phi0, horizon=cfg.horizon, tol=cfg.tol)
    elif method == "backward":
        res = find_separatrix_backward(pot, phi0=phi0, seed_order=None, tol=max(cfg.tol, 1e-9))
    elif method in ("series", "resum"):
        r, fn, label = _series_separatrix(cfg, phi0, method)
        hi = phi0 + 10.0 if cfg.horizon is None else cfg.horizon
        grid = np.linspace(phi0, hi, cfg.points)
        rows = []
        for x in grid:
            try:
                rows.append((x, float(fn(x))))
            except (ValueError, ZeroDivisionError):
                rows.append((x, math.nan))
        doc = make_doc("separatrix", {"potential": pot.describe(), "r": r, "method": label,
                                      "phi0": phi0, "bracket_width": None})
        out.add("separatrix.json", dump_json(doc), primary=not _want_csv(cfg, "json"))
        out.add("separatrix.csv", to_csv(["phi", "h"], rows), primary=_want_csv(cfg, "json"))
        return
    else:
        raise ConfigError(f"unknown method {method!r}; use shoot, backward, series or resum")
    doc = make_doc("separatrix", {"potential": pot.describe(), **res.to_dict()})
    traj = res.trajectory
    out.add("separatrix.json", dump_json(doc), primary=not _want_csv(cfg, "json"))
    out.add("separatrix.csv", to_csv(["phi", "h"], traj.samples[:, :2]), primary=_want_csv(cfg, "json"))


def cmd_series(cfg: RunConfig, out: Output):
    pot = cfg.potential
    s = separatrix_series(pot, cfg.order)
    d = s.to_dict()
    terms = []
    for n, (nu, c) in enumerate(zip(_lattice(s), s.coeffs)):
        exact = str(c) if isinstance(c, Fraction) else fmt(float(c))
        terms.append({"n": n, "valuation": str(nu), "exact": exact, "value": float(c)})
    doc = make_doc("series", {"potential": pot.describe(), "basis": d["basis"], "rate": d["rate"],
                              "order": cfg.order, "prec": d["prec"],
                              "coeffs": [t["value"] for t in terms], "terms": terms})
    rows = []
    for t, c in zip(terms, s.coeffs):
        if isinstance(c, Fraction):
            rows.append((t["n"], t["valuation"], str(c.numerator), str(c.denominator), float(c)))
        else:
            rows.append((t["n"], t["valuation"], "", "", float(c)))
    out.add("series.json", dump_json(doc), primary=not _want_csv(cfg, "json"))
    out.add("series.csv", to_csv(["n", "valuation", "numerator", "denominator", "decimal"], rows),
            primary=_want_csv(cfg, "json"))


def _lattice(s):
    v0, st = s.valuation, s.lattice_step
    return [v0 + k * st for k in range(len(s.coeffs))]


def _approximant(pot: PotentialSpec):
    if isinstance(pot, Monomial) and pot.p == 1:
        b = separatrix_series(pot, 2).coeffs
        return educated_match(b[1], b[2])
    if isinstance(pot, Monomial) and pot.p == 2:
        return quartic_approximant()
    raise ConfigError("closed-form resummation is available only for monomial p=1 and p=2")


def cmd_resum(cfg: RunConfig, out: Output):
    pot = cfg.potential
    a = _approximant(pot)
    phis = cfg.phi_list or [0.0, 1.0, 2.0, 5.0, 10.0]
    kind = "educated_match" if pot.p == 1 else "quartic"
    doc = make_doc("resum", {"potential": pot.describe(), "kind": kind, "c": a.c, "s": a.s,
                             "polynomial_part": list(a.polynomial_part), "prefactor": list(a.prefactor),
                             "value_at": [{"phi": x, "value": float(a(x))} for x in phis]})
    out.add("resum.json", dump_json(doc), primary=True)


def cmd_compare(cfg: RunConfig, out: Output):
    pot = cfg.potential
    phi0 = 0.0 if cfg.phi0 is None else cfg.phi0
    hi = 10.0 if cfg.phi_max is None else cfg.phi_max
    sep = find_separatrix_backward(pot, phi0=phi0, phi_far=max(hi, phi0) + 10.0)
    a = _approximant(pot)
    m, n = cfg.pade_order
    s = separatrix_series(pot, max(cfg.order, m + n + 1))
    lead_terms = 1 if pot.p == 1 else 2
    t = tail(s, lead_terms)
    p = pade(t, m, n)
    head = s.truncate(t.valuation)
    grid = np.linspace(phi0, hi, cfg.points)
    rows = []
    with np.errstate(all="ignore"):
        for x in grid:
            pv = float(head(x) + p(x)) if x > 0 else math.inf
            rows.append((x, float(sep.trajectory.h_at(x)), float(a(x)), pv))
    out.add("compare.csv", to_csv(["phi", "numeric", "match", "pade"], rows), primary=True)


def cmd_timedomain(cfg: RunConfig, out: Output):
    pot = cfg.potential
    phi0 = _phi0(cfg)
    if cfg.h0 is None:
        sep = find_separatrix_backward(pot, phi0=phi0,
                                       phi_far=None if cfg.horizon is None else cfg.horizon)
        traj, report = sep.trajectory, blow_up(pot, sep.trajectory, separatrix=True)
        source = "separatrix"
    else:
        res = classify(pot, PhasePoint(phi0, cfg.h0), cfg.horizon, tail_span=15.0)
        traj = res.trajectory
        report = blow_up(pot, traj, classification=res)
        source = "trajectory"
    sol = reconstruct_time(pot, traj)
    rows = zip(sol.t, sol.phi, sol.h, sol.phidot)
    doc = make_doc("blowup", {"potential": pot.describe(), "source": source, **report.to_dict()})
    out.add("timedomain.csv", to_csv(["t", "phi", "h", "phidot"], rows), primary=_want_csv(cfg, "csv"))
    out.add("blowup.json", dump_json(doc), primary=not _want_csv(cfg, "csv"))


HANDLERS = {
    "describe": cmd_describe, "classify": cmd_classify, "portrait": cmd_portrait,
    "separatrix": cmd_separatrix, "series": cmd_series, "resum": cmd_resum,
    "compare": cmd_compare, "timedomain": cmd_timedomain,
}


# -- argument parsing ---------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> tuple[int, int]:
    try:
        m, n = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected M,N, got {text!r}") from None
    return m, n


def _common(p: argparse.ArgumentParser):
    p.add_argument("--potential", required=True,
                   help="inline kind:key=val,... (custom:v=<expr>) or a JSON file {kind, params, phi0}")
    p.add_argument("--phi0", type=float, default=None, help="left edge / starting phi (default: the potential's phi0)")
    p.add_argument("--h0", type=float, default=None, help="initial h at phi0")
    p.add_argument("--horizon", type=float, default=None, help="integration horizon in phi")
    p.add_argument("--tol", type=float, default=1e-10, help="bracket / seed tolerance (default 1e-10)")
    p.add_argument("--order", type=int, default=4, help="series order (default 4)")
    p.add_argument("--method", default="backward", help="separatrix method: shoot|backward|series|resum")
    p.add_argument("--out", type=Path, default=None, help="directory for all artifacts")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="format of the stdout artifact")
    p.add_argument("--phi-max", type=float, default=None, help="right end of output grids")
    p.add_argument("--points", type=int, default=201, help="grid points for tabulated output")
    p.add_argument("--h0-list", type=_floats, default=[], help="portrait initial values, comma separated")
    p.add_argument("--pade", type=_pair, default=(1, 1), help="Pade orders M,N for compare (default 1,1)")
    p.add_argument("--phi-list", type=_floats, default=[], help="evaluation points for resum")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seplab", description="Separatrices of Hamilton-Jacobi inflaton flows")
    sub = parser.add_subparsers(dest="command", required=True)
    pot = sub.add_parser("potential", help="potential utilities")
    psub = pot.add_subparsers(dest="subcommand", required=True)
    _common(psub.add_parser("describe", help="tabulate v, v', frak_v and the class verdict"))
    for name in COMMANDS:
        _common(sub.add_parser(name))
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    command = "describe" if ns.command == "potential" else ns.command
    if ns.points < 2:
        raise ConfigError("--points must be at least 2")
    potential = parse_potential(ns.potential, None)
    if ns.phi0 is not None and ns.phi0 < potential.phi0 and command == "describe":
        raise ConfigError(f"--phi0 {ns.phi0} lies left of the potential's phi0 {potential.phi0}")
    return RunConfig(command=command, potential=potential, phi0=ns.phi0, h0=ns.h0, horizon=ns.horizon,
                     tol=ns.tol, order=ns.order, method=ns.method, out=ns.out, format=ns.format,
                     phi_max=ns.phi_max, points=ns.points, h0_list=ns.h0_list, pade_order=ns.pade,
                     phi_list=ns.phi_list)


def run(cfg: RunConfig, stdout=None) -> int:
    out = Output(cfg, stdout or sys.stdout)
    HANDLERS[cfg.command](cfg, out)
    out.flush()
    return 0


def _report(exc: Exception, code: int, stderr) -> int:
    doc = make_doc("error", {"error": type(exc).__name__, "message": str(exc), "exit_code": code})
    stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


def main(argv=None, stdout=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    ns = build_parser().parse_args(argv)
    try:
        return run(config_from_args(ns), stdout)
    except ConfigError as exc:
        return _report(exc, 2, stderr)
    except (NumericFailure, ArithmeticError) as exc:
        return _report(exc, 3, stderr)


if __name__ == "__main__":
    sys.exit(main())
