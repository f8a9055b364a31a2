"""
Command-line front end.

    floquet-geom qmt --model spin-chain --mu 0
    floquet-geom gee --model pqkc --delta 0.5pi --mu-chem 0.25pi --j 5pi --L 400 --N 400 --LA 200
    floquet-geom sweep --model ordkr --k2 0.5pi --sweep k1:0.01pi:5pi:0.01pi --out fig.csv
    floquet-geom check

Exit codes: 0 success, 1 usage error, 2 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import sweep as sweep_mod
from .bloch_core import BandIndex
from .entanglement import FillingSpec, gee, gee_with_retry, trace_identity_check
from .errors import FloquetGeomError
from .models import (OrdkrParams, PqkcParams, SpinChainParams, build_model, ordkr_unitary_check,
                     pqkc_unitary_check, spin_chain_G_analytic)
from .qmt import DEFAULT_GRID, integrated_metric, winding_number

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

MODEL_FAMILIES = {"spin-chain": "spin_chain", "ordkr": "ordkr", "pqkc": "pqkc"}
PARAM_FLAGS = {"mu": "mu", "omega": "omega", "delta2": "delta2", "k1": "k1", "k2": "k2",
               "delta": "delta", "mu_chem": "mu_chem", "j": "j"}
REQUIRED = {"spin_chain": (("mu", "delta2"),), "ordkr": (("k1",), ("k2",)),
            "pqkc": (("delta",), ("mu_chem",), ("j",))}

_PI_RE = re.compile(r"^\s*([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*$")


class UsageError(Exception):
    pass


def split_pi(token: str) -> tuple[float, bool]:
    """Parse ``token`` as (coefficient, has_pi_suffix); ``0.5pi`` -> (0.5, True)."""
    m = _PI_RE.match(token)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        return sign * float(m.group(2) or 1.0), True
    try:
        value = float(token)
    except ValueError:
        raise UsageError(f"not a number: {token!r}") from None
    return value, False


def parse_real(token: str) -> float:
    """Decimal, or a multiple of pi written with a ``pi`` suffix."""
    coef, has_pi = split_pi(token)
    value = coef * math.pi if has_pi else coef
    if not math.isfinite(value):
        raise UsageError(f"not a finite number: {token!r}")
    return value


def parse_range(text: str) -> tuple[str, tuple]:
    """``param:start:stop:step`` -> (param, values), stop included when on the grid.

    If all three numbers carry a ``pi`` suffix the grid is built in units of
    pi and scaled at the end, so that e.g. 1pi lands exactly on pi.
    """
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"--sweep expects param:start:stop:step, got {text!r}")
    name = parts[0].strip().replace("-", "_")
    parsed = [split_pi(p) for p in parts[1:]]
    if all(has for _, has in parsed):
        (a, _), (b, _), (s, _) = parsed
        scale = math.pi
    else:
        a, b, s = (parse_real(p) for p in parts[1:])
        scale = 1.0
    if s == 0 or not all(math.isfinite(v) for v in (a, b, s)) or (b - a) * s < 0:
        raise UsageError(f"--sweep: step must be nonzero and point from start to stop, got {text!r}")
    n = int(math.floor((b - a) / s + 1e-9)) + 1
    return name, tuple((a + i * s) * scale for i in range(n))


@dataclass
class RunConfig:
    subcommand: str
    model_family: Optional[str] = None
    params: dict = field(default_factory=dict)
    L: int = 400
    N: Optional[int] = None
    L_A: Optional[int] = None
    grid: int = DEFAULT_GRID
    lambdas: tuple = ()
    sweep_param: Optional[str] = None
    sweep_values: tuple = ()
    offset_grid: bool = False
    out: Optional[str] = None
    format: str = "csv"

    @property
    def filled(self) -> int:
        return self.L if self.N is None else self.N


_EPILOG = ("Real values accept a pi suffix (0.5pi, -pi, 2*pi); write negative values as --k2=-0.5pi. "
           "Exit status: 0 ok, 1 usage error, 2 numerical failure.")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", choices=sorted(MODEL_FAMILIES), help="model family")
    param_help = {
        "mu": "spin chain: (delta2 - omega)/delta1",
        "omega": "spin chain: drive frequency (default 1)",
        "delta2": "spin chain: static field, alternative to --mu",
        "k1": "ORDKR: first kick strength",
        "k2": "ORDKR: second kick strength",
        "delta": "PQKC: pairing",
        "mu-chem": "PQKC: chemical potential",
        "j": "PQKC: hopping",
    }
    for flag, text in param_help.items():
        common.add_argument(f"--{flag}", type=str, help=text)
    common.add_argument("--L", type=int, default=400, help="number of unit cells (default 400)")
    common.add_argument("--N", type=int, help="filled momenta (default L)")
    common.add_argument("--LA", type=int, help="subsystem size in unit cells")
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="BZ grid for G, a power of two")
    common.add_argument("--lambda", dest="lambdas", action="append", default=[], type=str,
                        help="Renyi order, repeatable")
    common.add_argument("--sweep", type=str, help="param:start:stop:step")
    common.add_argument("--offset-grid", action="store_true", help="shift momenta by pi/L")
    common.add_argument("--out", type=str, help="write to this file instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = _Parser(prog="floquet-geom", description="Quantum metric and geometric entanglement of Floquet-Bloch bands.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    helps = {
        "qmt": "integrated quantum metric G",
        "winding": "winding number of a chiral model",
        "gee": "entanglement entropies S_A, S_A0, S_QG",
        "scaling": "entropies versus subsystem size (--sweep LA:start:stop:step)",
        "sweep": "G and entropies along a parameter sweep",
        "check": "built-in invariant suite",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text, epilog=_EPILOG)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Validated RunConfig; raises UsageError naming the offending flag."""
    ns = _build_parser().parse_args(argv)
    cfg = RunConfig(subcommand=ns.subcommand, L=ns.L, N=ns.N, L_A=ns.LA, grid=ns.grid,
                    offset_grid=ns.offset_grid, out=ns.out, format=ns.format)
    if cfg.subcommand == "check":
        return cfg
    if ns.model is None:
        raise UsageError("--model is required")
    cfg.model_family = MODEL_FAMILIES[ns.model]
    allowed = sweep_mod.PARAM_NAMES[cfg.model_family]
    for key in PARAM_FLAGS:
        raw = getattr(ns, key)
        if raw is None:
            continue
        flag = "--" + key.replace("_", "-")
        if key not in allowed:
            raise UsageError(f"{flag} does not apply to --model {ns.model}")
        try:
            cfg.params[key] = parse_real(raw)
        except UsageError as exc:
            raise UsageError(f"{flag}: {exc}") from None
    try:
        cfg.lambdas = tuple(parse_real(x) for x in ns.lambdas)
    except UsageError as exc:
        raise UsageError(f"--lambda: {exc}") from None
    if ns.sweep is not None:
        cfg.sweep_param, cfg.sweep_values = parse_range(ns.sweep)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    sub = cfg.subcommand
    if cfg.grid < 16 or cfg.grid & (cfg.grid - 1):
        raise UsageError(f"--grid must be a power of two >= 16, got {cfg.grid}")
    if cfg.L < 2:
        raise UsageError(f"--L must be >= 2, got {cfg.L}")
    if not 1 <= cfg.filled <= cfg.L:
        raise UsageError(f"--N must lie in [1, L], got {cfg.N}")
    if cfg.L_A is not None and not 1 <= cfg.L_A <= cfg.L:
        raise UsageError(f"--LA must lie in [1, L], got {cfg.L_A}")
    for lam in cfg.lambdas:
        if not lam > 0 or lam == 1:
            raise UsageError(f"--lambda must be positive and != 1, got {lam!r}")
    if sub == "sweep":
        if cfg.sweep_param is None:
            raise UsageError("sweep needs --sweep param:start:stop:step")
        if cfg.sweep_param not in sweep_mod.PARAM_NAMES[cfg.model_family]:
            raise UsageError(f"--sweep: {cfg.sweep_param!r} is not a parameter of this model")
    elif sub == "scaling":
        if cfg.sweep_param is not None:
            if cfg.sweep_param.lower() != "la":
                raise UsageError("scaling takes --sweep LA:start:stop:step")
            la = cfg.sweep_values
            if any(x != int(x) or not 1 <= x <= cfg.L for x in la) or any(b <= a for a, b in zip(la, la[1:])):
                raise UsageError("--sweep LA values must be increasing integers in [1, L]")
    elif cfg.sweep_param is not None:
        raise UsageError(f"--sweep is not used by {sub}")
    if sub in ("gee", "sweep") and cfg.L_A is None:
        raise UsageError("--LA is required")
    swept = cfg.sweep_param if sub == "sweep" else None
    for group in REQUIRED[cfg.model_family]:
        if not any(p in cfg.params or p == swept for p in group):
            raise UsageError(f"--{group[0].replace('_', '-')} is required for this model")
    if cfg.model_family == "spin_chain" and "mu" in cfg.params and "delta2" in cfg.params:
        raise UsageError("give either --mu or --delta2")
    if sub == "sweep":
        for v in cfg.sweep_values[:1]:
            _params(cfg, {cfg.sweep_param: v})
    else:
        _params(cfg)


def _params(cfg: RunConfig, extra: Optional[dict] = None):
    try:
        return sweep_mod.make_params(cfg.model_family, {**cfg.params, **(extra or {})})
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None


def format_value(v) -> str:
    """Shortest round-trip text for floats, lower-case booleans."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(columns: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "json":
        records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(records, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def _filling(cfg: RunConfig) -> FillingSpec:
    offset = math.pi / cfg.L if cfg.offset_grid else 0.0
    return FillingSpec(cfg.L, cfg.filled, BandIndex.minus, offset)


def _renyi_columns(lambdas) -> list[str]:
    cols = []
    for lam in lambdas:
        tag = format_value(lam)
        cols += [f"S_A_renyi_{tag}", f"S_A0_renyi_{tag}", f"S_QG_renyi_{tag}"]
    return cols


def _run_qmt(cfg):
    im = integrated_metric(build_model(_params(cfg)), cfg.grid)
    return ["value_G", "critical_flag", "grid"], [[im.value, im.critical_flag, im.grid_size]]


def _run_winding(cfg):
    wr = winding_number(build_model(_params(cfg)))
    return ["w", "raw"], [[wr.w, wr.raw]]


def _run_gee(cfg):
    model = build_model(_params(cfg))
    fill = _filling(cfg)
    res = gee(model, fill, cfg.L_A, cfg.lambdas) if cfg.offset_grid else gee_with_retry(model, fill, cfg.L_A, cfg.lambdas)
    row = [res.s_a, res.s_a0, res.s_qg, res.k_offset]
    for lam in cfg.lambdas:
        row += [res.renyi[lam], res.renyi0[lam], res.renyi[lam] - res.renyi0[lam]]
    return ["S_A", "S_A0", "S_QG", "k_offset"] + _renyi_columns(cfg.lambdas), [row]


def _run_scaling(cfg):
    la = tuple(int(x) for x in cfg.sweep_values) if cfg.sweep_param else tuple(range(1, cfg.L + 1))
    sc = sweep_mod.ScalingConfig(cfg.model_family, dict(cfg.params), cfg.L, cfg.filled, la)
    rows = sweep_mod.run_scaling(sc)
    return ["L_A", "S_A", "S_A0", "S_QG"], [[r.L_A, r.s_a, r.s_a0, r.s_qg] for r in rows]


def _run_sweep(cfg):
    sc = sweep_mod.SweepConfig(cfg.model_family, cfg.sweep_param, cfg.sweep_values, dict(cfg.params),
                               L=cfg.L, N=cfg.filled, L_A=cfg.L_A, grid_size=cfg.grid,
                               renyi_lambdas=cfg.lambdas)
    result = sweep_mod.run_sweep(sc)
    cols = ["param", "value_G", "critical_flag", "S_A", "S_A0", "S_QG", "status"] + _renyi_columns(cfg.lambdas)
    rows = []
    for r in result.rows:
        row = [r.param, r.G, r.critical_flag, r.S_A, r.S_A0, r.S_QG, r.status]
        renyi = {lam: (a, b) for lam, a, b in r.renyi}
        for lam in cfg.lambdas:
            s, sqg = renyi.get(lam, (math.nan, math.nan))
            row += [s, s - sqg, sqg]
        rows.append(row)
    return cols, rows


def check_suite() -> list[tuple[str, bool, str]]:
    """Built-in invariants: (name, passed, detail) per check."""
    rng = np.random.default_rng(12345)
    out = []

    dev = max(ordkr_unitary_check(OrdkrParams(*rng.uniform(0.1, 5 * math.pi, 2)), rng.uniform(-math.pi, math.pi))
              for _ in range(50))
    out.append(("ordkr unitary product", dev <= 1e-12, f"max dev {dev:.2e}"))
    dev = max(pqkc_unitary_check(PqkcParams(*rng.uniform(0.1, 2 * math.pi, 3)), rng.uniform(-math.pi, math.pi))
              for _ in range(50))
    out.append(("pqkc unitary product", dev <= 1e-12, f"max dev {dev:.2e}"))

    models = [build_model(SpinChainParams.from_mu(0.9)), build_model(OrdkrParams(4.5 * math.pi, 0.5 * math.pi)),
              build_model(PqkcParams(math.pi / 2, math.pi / 4, 5 * math.pi))]
    worst = 0.0
    for model in models:
        for n in range(1, 9):
            for la in range(1, 9):
                worst = max(worst, trace_identity_check(model, FillingSpec(8, n), la))
    out.append(("trace identity L=8", worst <= 1e-10, f"max dev {worst:.2e}"))

    worst = 0.0
    for mu in (0.0, 0.3, -0.5, 0.9, 1.5, -2.0, 3.0):
        g = integrated_metric(build_model(SpinChainParams.from_mu(mu))).value
        worst = max(worst, abs(g - spin_chain_G_analytic(mu)))
    out.append(("spin chain G closed form", worst <= 1e-8, f"max dev {worst:.2e}"))

    ok = all(abs(winding_number(build_model(SpinChainParams.from_mu(mu))).w) == (1 if abs(mu) < 1 else 0)
             for mu in (-2.0, -0.5, 0.5, 2.0))
    out.append(("spin chain winding", ok, "|w| = 1 inside, 0 outside"))
    return out


def _run_check(cfg):
    results = check_suite()
    lines = "".join(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n" for name, ok, detail in results)
    return lines, all(ok for _, ok, _ in results)


def run(cfg: RunConfig) -> int:
    """Dispatch a validated config; returns the process exit code."""
    try:
        if cfg.subcommand == "check":
            text, ok = _run_check(cfg)
            _emit(text, cfg.out)
            return EXIT_OK if ok else EXIT_NUMERIC
        handler = {"qmt": _run_qmt, "winding": _run_winding, "gee": _run_gee,
                   "scaling": _run_scaling, "sweep": _run_sweep}[cfg.subcommand]
        columns, rows = handler(cfg)
    except FloquetGeomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(render(columns, rows, cfg.format), cfg.out)
    return EXIT_OK


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return run(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
