"""
Parameter sweeps and subsystem-size scaling studies.

Every sweep point (or L_A point of a scaling study) is an independent job.
Jobs may run on a thread pool; results are collected in input order, so the
output does not depend on the number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .bloch_core import BandIndex
from .entanglement import FillingSpec, gee_with_retry
from .errors import FloquetGeomError, InsufficientDataError, SizeError, SpacingError
from .models import (ModelSpec, OrdkrParams, Params, PqkcParams, SpinChainParams,
                     build_model, phase_boundary_distance)
from .qmt import DEFAULT_GRID, integrated_metric

THREADS_ENV = "FLOQUET_GEOM_THREADS"
FAMILIES = ("spin_chain", "ordkr", "pqkc")
PARAM_NAMES = {
    "spin_chain": ("mu", "omega", "delta2"),
    "ordkr": ("k1", "k2"),
    "pqkc": ("delta", "mu_chem", "j"),
}
CUSP_FACTOR = 10.0


def make_params(family: str, values: dict) -> Params:
    """Parameter record of ``family`` from a name -> value mapping."""
    if family not in FAMILIES:
        raise ValueError(f"unknown model family {family!r}")
    unknown = set(values) - set(PARAM_NAMES[family])
    if unknown:
        raise ValueError(f"parameters {sorted(unknown)} do not apply to {family}")
    if family == "spin_chain":
        omega = values.get("omega", 1.0)
        if "mu" in values:
            if "delta2" in values:
                raise ValueError("give either mu or delta2, not both")
            return SpinChainParams.from_mu(values["mu"], omega)
        return SpinChainParams(delta2=values.get("delta2", omega), omega=omega)
    if family == "ordkr":
        return OrdkrParams(k1=values["k1"], k2=values["k2"])
    return PqkcParams(delta=values["delta"], mu_chem=values["mu_chem"], j=values["j"])


def worker_count(default: int = 1) -> int:
    """Worker cap from FLOQUET_GEOM_THREADS (positive integer)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _ordered_map(fn: Callable, items: Sequence, workers: Optional[int]) -> list:
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _is_strictly_monotone(values: Sequence[float]) -> bool:
    d = np.diff(np.asarray(values, dtype=float))
    return bool(np.all(d > 0) or np.all(d < 0))


@dataclass(frozen=True)
class SweepConfig:
    model_family: str
    swept_param: str
    values: tuple
    fixed_params: dict = field(default_factory=dict)
    L: int = 200
    N: int = 200
    L_A: int = 100
    grid_size: int = DEFAULT_GRID
    renyi_lambdas: tuple = ()
    band: BandIndex = BandIndex.minus
    ordering: str = "consecutive"

    def __post_init__(self):
        if self.model_family not in FAMILIES:
            raise ValueError(f"unknown model family {self.model_family!r}")
        if self.swept_param not in PARAM_NAMES[self.model_family]:
            raise ValueError(f"{self.swept_param!r} is not a parameter of {self.model_family}")
        if len(self.values) == 0 or (len(self.values) > 1 and not _is_strictly_monotone(self.values)):
            raise ValueError("sweep values must be non-empty and strictly monotone")
        FillingSpec(self.L, self.N)
        if not 1 <= self.L_A <= self.L:
            raise SizeError(f"need 1 <= L_A <= L, got {self.L_A}")

    def params_at(self, value: float) -> Params:
        return make_params(self.model_family, {**self.fixed_params, self.swept_param: value})


@dataclass(frozen=True)
class SweepRow:
    param: float
    G: float
    critical_flag: bool
    S_A: float
    S_A0: float
    S_QG: float
    status: str = "ok"
    boundary_distance: float = math.nan
    renyi: tuple = ()


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list

    @property
    def values(self) -> np.ndarray:
        return np.array([r.param for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def _sweep_point(cfg: SweepConfig, value: float) -> SweepRow:
    nan = math.nan
    try:
        model = build_model(cfg.params_at(value))
    except (FloquetGeomError, ValueError) as exc:
        return SweepRow(value, nan, False, nan, nan, nan, f"error: {exc}")
    dist = phase_boundary_distance(model)
    status = []
    try:
        im = integrated_metric(model, cfg.grid_size)
        G, crit = im.value, im.critical_flag
    except FloquetGeomError as exc:
        G, crit = nan, dist < 1e-9
        status.append(f"G: {exc}")
    filling = FillingSpec(cfg.L, cfg.N, cfg.band, 0.0, cfg.ordering)
    try:
        res = gee_with_retry(model, filling, cfg.L_A, cfg.renyi_lambdas)
        s_a, s_a0, s_qg = res.s_a, res.s_a0, res.s_qg
        renyi = tuple((lam, res.renyi[lam], res.renyi[lam] - res.renyi0[lam]) for lam in cfg.renyi_lambdas)
        if res.k_offset != 0.0:
            status.append("offset grid")
    except FloquetGeomError as exc:
        s_a = s_a0 = s_qg = nan
        renyi = ()
        status.append(f"EE: {exc}")
    return SweepRow(value, G, crit, s_a, s_a0, s_qg, "; ".join(status) or "ok", dist, renyi)


def run_sweep(cfg: SweepConfig, workers: Optional[int] = None) -> SweepResult:
    """G and entanglement entropies at every swept value, in input order.

    Per-point failures are recorded in the row's ``status`` and never abort
    the sweep.
    """
    rows = _ordered_map(lambda v: _sweep_point(cfg, v), list(cfg.values), workers)
    return SweepResult(cfg, rows)


@dataclass(frozen=True)
class ScalingConfig:
    model_family: str
    params: dict
    L: int
    N: int
    L_A_values: tuple
    band: BandIndex = BandIndex.minus
    ordering: str = "consecutive"

    def __post_init__(self):
        FillingSpec(self.L, self.N)
        la = list(self.L_A_values)
        if not la or any(x < 1 or x > self.L for x in la) or any(b <= a for a, b in zip(la, la[1:])):
            raise SizeError("L_A values must be strictly increasing within [1, L]")

    def model(self) -> ModelSpec:
        return build_model(make_params(self.model_family, self.params))


@dataclass(frozen=True)
class ScalingRow:
    L_A: int
    s_a: float
    s_a0: float
    s_qg: float


def run_scaling(cfg: ScalingConfig, workers: Optional[int] = None) -> list:
    """Entropies versus subsystem size; one :class:`ScalingRow` per L_A."""
    model = cfg.model()
    filling = FillingSpec(cfg.L, cfg.N, cfg.band, 0.0, cfg.ordering)

    def job(L_A):
        r = gee_with_retry(model, filling, L_A)
        return ScalingRow(L_A, r.s_a, r.s_a0, r.s_qg)

    return _ordered_map(job, list(cfg.L_A_values), workers)


@dataclass(frozen=True)
class FitReport:
    kind: str
    slope: float
    intercept: float
    r_squared: float
    plateau: Optional[float] = None
    plateau_spread: Optional[float] = None


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def _rows_xy(rows: Iterable[ScalingRow]) -> tuple[np.ndarray, np.ndarray]:
    rows = list(rows)
    return np.array([r.L_A for r in rows], dtype=float), np.array([r.s_qg for r in rows])


def fit_area_law(rows: Sequence[ScalingRow], L: int, window_fraction: float = 0.25) -> FitReport:
    """Plateau of S_QG over L_A in [window_fraction * L, L / 2].

    slope/intercept/r_squared describe a fit against ln sin(pi L_A / L) over
    the same window (slope ~ 0 for an area law).
    """
    la, s = _rows_xy(rows)
    mask = (la >= window_fraction * L) & (la <= L / 2)
    if mask.sum() < 5:
        raise InsufficientDataError(f"need >= 5 rows in [{window_fraction * L}, {L / 2}], got {int(mask.sum())}")
    sw = s[mask]
    slope, intercept, r2 = _linear_fit(np.log(np.sin(math.pi * la[mask] / L)), sw)
    return FitReport("area_law", slope, intercept, r2, float(np.mean(sw)), float(np.max(sw) - np.min(sw)))


def fit_log_law(rows: Sequence[ScalingRow], L: int) -> FitReport:
    """Least squares of S_QG against ln sin(pi L_A / L) for L_A in [L/10, 9L/10]."""
    la, s = _rows_xy(rows)
    mask = (la >= L / 10) & (la <= 9 * L / 10)
    if mask.sum() < 8:
        raise InsufficientDataError(f"need >= 8 rows in [L/10, 9L/10], got {int(mask.sum())}")
    slope, intercept, r2 = _linear_fit(np.log(np.sin(math.pi * la[mask] / L)), s[mask])
    return FitReport("log_law", slope, intercept, r2)


def _uniform_step(values: np.ndarray) -> float:
    if len(values) < 7:
        raise SpacingError("need at least 7 sweep points")
    d = np.diff(values)
    step = float(np.mean(d))
    if np.max(np.abs(d - step)) > 1e-6 * abs(step):
        raise SpacingError("sweep values are not uniformly spaced")
    return step


def _local_peaks(score: np.ndarray, threshold: float) -> list[int]:
    # both neighbours must carry a score, so peaks at the sweep edges are not resolved
    peaks = []
    for i in range(1, len(score) - 1):
        left, right = score[i - 1], score[i + 1]
        if not (np.isfinite(left) and np.isfinite(right)):
            continue
        if score[i] > threshold and score[i] >= left and score[i] > right:
            peaks.append(i)
    return peaks


def _merge_peaks(peaks: list[int], score: np.ndarray, max_gap: int = 2) -> list[int]:
    """One index per group of peaks at most ``max_gap`` grid steps apart (highest score wins)."""
    groups: list[list[int]] = []
    for i in peaks:
        if groups and i - groups[-1][-1] <= max_gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [max(g, key=lambda j: score[j]) for g in groups]


def _second_difference(y: np.ndarray, step: float) -> np.ndarray:
    out = np.full(len(y), np.nan)
    out[1:-1] = (y[:-2] - 2 * y[1:-1] + y[2:]) / step ** 2
    return out


def detect_cusps(sweep: SweepResult, column: str = "S_QG", factor: float = CUSP_FACTOR) -> list[float]:
    """Swept values where S_QG has a kink.

    A kink is a local maximum of |s[i-1] - 2 s[i] + s[i+1]| / step^2 exceeding
    ``factor`` times the median of that quantity over the sweep. Peaks within
    two grid steps of each other count as one kink.
    """
    x = sweep.values
    step = _uniform_step(x)
    second = np.abs(_second_difference(sweep.column(column), step))
    valid = np.isfinite(second)
    if not valid.any():
        return []
    median = float(np.median(second[valid]))
    score = np.where(valid, second, -math.inf)
    peaks = _merge_peaks(_local_peaks(score, factor * median), score)
    return [float(x[i]) for i in peaks]


def detect_spikes(sweep: SweepResult, factor: float = CUSP_FACTOR) -> list[float]:
    """Swept values where G has a divergence-like spike.

    The score is the negative second difference of log G, so it does not
    depend on the overall scale of G. Exactly at a gap closing the gridded G
    drops to its regular part, which splits a spike into two peaks one step
    either side of the boundary; peaks within two steps are merged. Only
    local maxima of G itself count.
    """
    x = sweep.values
    step = _uniform_step(x)
    g = sweep.column("G")
    with np.errstate(divide="ignore", invalid="ignore"):
        second = -_second_difference(np.log(g), step)
    valid = np.isfinite(second)
    if not valid.any():
        return []
    median = float(np.median(np.abs(second[valid])))
    score = np.where(valid, second, -math.inf)
    # near-zeros of G also curve log G sharply; a spike must be a local maximum of G
    maxima = [i for i in _local_peaks(score, factor * median) if g[i] >= g[i - 1] and g[i] >= g[i + 1]]
    return [float(x[i]) for i in _merge_peaks(maxima, score)]

