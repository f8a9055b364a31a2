"""
Quantum metric of a filled two-band Floquet-Bloch band in one dimension.

In 1D the quantum geometric tensor has the single real component g_kk; the
Berry curvature vanishes identically (there is no second direction to pair
with), so only the metric is computed here. For chiral-symmetric models the
metric equals a quarter of the squared winding-angle derivative, which ties
the metric to the winding number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch_core import EPS_DEG, ChiralClass, eigenspinors
from .errors import ClassError, CriticalPointError, DegenerateError, UnknownModelError, WindowError
from .models import ModelSpec, SpinChainParams, phase_boundary_distance, spin_chain

DEFAULT_GRID = 2 ** 14
FIT_GRID = 2 ** 16
CRITICAL_TOL = 1e-9

#: Berry curvature of a 1D band; kept as a named invariant.
BERRY_CURVATURE_1D = 0.0


@dataclass(frozen=True)
class MetricSample:
    k: float
    g: float


@dataclass(frozen=True)
class IntegratedMetric:
    value: float
    grid_size: int
    critical_flag: bool


@dataclass(frozen=True)
class WindingResult:
    w: int
    raw: float


@dataclass(frozen=True)
class CriticalFit:
    exponent: float
    prefactor: float
    r_squared: float


def midpoint_grid(grid_size: int) -> np.ndarray:
    """k_j = -pi + 2 pi (j + 1/2) / n; never hits k = 0 or k = +/-pi for even n."""
    return -math.pi + 2 * math.pi * (np.arange(grid_size) + 0.5) / grid_size


def _gap_check(E: np.ndarray) -> None:
    if np.any(E <= EPS_DEG):
        raise DegenerateError(f"band touching: E = {float(np.min(E)):.3e}")


def _generic_metric(h: np.ndarray, dh: np.ndarray) -> np.ndarray:
    hx, hy, hz = h
    dx, dy, dz = dh
    E2 = hx * hx + hy * hy + hz * hz
    perp = hx * hx + hy * hy  # (E + hz)(E - hz)
    real = hx * (hz * dx - hx * dz) - hy * (hy * dz - hz * dy)
    imag = hx * dy - hy * dx
    return (real * real + E2 * imag * imag) / (4 * E2 * E2 * perp)


def _projector_metric(h: np.ndarray, dh: np.ndarray) -> np.ndarray:
    # g = |d n|^2 / 4 with n = h / |h|; valid for any two-band vector
    E2 = np.sum(h * h, axis=0)
    dh2 = np.sum(dh * dh, axis=0)
    hdh = np.sum(h * dh, axis=0)
    return (dh2 * E2 - hdh * hdh) / (4 * E2 * E2)


def _chiral_metric(h: np.ndarray, dh: np.ndarray, cls: ChiralClass) -> np.ndarray:
    a, b = cls.plane
    num = h[a] * dh[b] - h[b] * dh[a]
    E2 = h[a] * h[a] + h[b] * h[b]
    return num * num / (4 * E2 * E2)


def metric_values(model: ModelSpec, k) -> np.ndarray:
    """Vectorized g_kk over an array of momenta.

    Chiral models use their reduced formula; otherwise the generic
    two-band expression is used where E^2 - hz^2 > EPS_DEG^2, and the
    projector form |dn|^2/4 elsewhere.
    """
    k = np.asarray(k, dtype=float)
    h = model.vectors(k)
    dh = model.derivative_vectors(k)
    _gap_check(np.sqrt(np.sum(h * h, axis=0)))
    if model.chiral is not ChiralClass.none:
        g = _chiral_metric(h, dh, model.chiral)
    else:
        perp = h[0] ** 2 + h[1] ** 2
        safe = perp > EPS_DEG ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(safe, _generic_metric(h, dh), _projector_metric(h, dh))
    return np.where((g < 0) & (g >= -1e-14), 0.0, g)


def metric_at(model: ModelSpec, k: float) -> float:
    return float(metric_values(model, k))


def _fs_distance_sq(model: ModelSpec, k: float, h: float) -> float:
    ks = np.array([k - h / 2, k + h / 2])
    a, b = eigenspinors(*model.vectors(ks), -1).T
    # |a1 b2 - a2 b1| = sqrt(1 - |<a|b>|^2), exact for normalized spinors
    wedge = min(abs(a[0] * b[1] - a[1] * b[0]), 1.0)
    theta = math.asin(wedge)
    return theta * theta / (h * h)


def metric_fd_check(model: ModelSpec, k: float, dk: float) -> float:
    """Metric from the Fubini-Study distance of states dk apart.

    The two states sit at k -/+ dk/2, so the single-step estimate
    theta^2 / dk^2 (theta the geodesic angle) is even in dk. Combining the
    steps dk and dk/2 cancels the dk^2 term, which matters near small gaps
    where g varies on a scale comparable to the gap.
    """
    if not 1e-6 <= dk <= 1e-2:
        raise ValueError("dk must lie in [1e-6, 1e-2]")
    coarse = _fs_distance_sq(model, k, dk)
    fine = _fs_distance_sq(model, k, dk / 2)
    return float((4.0 * fine - coarse) / 3.0)


def integrated_metric(model: ModelSpec, grid_size: int = DEFAULT_GRID) -> IntegratedMetric:
    """G = (1/2pi) int g_kk dk by the periodic midpoint rule.

    At a phase transition the true integral diverges; the grid-regularized
    value is still returned, with ``critical_flag`` set.
    """
    if grid_size < 16 or grid_size & (grid_size - 1):
        raise ValueError("grid_size must be a power of two >= 16")
    g = metric_values(model, midpoint_grid(grid_size))
    value = float(math.fsum(g) / grid_size)
    try:
        critical = phase_boundary_distance(model) < CRITICAL_TOL
    except UnknownModelError:
        critical = False
    return IntegratedMetric(value, grid_size, critical)


def _require_chiral(model: ModelSpec) -> tuple[int, int]:
    if model.chiral is ChiralClass.none:
        raise ClassError("winding quantities need a chiral-symmetric model")
    return model.chiral.plane


def winding_angle_derivative(model: ModelSpec, k: float) -> float:
    """d phi / dk with phi = atan2(h_b, h_a) in the chiral plane (a, b)."""
    a, b = _require_chiral(model)
    kk = np.asarray(float(k))
    h = model.vectors(kk)
    dh = model.derivative_vectors(kk)
    E2 = float(h[a] ** 2 + h[b] ** 2)
    if math.sqrt(E2) <= EPS_DEG:
        raise DegenerateError("band touching")
    return float((h[a] * dh[b] - h[b] * dh[a]) / E2)


def winding_number(model: ModelSpec, grid_size: int = 2 ** 12) -> WindingResult:
    """Number of turns of (h_a, h_b) around the origin as k crosses the zone.

    Orientation: counter-clockwise in the (a, b) plane counts positive, with
    (a, b) = (x, y), (z, x), (y, z) for chiral classes z, y, x.
    """
    a, b = _require_chiral(model)
    if phase_boundary_distance(model) <= CRITICAL_TOL:
        raise CriticalPointError("winding number is undefined at a gap closing")
    h = model.vectors(midpoint_grid(grid_size))
    phi = np.arctan2(h[b], h[a])
    steps = np.diff(np.append(phi, phi[0]))
    steps = (steps + math.pi) % (2 * math.pi) - math.pi
    raw = math.fsum(steps) / (2 * math.pi)
    return WindingResult(int(round(raw)), raw)


def metric_winding_identity_check(model: ModelSpec, k: float) -> float:
    """|g_kk - (d phi/dk)^2 / 4|, with g_kk from the projector form."""
    _require_chiral(model)
    kk = np.asarray(float(k))
    h = model.vectors(kk)
    dh = model.derivative_vectors(kk)
    _gap_check(np.sqrt(np.sum(h * h, axis=0)))
    g = float(_projector_metric(h, dh))
    return abs(g - winding_angle_derivative(model, k) ** 2 / 4)


def critical_exponent_fit(
    side: str,
    window: tuple[float, float] = (1e-3, 1e-2),
    n_points: int = 8,
    grid_size: int = FIT_GRID,
    critical_mu: float = 1.0,
    omega: float = 1.0,
) -> CriticalFit:
    """Fit G ~ prefactor * |mu - mu_c|^(-exponent) for the spin chain.

    Parameters
    ----------
    side : {"above", "below"}
        Approach mu_c from larger or smaller mu.
    window : (float, float)
        Range of |mu - mu_c|, log-spaced sampling.
    critical_mu : float
        +1 or -1.
    """
    lo, hi = window
    if side not in ("above", "below"):
        raise WindowError(f"side must be 'above' or 'below', got {side!r}")
    if n_points < 8 or not (1e-4 <= lo < hi <= 0.2):
        raise WindowError(f"need >= 8 points with 1e-4 <= lo < hi <= 0.2, got {window}, n={n_points}")
    dist = np.geomspace(lo, hi, n_points)
    sign = 1.0 if side == "above" else -1.0
    G = np.array([
        integrated_metric(spin_chain(SpinChainParams.from_mu(critical_mu + sign * d, omega)), grid_size).value
        for d in dist
    ])
    x, y = np.log(dist), np.log(G)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return CriticalFit(exponent=float(-slope), prefactor=float(math.exp(intercept)), r_squared=min(max(r2, 0.0), 1.0))
