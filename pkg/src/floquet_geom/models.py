"""
Built-in driven two-band models.

Three families are provided, each as a :class:`ModelSpec` mapping the
quasimomentum k to Bloch-vector coefficients (with analytic k-derivatives):

* ``spin_chain`` -- harmonically driven XY spin chain in its rotating frame,
  chiral class sigma_y, single control parameter mu = (delta2 - omega)/delta1.
* ``ordkr`` -- on-resonance double kicked rotor with V = pi/2, chiral class
  sigma_z. U(k) = cos(K1s) cos(K2c) - i (hx sx + hy sy).
* ``pqkc`` -- periodically quenched Kitaev chain, chiral class sigma_x.
  U(k) = cos(dy) cos(dz) - i (hy sy + hz sz).

For ``ordkr`` and ``pqkc`` the coefficient vector is the sine-weighted
direction of the Floquet operator, not a quasienergy-linear Hamiltonian; it
has the same eigenvectors as U(k), which is all the geometry needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .bloch_core import BlochDerivative, BlochVector, ChiralClass
from .errors import CriticalPointError, UnknownModelError

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class SpinChainParams:
    """Driving amplitude delta1 (energy unit), z field delta2, frequency omega."""

    delta2: float
    omega: float = 1.0
    delta1: float = 1.0

    def __post_init__(self):
        if self.delta1 == 0:
            raise ValueError("delta1 must be non-zero")

    @property
    def mu(self) -> float:
        return (self.delta2 - self.omega) / self.delta1

    @classmethod
    def from_mu(cls, mu: float, omega: float = 1.0) -> "SpinChainParams":
        return cls(delta2=mu + omega, omega=omega)


@dataclass(frozen=True)
class OrdkrParams:
    k1: float
    k2: float
    v: float = math.pi / 2

    def __post_init__(self):
        if self.v != math.pi / 2:
            raise ValueError("the two-band ORDKR requires v = pi/2")


@dataclass(frozen=True)
class PqkcParams:
    delta: float
    mu_chem: float
    j: float


Params = Union[SpinChainParams, OrdkrParams, PqkcParams]
ArrayFn = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class ModelSpec:
    """A named k -> Bloch-vector map with analytic derivatives.

    ``components`` and ``derivatives`` are vectorized over k and return
    4-tuples of arrays (h0, hx, hy, hz) and (dh0, dhx, dhy, dhz).
    ``band_energy(k, s)`` gives the quasienergy of band s (before any
    reduction modulo 2 pi).
    """

    name: str
    chiral: ChiralClass
    params: Params
    components: ArrayFn = field(repr=False)
    derivatives: ArrayFn = field(repr=False)
    band_energy: Callable[[np.ndarray, int], np.ndarray] = field(repr=False)

    def bloch(self, k: float) -> BlochVector:
        return BlochVector(*(float(c) for c in self.components(np.asarray(float(k)))))

    def bloch_derivative(self, k: float) -> BlochDerivative:
        return BlochDerivative(*(float(c) for c in self.derivatives(np.asarray(float(k)))))

    def vectors(self, k) -> np.ndarray:
        """(hx, hy, hz) stacked along axis 0 for an array of k."""
        _, hx, hy, hz = self.components(np.asarray(k, dtype=float))
        return np.stack(np.broadcast_arrays(hx, hy, hz))

    def derivative_vectors(self, k) -> np.ndarray:
        _, dhx, dhy, dhz = self.derivatives(np.asarray(k, dtype=float))
        return np.stack(np.broadcast_arrays(dhx, dhy, dhz))


def spin_chain(params: SpinChainParams) -> ModelSpec:
    mu = params.mu
    h0 = params.omega / 2

    def components(k):
        zero = np.zeros_like(k)
        return h0 + zero, 0.5 * np.sin(k), zero, 0.5 * (np.cos(k) + mu)

    def derivatives(k):
        zero = np.zeros_like(k)
        return zero, 0.5 * np.cos(k), zero, -0.5 * np.sin(k)

    def band_energy(k, s):
        _, hx, _, hz = components(np.asarray(k, dtype=float))
        return h0 + int(s) * np.hypot(hx, hz)

    return ModelSpec("spin_chain", ChiralClass.chiral_y, params, components, derivatives, band_energy)


def _ordkr_angles(k, p: OrdkrParams):
    c, s = np.cos(k / 2), np.sin(k / 2)
    a1, a2 = p.k1 * s, p.k2 * c
    return c, s, a1, a2


def ordkr(params: OrdkrParams) -> ModelSpec:
    k1, k2 = params.k1, params.k2

    def components(k):
        c, s, a1, a2 = _ordkr_angles(k, params)
        ca1, sa1, sa2 = np.cos(a1), np.sin(a1), np.sin(a2)
        hx = c * ca1 * sa2 + s * sa1
        hy = s * ca1 * sa2 - c * sa1
        zero = np.zeros_like(k)
        return zero, hx, hy, zero

    def derivatives(k):
        c, s, a1, a2 = _ordkr_angles(k, params)
        dc, ds = -s / 2, c / 2
        da1, da2 = k1 * ds, k2 * dc
        ca1, sa1, ca2, sa2 = np.cos(a1), np.sin(a1), np.cos(a2), np.sin(a2)
        dhx = (dc * ca1 * sa2 - c * sa1 * da1 * sa2 + c * ca1 * ca2 * da2
               + ds * sa1 + s * ca1 * da1)
        dhy = (ds * ca1 * sa2 - s * sa1 * da1 * sa2 + s * ca1 * ca2 * da2
               - dc * sa1 - c * ca1 * da1)
        zero = np.zeros_like(k)
        return zero, dhx, dhy, zero

    def band_energy(k, s):
        _, _, a1, a2 = _ordkr_angles(np.asarray(k, dtype=float), params)
        return int(s) * np.arccos(np.clip(np.cos(a1) * np.cos(a2), -1.0, 1.0))

    return ModelSpec("ordkr", ChiralClass.chiral_z, params, components, derivatives, band_energy)


def pqkc(params: PqkcParams) -> ModelSpec:
    delta, mu, j = params.delta, params.mu_chem, params.j

    def components(k):
        dy, dz = delta * np.sin(k), mu + j * np.cos(k)
        zero = np.zeros_like(k)
        return zero, zero, np.sin(dy) * np.cos(dz), np.sin(dz)

    def derivatives(k):
        dy, dz = delta * np.sin(k), mu + j * np.cos(k)
        ddy, ddz = delta * np.cos(k), -j * np.sin(k)
        dhy = np.cos(dy) * np.cos(dz) * ddy - np.sin(dy) * np.sin(dz) * ddz
        dhz = np.cos(dz) * ddz
        zero = np.zeros_like(k)
        return zero, zero, dhy, dhz

    def band_energy(k, s):
        k = np.asarray(k, dtype=float)
        dy, dz = delta * np.sin(k), mu + j * np.cos(k)
        return int(s) * np.arccos(np.clip(np.cos(dy) * np.cos(dz), -1.0, 1.0))

    return ModelSpec("pqkc", ChiralClass.chiral_x, params, components, derivatives, band_energy)


def build_model(params: Params) -> ModelSpec:
    """Dispatch a parameter record to its model family."""
    if isinstance(params, SpinChainParams):
        return spin_chain(params)
    if isinstance(params, OrdkrParams):
        return ordkr(params)
    if isinstance(params, PqkcParams):
        return pqkc(params)
    raise UnknownModelError(f"no built-in model for {type(params).__name__}")


def _rotation(theta: float, n) -> np.ndarray:
    # exp(-i theta n.sigma) for a unit vector n
    nx, ny, nz = n
    return math.cos(theta) * SIGMA_0 - 1j * math.sin(theta) * (nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z)


def ordkr_unitary(params: OrdkrParams, k: float) -> np.ndarray:
    """U(k) as the literal product of the three kick exponentials."""
    c, s = math.cos(k / 2), math.sin(k / 2)
    a1, a2 = params.k1 * s, params.k2 * c
    outer = _rotation(a2 / 2, (c, s, 0.0))
    middle = _rotation(a1, (s, -c, 0.0))
    return outer @ middle @ outer


def pqkc_unitary(params: PqkcParams, k: float) -> np.ndarray:
    """U(k) as the literal product of the three quench exponentials."""
    dy = params.delta * math.sin(k)
    dz = params.mu_chem + params.j * math.cos(k)
    outer = _rotation(dy / 2, (0.0, 1.0, 0.0))
    return outer @ _rotation(dz, (0.0, 0.0, 1.0)) @ outer


def _closed_form_unitary(model: ModelSpec, k: float, scalar: float) -> np.ndarray:
    h = model.bloch(k)
    return scalar * SIGMA_0 - 1j * (h.hx * SIGMA_X + h.hy * SIGMA_Y + h.hz * SIGMA_Z)


def ordkr_unitary_check(params: OrdkrParams, k: float) -> float:
    """Max-abs deviation between the exponential product and the closed form."""
    c, s = math.cos(k / 2), math.sin(k / 2)
    scalar = math.cos(params.k1 * s) * math.cos(params.k2 * c)
    closed = _closed_form_unitary(ordkr(params), k, scalar)
    return float(np.max(np.abs(ordkr_unitary(params, k) - closed)))


def pqkc_unitary_check(params: PqkcParams, k: float) -> float:
    dy = params.delta * math.sin(k)
    dz = params.mu_chem + params.j * math.cos(k)
    closed = _closed_form_unitary(pqkc(params), k, math.cos(dy) * math.cos(dz))
    return float(np.max(np.abs(pqkc_unitary(params, k) - closed)))


def _search_window(*scales: float) -> range:
    n = math.ceil(max(abs(x) for x in scales) / math.pi) + 2
    return range(-n, n + 1)


def _ratio_sq(num: float, den: float) -> float:
    # (num/den)^2 with the convention that a zero coupling only admits num = 0
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return (num / den) ** 2


def phase_boundary_distance(model: ModelSpec) -> float:
    """Residual of the nearest gap-closing condition; 0 on a transition.

    spin chain: | |mu| - 1 |.
    ordkr: min |(nu pi/K1)^2 + (m pi/K2)^2 - 1| over integers nu, m.
    pqkc: min |(kappa pi/Delta)^2 + ((nu pi - mu)/J)^2 - 1| over integers.

    A vanishing coupling makes these conditions degenerate: ORDKR with K1 = 0
    or K2 = 0 is gapless (at k = pi or k = 0), PQKC with Delta = 0 is gapless
    when mu + J cos k reaches a multiple of pi, and PQKC with J = 0 when mu
    is a multiple of pi. Those cases return 0 directly.
    """
    p = model.params
    if model.name == "spin_chain" and isinstance(p, SpinChainParams):
        return abs(abs(p.mu) - 1.0)
    if model.name == "ordkr" and isinstance(p, OrdkrParams):
        if p.k1 == 0 or p.k2 == 0:
            return 0.0
        window = _search_window(p.k1, p.k2)
        return min(
            abs(_ratio_sq(nu * math.pi, p.k1) + _ratio_sq(m * math.pi, p.k2) - 1.0)
            for nu in window for m in window
        )
    if model.name == "pqkc" and isinstance(p, PqkcParams):
        if p.delta == 0 and abs(math.remainder(p.mu_chem, math.pi)) <= abs(p.j):
            return 0.0
        if p.j == 0 and abs(math.remainder(p.mu_chem, math.pi)) <= 1e-12:
            return 0.0
        window = _search_window(p.j, p.delta, p.mu_chem)
        return min(
            abs(_ratio_sq(kappa * math.pi, p.delta) + _ratio_sq(nu * math.pi - p.mu_chem, p.j) - 1.0)
            for kappa in window for nu in window
        )
    raise UnknownModelError(f"phase boundaries unknown for model {model.name!r}")


def spin_chain_G_analytic(mu: float) -> float:
    """Closed-form BZ average of the spin-chain quantum metric."""
    if abs(mu) == 1.0:
        raise CriticalPointError("integrated metric diverges at |mu| = 1")
    if abs(mu) > 1.0:
        return 1.0 / (8.0 * (mu * mu - 1.0))
    return (mu * mu - 2.0) / (8.0 * (mu * mu - 1.0))


def spin_chain_metric_analytic(mu: float, k):
    """Closed-form spin-chain g_kk, (1 + mu cos k)^2 / (4 (1 + mu^2 + 2 mu cos k)^2)."""
    ck = np.cos(k)
    return (1 + mu * ck) ** 2 / (4 * (1 + mu * mu + 2 * mu * ck) ** 2)


def pqkc_metric_analytic(params: PqkcParams, k):
    """Closed-form PQKC g_kk."""
    delta, mu, j = params.delta, params.mu_chem, params.j
    dy, dz = delta * np.sin(k), mu + j * np.cos(k)
    num = j * np.sin(k) * np.sin(dy) + 0.5 * delta * np.cos(k) * np.cos(dy) * np.sin(2 * dz)
    den = np.sin(dy) ** 2 * np.cos(dz) ** 2 + np.sin(dz) ** 2
    return num ** 2 / (4 * den ** 2)

