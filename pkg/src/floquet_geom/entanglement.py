"""
Bipartite entanglement of a filled (or partially filled) Floquet-Bloch band.

N fermions occupy Bloch states of one band at momenta k_l = 2 pi l / L (+
offset). For a subsystem A of the first L_A unit cells the restricted overlap
matrix of the occupied states factorizes as

    O^A[k, k'] = O^A0[k, k'] * <psi_k|psi_k'>,
    O^A0[k, k'] = (1/L) sum_{n=1}^{L_A} exp(-i (k - k') n),

and its eigenvalues eta give the von Neumann entropy
S = -sum [eta ln eta + (1 - eta) ln(1 - eta)]. The plane-wave kernel O^A0
alone gives the non-geometric part S_A0, and S_QG = S_A - S_A0.

The real-space correlation matrix C^A over (site, orbital) pairs of A has the
same nonzero spectrum as O^A; :func:`correlation_matrix_entropy` uses it as an
independent route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import entr

from .bloch_core import BandIndex, eigenspinors
from .errors import DegenerateError, GridError, LambdaError, RangeError, SizeError
from .models import ModelSpec

CLAMP_TOL = 1e-10
EPS_ES = 1e-12


@dataclass(frozen=True)
class FillingSpec:
    """Occupied momenta of one band.

    ``ordering="consecutive"`` fills l = 1..N; ``ordering="energy"`` fills the N
    grid momenta of lowest band energy (ties broken by l). Momenta are always
    returned in increasing order.
    """

    L: int
    N: int
    band: BandIndex = BandIndex.minus
    k_offset: float = 0.0
    ordering: str = "consecutive"

    def __post_init__(self):
        if self.L < 2:
            raise SizeError(f"L must be >= 2, got {self.L}")
        if not 1 <= self.N <= self.L:
            raise SizeError(f"need 1 <= N <= L, got N={self.N}, L={self.L}")
        if self.ordering not in ("consecutive", "energy"):
            raise ValueError(f"unknown ordering {self.ordering!r}")

    def labels(self, model: Optional[ModelSpec] = None) -> np.ndarray:
        """Integer momentum labels l (k = 2 pi l / L + offset), increasing."""
        ell = np.arange(1, self.L + 1)
        if self.ordering == "consecutive" or self.N == self.L:
            return ell[: self.N]
        if model is None:
            raise ValueError("energy ordering needs the model")
        energy = model.band_energy(self.momenta_of(ell), int(self.band))
        chosen = np.argsort(energy, kind="stable")[: self.N]
        return np.sort(ell[chosen])

    def momenta_of(self, labels) -> np.ndarray:
        return 2 * math.pi * np.asarray(labels) / self.L + self.k_offset

    @property
    def momenta(self) -> np.ndarray:
        return self.momenta_of(self.labels())

    def with_offset(self, k_offset: float) -> "FillingSpec":
        return FillingSpec(self.L, self.N, self.band, k_offset, self.ordering)


@dataclass
class EntanglementResult:
    eta: np.ndarray
    eta0: np.ndarray
    s_a: float
    s_a0: float
    s_qg: float
    renyi: dict = field(default_factory=dict)
    renyi0: dict = field(default_factory=dict)
    ent_spectrum: Optional[np.ndarray] = None
    k_offset: float = 0.0


def _check_subsystem(filling: FillingSpec, L_A: int) -> None:
    if not 1 <= L_A <= filling.L:
        raise SizeError(f"need 1 <= L_A <= L, got L_A={L_A}, L={filling.L}")


def _plane_wave_sums(L: int, L_A: int, max_d: int) -> np.ndarray:
    """f[d] = (1/L) sum_{n=1}^{L_A} exp(-2 pi i d n / L) for d = 0..max_d.

    The phase argument is reduced modulo L in integers, so every term is exact
    up to one rounding of cos/sin.
    """
    d = np.arange(max_d + 1)[:, None]
    n = np.arange(1, L_A + 1)[None, :]
    theta = 2 * math.pi * ((d * n) % L) / L
    return (np.cos(theta).sum(axis=1) - 1j * np.sin(theta).sum(axis=1)) / L


def _toeplitz_from_labels(labels: np.ndarray, f: np.ndarray) -> np.ndarray:
    d = labels[:, None] - labels[None, :]
    out = f[np.abs(d)]
    return np.where(d >= 0, out, out.conj())


def kernel_a0(filling: FillingSpec, L_A: int, labels: Optional[np.ndarray] = None) -> np.ndarray:
    """Plane-wave overlap matrix O^A0 over the occupied momenta."""
    _check_subsystem(filling, L_A)
    if labels is None:
        labels = filling.labels()
    f = _plane_wave_sums(filling.L, L_A, int(labels.max() - labels.min()))
    return _toeplitz_from_labels(labels, f)


def occupied_spinors(model: ModelSpec, filling: FillingSpec, labels: Optional[np.ndarray] = None) -> np.ndarray:
    """Eigenspinors of the occupied states, shape (2, N)."""
    if labels is None:
        labels = filling.labels(model)
    k = filling.momenta_of(labels)
    try:
        return eigenspinors(*model.vectors(k), int(filling.band))
    except DegenerateError as exc:
        raise GridError(f"{exc}; retry with k_offset = pi/L") from exc


def overlap_matrix_from_spinors(spinors: np.ndarray, filling: FillingSpec, L_A: int,
                                labels: Optional[np.ndarray] = None) -> np.ndarray:
    if labels is None:
        labels = filling.labels()
    gram = spinors.conj().T @ spinors
    m = kernel_a0(filling, L_A, labels) * gram
    return 0.5 * (m + m.conj().T)


def overlap_matrix(model: ModelSpec, filling: FillingSpec, L_A: int) -> np.ndarray:
    """Restricted overlap matrix O^A of the occupied Floquet-Bloch states."""
    _check_subsystem(filling, L_A)
    labels = filling.labels(model)
    return overlap_matrix_from_spinors(occupied_spinors(model, filling, labels), filling, L_A, labels)


def _clamp(eta) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if eta.size and (eta.min() < -CLAMP_TOL or eta.max() > 1 + CLAMP_TOL):
        raise RangeError(f"spectrum outside [0, 1]: [{eta.min()!r}, {eta.max()!r}]")
    return np.clip(eta, 0.0, 1.0)


def vn_entropy_from_spectrum(eta: Sequence[float]) -> float:
    """Von Neumann entropy (nats) of a fermionic single-particle spectrum."""
    eta = _clamp(eta)
    return float(math.fsum(entr(eta) + entr(1.0 - eta)))


def renyi_entropy_from_spectrum(eta: Sequence[float], lam: float) -> float:
    """Renyi entropy of order ``lam`` (nats)."""
    if not lam > 0:
        raise LambdaError(f"Renyi order must be positive, got {lam}")
    if lam == 1:
        raise LambdaError("order 1 is the von Neumann entropy")
    eta = _clamp(eta)
    terms = np.log(eta ** lam + (1.0 - eta) ** lam)
    return float(math.fsum(terms) / (1.0 - lam))


def entanglement_spectrum(zeta: Sequence[float], return_counts: bool = False):
    """Entanglement energies xi = ln(1/zeta - 1), ascending.

    Values within EPS_ES of 0 or 1 correspond to infinite levels and are
    dropped; with ``return_counts`` the numbers of +inf (zeta ~ 0) and -inf
    (zeta ~ 1) levels are returned as well.
    """
    zeta = np.asarray(zeta, dtype=float)
    inside = (zeta > EPS_ES) & (zeta < 1 - EPS_ES)
    xi = np.sort(np.log(1.0 / zeta[inside] - 1.0))
    if return_counts:
        return xi, int(np.sum(zeta <= EPS_ES)), int(np.sum(zeta >= 1 - EPS_ES))
    return xi


def _spectrum(m: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(m)


def gee(model: ModelSpec, filling: FillingSpec, L_A: int,
        renyi_lambdas: Sequence[float] = ()) -> EntanglementResult:
    """Total, plane-wave and geometric entanglement entropies.

    Raises
    ------
    GridError
        If an occupied momentum sits on a band touching.
    """
    _check_subsystem(filling, L_A)
    labels = filling.labels(model)
    spinors = occupied_spinors(model, filling, labels)
    o_a0 = kernel_a0(filling, L_A, labels)
    o_a = o_a0 * (spinors.conj().T @ spinors)
    o_a = 0.5 * (o_a + o_a.conj().T)
    eta = _spectrum(o_a)
    eta0 = _spectrum(o_a0)
    s_a = vn_entropy_from_spectrum(eta)
    s_a0 = vn_entropy_from_spectrum(eta0)
    renyi = {lam: renyi_entropy_from_spectrum(eta, lam) for lam in renyi_lambdas}
    renyi0 = {lam: renyi_entropy_from_spectrum(eta0, lam) for lam in renyi_lambdas}
    return EntanglementResult(
        eta=np.clip(eta, 0.0, 1.0), eta0=np.clip(eta0, 0.0, 1.0),
        s_a=s_a, s_a0=s_a0, s_qg=s_a - s_a0,
        renyi=renyi, renyi0=renyi0,
        ent_spectrum=entanglement_spectrum(eta), k_offset=filling.k_offset,
    )


def gee_with_retry(model: ModelSpec, filling: FillingSpec, L_A: int,
                   renyi_lambdas: Sequence[float] = ()) -> EntanglementResult:
    """:func:`gee`, retrying once on a half-step offset grid after a GridError."""
    try:
        return gee(model, filling, L_A, renyi_lambdas)
    except GridError:
        return gee(model, filling.with_offset(filling.k_offset + math.pi / filling.L), L_A, renyi_lambdas)


def correlation_matrix(model: ModelSpec, filling: FillingSpec, L_A: int) -> np.ndarray:
    """C^A over (site n, orbital a) in A, built from real-space wavefunctions.

    C[(n,a),(m,b)] = (1/L) sum_l exp(i k_l (n - m)) psi_{l,a} conj(psi_{l,b}),
    n, m = 1..L_A; rows are ordered site-major.
    """
    _check_subsystem(filling, L_A)
    labels = filling.labels(model)
    k = filling.momenta_of(labels)
    psi = occupied_spinors(model, filling, labels)  # (2, N)
    sites = np.arange(1, L_A + 1)
    phase = np.exp(1j * np.outer(sites, k)) / math.sqrt(filling.L)  # (L_A, N)
    phi = (phase[:, None, :] * psi[None, :, :]).reshape(2 * L_A, -1)
    c = phi @ phi.conj().T
    return 0.5 * (c + c.conj().T)


def correlation_matrix_entropy(model: ModelSpec, filling: FillingSpec, L_A: int) -> float:
    """Von Neumann entropy of A from the correlation-matrix spectrum."""
    return vn_entropy_from_spectrum(_spectrum(correlation_matrix(model, filling, L_A)))


def trace_identity_check(model: ModelSpec, filling: FillingSpec, L_A: int, q_max: int = 4) -> float:
    """max_q |Tr (O^A)^q - Tr (C^A)^q| for q = 1..q_max."""
    if not 1 <= q_max <= 6:
        raise ValueError("q_max must lie in [1, 6]")
    if filling.L > 64:
        raise SizeError("trace identity check is meant for L <= 64")
    o = overlap_matrix(model, filling, L_A)
    c = correlation_matrix(model, filling, L_A)
    worst = 0.0
    po, pc = np.eye(len(o)), np.eye(len(c))
    for _ in range(q_max):
        po, pc = po @ o, pc @ c
        worst = max(worst, abs(np.trace(po) - np.trace(pc)))
    return float(worst)
