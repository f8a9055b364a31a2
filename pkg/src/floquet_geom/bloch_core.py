"""
Algebra of one-dimensional two-band Floquet-Bloch Hamiltonians.

A Floquet effective Hamiltonian at quasimomentum k is written as

    H(k) = h0 + hx sigma_x + hy sigma_y + hz sigma_z

with band dispersions E_s = h0 + s E, E = |(hx, hy, hz)|, s = +/-1. This
module provides the dispersion, the normalized eigenspinors (with a fixed
gauge) and intra-band overlaps <psi_s(k)|psi_s(k')>, including the reduced
forms valid for chiral-symmetric Hamiltonians.

Gauge
-----
Eigenspinors are s (hz + sE, hx + i hy) / sqrt(2E(E + s hz)), i.e. the
textbook column multiplied by the band sign so that the first component
E + s hz is real and non-negative (the sign never changes an overlap). Where E + s hz < EPS_BRANCH * E this
form is singular and the column s (hx - i hy, sE - hz) / sqrt(2E(E - s hz))
is used instead; its second component is real and non-negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClassMismatchError, DegenerateError

EPS_DEG = 1e-10
EPS_BRANCH = 1e-8
CHIRAL_TOL = 1e-12


class BandIndex(enum.IntEnum):
    """Band label s; ``int(BandIndex.minus) == -1``."""

    plus = 1
    minus = -1


class ChiralClass(enum.Enum):
    """Which Pauli component vanishes under chiral symmetry sigma_c."""

    none = "none"
    chiral_z = "chiral_z"  # hz = 0, winding plane (x, y)
    chiral_y = "chiral_y"  # hy = 0, winding plane (z, x)
    chiral_x = "chiral_x"  # hx = 0, winding plane (y, z)

    @property
    def plane(self) -> tuple[int, int]:
        """Indices (a, b) into (hx, hy, hz) of the winding plane."""
        try:
            return _PLANES[self]
        except KeyError:
            raise ValueError("non-chiral class has no winding plane") from None

    @property
    def zero_component(self) -> int:
        return {ChiralClass.chiral_z: 2, ChiralClass.chiral_y: 1, ChiralClass.chiral_x: 0}[self]


_PLANES = {
    ChiralClass.chiral_z: (0, 1),
    ChiralClass.chiral_y: (2, 0),
    ChiralClass.chiral_x: (1, 2),
}


def _check_finite(obj, names):
    for name in names:
        if not math.isfinite(getattr(obj, name)):
            raise ValueError(f"{type(obj).__name__}.{name} is not finite")


@dataclass(frozen=True)
class BlochVector:
    """Coefficients (h0, hx, hy, hz) of a 2x2 Hamiltonian at one k."""

    h0: float
    hx: float
    hy: float
    hz: float

    def __post_init__(self):
        _check_finite(self, ("h0", "hx", "hy", "hz"))

    @property
    def norm(self) -> float:
        return math.sqrt(self.hx * self.hx + self.hy * self.hy + self.hz * self.hz)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.hx, self.hy, self.hz])


@dataclass(frozen=True)
class BlochDerivative:
    """k-derivatives of the BlochVector components (per radian)."""

    dh0: float
    dhx: float
    dhy: float
    dhz: float

    def __post_init__(self):
        _check_finite(self, ("dh0", "dhx", "dhy", "dhz"))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.dhx, self.dhy, self.dhz])


@dataclass(frozen=True)
class Eigenstate:
    c_up: complex
    c_down: complex

    @property
    def spinor(self) -> np.ndarray:
        return np.array([self.c_up, self.c_down], dtype=complex)


def dispersion(h: BlochVector, s: BandIndex) -> float:
    """Band energy h0 + s E, not reduced modulo 2 pi."""
    return h.h0 + int(s) * h.norm


def eigenspinors(hx, hy, hz, s) -> np.ndarray:
    """Vectorized eigenspinors of hx sx + hy sy + hz sz for eigenvalue s E.

    Parameters
    ----------
    hx, hy, hz : array_like
        Bloch-vector components, broadcast against each other.
    s : int
        Band index, +1 or -1.

    Returns
    -------
    np.ndarray
        Complex array of shape ``(2,) + shape`` holding normalized spinors.

    Raises
    ------
    DegenerateError
        If any E <= EPS_DEG.
    """
    s = int(s)
    hx, hy, hz = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (hx, hy, hz)))
    perp2 = hx * hx + hy * hy
    E = np.sqrt(perp2 + hz * hz)
    if np.any(E <= EPS_DEG):
        raise DegenerateError(f"band touching: E = {float(np.min(E)):.3e} <= {EPS_DEG}")
    shz = s * hz
    # E + s hz and E - s hz without cancellation: the small one is perp2 / big one
    big = E + np.abs(hz)
    small = perp2 / big
    e_plus = np.where(shz >= 0, big, small)
    e_minus = np.where(shz >= 0, small, big)

    main = e_plus >= EPS_BRANCH * E
    out = np.empty((2,) + E.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        n_main = np.sqrt(2.0 * E * e_plus)
        n_alt = np.sqrt(2.0 * E * e_minus)
        out[0] = np.where(main, e_plus / n_main, s * (hx - 1j * hy) / n_alt)
        out[1] = np.where(main, s * (hx + 1j * hy) / n_main, e_minus / n_alt)
    return out


def eigenstate(h: BlochVector, s: BandIndex) -> Eigenstate:
    """Normalized eigenstate of band s in the gauge described in the module docstring."""
    v = eigenspinors(h.hx, h.hy, h.hz, s)
    return Eigenstate(complex(v[0]), complex(v[1]))


def _vdot(a: Eigenstate, b: Eigenstate) -> complex:
    return a.c_up.conjugate() * b.c_up + a.c_down.conjugate() * b.c_down


def overlap_generic(h: BlochVector, h_prime: BlochVector, s: BandIndex) -> complex:
    """<psi_s(h)|psi_s(h')> from the gauge-fixed eigenspinors."""
    return _vdot(eigenstate(h, s), eigenstate(h_prime, s))


def _e_plus_s(h: BlochVector, s: int) -> float:
    # E + s hz, evaluated as (hx^2 + hy^2) / (E - s hz) when s hz < 0
    E = h.norm
    if s * h.hz >= 0:
        return E + abs(h.hz)
    return (h.hx * h.hx + h.hy * h.hy) / (E + abs(h.hz))


def overlap_closed_form(h: BlochVector, h_prime: BlochVector, s: BandIndex) -> complex:
    """Closed-form overlap, valid where both E + s hz are well away from zero."""
    s = int(s)
    E, Ep = h.norm, h_prime.norm
    if E <= EPS_DEG or Ep <= EPS_DEG:
        raise DegenerateError("band touching")
    a, ap = _e_plus_s(h, s), _e_plus_s(h_prime, s)
    num = complex(h.hx, -h.hy) * complex(h_prime.hx, h_prime.hy) + a * ap
    return num / (2.0 * math.sqrt(E * Ep * a * ap))


def check_chiral(h: BlochVector, cls: ChiralClass, tol: float = CHIRAL_TOL) -> None:
    """Raise ClassMismatchError unless the vanishing component of ``cls`` is zero.

    h0 is not checked: it multiplies the identity and never enters eigenstates.
    """
    if cls is ChiralClass.none:
        raise ClassMismatchError("no chiral constraint for class 'none'")
    comp = (h.hx, h.hy, h.hz)[cls.zero_component]
    if abs(comp) > tol:
        raise ClassMismatchError(f"{cls.value} requires component {'xyz'[cls.zero_component]} = 0, got {comp!r}")


def overlap_chiral(h: BlochVector, h_prime: BlochVector, s: BandIndex, cls: ChiralClass) -> complex:
    """Overlap from the reduced formula of a chiral class."""
    check_chiral(h, cls)
    check_chiral(h_prime, cls)
    E, Ep = h.norm, h_prime.norm
    if E <= EPS_DEG or Ep <= EPS_DEG:
        raise DegenerateError("band touching")
    if cls is ChiralClass.chiral_z:
        return 0.5 + complex(h.hx, -h.hy) * complex(h_prime.hx, h_prime.hy) / (2.0 * E * Ep)
    s = int(s)
    a, ap = _e_plus_s(h, s), _e_plus_s(h_prime, s)
    if cls is ChiralClass.chiral_y:
        cross = h.hx * h_prime.hx
    else:
        cross = h.hy * h_prime.hy
    return complex((cross + a * ap) / (2.0 * math.sqrt(E * Ep * a * ap)))
