"""Quantum metric and geometric entanglement entropy of 1D two-band Floquet-Bloch systems."""

from .bloch_core import BandIndex, BlochVector, ChiralClass, dispersion, eigenspinors, eigenstate
from .entanglement import EntanglementResult, FillingSpec, gee, gee_with_retry
from .errors import FloquetGeomError
from .models import ModelSpec, OrdkrParams, PqkcParams, SpinChainParams, build_model, ordkr, pqkc, spin_chain
from .qmt import integrated_metric, metric_at, winding_number

__all__ = [
    "BandIndex", "BlochVector", "ChiralClass", "dispersion", "eigenspinors", "eigenstate",
    "EntanglementResult", "FillingSpec", "gee", "gee_with_retry", "FloquetGeomError",
    "ModelSpec", "OrdkrParams", "PqkcParams", "SpinChainParams", "build_model", "ordkr", "pqkc",
    "spin_chain", "integrated_metric", "metric_at", "winding_number",
]
