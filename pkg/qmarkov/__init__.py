"""
qmarkov - certification and reconstruction of quantum Markovian marginals.

Checks the local consistency and local Markov conditions of a set of cluster
marginals, builds the sequential recovery-map reconstruction of a global state
and measures how well it reproduces the inputs.
"""

from qmarkov.errors import QMarkovError
from qmarkov.marginal_model import Geometry, MarginalSet, chain_geometry, check, extract_marginals, hex_geometry
from qmarkov.models import InstanceSpec, RecoveryConfig
from qmarkov.qdm_core import LocalState
from qmarkov.reconstruct import lemma_suite, reconstruct

__all__ = [
    "Geometry",
    "InstanceSpec",
    "LocalState",
    "MarginalSet",
    "QMarkovError",
    "RecoveryConfig",
    "chain_geometry",
    "check",
    "extract_marginals",
    "hex_geometry",
    "lemma_suite",
    "reconstruct",
]
