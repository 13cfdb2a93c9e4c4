"""Instances with known ground truth.

Every instance comes with its global state. Marginals are extracted from it
and, for p > 0, the stored marginals are depolarized towards I/dim.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from qmarkov.errors import LayoutError
from qmarkov.marginal_model import (
    ClusterKey,
    Geometry,
    MarginalSet,
    chain_geometry,
    extract_marginals,
    hex_geometry,
)
from qmarkov.models import InstanceSpec, RecoveryConfig
from qmarkov.proposed import string_1d, string_2d
from qmarkov.qdm_core import LocalState, SiteId, canonical, pure_state, tensor
from qmarkov.string_engine import evaluate

logger = logging.getLogger(__name__)


def random_state(
    support: Sequence[SiteId],
    dims: Sequence[int],
    rng: np.random.Generator,
    rank: Optional[int] = None,
) -> LocalState:
    """Ginibre-distributed density matrix, full rank unless `rank` is given."""
    side = math.prod(dims)
    columns = side if rank is None else rank
    g = rng.normal(size=(side, columns)) + 1j * rng.normal(size=(side, columns))
    rho = g @ g.conj().T
    return canonical(LocalState(tuple(support), tuple(dims), rho / np.trace(rho).real))


def depolarize(state: LocalState, p: float) -> LocalState:
    if p == 0.0:
        return state
    mixed = np.eye(state.dim) / state.dim
    return LocalState(state.support, state.dims, (1 - p) * state.matrix + p * mixed)


def geometry_for(spec: InstanceSpec) -> Geometry:
    if spec.layout == "chain":
        return chain_geometry(spec.n, spec.d)
    return hex_geometry(spec.n, spec.d, spec.granularity)


def classical_chain_state(n: int, d: int, rng: np.random.Generator) -> LocalState:
    """Diagonal state of a Markov chain x_1 → ... → x_n with seeded random transitions."""
    initial = rng.uniform(size=d)
    transitions = rng.uniform(size=(n - 1, d, d))
    transitions /= transitions.sum(axis=2, keepdims=True)

    joint = initial / initial.sum()
    for step in transitions:
        joint = joint[..., :, None] * step
    probabilities = joint.reshape(-1)
    return LocalState(tuple(range(1, n + 1)), (d,) * n, np.diag(probabilities))


def ghz_state(sites: Sequence[SiteId], d: int) -> LocalState:
    """(|0...0⟩ + ... + |d-1...d-1⟩)/√d on the given sites."""
    dims = (d,) * len(sites)
    vector = np.zeros(d ** len(sites), dtype=complex)
    for level in range(d):
        vector[np.ravel_multi_index((level,) * len(sites), dims)] = 1.0
    return pure_state(vector, tuple(sites), dims)


def cluster_state_1d(n: int) -> LocalState:
    """Graph state of the open path 1-2-...-n: CZ on every edge applied to |+⟩^n."""
    index = np.arange(2 ** n)
    bits = (index[:, None] >> np.arange(n - 1, -1, -1)) & 1
    parity = np.sum(bits[:, :-1] & bits[:, 1:], axis=1)
    vector = (-1.0) ** parity
    return pure_state(vector, tuple(range(1, n + 1)), (2,) * n)


def product_state(g: Geometry, rng: np.random.Generator) -> LocalState:
    state = None
    for label in g.cell_labels:
        sites = g.cell_sites(label)
        factor = random_state(sites, g.dims_of(sites), rng)
        state = factor if state is None else tensor(state, factor)
    return state


def sequential_state(g: Geometry, rng: np.random.Generator, cfg: Optional[RecoveryConfig] = None) -> LocalState:
    """Run the proposed string on one seeded random cluster marginal, translated to every cluster.

    Clusters of a chain or hexgrid share their shape, so the first cluster's sorted
    sites map position by position onto every other cluster's.
    """
    first_sites = g.cluster_sites(ClusterKey(0))
    first = random_state(first_sites, g.dims_of(first_sites), rng)
    entries = {}
    for index in range(len(g.clusters)):
        sites = g.cluster_sites(ClusterKey(index))
        if g.dims_of(sites) != first.dims:
            raise LayoutError(f"cluster {index} has dims {g.dims_of(sites)}, expected {first.dims}")
        entries[index] = LocalState(sites, first.dims, first.matrix)
    seeds = MarginalSet(g, entries)
    string = string_1d(len(g.cells)) if g.layout == "chain" else string_2d(g.size)
    return evaluate(string, seeds, cfg or RecoveryConfig())


def gen(spec: InstanceSpec) -> Tuple[Optional[LocalState], MarginalSet]:
    """Build the global state an InstanceSpec describes and its (perturbed) marginals.

    Args:
        spec: Validated instance recipe

    Returns:
        (global state, marginal set); depolarization touches only the stored marginals
    """
    g = geometry_for(spec)
    rng = np.random.default_rng(spec.seed)

    if spec.kind == "classical_chain":
        global_state = classical_chain_state(spec.n, spec.d, rng)
    elif spec.kind == "ghz":
        global_state = ghz_state(g.all_sites, spec.d)
    elif spec.kind == "cluster_state_1d":
        global_state = cluster_state_1d(spec.n)
    elif spec.kind == "product":
        global_state = product_state(g, rng)
    else:
        global_state = sequential_state(g, rng)

    ms = extract_marginals(global_state, g)
    if spec.p > 0.0:
        ms = MarginalSet(g, {index: depolarize(state, spec.p) for index, state in ms.entries.items()})

    logger.info(
        f"🧪 Generated {spec.kind} instance on {spec.layout} (n={spec.n}, d={spec.d}, "
        f"seed={spec.seed}, p={spec.p}): {len(g.clusters)} clusters"
    )
    return global_state, ms


def inconsistent_cluster(g: Geometry) -> int:
    """Index of the cluster gen_inconsistent replaces."""
    return len(g.clusters) // 2


def gen_inconsistent(seed: int, n: int = 8, d: int = 2) -> MarginalSet:
    """GHZ chain marginals with the middle cluster swapped for a seeded random state."""
    _, ms = gen(InstanceSpec(kind="ghz", layout="chain", n=n, d=d))
    g = ms.geometry
    index = inconsistent_cluster(g)
    sites = g.cluster_sites(ClusterKey(index))
    replacement = random_state(sites, g.dims_of(sites), np.random.default_rng(seed))
    return ms.replace(index, replacement)
