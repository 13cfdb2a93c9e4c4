"""Lattice geometry, marginal sets and the local Markov / consistency checks.

Geometry is a vertex graph (networkx) partitioned into labelled cells. Stored
clusters are maximal; nested clusters name a stored parent plus a subset of
its cells and get their marginals by partial trace.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np

from qmarkov.config import config
from qmarkov.errors import DomainError, LayoutError, MissingMarginalError
from qmarkov.models import ConditionValue, ConsistencyGap, MarkovReport
from qmarkov.qdm_core import LocalState, SiteId, canonical, cmi, reduce_to, trace_distance

logger = logging.getLogger(__name__)

CellLabel = Tuple[int, ...]

CMI_CLIP = 1e-10
ADJACENCY_TOLERANCE = 1e-9


def format_cell(label: CellLabel) -> str:
    return "[" + ",".join(str(part) for part in label) + "]"


@dataclass(frozen=True)
class ClusterKey:
    """A stored cluster index, optionally restricted to a subset of its cells."""

    index: int
    cells: Optional[Tuple[CellLabel, ...]] = None

    @property
    def nested(self) -> bool:
        return self.cells is not None

    def describe(self) -> str:
        if self.cells is None:
            return f"#{self.index}"
        return f"#{self.index}/" + "".join(format_cell(label) for label in self.cells)


@dataclass(frozen=True, eq=False)
class Geometry:
    """Vertex graph with per-vertex dimensions, a cell partition and clusters (immutable)."""

    vertices: Tuple[Tuple[SiteId, int], ...]
    edges: Tuple[Tuple[SiteId, SiteId], ...]
    cells: Tuple[Tuple[CellLabel, Tuple[SiteId, ...]], ...]
    clusters: Tuple[Tuple[CellLabel, ...], ...]
    nested: Tuple[ClusterKey, ...] = ()
    layout: str = "custom"  # chain | hexgrid | custom
    size: int = 0  # chain: vertex count, hexgrid: cells per side
    granularity: int = 1

    def __post_init__(self):
        sites = [site for site, _ in self.vertices]
        if len(set(sites)) != len(sites):
            raise DomainError("vertex ids must be unique")
        covered = [site for _, cell_sites in self.cells for site in cell_sites]
        if sorted(covered) != sorted(sites):
            raise DomainError("cells must partition the vertex set")
        labels = [label for label, _ in self.cells]
        if len(set(labels)) != len(labels):
            raise DomainError("cell labels must be unique")
        for u, v in self.edges:
            if u not in self.site_dims or v not in self.site_dims or u == v:
                raise DomainError(f"edge ({u}, {v}) does not join two distinct vertices")
        for cluster in self.clusters:
            missing = [label for label in cluster if label not in self.cell_map]
            if missing or not cluster:
                raise DomainError(f"cluster {cluster} names unknown cells {missing}")
        for key in self.nested:
            if key.cells is None or not 0 <= key.index < len(self.clusters):
                raise DomainError(f"nested cluster {key} has no stored parent")
            if not set(key.cells) <= set(self.clusters[key.index]):
                raise DomainError(f"nested cluster {key.describe()} is not inside its parent")

    @cached_property
    def site_dims(self) -> Dict[SiteId, int]:
        return dict(self.vertices)

    @cached_property
    def cell_map(self) -> Dict[CellLabel, Tuple[SiteId, ...]]:
        return {label: tuple(sorted(sites)) for label, sites in self.cells}

    @cached_property
    def site_cell(self) -> Dict[SiteId, CellLabel]:
        return {site: label for label, sites in self.cells for site in sites}

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        for site, dim in self.vertices:
            graph.add_node(site, dim=dim, cell=self.site_cell[site])
        graph.add_edges_from(self.edges)
        return graph

    @cached_property
    def _cluster_lookup(self) -> Dict[FrozenSet[CellLabel], ClusterKey]:
        lookup = {frozenset(key.cells): key for key in self.nested}
        lookup.update({frozenset(cells): ClusterKey(k) for k, cells in enumerate(self.clusters)})
        return lookup

    @property
    def cell_labels(self) -> List[CellLabel]:
        return [label for label, _ in self.cells]

    @property
    def all_sites(self) -> Tuple[SiteId, ...]:
        return tuple(sorted(self.site_dims))

    def global_dim(self) -> int:
        return math.prod(self.site_dims.values())

    def dims_of(self, sites: Iterable[SiteId]) -> Tuple[int, ...]:
        return tuple(self.site_dims[site] for site in sites)

    def cell_sites(self, label: CellLabel) -> Tuple[SiteId, ...]:
        if label not in self.cell_map:
            raise DomainError(f"unknown cell {format_cell(label)}")
        return self.cell_map[label]

    def cluster_keys(self) -> List[ClusterKey]:
        return [ClusterKey(k) for k in range(len(self.clusters))] + list(self.nested)

    def cluster_cells(self, key: ClusterKey) -> Tuple[CellLabel, ...]:
        if not 0 <= key.index < len(self.clusters):
            raise MissingMarginalError(f"no stored cluster {key.describe()}")
        if key.cells is None:
            return self.clusters[key.index]
        if not set(key.cells) <= set(self.clusters[key.index]):
            raise MissingMarginalError(f"cells of {key.describe()} are not inside the parent cluster")
        return key.cells

    def cluster_sites(self, key: ClusterKey) -> Tuple[SiteId, ...]:
        return tuple(sorted(site for label in self.cluster_cells(key) for site in self.cell_map[label]))

    def find_cluster(self, labels: Iterable[CellLabel]) -> Optional[ClusterKey]:
        return self._cluster_lookup.get(frozenset(labels))

    def neighbors(self, sites: Iterable[SiteId]) -> FrozenSet[SiteId]:
        """𝒩(sites): vertices adjacent to the set but outside it."""
        return frozenset(nx.node_boundary(self.graph, set(sites)))

    def cells_adjacent(self, a: CellLabel, b: CellLabel) -> bool:
        if a == b:
            return False
        return any(self.graph.has_edge(u, v) for u in self.cell_sites(a) for v in self.cell_sites(b))

    def adjacent_cells(self, label: CellLabel) -> List[CellLabel]:
        touched = {self.site_cell[site] for site in self.neighbors(self.cell_sites(label))}
        return [other for other in self.cell_labels if other in touched]


def chain_geometry(n: int, d: int) -> Geometry:
    """Open chain 1..n, cells [i] = {2i-1, 2i}, clusters {[i], [i+1]}."""
    if n < 4 or n % 2:
        raise LayoutError(f"chain geometry needs an even vertex count >= 4, got {n}")
    if d < 1:
        raise LayoutError(f"local dimension must be positive, got {d}")

    num_cells = n // 2
    return Geometry(
        vertices=tuple((v, d) for v in range(1, n + 1)),
        edges=tuple((v, v + 1) for v in range(1, n)),
        cells=tuple(((i,), (2 * i - 1, 2 * i)) for i in range(1, num_cells + 1)),
        clusters=tuple(((i,), (i + 1,)) for i in range(1, num_cells)),
        layout="chain",
        size=n,
    )


def hex_center(i: int, j: int) -> Tuple[float, float]:
    return i - j / 2, math.sqrt(3) * j / 2


def quad_index(n: int, i: int, j: int) -> int:
    """Stored index of {[i,j],[i+1,j],[i,j+1],[i+1,j+1]} in hex_geometry(n)."""
    if not (1 <= i <= n - 1 and 1 <= j <= n - 1):
        raise LayoutError(f"no quadruple cluster anchored at [{i},{j}] for n={n}")
    return (j - 1) * (n - 1) + (i - 1)


def hex_geometry(n: int, d: int, granularity: int = 1) -> Geometry:
    """n×n hexagonal patch with quadruple clusters and derived triples.

    Args:
        n: Cells per side
        d: Local dimension of every vertex
        granularity: Vertices per cell; vertices of a cell are mutually adjacent
            and adjacent to every vertex of a neighbouring cell

    Returns:
        Geometry with layout "hexgrid"
    """
    if n < 2:
        raise LayoutError(f"hex geometry needs n >= 2, got {n}")
    if granularity < 1:
        raise LayoutError(f"granularity must be >= 1, got {granularity}")

    labels = [(i, j) for j in range(1, n + 1) for i in range(1, n + 1)]
    cells = []
    for position, (i, j) in enumerate(labels):
        first = position * granularity + 1
        cells.append(((i, j), tuple(range(first, first + granularity))))
    cell_map = dict(cells)

    centers = np.array([hex_center(i, j) for i, j in labels])
    distances = np.hypot(*(centers[:, None, :] - centers[None, :, :]).transpose(2, 0, 1))
    edges = []
    for a, b in itertools.combinations(range(len(labels)), 2):
        if abs(distances[a, b] - 1.0) <= ADJACENCY_TOLERANCE:
            edges.extend(itertools.product(cell_map[labels[a]], cell_map[labels[b]]))
    for _, sites in cells:
        edges.extend(itertools.combinations(sites, 2))

    clusters, nested = [], []
    for j in range(1, n):
        for i in range(1, n):
            index = len(clusters)
            clusters.append(((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)))
            nested.append(ClusterKey(index, ((i, j), (i + 1, j), (i, j + 1))))
            nested.append(ClusterKey(index, ((i + 1, j), (i + 1, j + 1), (i, j + 1))))

    return Geometry(
        vertices=tuple((site, d) for _, sites in cells for site in sites),
        edges=tuple(sorted(tuple(sorted(edge)) for edge in edges)),
        cells=tuple(cells),
        clusters=tuple(clusters),
        nested=tuple(nested),
        layout="hexgrid",
        size=n,
        granularity=granularity,
    )


@dataclass(frozen=True)
class MarkovCondition:
    """I(A:C|B) for one cell a of one cluster: A = a, B = 𝒩(a)∩Ā, C = the rest."""

    cluster: ClusterKey
    cell: CellLabel
    a_sites: Tuple[SiteId, ...]
    b_sites: Tuple[SiteId, ...]
    c_sites: Tuple[SiteId, ...]


def markov_conditions(g: Geometry) -> List[MarkovCondition]:
    conditions = []
    for key in g.cluster_keys():
        inside = set(g.cluster_sites(key))
        for label in g.cluster_cells(key):
            a = set(g.cell_sites(label))
            b = g.neighbors(a) & inside
            c = inside - a - b
            conditions.append(MarkovCondition(key, label, tuple(sorted(a)), tuple(sorted(b)), tuple(sorted(c))))
    return conditions


def neighborhood_overlap_violations(g: Geometry) -> List[Tuple[CellLabel, CellLabel]]:
    """Cell pairs where disjoint closed neighbourhoods and non-adjacency disagree."""
    closed = {label: set(g.cell_sites(label)) | g.neighbors(g.cell_sites(label)) for label in g.cell_labels}
    violations = []
    for a, b in itertools.combinations(g.cell_labels, 2):
        disjoint = not (closed[a] & closed[b])
        if disjoint != (not g.cells_adjacent(a, b)):
            violations.append((a, b))
    return violations


@dataclass(frozen=True, eq=False)
class MarginalSet:
    """One marginal per stored cluster; nested marginals are derived on demand."""

    geometry: Geometry
    entries: Mapping[int, LocalState]

    def __post_init__(self):
        g = self.geometry
        if set(self.entries) != set(range(len(g.clusters))):
            raise MissingMarginalError(
                f"expected marginals for clusters 0..{len(g.clusters) - 1}, got {sorted(self.entries)}"
            )
        entries = {}
        for index in sorted(self.entries):
            state = self.entries[index]
            sites = g.cluster_sites(ClusterKey(index))
            if state.sites != set(sites):
                raise DomainError(f"marginal {index} lives on {state.support}, cluster covers {sites}")
            if tuple(state.site_dims()[site] for site in sites) != g.dims_of(sites):
                raise DomainError(f"marginal {index} disagrees with the geometry's site dimensions")
            entries[index] = canonical(state)
        object.__setattr__(self, "entries", MappingProxyType(entries))

    def marginal(self, key: ClusterKey) -> LocalState:
        parent = self.entries.get(key.index)
        if parent is None:
            raise MissingMarginalError(f"no marginal stored for cluster {key.describe()}")
        if key.cells is None:
            return parent
        return reduce_to(parent, self.geometry.cluster_sites(key))

    def replace(self, index: int, state: LocalState) -> "MarginalSet":
        entries = dict(self.entries)
        entries[index] = state
        return MarginalSet(self.geometry, entries)


def extract_marginals(global_state: LocalState, g: Geometry) -> MarginalSet:
    """Reduce a global state onto every stored cluster."""
    if global_state.sites != set(g.all_sites):
        raise DomainError(f"global state lives on {global_state.support}, geometry has {g.all_sites}")
    entries = {k: reduce_to(global_state, g.cluster_sites(ClusterKey(k))) for k in range(len(g.clusters))}
    return MarginalSet(g, entries)


def overlap_gaps(ms: MarginalSet) -> List[ConsistencyGap]:
    g = ms.geometry
    gaps = []
    for k, l in itertools.combinations(range(len(g.clusters)), 2):
        overlap = set(g.cluster_sites(ClusterKey(k))) & set(g.cluster_sites(ClusterKey(l)))
        if not overlap:
            continue
        gap = trace_distance(reduce_to(ms.entries[k], overlap), reduce_to(ms.entries[l], overlap))
        gaps.append(ConsistencyGap(clusters=(k, l), overlap=sorted(overlap), gap=gap))
    return gaps


def _condition_value(ms: MarginalSet, condition: MarkovCondition, base: Optional[float]) -> float:
    if not condition.c_sites:
        return 0.0
    state = ms.marginal(condition.cluster)
    return cmi(state, condition.a_sites, condition.b_sites, condition.c_sites, base)


def check(ms: MarginalSet, workers: Optional[int] = None, base: Optional[float] = None) -> MarkovReport:
    """Evaluate every consistency gap and local Markov condition of a marginal set.

    Args:
        ms: Marginal set to certify
        workers: Threads for the CMI evaluations (results keep condition order)
        base: Logarithm base for the CMIs, nats by default

    Returns:
        MarkovReport with epsilon = max(max gap, sqrt(max CMI))
    """
    g = ms.geometry
    conditions = markov_conditions(g)
    workers = workers or config.MAX_WORKERS

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda condition: _condition_value(ms, condition, base), conditions))
    else:
        values = [_condition_value(ms, condition, base) for condition in conditions]

    cmi_values = []
    for condition, value in zip(conditions, values):
        if -CMI_CLIP <= value < 0.0:
            value = 0.0
        elif value < 0.0:
            logger.warning(
                f"⚠️ Negative CMI {value:.3e} for cell {format_cell(condition.cell)} "
                f"of cluster {condition.cluster.describe()}"
            )
        cmi_values.append(
            ConditionValue(
                cluster=condition.cluster.describe(),
                cell=format_cell(condition.cell),
                a_sites=list(condition.a_sites),
                b_sites=list(condition.b_sites),
                c_sites=list(condition.c_sites),
                cmi=value,
            )
        )

    gaps = overlap_gaps(ms)
    max_gap = max((entry.gap for entry in gaps), default=0.0)
    max_cmi = max((entry.cmi for entry in cmi_values), default=0.0)
    epsilon = max(max_gap, math.sqrt(max(max_cmi, 0.0)))

    logger.info(
        f"📊 Checked {len(gaps)} overlaps and {len(cmi_values)} Markov conditions on "
        f"{g.layout} geometry: ε = {epsilon:.3e}"
    )
    return MarkovReport(layout=g.layout, consistency_gaps=gaps, cmi_values=cmi_values, epsilon=epsilon)

