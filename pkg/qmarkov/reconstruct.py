"""Proposed global states, their consistency with the inputs, and the relation suites."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

from qmarkov.config import config
from qmarkov.errors import DomainError, LayoutError
from qmarkov.lemmas import LEMMA_CATALOG, LemmaCase, cases_for
from qmarkov.marginal_model import ClusterKey, MarginalSet, check
from qmarkov.models import ConsistencyReport, LemmaRow, LemmaTable, RecoveryConfig, default_recovery
from qmarkov.proposed import string_1d, string_2d
from qmarkov.qdm_core import LocalState, reduce_to, trace_distance
from qmarkov.string_engine import Extend, MarginalString, StringEvaluator, Symbol, relation_gap

logger = logging.getLogger(__name__)

EPSILON_FLOOR = 1e-12

__all__ = [
    "consistency_report",
    "lemma_suite",
    "prefix_profile",
    "proposed_string",
    "reconstruct",
    "size_parameter",
    "string_1d",
    "string_2d",
]


def proposed_string(ms: MarginalSet) -> MarginalString:
    g = ms.geometry
    if g.layout == "chain":
        return string_1d(len(g.cells))
    if g.layout == "hexgrid":
        return string_2d(g.size)
    raise LayoutError(f"no proposed string for a {g.layout} geometry; supply one explicitly")


def size_parameter(ms: MarginalSet) -> int:
    """n for chains (vertices), n² for hexgrids (cells), cell count otherwise."""
    g = ms.geometry
    if g.layout == "chain":
        return g.size
    if g.layout == "hexgrid":
        return g.size * g.size
    return len(g.cells)


def _ratio(delta: float, size: int, epsilon: float) -> float:
    if epsilon <= EPSILON_FLOOR:
        return math.inf
    return delta / (size * epsilon)


def _evaluate_with_profile(
    evaluator: StringEvaluator, s: MarginalString
) -> Tuple[LocalState, List[float]]:
    profile: List[float] = []

    def record(position: int, symbol: Symbol, state: LocalState):
        if isinstance(symbol, Extend):
            cell = evaluator.ms.geometry.cell_sites(symbol.cell)
            expected = reduce_to(evaluator.ms.marginal(symbol.cluster), cell)
            profile.append(trace_distance(reduce_to(state, cell), expected))

    return evaluator.run(s, on_step=record), profile


def prefix_profile(
    ms: MarginalSet, cfg: Optional[RecoveryConfig] = None, string: Optional[MarginalString] = None
) -> List[float]:
    """Distance of each newly extended cell's reduction from its cluster marginal's."""
    evaluator = StringEvaluator(ms, cfg or default_recovery())
    return _evaluate_with_profile(evaluator, string or proposed_string(ms))[1]


def reconstruct(
    ms: MarginalSet,
    cfg: Optional[RecoveryConfig] = None,
    string: Optional[MarginalString] = None,
    workers: Optional[int] = None,
    base: Optional[float] = None,
) -> Tuple[LocalState, ConsistencyReport]:
    """Evaluate the proposed string and measure how well it reproduces the marginals.

    Args:
        ms: Input marginals
        cfg: Recovery map family used for every extension
        string: Custom string, required for custom layouts
        workers: Threads for the epsilon check
        base: Logarithm base for the epsilon check

    Returns:
        The global state and its ConsistencyReport
    """
    cfg = cfg or default_recovery()
    g = ms.geometry
    string = string or proposed_string(ms)
    logger.info(f"🔨 Reconstructing {g.layout} state from {len(string)} symbols with the {cfg.label()} map")

    evaluator = StringEvaluator(ms, cfg)
    global_state, profile = _evaluate_with_profile(evaluator, string)
    epsilon = check(ms, workers=workers, base=base).epsilon
    report = consistency_report(global_state, ms, epsilon, cfg.label(), profile)
    logger.info(f"✅ Reconstruction finished: δ = {report.delta:.3e}, ε = {epsilon:.3e}")
    return global_state, report


def consistency_report(
    global_state: LocalState,
    ms: MarginalSet,
    epsilon: float,
    recovery: str = "given",
    profile: Optional[List[float]] = None,
) -> ConsistencyReport:
    """Trace distance of a global state's cluster reductions from the stored marginals."""
    g = ms.geometry
    if global_state.sites != set(g.all_sites):
        raise DomainError(f"state lives on {global_state.support}, not on every vertex")

    distances: Dict[int, float] = {}
    for index, marginal in ms.entries.items():
        reduced = reduce_to(global_state, g.cluster_sites(ClusterKey(index)))
        distances[index] = trace_distance(reduced, marginal)

    delta = max(distances.values(), default=0.0)
    size = size_parameter(ms)
    if epsilon <= EPSILON_FLOOR:
        logger.debug(f"⚠️ ε = {epsilon:.1e} is below {EPSILON_FLOOR:.0e}, ratio reported as inf")
    return ConsistencyReport(
        layout=g.layout,
        recovery=recovery,
        size_parameter=size,
        per_cluster_distance=distances,
        delta=delta,
        epsilon=epsilon,
        ratio=_ratio(delta, size, epsilon),
        prefix_profile=profile or [],
    )


def _case_gap(case: LemmaCase, evaluator: StringEvaluator) -> float:
    return relation_gap(case.lhs, case.rhs, evaluator.ms, evaluator=evaluator)


def lemma_suite(
    ms: MarginalSet,
    suite: str,
    cfg: Optional[RecoveryConfig] = None,
    workers: Optional[int] = None,
    epsilon: Optional[float] = None,
) -> LemmaTable:
    """Measure every relation of a suite and keep the worst index per relation.

    Args:
        ms: Marginal set whose geometry matches the suite (chain for 1d, hexgrid for 2d)
        suite: "1d" or "2d"
        cfg: Recovery map family
        workers: Threads for independent cases
        epsilon: Precomputed epsilon, checked here when omitted

    Returns:
        LemmaTable with one row per relation, in catalog order
    """
    cfg = cfg or default_recovery()
    cases = cases_for(suite, ms.geometry)
    evaluator = StringEvaluator(ms, cfg)
    workers = workers or config.MAX_WORKERS

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            gaps = list(pool.map(lambda case: _case_gap(case, evaluator), cases))
    else:
        gaps = [_case_gap(case, evaluator) for case in cases]

    if epsilon is None:
        epsilon = check(ms, workers=workers).epsilon

    worst: Dict[str, Tuple[float, str, int]] = {}
    for case, gap in zip(cases, gaps):
        best_gap, best_case, count = worst.get(case.lemma_id, (-1.0, "", 0))
        if gap > best_gap:
            best_gap, best_case = gap, case.case
        worst[case.lemma_id] = (best_gap, best_case, count + 1)

    rows = []
    for lemma_id, entry in LEMMA_CATALOG.items():
        if lemma_id not in worst:
            continue
        gap, label, count = worst[lemma_id]
        rows.append(
            LemmaRow(
                lemma_id=lemma_id,
                name=entry["name"],
                order=entry["order"],
                cases=count,
                max_gap=gap,
                worst_case=label,
                constant=None if epsilon <= EPSILON_FLOOR else gap / epsilon,
            )
        )
        logger.debug(f"📊 {lemma_id}: max gap {gap:.3e} at {label} over {count} cases")

    table = LemmaTable(suite=suite, recovery=cfg.label(), epsilon=epsilon, rows=rows)
    logger.info(f"✅ {suite} suite: {len(cases)} cases, worst gap {table.max_gap:.3e}")
    return table
