"""Monte-Carlo certification of recovery maps on small tripartite states."""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from qmarkov.config import config
from qmarkov.errors import DomainError, LayoutError
from qmarkov.generators import random_state
from qmarkov.models import RecoveryCheckReport, RecoveryConfig
from qmarkov.qdm_core import LocalState, cmi, fidelity, reduce_to, tensor, trace_distance
from qmarkov.recovery import apply_recovery, build_recovery

logger = logging.getLogger(__name__)

A_SITE, B_SITE, C_SITE = 1, 2, 3


def classical_markov_triple(dims: Sequence[int], rng: np.random.Generator) -> LocalState:
    """Diagonal p(a) p(b|a) p(c|b), an exact Markov chain A - B - C."""
    da, db, dc = dims
    pa = rng.uniform(size=da)
    pb_a = rng.uniform(size=(da, db))
    pc_b = rng.uniform(size=(db, dc))
    pa /= pa.sum()
    pb_a /= pb_a.sum(axis=1, keepdims=True)
    pc_b /= pc_b.sum(axis=1, keepdims=True)
    joint = pa[:, None, None] * pb_a[:, :, None] * pc_b[None, :, :]
    return LocalState((A_SITE, B_SITE, C_SITE), tuple(dims), np.diag(joint.reshape(-1)))


def tripartite_state(dims: Sequence[int], source: str, rng: np.random.Generator) -> LocalState:
    if source == "classical":
        return classical_markov_triple(dims, rng)
    if source == "product":
        state = random_state((A_SITE,), (dims[0],), rng)
        for site, d in ((B_SITE, dims[1]), (C_SITE, dims[2])):
            state = tensor(state, random_state((site,), (d,), rng))
        return state
    if source == "random":
        return random_state((A_SITE, B_SITE, C_SITE), tuple(dims), rng)
    raise DomainError(f"unknown state source '{source}'")


def recovery_check(
    dims: Sequence[int],
    trials: int,
    cfg: RecoveryConfig,
    source: str = "random",
    seed: int = 0,
    base: Optional[float] = None,
) -> RecoveryCheckReport:
    """Sample tripartite states and record how every map property holds up.

    Args:
        dims: (d_A, d_B, d_C)
        trials: Number of sampled states
        cfg: Recovery map family under test
        source: random (full-rank Ginibre), classical (exact Markov) or product
        seed: Seed for numpy's default generator
        base: Logarithm base for the CMI and the fidelity term

    Returns:
        RecoveryCheckReport with worst values over all trials
    """
    dims = [int(d) for d in dims]
    if len(dims) != 3 or min(dims) < 1:
        raise DomainError(f"need three positive dimensions for A, B, C, got {dims}")
    if math.prod(dims) > config.MAX_CHOI_DIM:
        raise LayoutError(f"total dimension {math.prod(dims)} exceeds {config.MAX_CHOI_DIM} for Choi tests")
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")

    log_base = config.LOG_BASE if base is None else base
    rng = np.random.default_rng(seed)
    worst = {
        "max_choi_negativity": 0.0,
        "max_trace_deviation": 0.0,
        "max_defining_error": 0.0,
        "min_cmi": math.inf,
        "max_bound_margin": -math.inf,
        "max_recovery_distance": 0.0,
        "max_fidelity_bound_gap": -math.inf,
    }

    logger.info(f"🧪 Checking {cfg.label()} on {trials} {source} states with dims {dims}")
    for _ in range(trials):
        rho = tripartite_state(dims, source, rng)
        rho_bc = reduce_to(rho, (B_SITE, C_SITE))
        recovery = build_recovery(rho_bc, (B_SITE,), (C_SITE,), cfg)

        negativity, deviation = recovery.cptp_deviation()
        defined = apply_recovery(recovery, reduce_to(rho, (B_SITE,)))
        recovered = apply_recovery(recovery, reduce_to(rho, (A_SITE, B_SITE)))

        overlap = fidelity(rho, recovered)
        distance = trace_distance(rho, recovered)
        information = cmi(rho, (A_SITE,), (B_SITE,), (C_SITE,), log_base)
        bound_lhs = math.inf if overlap <= 0.0 else -2.0 * math.log(overlap) / math.log(log_base)

        worst["max_choi_negativity"] = max(worst["max_choi_negativity"], negativity)
        worst["max_trace_deviation"] = max(worst["max_trace_deviation"], deviation)
        worst["max_defining_error"] = max(worst["max_defining_error"], trace_distance(defined, rho_bc))
        worst["min_cmi"] = min(worst["min_cmi"], information)
        worst["max_bound_margin"] = max(worst["max_bound_margin"], bound_lhs - information)
        worst["max_recovery_distance"] = max(worst["max_recovery_distance"], distance)
        fvdg = 2.0 * math.sqrt(max(0.0, 1.0 - overlap ** 2))
        worst["max_fidelity_bound_gap"] = max(worst["max_fidelity_bound_gap"], distance - fvdg)

    report = RecoveryCheckReport(dims=dims, trials=trials, recovery=cfg.label(), source=source, seed=seed, **worst)
    if report.bound_holds():
        logger.info(f"✅ Fidelity bound holds: max margin {report.max_bound_margin:.3e}")
    else:
        logger.warning(f"⚠️ Fidelity bound exceeded by {report.max_bound_margin:.3e} for {cfg.label()}")
    return report
