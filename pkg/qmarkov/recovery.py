"""Petz-family recovery channels from B to B∪C.

A map is held as spectral data plus the formula

    R_t(X) = ρ_BC^{(1+it)/2} (ρ_B^{-(1+it)/2} X ρ_B^{-(1-it)/2} ⊗ I_C) ρ_BC^{(1-it)/2}
             + Tr[(I - P_B) X] ρ_BC

averaged over a finite set of weighted angles t. The plain Petz map is the
single angle t = 0; the universal (averaged) map integrates against
β₀(t) = (π/2) / (cosh(πt) + 1) with the trapezoid rule on [-T, T].
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from qmarkov.config import config
from qmarkov.errors import DomainError, ExtensionDomainError, InvalidStateError
from qmarkov.models import RecoveryConfig
from qmarkov.qdm_core import (
    LocalState,
    SiteId,
    _hermitian_part,
    align,
    canonical,
    cmi,
    fidelity,
    reduce_to,
    spectral_decomposition,
    trace_distance,
)

logger = logging.getLogger(__name__)


def beta0(t: np.ndarray) -> np.ndarray:
    """Probability density of the rotation angle in the universal recovery map."""
    return (math.pi / 2) / (np.cosh(math.pi * np.asarray(t, dtype=float)) + 1.0)


def quadrature(cfg: RecoveryConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Rotation angles and weights (summing to 1) for a recovery config."""
    if cfg.kind == "petz":
        return np.array([0.0]), np.array([1.0])
    if cfg.kind == "rotated":
        return np.array([float(cfg.t)]), np.array([1.0])

    angles = np.linspace(-cfg.truncation, cfg.truncation, cfg.nodes)
    step = angles[1] - angles[0]
    trapezoid = np.full(cfg.nodes, step)
    trapezoid[[0, -1]] = step / 2
    weights = trapezoid * beta0(angles)
    return angles, weights / weights.sum()


@dataclass(frozen=True, eq=False)
class RecoveryMap:
    """CPTP channel from operators on B to operators on B∪C (immutable)."""

    b_sites: Tuple[SiteId, ...]
    c_sites: Tuple[SiteId, ...]
    base_state: LocalState  # ordered b_sites + c_sites
    config: RecoveryConfig
    terms: Tuple[Tuple[float, np.ndarray, np.ndarray], ...]  # (weight, inner on B, outer on BC)
    complement: np.ndarray  # I - P_B

    @property
    def b_dims(self) -> Tuple[int, ...]:
        return self.base_state.dims[: len(self.b_sites)]

    @property
    def c_dims(self) -> Tuple[int, ...]:
        return self.base_state.dims[len(self.b_sites):]

    @property
    def b_dim(self) -> int:
        return math.prod(self.b_dims)

    @property
    def c_dim(self) -> int:
        return math.prod(self.c_dims)

    def apply_matrix(self, matrix: np.ndarray, rest_dim: int) -> np.ndarray:
        """Apply id_rest ⊗ R to a matrix ordered (rest, B); output is ordered (rest, B, C)."""
        db, dc = self.b_dim, self.c_dim
        y = np.asarray(matrix).reshape(rest_dim, db, rest_dim, db)
        out = np.zeros((rest_dim, db, dc, rest_dim, db, dc), dtype=complex)

        for weight, inner, outer in self.terms:
            conjugated = np.einsum("ab,rbsc,dc->rasd", inner, y, inner.conj(), optimize=True)
            out += weight * np.einsum(
                "bcxy,rxsu,efuy->rbcsef", outer, conjugated, outer.conj(), optimize=True
            )

        leak = np.einsum("rbsc,cb->rs", y, self.complement, optimize=True)
        base = self.base_state.matrix.reshape(db, dc, db, dc)
        out += np.einsum("rs,bcef->rbcsef", leak, base, optimize=True)

        side = rest_dim * db * dc
        return out.reshape(side, side)

    def choi_matrix(self) -> np.ndarray:
        """(id ⊗ R)(|Ω⟩⟨Ω|) with an unnormalized maximally entangled reference copy of B."""
        db = self.b_dim
        omega = np.eye(db).reshape(-1)
        return self.apply_matrix(np.outer(omega, omega), db)

    def cptp_deviation(self) -> Tuple[float, float]:
        """(negativity of the Choi matrix, trace-preservation deviation)."""
        choi = self.choi_matrix()
        lowest = float(np.linalg.eigvalsh(_hermitian_part(choi))[0])
        db, out = self.b_dim, self.b_dim * self.c_dim
        traced = np.einsum("axbx->ab", choi.reshape(db, out, db, out))
        return max(-lowest, 0.0), float(np.max(np.abs(traced - np.eye(db))))


def build_recovery(
    rho_bc: LocalState,
    b: Iterable[SiteId],
    c: Iterable[SiteId],
    cfg: Optional[RecoveryConfig] = None,
) -> RecoveryMap:
    """Build a recovery map B → BC from the bipartite state ρ_BC.

    Args:
        rho_bc: State on B∪C
        b: Conditioning sites (may be empty: the map then tensors on ρ_C)
        c: Sites the map creates, nonempty
        cfg: Map family and spectral cutoff

    Returns:
        RecoveryMap holding the precomputed powers of ρ_B and ρ_BC
    """
    cfg = cfg or RecoveryConfig()
    b_sites, c_sites = tuple(sorted(set(b))), tuple(sorted(set(c)))
    if not c_sites:
        raise DomainError("recovery map needs a nonempty target set C")
    if set(b_sites) & set(c_sites) or set(b_sites) | set(c_sites) != rho_bc.sites:
        raise DomainError(f"B={b_sites} and C={c_sites} do not partition support {rho_bc.support}")

    base = align(rho_bc, b_sites + c_sites)
    total = complex(np.trace(base.matrix)).real
    if total <= 0.0:
        raise InvalidStateError(f"base state on {rho_bc.support} has rank 0")

    rho_b = reduce_to(base, b_sites)
    spectrum_b = spectral_decomposition(rho_b.matrix)
    spectrum_bc = spectral_decomposition(base.matrix)
    db = rho_b.dim
    dc = base.dim // db

    terms = []
    angles, weights = quadrature(cfg)
    for angle, weight in zip(angles, weights):
        inner = spectrum_b.power(complex(-0.5, -angle / 2), cfg.cutoff)
        outer = spectrum_bc.power(complex(0.5, angle / 2), cfg.cutoff)
        terms.append((float(weight), inner, outer.reshape(db, dc, db, dc)))

    complement = np.eye(db) - spectrum_b.projector(cfg.cutoff)
    logger.debug(
        f"🔨 Built {cfg.label()} recovery map B={b_sites} → C={c_sites} "
        f"(rank ρ_B {int(spectrum_b.support_mask(cfg.cutoff).sum())}/{db})"
    )
    return RecoveryMap(b_sites, c_sites, base, cfg, tuple(terms), complement)


def apply_recovery(m: RecoveryMap, s: LocalState) -> LocalState:
    """Grow `s` by the map's C sites, acting as the identity off B."""
    site_dims = s.site_dims()
    if not set(m.b_sites) <= s.sites:
        raise ExtensionDomainError(f"state on {s.support} lacks conditioning sites {m.b_sites}")
    if set(m.c_sites) & s.sites:
        raise ExtensionDomainError(f"state on {s.support} already holds target sites {m.c_sites}")
    if tuple(site_dims[site] for site in m.b_sites) != m.b_dims:
        raise ExtensionDomainError(f"site dimensions on {m.b_sites} disagree with the recovery map")

    rest = tuple(site for site in s.support if site not in set(m.b_sites))
    aligned = align(s, rest + m.b_sites)
    rest_dims = aligned.dims[: len(rest)]
    out = m.apply_matrix(aligned.matrix, math.prod(rest_dims))
    grown = LocalState(rest + m.b_sites + m.c_sites, rest_dims + m.b_dims + m.c_dims, _hermitian_part(out))
    return canonical(grown)


def _check_partition(rho_abc: LocalState, a, b, c) -> Tuple[set, set, set]:
    a, b, c = set(a), set(b), set(c)
    if a & b or b & c or a & c or a | b | c != rho_abc.sites or not a or not c:
        raise DomainError(
            f"A={sorted(a)}, B={sorted(b)}, C={sorted(c)} do not partition {rho_abc.support}"
        )
    return a, b, c


def recover(
    rho_abc: LocalState,
    a: Iterable[SiteId],
    b: Iterable[SiteId],
    c: Iterable[SiteId],
    cfg: Optional[RecoveryConfig] = None,
) -> LocalState:
    """(I_A ⊗ Φ_B^{BC})(ρ_AB) with Φ built from ρ_BC."""
    a, b, c = _check_partition(rho_abc, a, b, c)
    recovery = build_recovery(reduce_to(rho_abc, b | c), b, c, cfg)
    return apply_recovery(recovery, reduce_to(rho_abc, a | b))


def recovery_fidelity_gap(
    rho_abc: LocalState,
    a: Iterable[SiteId],
    b: Iterable[SiteId],
    c: Iterable[SiteId],
    cfg: Optional[RecoveryConfig] = None,
    base: Optional[float] = None,
) -> Tuple[float, float]:
    """(-2 log F(ρ_ABC, recovered), I(A:C|B)) in the same logarithm base."""
    a, b, c = _check_partition(rho_abc, a, b, c)
    recovered = recover(rho_abc, a, b, c, cfg)
    overlap = fidelity(rho_abc, recovered)
    log_base = config.LOG_BASE if base is None else base
    bound_lhs = math.inf if overlap <= 0.0 else -2.0 * math.log(overlap) / math.log(log_base)
    return bound_lhs, cmi(rho_abc, a, b, c, base)


def recovery_trace_gap(
    rho_abc: LocalState,
    a: Iterable[SiteId],
    b: Iterable[SiteId],
    c: Iterable[SiteId],
    cfg: Optional[RecoveryConfig] = None,
) -> float:
    """||ρ_ABC - (I_A ⊗ Φ)(ρ_AB)||₁."""
    return trace_distance(rho_abc, recover(rho_abc, a, b, c, cfg))

