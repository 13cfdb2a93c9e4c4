"""Dense density-operator algebra over multi-site registers.

A LocalState carries its support (vertex ids), per-site dimensions and a
matrix indexed in row-major site order. Public operations return states in
canonical (ascending) site order; only `align` hands back other orders.
Binary operations align their second operand to the first implicitly.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from qmarkov.config import config
from qmarkov.errors import DomainError, InvalidStateError, SupportCollisionError

logger = logging.getLogger(__name__)

SiteId = int


@dataclass(frozen=True, eq=False)
class LocalState:
    """Density operator on an ordered tuple of sites (immutable).

    The empty support is allowed and denotes the scalar 1, the starting point
    of every marginal string.
    """

    support: Tuple[SiteId, ...]
    dims: Tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        support = tuple(int(site) for site in self.support)
        dims = tuple(int(d) for d in self.dims)
        if len(support) != len(dims):
            raise DomainError(f"support {support} and dims {dims} differ in length")
        if len(set(support)) != len(support):
            raise SupportCollisionError(f"repeated site in support {support}")
        if any(d < 1 for d in dims):
            raise DomainError(f"site dimensions must be positive, got {dims}")

        side = math.prod(dims)
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (side, side):
            raise DomainError(f"matrix shape {matrix.shape} does not match dims {dims}")
        matrix.setflags(write=False)

        object.__setattr__(self, "support", support)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def sites(self) -> frozenset:
        return frozenset(self.support)

    @property
    def is_canonical(self) -> bool:
        return list(self.support) == sorted(self.support)

    def site_dims(self) -> Dict[SiteId, int]:
        return dict(zip(self.support, self.dims))

    def violation(self) -> float:
        """Largest breach of the Hermiticity, trace and positivity tolerances."""
        herm = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        trace = abs(complex(np.trace(self.matrix)) - 1.0)
        lowest = float(linalg.eigvalsh(_hermitian_part(self.matrix))[0])
        return max(herm, trace, -lowest, 0.0)

    def check_valid(self, tolerance: float = config.STATE_TOLERANCE) -> "LocalState":
        breach = self.violation()
        if breach > tolerance:
            raise InvalidStateError(f"state on {self.support} violates tolerances by {breach:.3e}")
        return self


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigen-pairs of a Hermitian matrix, eigenvalues in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T

    def support_mask(self, cutoff: float) -> np.ndarray:
        top = float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0
        if top <= 0.0:
            return np.zeros(self.eigenvalues.shape, dtype=bool)
        return self.eigenvalues > cutoff * top

    def apply(self, f: Callable[[np.ndarray], np.ndarray], cutoff: float = config.SPECTRAL_CUTOFF) -> np.ndarray:
        """U f(Λ) U† with f evaluated on the support only (0 elsewhere)."""
        mask = self.support_mask(cutoff)
        mapped = np.asarray(f(self.eigenvalues[mask]))
        values = np.zeros(self.eigenvalues.shape, dtype=np.result_type(mapped, float))
        values[mask] = mapped
        return (self.eigenvectors * values) @ self.eigenvectors.conj().T

    def power(self, exponent: complex, cutoff: float = config.SPECTRAL_CUTOFF) -> np.ndarray:
        """Matrix power on the support; complex exponents give the rotated powers."""
        if isinstance(exponent, complex) and exponent.imag != 0.0:
            return self.apply(lambda lam: np.power(lam.astype(complex), exponent), cutoff)
        return self.apply(lambda lam: np.power(lam, float(np.real(exponent))), cutoff)

    def projector(self, cutoff: float = config.SPECTRAL_CUTOFF) -> np.ndarray:
        return self.apply(np.ones_like, cutoff)


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _permute_matrix(matrix: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    n = len(dims)
    if list(perm) == list(range(n)):
        return matrix
    side = matrix.shape[0]
    axes = list(perm) + [n + p for p in perm]
    return matrix.reshape(tuple(dims) * 2).transpose(axes).reshape(side, side)


def scalar_state() -> LocalState:
    """The trivial state on the empty support."""
    return LocalState((), (), np.ones((1, 1)))


def maximally_mixed(support: Sequence[SiteId], dims: Sequence[int]) -> LocalState:
    side = math.prod(dims)
    return canonical(LocalState(tuple(support), tuple(dims), np.eye(side) / side))


def pure_state(vector: np.ndarray, support: Sequence[SiteId], dims: Sequence[int]) -> LocalState:
    psi = np.asarray(vector, dtype=complex).reshape(-1)
    psi = psi / linalg.norm(psi)
    return canonical(LocalState(tuple(support), tuple(dims), np.outer(psi, psi.conj())))


def basis_state(levels: Sequence[int], support: Sequence[SiteId], dims: Sequence[int]) -> LocalState:
    """|levels⟩⟨levels| with one level per site."""
    index = int(np.ravel_multi_index(tuple(levels), tuple(dims))) if dims else 0
    vector = np.zeros(math.prod(dims), dtype=complex)
    vector[index] = 1.0
    return pure_state(vector, support, dims)


def align(s: LocalState, order: Sequence[SiteId]) -> LocalState:
    """Permute the matrix so that its sites appear in `order`."""
    order = tuple(int(site) for site in order)
    if sorted(order) != sorted(s.support) or len(set(order)) != len(order):
        raise DomainError(f"order {order} is not a permutation of support {s.support}")
    if order == s.support:
        return s
    perm = [s.support.index(site) for site in order]
    dims = tuple(s.dims[p] for p in perm)
    return LocalState(order, dims, _permute_matrix(s.matrix, s.dims, perm))


def canonical(s: LocalState) -> LocalState:
    return align(s, sorted(s.support))


def tensor(a: LocalState, b: LocalState) -> LocalState:
    """Kronecker product, returned in canonical site order."""
    shared = a.sites & b.sites
    if shared:
        raise SupportCollisionError(f"supports overlap on sites {sorted(shared)}")
    joined = LocalState(a.support + b.support, a.dims + b.dims, np.kron(a.matrix, b.matrix))
    return canonical(joined)


def partial_trace(s: LocalState, drop: Iterable[SiteId]) -> LocalState:
    """Trace out `drop`; tracing the whole support goes through `reduce_to`."""
    drop = set(int(site) for site in drop)
    if not drop <= s.sites:
        raise DomainError(f"cannot trace sites {sorted(drop - s.sites)} outside support {s.support}")
    if drop and drop == s.sites:
        raise DomainError("partial trace over the entire support; use reduce_to(s, ()) for the scalar trace")
    if not drop:
        return canonical(s)

    keep = [site for site in s.support if site not in drop]
    gone = [site for site in s.support if site in drop]
    aligned = align(s, keep + gone)
    keep_dim = math.prod(aligned.dims[: len(keep)])
    drop_dim = math.prod(aligned.dims[len(keep):])
    blocks = aligned.matrix.reshape(keep_dim, drop_dim, keep_dim, drop_dim)
    reduced = np.einsum("ajbj->ab", blocks)
    return canonical(LocalState(tuple(keep), aligned.dims[: len(keep)], reduced))


def reduce_to(s: LocalState, keep: Iterable[SiteId]) -> LocalState:
    """Reduction onto `keep`; the empty set yields the scalar trace."""
    keep = set(int(site) for site in keep)
    if not keep <= s.sites:
        raise DomainError(f"cannot reduce onto sites {sorted(keep - s.sites)} outside support {s.support}")
    if not keep:
        return LocalState((), (), np.array([[np.trace(s.matrix)]]))
    return partial_trace(s, s.sites - keep)


def spectral_decomposition(m: np.ndarray, tolerance: float = config.SANITIZE_TOLERANCE) -> SpectralDecomposition:
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    asymmetry = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if asymmetry > tolerance * scale:
        raise InvalidStateError(f"matrix is not Hermitian (max asymmetry {asymmetry:.3e})")
    eigenvalues, eigenvectors = linalg.eigh(_hermitian_part(m))
    return SpectralDecomposition(eigenvalues[::-1].copy(), eigenvectors[:, ::-1].copy())


def spectral_transform(
    m: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    cutoff: float = config.SPECTRAL_CUTOFF,
) -> np.ndarray:
    """Apply f to the eigenvalues of a Hermitian matrix.

    Args:
        m: Hermitian matrix
        f: Vectorised scalar function, evaluated on supported eigenvalues only
        cutoff: Eigenvalues at or below cutoff * max|λ| count as zero (f → 0)

    Returns:
        U f(Λ) U†
    """
    return spectral_decomposition(m).apply(f, cutoff)


def _log(values: np.ndarray, base: Optional[float]) -> np.ndarray:
    base = config.LOG_BASE if base is None else base
    return np.log(values) / math.log(base)


def entropy_of_matrix(m: np.ndarray, base: Optional[float] = None, cutoff: float = config.SPECTRAL_CUTOFF) -> float:
    eigenvalues = linalg.eigvalsh(_hermitian_part(np.asarray(m, dtype=complex)))
    top = float(eigenvalues[-1]) if eigenvalues.size else 0.0
    if top <= 0.0:
        return 0.0
    p = eigenvalues[eigenvalues > cutoff * top]
    return float(max(-np.sum(p * _log(p, base)), 0.0))


def entropy(s: LocalState, base: Optional[float] = None) -> float:
    """Von Neumann entropy, in nats unless another base is configured."""
    return entropy_of_matrix(s.matrix, base)


def cmi(
    s: LocalState,
    a: Iterable[SiteId],
    b: Iterable[SiteId],
    c: Iterable[SiteId],
    base: Optional[float] = None,
) -> float:
    """Conditional mutual information I(A:C|B) = S(AB)+S(BC)-S(B)-S(ABC)."""
    a, b, c = set(a), set(b), set(c)
    if not a or not c:
        raise DomainError("conditional mutual information needs nonempty A and C")
    if a & b or b & c or a & c:
        raise DomainError(f"A, B, C must be disjoint, got {sorted(a)}, {sorted(b)}, {sorted(c)}")
    if not (a | b | c) <= s.sites:
        raise DomainError(f"sites {sorted((a | b | c) - s.sites)} lie outside support {s.support}")

    def s_of(sites):
        return entropy(reduce_to(s, sites), base) if sites else 0.0

    return s_of(a | b) + s_of(b | c) - s_of(b) - s_of(a | b | c)


def _same_support(a: LocalState, b: LocalState) -> LocalState:
    if a.sites != b.sites:
        raise DomainError(f"supports differ: {a.support} vs {b.support}")
    return align(b, a.support)


def trace_distance(a: LocalState, b: LocalState) -> float:
    """Schatten-1 norm of a - b (no factor 1/2)."""
    b = _same_support(a, b)
    return float(np.sum(linalg.svdvals(a.matrix - b.matrix)))


def fidelity(a: LocalState, b: LocalState) -> float:
    """Root fidelity F = ||√a √b||₁, clipped to [0, 1]."""
    b = _same_support(a, b)
    root_a = spectral_decomposition(a.matrix).apply(np.sqrt, 0.0)
    root_b = spectral_decomposition(b.matrix).apply(np.sqrt, 0.0)
    value = float(np.sum(linalg.svdvals(root_a @ root_b)))
    return min(max(value, 0.0), 1.0)


def sanitize(
    matrix: np.ndarray,
    support: Sequence[SiteId],
    dims: Sequence[int],
    tolerance: float = config.SANITIZE_TOLERANCE,
) -> LocalState:
    """Repair round-off in a raw matrix, refusing anything beyond tolerance.

    Symmetrizes, clips negative eigenvalues and renormalizes the trace.

    Raises:
        InvalidStateError: Hermiticity, trace or positivity off by more than tolerance
    """
    m = np.asarray(matrix, dtype=complex)
    side = math.prod(dims)
    if m.shape != (side, side):
        raise InvalidStateError(f"matrix shape {m.shape} does not match dims {tuple(dims)}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("matrix has non-finite entries")

    asymmetry = float(np.max(np.abs(m - m.conj().T)))
    if asymmetry > tolerance:
        raise InvalidStateError(f"matrix is not Hermitian (max asymmetry {asymmetry:.3e})")
    h = _hermitian_part(m)
    eigenvalues, eigenvectors = linalg.eigh(h)
    trace = float(np.sum(eigenvalues))
    if abs(trace - 1.0) > tolerance:
        raise InvalidStateError(f"trace {trace:.12g} differs from 1 beyond tolerance")
    if eigenvalues[0] < -tolerance:
        raise InvalidStateError(f"negative eigenvalue {eigenvalues[0]:.3e} beyond tolerance")

    if eigenvalues[0] >= 0.0:
        repaired = h / trace
    else:
        clipped = np.clip(eigenvalues, 0.0, None)
        repaired = (eigenvectors * (clipped / clipped.sum())) @ eigenvectors.conj().T
        logger.debug(f"⚠️ Clipped eigenvalue {eigenvalues[0]:.3e} on support {tuple(support)}")
    return canonical(LocalState(tuple(support), tuple(dims), repaired))
