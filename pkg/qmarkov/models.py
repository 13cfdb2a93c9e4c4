"""Data models for recovery settings, instance specs and reports."""

import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from qmarkov.config import config

REPORT_FORMAT = 1


class RecoveryConfig(BaseModel):
    """Which Petz-family recovery map to build, and its spectral cutoff."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["petz", "rotated", "averaged"] = "petz"
    t: float = 0.0  # rotation angle, rotated maps only
    nodes: int = config.AVERAGED_NODES  # quadrature nodes, averaged maps only
    truncation: float = config.AVERAGED_TRUNCATION  # integrate over [-T, T]
    cutoff: float = config.SPECTRAL_CUTOFF

    @model_validator(mode="after")
    def _check_params(self):
        if self.kind == "averaged":
            if self.nodes < 3 or self.nodes % 2 == 0:
                raise ValueError(f"averaged map needs an odd node count >= 3, got {self.nodes}")
            if self.truncation <= 0:
                raise ValueError(f"averaged map needs truncation > 0, got {self.truncation}")
        if not 0 < self.cutoff < 1:
            raise ValueError(f"cutoff must lie in (0, 1), got {self.cutoff}")
        return self

    @classmethod
    def parse(cls, text: str, cutoff: Optional[float] = None) -> "RecoveryConfig":
        """Parse `petz`, `rotated:<t>` or `averaged:<K>,<T>`.

        Args:
            text: Textual map description (CLI flag form)
            cutoff: Relative spectral cutoff, defaults to config

        Returns:
            Validated RecoveryConfig
        """
        extra = {} if cutoff is None else {"cutoff": cutoff}
        kind, _, params = text.strip().partition(":")
        if kind == "petz" and not params:
            return cls(kind="petz", **extra)
        if kind == "rotated":
            return cls(kind="rotated", t=float(params or 0.0), **extra)
        if kind == "averaged":
            if not params:
                return cls(kind="averaged", **extra)
            count, _, trunc = params.partition(",")
            return cls(
                kind="averaged",
                nodes=int(count),
                truncation=float(trunc) if trunc else config.AVERAGED_TRUNCATION,
                **extra,
            )
        raise ValueError(f"Unknown recovery map '{text}' (expected petz | rotated:t | averaged:K,T)")

    def label(self) -> str:
        """Textual form accepted by `parse`."""
        if self.kind == "rotated":
            return f"rotated:{self.t!r}"
        if self.kind == "averaged":
            return f"averaged:{self.nodes},{self.truncation:g}"
        return "petz"


def default_recovery() -> RecoveryConfig:
    return RecoveryConfig.parse(config.RECOVERY_MAP, cutoff=config.SPECTRAL_CUTOFF)


class RunConfig(BaseModel):
    """Per-invocation settings shared by the CLI commands."""
    log_base: float = config.LOG_BASE
    recovery: RecoveryConfig = Field(default_factory=default_recovery)
    cutoff: float = Field(config.SPECTRAL_CUTOFF, gt=0, lt=1)
    output: Optional[str] = None  # report path, stdout only when unset
    workers: int = Field(config.MAX_WORKERS, ge=1)

    @model_validator(mode="after")
    def _check_base(self):
        if self.log_base <= 0 or self.log_base == 1:
            raise ValueError(f"log base must be positive and != 1, got {self.log_base}")
        if self.recovery.cutoff != self.cutoff:
            self.recovery = self.recovery.model_copy(update={"cutoff": self.cutoff})
        return self


class InstanceSpec(BaseModel):
    """Ground-truth instance recipe; the seed fully determines the output."""
    kind: Literal["classical_chain", "ghz", "cluster_state_1d", "sequential", "product"]
    layout: Literal["chain", "hexgrid"] = "chain"
    n: int = Field(8, ge=2)  # vertices (chain) or cells per side (hexgrid)
    d: int = Field(2, ge=2)
    granularity: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    p: float = Field(0.0, ge=0.0, lt=1.0)  # depolarization of stored marginals

    @model_validator(mode="after")
    def _check_combination(self):
        if self.kind in ("classical_chain", "cluster_state_1d") and self.layout != "chain":
            raise ValueError(f"{self.kind} instances are only defined on the chain layout")
        if self.kind == "cluster_state_1d" and self.d != 2:
            raise ValueError("cluster_state_1d is a qubit state, d must be 2")
        if self.layout == "chain" and (self.n < 4 or self.n % 2):
            raise ValueError(f"chain layout needs an even n >= 4, got {self.n}")
        if self.layout == "chain" and self.granularity != 1:
            raise ValueError("granularity only applies to the hexgrid layout")
        if self.global_dim() > config.MAX_GLOBAL_DIM:
            raise ValueError(
                f"global dimension {self.global_dim()} exceeds {config.MAX_GLOBAL_DIM}"
            )
        return self

    def vertex_count(self) -> int:
        if self.layout == "chain":
            return self.n
        return self.n * self.n * self.granularity

    def global_dim(self) -> int:
        return self.d ** self.vertex_count()


class ConsistencyGap(BaseModel):
    """Trace distance between two stored marginals on their overlap."""
    clusters: Tuple[int, int]
    overlap: List[int]
    gap: float


class ConditionValue(BaseModel):
    """One local Markov condition I(A:C|B) evaluated on its cluster's marginal."""
    cluster: str
    cell: str
    a_sites: List[int]
    b_sites: List[int]
    c_sites: List[int]
    cmi: float


class MarkovReport(BaseModel):
    """Result of checking a marginal set for the epsilon-Markov conditions."""
    format: int = REPORT_FORMAT
    layout: str
    consistency_gaps: List[ConsistencyGap] = []
    cmi_values: List[ConditionValue] = []
    epsilon: float

    @property
    def max_gap(self) -> float:
        return max((g.gap for g in self.consistency_gaps), default=0.0)

    @property
    def max_cmi(self) -> float:
        return max((c.cmi for c in self.cmi_values), default=0.0)

    def gap_for(self, first: int, second: int) -> float:
        pair = tuple(sorted((first, second)))
        for entry in self.consistency_gaps:
            if tuple(entry.clusters) == pair:
                return entry.gap
        return 0.0


class ConsistencyReport(BaseModel):
    """How far the reconstructed global state is from the input marginals."""
    format: int = REPORT_FORMAT
    layout: str
    recovery: str
    size_parameter: int  # n (1D vertex count) or n^2 (2D cells)
    per_cluster_distance: Dict[int, float]
    delta: float
    epsilon: float
    ratio: float  # delta / (size * epsilon), inf when epsilon vanishes
    prefix_profile: List[float] = []


class GlobalCheck(BaseModel):
    """`check --global`: the marginal report plus how a supplied global state matches it."""
    format: int = REPORT_FORMAT
    markov: MarkovReport
    consistency: ConsistencyReport


class LemmaRow(BaseModel):
    """Worst measured gap of one relation over all of its index choices."""
    lemma_id: str
    name: str
    order: Literal["eps", "n_eps", "n2_eps"]
    cases: int
    max_gap: float
    worst_case: str
    constant: Optional[float] = None  # max_gap / epsilon


class LemmaTable(BaseModel):
    format: int = REPORT_FORMAT
    suite: Literal["1d", "2d"]
    recovery: str
    epsilon: float
    rows: List[LemmaRow] = []

    @property
    def max_gap(self) -> float:
        return max((row.max_gap for row in self.rows), default=0.0)


class RecoveryCheckReport(BaseModel):
    """Monte-Carlo certification of recovery maps on random tripartite states."""
    format: int = REPORT_FORMAT
    dims: List[int]
    trials: int
    recovery: str
    source: Literal["random", "classical", "product"]
    seed: int
    max_choi_negativity: float  # max(0, -min eigenvalue of the Choi matrix)
    max_trace_deviation: float
    max_defining_error: float  # |Phi(rho_B) - rho_BC|_1
    min_cmi: float
    max_bound_margin: float  # max(-2 log F - I(A:C|B))
    max_recovery_distance: float
    max_fidelity_bound_gap: float  # max(distance - 2 sqrt(1 - F^2)), <= 0 expected

    def bound_holds(self, tolerance: float = 1e-6) -> bool:
        return self.max_bound_margin <= tolerance and math.isfinite(self.max_bound_margin)
