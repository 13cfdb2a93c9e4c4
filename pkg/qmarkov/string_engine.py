"""Strings of polymorphic extensions and contractions.

A string is read left to right starting from the scalar 1 on the empty
support. `Extend(a, A)` grows the support by cell a through a recovery map
built from cluster A's marginal, conditioned on the neighbours of a already
present. `Contract(a)` traces cell a out.

Literal syntax (whitespace separated):

    c:<cell>                       contract
    e:<cell>@<cluster>             extend from a stored cluster
    e:<cell>@<cluster>/<c>;<c>...  extend from a nested subset of a stored cluster
    [i]^L  [i]^R  [i]^-1           chain sugar
    [i,j]^UR|UL|DR|DL|-1           hexgrid sugar

where <cell> is a comma separated label such as `2` or `2,3`.
"""

import logging
import re
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, Optional, Tuple, Union

from qmarkov.errors import DomainError, LayoutError, MalformedStringError, MissingMarginalError
from qmarkov.marginal_model import (
    CellLabel,
    ClusterKey,
    Geometry,
    MarginalSet,
    format_cell,
    quad_index,
)
from qmarkov.models import RecoveryConfig, default_recovery
from qmarkov.qdm_core import LocalState, SiteId, partial_trace, reduce_to, scalar_state, trace_distance
from qmarkov.recovery import RecoveryMap, apply_recovery, build_recovery

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Extend:
    cell: CellLabel
    cluster: ClusterKey

    def token(self) -> str:
        text = f"e:{_label_text(self.cell)}@{self.cluster.index}"
        if self.cluster.cells is not None:
            text += "/" + ";".join(_label_text(label) for label in self.cluster.cells)
        return text


@dataclass(frozen=True)
class Contract:
    cell: CellLabel

    def token(self) -> str:
        return f"c:{_label_text(self.cell)}"


Symbol = Union[Extend, Contract]


@dataclass(frozen=True)
class MarginalString:
    """Ordered symbols, leftmost applied first."""

    symbols: Tuple[Symbol, ...] = ()

    @classmethod
    def of(cls, *parts: Union[Symbol, "MarginalString"]) -> "MarginalString":
        symbols = []
        for part in parts:
            symbols.extend(part.symbols if isinstance(part, MarginalString) else [part])
        return cls(tuple(symbols))

    def __add__(self, other: "MarginalString") -> "MarginalString":
        return MarginalString(self.symbols + other.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self.symbols)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return MarginalString(self.symbols[index])
        return self.symbols[index]

    def __str__(self) -> str:
        return " ".join(symbol.token() for symbol in self.symbols)


@dataclass(frozen=True)
class Diagnostics:
    """Outcome of simulating a string's support evolution."""

    ok: bool
    index: Optional[int] = None  # 1-based position of the first failing symbol
    reason: str = ""
    support: Tuple[SiteId, ...] = ()


def _label_text(label: CellLabel) -> str:
    return ",".join(str(part) for part in label)


def _parse_label(text: str) -> CellLabel:
    return tuple(int(part) for part in text.split(","))


def chain_symbol(i: int, tag: str) -> Symbol:
    """[i]^R, [i]^L or [i]^-1 under the chain cluster numbering."""
    if tag == "-1":
        return Contract((i,))
    if tag == "R":
        return Extend((i,), ClusterKey(i - 1))
    if tag == "L":
        if i < 2:
            raise MalformedStringError(f"[{i}]^L has no left cluster")
        return Extend((i,), ClusterKey(i - 2))
    raise MalformedStringError(f"unknown chain cluster letter '{tag}'")


_HEX_ANCHORS = {"UR": (0, 0), "UL": (-1, 0), "DR": (0, -1), "DL": (-1, -1)}


def hex_symbol(n: int, i: int, j: int, tag: str) -> Symbol:
    """[i,j]^UR|UL|DR|DL|-1 relative to the quadruple cluster the letter points at."""
    if tag == "-1":
        return Contract((i, j))
    if tag not in _HEX_ANCHORS:
        raise MalformedStringError(f"unknown hexgrid cluster letter '{tag}'")
    di, dj = _HEX_ANCHORS[tag]
    try:
        index = quad_index(n, i + di, j + dj)
    except LayoutError as e:
        raise MalformedStringError(f"[{i},{j}]^{tag} has no cluster: {e}") from e
    return Extend((i, j), ClusterKey(index))


_CONTRACT = re.compile(r"^c:(\d+(?:,\d+)*)$")
_EXTEND = re.compile(r"^e:(\d+(?:,\d+)*)@(\d+)(?:/(\d+(?:,\d+)*(?:;\d+(?:,\d+)*)*))?$")
_SUGAR = re.compile(r"^\[(\d+(?:,\d+)*)\]\^(L|R|UR|UL|DR|DL|-1)$")


def parse_string(text: str, g: Optional[Geometry] = None) -> MarginalString:
    """Parse the literal syntax; sugar needs the geometry to resolve its letters."""
    symbols = []
    for token in text.split():
        if match := _CONTRACT.match(token):
            symbols.append(Contract(_parse_label(match.group(1))))
        elif match := _EXTEND.match(token):
            nested = match.group(3)
            cells = tuple(_parse_label(part) for part in nested.split(";")) if nested else None
            symbols.append(Extend(_parse_label(match.group(1)), ClusterKey(int(match.group(2)), cells)))
        elif match := _SUGAR.match(token):
            label, tag = _parse_label(match.group(1)), match.group(2)
            symbols.append(_resolve_sugar(label, tag, g))
        else:
            raise MalformedStringError(f"cannot parse token '{token}'")
    return MarginalString(tuple(symbols))


def _resolve_sugar(label: CellLabel, tag: str, g: Optional[Geometry]) -> Symbol:
    if tag == "-1":
        return Contract(label)
    if g is None:
        raise MalformedStringError(f"'{format_cell(label)}^{tag}' needs a geometry to resolve")
    if g.layout == "chain" and len(label) == 1 and tag in ("L", "R"):
        return chain_symbol(label[0], tag)
    if g.layout == "hexgrid" and len(label) == 2 and tag in _HEX_ANCHORS:
        return hex_symbol(g.size, label[0], label[1], tag)
    raise MalformedStringError(f"'{format_cell(label)}^{tag}' does not fit the {g.layout} layout")


def _step(symbol: Symbol, support: FrozenSet[SiteId], g: Geometry) -> FrozenSet[SiteId]:
    """Support after applying one symbol, or MalformedStringError with the reason."""
    if symbol.cell not in g.cell_map:
        raise MalformedStringError(f"unknown cell {format_cell(symbol.cell)}")
    cell = set(g.cell_sites(symbol.cell))

    if isinstance(symbol, Contract):
        if not cell <= support:
            raise MalformedStringError(f"cell {format_cell(symbol.cell)} is not in the support")
        return support - cell

    try:
        inside = set(g.cluster_sites(symbol.cluster))
        cluster_cells = g.cluster_cells(symbol.cluster)
    except (MissingMarginalError, KeyError) as e:
        raise MalformedStringError(f"unknown cluster {symbol.cluster.describe()}: {e}") from e
    if symbol.cell not in cluster_cells:
        raise MalformedStringError(
            f"cluster {symbol.cluster.describe()} does not contain cell {format_cell(symbol.cell)}"
        )
    if cell & support:
        raise MalformedStringError(f"cell {format_cell(symbol.cell)} already in support")
    if not (g.neighbors(cell) & support) <= inside:
        raise MalformedStringError(
            f"neighbours of {format_cell(symbol.cell)} in the support leave cluster {symbol.cluster.describe()}"
        )
    return support | cell


def well_formed(s: MarginalString, g: Geometry) -> Diagnostics:
    support: FrozenSet[SiteId] = frozenset()
    for position, symbol in enumerate(s, start=1):
        try:
            support = _step(symbol, support, g)
        except MalformedStringError as e:
            return Diagnostics(ok=False, index=position, reason=str(e))
    return Diagnostics(ok=True, support=tuple(sorted(support)))


def _footprint(symbol: Symbol, support: FrozenSet[SiteId], g: Geometry) -> FrozenSet[SiteId]:
    cell = frozenset(g.cell_sites(symbol.cell))
    if isinstance(symbol, Contract):
        return cell
    return cell | (g.neighbors(cell) & support)


def syntactic_commute(x: Symbol, y: Symbol, g: Geometry, support: Iterable[SiteId]) -> bool:
    """Whether x then y equals y then x because the two act on disjoint sites.

    Raises:
        MalformedStringError: x is not applicable at `support`, or y is not after x
    """
    support = frozenset(support)
    _step(y, _step(x, support, g), g)
    if isinstance(x, Contract) and isinstance(y, Contract):
        return True
    if _footprint(x, support, g) & _footprint(y, support, g):
        return False
    for first, second in ((x, y), (y, x)):
        if isinstance(first, Extend):
            reach = g.neighbors(g.cell_sites(first.cell))
            if reach & set(g.cell_sites(second.cell)):
                return False
    return True


@dataclass
class StringEvaluator:
    """Evaluates strings against one marginal set, reusing recovery maps between strings."""

    ms: MarginalSet
    cfg: RecoveryConfig = field(default_factory=default_recovery)
    _maps: Dict[Tuple[ClusterKey, Tuple[SiteId, ...], Tuple[SiteId, ...]], RecoveryMap] = field(
        default_factory=dict, repr=False
    )
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def recovery_for(self, key: ClusterKey, b: Tuple[SiteId, ...], c: Tuple[SiteId, ...]) -> RecoveryMap:
        cache_key = (key, b, c)
        # one build per key when lemma cases share the evaluator across threads
        with self._lock:
            if cache_key not in self._maps:
                base = reduce_to(self.ms.marginal(key), set(b) | set(c))
                self._maps[cache_key] = build_recovery(base, b, c, self.cfg)
            return self._maps[cache_key]

    def apply(self, symbol: Symbol, state: LocalState) -> LocalState:
        g = self.ms.geometry
        cell = tuple(g.cell_sites(symbol.cell))
        if isinstance(symbol, Contract):
            if set(cell) == state.sites:
                return reduce_to(state, ())
            return partial_trace(state, cell)
        conditioning = tuple(sorted(g.neighbors(cell) & state.sites))
        return apply_recovery(self.recovery_for(symbol.cluster, conditioning, cell), state)

    def run(
        self,
        s: MarginalString,
        on_step: Optional[Callable[[int, Symbol, LocalState], None]] = None,
    ) -> LocalState:
        diagnostics = well_formed(s, self.ms.geometry)
        if not diagnostics.ok:
            raise MalformedStringError(f"symbol {diagnostics.index} of '{s}': {diagnostics.reason}")
        if not diagnostics.support:
            raise MalformedStringError(f"'{s}' evaluates to a scalar")

        state = scalar_state()
        for position, symbol in enumerate(s, start=1):
            state = self.apply(symbol, state)
            logger.debug(f"🔍 {symbol.token()} → support {state.support}")
            if on_step is not None:
                on_step(position, symbol, state)
        return state


def evaluate(s: MarginalString, ms: MarginalSet, cfg: Optional[RecoveryConfig] = None) -> LocalState:
    return StringEvaluator(ms, cfg or default_recovery()).run(s)


def relation_gap(
    lhs: MarginalString,
    rhs: MarginalString,
    ms: MarginalSet,
    cfg: Optional[RecoveryConfig] = None,
    evaluator: Optional[StringEvaluator] = None,
) -> float:
    """Trace distance between the states two strings produce."""
    evaluator = evaluator or StringEvaluator(ms, cfg or default_recovery())
    left, right = evaluator.run(lhs), evaluator.run(rhs)
    if left.sites != right.sites:
        raise DomainError(f"'{lhs}' ends on {left.support} but '{rhs}' ends on {right.support}")
    return trace_distance(left, right)
