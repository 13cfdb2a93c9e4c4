"""One measured relation instance."""

from dataclasses import dataclass

from qmarkov.string_engine import MarginalString


@dataclass(frozen=True)
class LemmaCase:
    lemma_id: str
    case: str  # index choice, e.g. "i=2,j=1"
    lhs: MarginalString
    rhs: MarginalString
