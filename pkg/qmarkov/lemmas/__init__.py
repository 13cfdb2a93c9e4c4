"""Relation suites checked numerically against a marginal set"""

from typing import List

from qmarkov.errors import LayoutError
from qmarkov.lemmas.cases import LemmaCase
from qmarkov.lemmas.catalog import LEMMA_CATALOG
from qmarkov.lemmas.one_d import one_d_cases
from qmarkov.lemmas.two_d import two_d_cases
from qmarkov.marginal_model import Geometry

SUITE_LAYOUTS = {"1d": "chain", "2d": "hexgrid"}


def cases_for(suite: str, g: Geometry) -> List[LemmaCase]:
    """All relation instances of a suite for the given geometry."""
    expected = SUITE_LAYOUTS.get(suite)
    if expected is None:
        raise LayoutError(f"unknown suite '{suite}' (expected 1d or 2d)")
    if g.layout != expected:
        raise LayoutError(f"the {suite} suite needs a {expected} geometry, got {g.layout}")
    if suite == "1d":
        return one_d_cases(len(g.cells))
    return two_d_cases(g.size)


__all__ = [
    "LEMMA_CATALOG",
    "LemmaCase",
    "SUITE_LAYOUTS",
    "cases_for",
    "one_d_cases",
    "two_d_cases",
]
