"""Chain relations: consistency, contraction and exchange of cells.

Every case is a pair of strings that must end on the same cells and agree up
to O(ε) (or O(nε) for the whole-chain relations).
"""

from typing import List

from qmarkov.lemmas.cases import LemmaCase
from qmarkov.string_engine import MarginalString, chain_symbol


def _s(*tokens) -> MarginalString:
    return MarginalString.of(*(chain_symbol(i, tag) for i, tag in tokens))


def _grown_right(m: int, num_cells: int) -> MarginalString:
    """[m]^R [m+1]^L ... [N]^L"""
    return _s((m, "R"), *((i, "L") for i in range(m + 1, num_cells + 1)))


def _grown_left(m: int, num_cells: int) -> MarginalString:
    """[N]^L [N-1]^R ... [m]^R"""
    return _s((num_cells, "L"), *((i, "R") for i in range(num_cells - 1, m - 1, -1)))


def one_d_cases(num_cells: int) -> List[LemmaCase]:
    N = num_cells
    cases = []

    for i in range(2, N):
        cases.append(LemmaCase("consistency", f"i={i}", _s((i, "L")), _s((i, "R"))))

    for i in range(1, N):
        cases.append(
            LemmaCase("forward_contraction", f"i={i}", _s((i, "R"), (i + 1, "L"), (i, "-1")), _s((i + 1, "L")))
        )
        cases.append(
            LemmaCase("cell_exchange", f"i={i}", _s((i, "R"), (i + 1, "L")), _s((i + 1, "L"), (i, "R")))
        )

    for i in range(2, N + 1):
        cases.append(
            LemmaCase("backward_contraction", f"i={i}", _s((i, "L"), (i - 1, "R"), (i, "-1")), _s((i - 1, "R")))
        )

    for m in range(2, N):
        contracted = _grown_right(1, N) + _s(*((i, "-1") for i in range(1, m)))
        cases.append(LemmaCase("chain_forward", f"m={m}", contracted, _grown_right(m, N)))

    for m in range(1, N):
        cases.append(LemmaCase("chain_reversal", f"m={m}", _grown_right(m, N), _grown_left(m, N)))

    for m in range(1, N - 1):
        contracted = _grown_left(m, N) + _s(*((i, "-1") for i in range(N, m + 1, -1)))
        cases.append(LemmaCase("chain_backward", f"m={m}", contracted, _s((m, "R"), (m + 1, "L"))))

    return cases
