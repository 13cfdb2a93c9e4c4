"""Hexgrid relations: four-cell cluster identities, row and supercell moves.

Letters follow the quadruple Q(i,j) = {[i,j],[i+1,j],[i,j+1],[i+1,j+1]}:
[i,j] sees it as UR, [i+1,j] as UL, [i,j+1] as DR and [i+1,j+1] as DL.
"""

from typing import List

from qmarkov.lemmas.cases import LemmaCase
from qmarkov.marginal_model import ClusterKey, quad_index
from qmarkov.proposed import (
    row_contract,
    row_down,
    row_down_reversed,
    row_up,
    row_up_reversed,
    string_2d,
)
from qmarkov.string_engine import Extend, MarginalString, hex_symbol


def two_d_cases(n: int) -> List[LemmaCase]:
    def s(*tokens) -> MarginalString:
        return MarginalString.of(*(hex_symbol(n, i, j, tag) for i, j, tag in tokens))

    def triple(i, j, cell, cells) -> Extend:
        return Extend(cell, ClusterKey(quad_index(n, i, j), cells))

    cases = []
    inner = range(1, n)

    for i in inner:
        for j in range(2, n):
            cases.append(
                LemmaCase(
                    "inheritance_row",
                    f"i={i},j={j}",
                    s((i, j, "UR"), (i + 1, j, "UL")),
                    s((i + 1, j, "DL"), (i, j, "DR")),
                )
            )

    for i in range(2, n):
        for j in inner:
            cases.append(
                LemmaCase(
                    "inheritance_column",
                    f"i={i},j={j}",
                    s((i, j, "UR"), (i, j + 1, "DR")),
                    s((i, j + 1, "DL"), (i, j, "UL")),
                )
            )

    for i in inner:
        for j in inner:
            forward = s((i, j, "UR"), (i + 1, j, "UL"), (i, j + 1, "DR"), (i + 1, j + 1, "DL"))
            backward = s((i + 1, j + 1, "DL"), (i, j + 1, "DR"), (i + 1, j, "UL"), (i, j, "UR"))
            label = f"i={i},j={j}"
            cases.append(LemmaCase("cluster_permutation", label, forward, backward))

            upper = ((i + 1, j), (i + 1, j + 1), (i, j + 1))
            cases.append(
                LemmaCase(
                    "cluster_contraction_first",
                    label,
                    forward + s((i, j, "-1")),
                    MarginalString.of(
                        triple(i, j, (i + 1, j + 1), upper),
                        triple(i, j, (i + 1, j), upper),
                        triple(i, j, (i, j + 1), upper),
                    ),
                )
            )

            lower = ((i, j), (i + 1, j), (i, j + 1))
            cases.append(
                LemmaCase(
                    "cluster_contraction_last",
                    label,
                    backward + s((i + 1, j + 1, "-1")),
                    MarginalString.of(
                        triple(i, j, (i, j), lower),
                        triple(i, j, (i, j + 1), lower),
                        triple(i, j, (i + 1, j), lower),
                    ),
                )
            )

    for j in range(2, n):
        cases.append(LemmaCase("internal_reversal", f"j={j}", row_up(n, j), row_down_reversed(n, j)))

    for j in range(1, n - 1):
        cases.append(
            LemmaCase(
                "forward_row_contraction",
                f"j={j}",
                row_up(n, j) + row_down(n, j + 1) + row_contract(n, j),
                row_up(n, j + 1),
            )
        )

    for j in inner:
        cases.append(
            LemmaCase(
                "row_exchange",
                f"j={j}",
                row_up(n, j) + row_down(n, j + 1),
                row_down_reversed(n, j + 1) + row_up_reversed(n, j),
            )
        )

    for j in range(2, n):
        cases.append(
            LemmaCase(
                "backward_row_contraction",
                f"j={j}",
                row_down_reversed(n, j + 1) + row_up_reversed(n, j) + row_contract(n, j + 1),
                row_down_reversed(n, j),
            )
        )

    for m in inner:
        others = [row_contract(n, j) for j in range(1, n + 1) if j not in (m, m + 1)]
        cases.append(
            LemmaCase(
                "two_rows",
                f"m={m}",
                MarginalString.of(string_2d(n), *others),
                row_up(n, m) + row_down(n, m + 1),
            )
        )

    for i in range(1, n - 1):
        for m in inner:
            grown = s((i, m, "UR"), (i, m + 1, "DR"), (i + 1, m, "UL"), (i + 1, m + 1, "DL"))
            label = f"i={i},m={m}"
            cases.append(
                LemmaCase(
                    "forward_supercell_contraction",
                    label,
                    grown + s((i, m, "-1"), (i, m + 1, "-1")),
                    s((i + 1, m, "UR"), (i + 1, m + 1, "DR")),
                )
            )
            cases.append(
                LemmaCase(
                    "supercell_exchange",
                    label,
                    grown,
                    s((i + 1, m, "UR"), (i + 1, m + 1, "DR"), (i, m + 1, "DR"), (i, m, "UR")),
                )
            )

    for i in range(2, n):
        for m in inner:
            cases.append(
                LemmaCase(
                    "backward_supercell_contraction",
                    f"i={i},m={m}",
                    s(
                        (i + 1, m + 1, "DL"),
                        (i + 1, m, "UL"),
                        (i, m + 1, "DR"),
                        (i, m, "UR"),
                        (i + 1, m + 1, "-1"),
                        (i + 1, m, "-1"),
                    ),
                    s((i, m + 1, "DL"), (i, m, "UL")),
                )
            )

    return cases
