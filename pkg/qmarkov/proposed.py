"""Strings that build the proposed global states, plus the row strings the 2D relations use.

Chain: [1]^R [2]^L ... [N]^L.
Hexgrid: row 1 left to right with UR then UL clusters, every later row with
DR then DL clusters, rows stacked bottom to top.
"""

from qmarkov.errors import LayoutError
from qmarkov.string_engine import Contract, MarginalString, chain_symbol, hex_symbol


def string_1d(num_cells: int) -> MarginalString:
    if num_cells < 2:
        raise LayoutError(f"a chain string needs at least 2 cells, got {num_cells}")
    return MarginalString.of(chain_symbol(1, "R"), *(chain_symbol(i, "L") for i in range(2, num_cells + 1)))


def row_up(n: int, j: int) -> MarginalString:
    """[:,j]^U = [1,j]^UR [2,j]^UL ... [n,j]^UL"""
    return MarginalString.of(hex_symbol(n, 1, j, "UR"), *(hex_symbol(n, i, j, "UL") for i in range(2, n + 1)))


def row_down(n: int, j: int) -> MarginalString:
    """[:,j]^D = [1,j]^DR [2,j]^DL ... [n,j]^DL"""
    return MarginalString.of(hex_symbol(n, 1, j, "DR"), *(hex_symbol(n, i, j, "DL") for i in range(2, n + 1)))


def row_up_reversed(n: int, j: int) -> MarginalString:
    """[n,j]^UL [n-1,j]^UR ... [1,j]^UR"""
    return MarginalString.of(hex_symbol(n, n, j, "UL"), *(hex_symbol(n, i, j, "UR") for i in range(n - 1, 0, -1)))


def row_down_reversed(n: int, j: int) -> MarginalString:
    """[n,j]^DL [n-1,j]^DR ... [1,j]^DR"""
    return MarginalString.of(hex_symbol(n, n, j, "DL"), *(hex_symbol(n, i, j, "DR") for i in range(n - 1, 0, -1)))


def row_contract(n: int, j: int) -> MarginalString:
    return MarginalString.of(*(Contract((i, j)) for i in range(1, n + 1)))


def string_2d(n: int) -> MarginalString:
    if n < 2:
        raise LayoutError(f"a hexgrid string needs n >= 2, got {n}")
    return MarginalString.of(row_up(n, 1), *(row_down(n, j) for j in range(2, n + 1)))
