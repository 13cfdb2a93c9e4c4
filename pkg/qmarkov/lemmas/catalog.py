"""Relation catalog for the 1D and 2D verification suites"""

LEMMA_CATALOG = {
    # 1D: chain cells [1..N]
    "consistency": {
        "suite": "1d",
        "name": "Cell consistency [i]^L ≈ [i]^R",
        "order": "eps",
    },
    "forward_contraction": {
        "suite": "1d",
        "name": "Forward contraction",
        "order": "eps",
    },
    "cell_exchange": {
        "suite": "1d",
        "name": "Cell exchange",
        "order": "eps",
    },
    "backward_contraction": {
        "suite": "1d",
        "name": "Backward contraction",
        "order": "eps",
    },
    "chain_forward": {
        "suite": "1d",
        "name": "Proposed chain with leading cells contracted",
        "order": "n_eps",
    },
    "chain_reversal": {
        "suite": "1d",
        "name": "Chain grown right-to-left",
        "order": "n_eps",
    },
    "chain_backward": {
        "suite": "1d",
        "name": "Reversed chain contracted to two cells",
        "order": "n_eps",
    },
    # 2D: hexgrid cells [i,j], i,j in 1..n
    "inheritance_row": {
        "suite": "2d",
        "name": "Row-pair inheritance (UR·UL vs DL·DR)",
        "order": "eps",
    },
    "inheritance_column": {
        "suite": "2d",
        "name": "Column-pair inheritance (UR·DR vs DL·UL)",
        "order": "eps",
    },
    "cluster_permutation": {
        "suite": "2d",
        "name": "Four-cell cluster reversal",
        "order": "eps",
    },
    "cluster_contraction_first": {
        "suite": "2d",
        "name": "Four-cell string, first cell contracted",
        "order": "eps",
    },
    "cluster_contraction_last": {
        "suite": "2d",
        "name": "Reversed four-cell string, last cell contracted",
        "order": "eps",
    },
    "internal_reversal": {
        "suite": "2d",
        "name": "Internal reversal",
        "order": "n_eps",
    },
    "forward_row_contraction": {
        "suite": "2d",
        "name": "Forward row contraction",
        "order": "n_eps",
    },
    "row_exchange": {
        "suite": "2d",
        "name": "Row exchange",
        "order": "n_eps",
    },
    "backward_row_contraction": {
        "suite": "2d",
        "name": "Backward row contraction",
        "order": "n_eps",
    },
    "two_rows": {
        "suite": "2d",
        "name": "Proposed state restricted to two contiguous rows",
        "order": "n2_eps",
    },
    "forward_supercell_contraction": {
        "suite": "2d",
        "name": "Forward supercell contraction",
        "order": "eps",
    },
    "supercell_exchange": {
        "suite": "2d",
        "name": "Supercell exchange",
        "order": "eps",
    },
    "backward_supercell_contraction": {
        "suite": "2d",
        "name": "Backward supercell contraction",
        "order": "eps",
    },
}
