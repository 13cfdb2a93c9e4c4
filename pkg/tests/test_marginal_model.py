import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qmarkov.errors import DomainError, LayoutError, MissingMarginalError
from qmarkov.generators import gen, random_state
from qmarkov.marginal_model import (
    ClusterKey,
    Geometry,
    MarginalSet,
    chain_geometry,
    check,
    extract_marginals,
    hex_geometry,
    markov_conditions,
    neighborhood_overlap_violations,
    quad_index,
)
from qmarkov.models import InstanceSpec
from qmarkov.qdm_core import basis_state, tensor


class TestChainGeometry:
    def test_eight_vertices(self, chain8):
        assert [sites for _, sites in chain8.cells] == [(1, 2), (3, 4), (5, 6), (7, 8)]
        assert len(chain8.clusters) == 3
        assert chain8.cluster_sites(ClusterKey(1)) == (3, 4, 5, 6)
        assert chain8.global_dim() == 256

    def test_smallest_chain(self):
        g = chain_geometry(4, 3)
        assert len(g.cells) == 2
        assert len(g.clusters) == 1
        assert g.dims_of((1, 4)) == (3, 3)

    @pytest.mark.parametrize("n", [2, 5, 7])
    def test_invalid_sizes(self, n):
        with pytest.raises(LayoutError):
            chain_geometry(n, 2)

    def test_distant_cells_have_disjoint_neighbourhoods(self, chain8):
        closed_1 = set(chain8.cell_sites((1,))) | chain8.neighbors(chain8.cell_sites((1,)))
        closed_3 = set(chain8.cell_sites((3,))) | chain8.neighbors(chain8.cell_sites((3,)))
        assert not closed_1 & closed_3

    @pytest.mark.parametrize("n", range(4, 17, 2))
    def test_neighbourhood_overlap_matches_adjacency(self, n):
        assert neighborhood_overlap_violations(chain_geometry(n, 2)) == []


class TestHexGeometry:
    def test_three_by_three(self, hex3):
        assert len(hex3.cells) == 9
        assert len(hex3.clusters) == 4
        assert len(hex3.nested) == 8
        assert hex3.size == 3

    def test_interior_neighbours(self, hex3):
        assert set(hex3.adjacent_cells((2, 2))) == {(1, 2), (3, 2), (2, 1), (2, 3), (3, 3), (1, 1)}

    def test_anti_diagonal_not_adjacent(self, hex3):
        assert not hex3.cells_adjacent((2, 1), (1, 2))
        assert hex3.cells_adjacent((1, 1), (2, 2))

    def test_quad_numbering(self, hex3):
        index = quad_index(3, 2, 1)
        assert index == 1
        assert hex3.clusters[index] == ((2, 1), (3, 1), (2, 2), (3, 2))
        with pytest.raises(LayoutError):
            quad_index(3, 3, 1)

    def test_nested_triples(self, hex3):
        lower, upper = hex3.nested[0], hex3.nested[1]
        assert lower == ClusterKey(0, ((1, 1), (2, 1), (1, 2)))
        assert upper == ClusterKey(0, ((2, 1), (2, 2), (1, 2)))
        assert hex3.find_cluster([(1, 2), (2, 1), (2, 2)]) == upper

    def test_granularity_numbering(self):
        g = hex_geometry(2, 2, granularity=2)
        assert g.cell_sites((1, 1)) == (1, 2)
        assert g.cell_sites((2, 2)) == (7, 8)
        assert g.graph.has_edge(1, 2)
        assert g.graph.has_edge(2, 7)
        assert not g.graph.has_edge(3, 5)

    def test_next_nearest_pairs_are_reported(self, hex3):
        assert ((2, 1), (1, 2)) in neighborhood_overlap_violations(hex3)

    def test_too_small(self):
        with pytest.raises(LayoutError):
            hex_geometry(1, 2)


class TestGeometryValidation:
    def test_cells_must_partition(self):
        with pytest.raises(DomainError):
            Geometry(
                vertices=((1, 2), (2, 2)),
                edges=((1, 2),),
                cells=(((1,), (1,)),),
                clusters=(((1,),),),
            )

    def test_unknown_cluster_cell(self):
        with pytest.raises(DomainError):
            Geometry(
                vertices=((1, 2),),
                edges=(),
                cells=(((1,), (1,)),),
                clusters=(((2,),),),
            )


class TestMarkovConditions:
    def test_chain_conditions(self, chain8):
        conditions = [c for c in markov_conditions(chain8) if c.cluster == ClusterKey(1)]
        first, second = conditions
        assert (first.a_sites, first.b_sites, first.c_sites) == ((3, 4), (5,), (6,))
        assert (second.a_sites, second.b_sites, second.c_sites) == ((5, 6), (4,), (3,))

    def test_hex_anchor_cell_has_empty_c(self, hex3):
        condition = next(
            c for c in markov_conditions(hex3) if c.cluster == ClusterKey(0) and c.cell == (1, 1)
        )
        assert condition.c_sites == ()

    def test_sets_disjoint_and_inside(self, hex3):
        for condition in markov_conditions(hex3):
            a, b, c = map(set, (condition.a_sites, condition.b_sites, condition.c_sites))
            assert not (a & b or b & c or a & c)
            assert a | b | c == set(hex3.cluster_sites(condition.cluster))

    def test_nested_clusters_are_covered(self, hex3):
        keys = {c.cluster for c in markov_conditions(hex3)}
        assert set(hex3.nested) <= keys


class TestMarginalSet:
    def test_missing_entry(self, chain8, rng):
        sites = chain8.cluster_sites(ClusterKey(0))
        with pytest.raises(MissingMarginalError):
            MarginalSet(chain8, {0: random_state(sites, (2,) * 4, rng)})

    def test_wrong_support(self, rng):
        g = chain_geometry(4, 2)
        with pytest.raises(DomainError):
            MarginalSet(g, {0: random_state((1, 2, 3, 5), (2,) * 4, rng)})

    def test_nested_marginal_is_reduction(self, ghz_hex):
        _, ms = ghz_hex
        nested = ms.marginal(ms.geometry.nested[0])
        assert nested.support == (1, 2, 4)

    def test_unknown_cluster(self, ghz_chain):
        _, ms = ghz_chain
        with pytest.raises(MissingMarginalError):
            ms.marginal(ClusterKey(7))


class TestExtractAndCheck:
    def test_ghz_cluster_marginals(self, ghz_chain):
        _, ms = ghz_chain
        expected = np.zeros((16, 16))
        expected[0, 0] = expected[15, 15] = 0.5
        for state in ms.entries.values():
            assert_allclose(state.matrix, expected, atol=1e-14)

    def test_ghz_is_exactly_markov(self, ghz_chain):
        _, ms = ghz_chain
        report = check(ms)
        assert report.max_gap <= 1e-12
        assert report.epsilon <= 1e-7

    def test_single_source_marginals(self, rng):
        g = chain_geometry(6, 2)
        global_state = random_state(g.all_sites, g.dims_of(g.all_sites), rng)
        report = check(extract_marginals(global_state, g))
        assert report.max_gap <= 1e-12
        assert report.epsilon == pytest.approx(math.sqrt(report.max_cmi), abs=1e-12)

    def test_product_marginals(self, rng):
        g = chain_geometry(6, 2)
        state = None
        for label in g.cell_labels:
            sites = g.cell_sites(label)
            factor = random_state(sites, (2, 2), rng)
            state = factor if state is None else tensor(state, factor)
        report = check(extract_marginals(state, g))
        assert report.epsilon <= 1e-6

    def test_orthogonal_overlap(self):
        g = chain_geometry(6, 2)
        ms = MarginalSet(
            g,
            {
                0: basis_state([0, 0, 0, 0], (1, 2, 3, 4), (2,) * 4),
                1: basis_state([1, 1, 1, 1], (3, 4, 5, 6), (2,) * 4),
            },
        )
        report = check(ms)
        assert report.gap_for(0, 1) == pytest.approx(2.0, abs=1e-12)
        assert report.epsilon >= 2.0 - 1e-12

    def test_support_mismatch(self, chain8, rng):
        with pytest.raises(DomainError):
            extract_marginals(random_state((1, 2, 3, 4), (2,) * 4, rng), chain8)

    def test_workers_preserve_order(self, classical_chain):
        _, ms = classical_chain
        serial = check(ms, workers=1)
        threaded = check(ms, workers=4)
        assert [v.cmi for v in serial.cmi_values] == [v.cmi for v in threaded.cmi_values]
        assert serial.epsilon == threaded.epsilon

    def test_cluster_state_conditions(self):
        _, ms = gen(InstanceSpec(kind="cluster_state_1d", n=8))
        report = check(ms)
        assert report.max_gap <= 1e-12
        assert report.max_cmi == pytest.approx(math.log(2), abs=1e-10)
        assert report.epsilon == pytest.approx(math.sqrt(math.log(2)), abs=1e-10)
