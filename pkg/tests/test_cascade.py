import math

import pytest

from gouysort import (
    AnalyticStage,
    CascadeNode,
    LGMode,
    four_channel_tree,
    route,
    routing_matrix,
)
from gouysort.cascade import stage_ref_phase_for, write_routing_csv


class TestAnalyticStage:
    def test_ref_phase_solves_port_one(self):
        from gouysort import analytic_port_split

        for delta in (-math.pi / 2, math.pi / 4, 0.731):
            for target in (LGMode(0, 0), LGMode(2, 0), LGMode(1, 3)):
                ref = stage_ref_phase_for(delta, target)
                assert 0.0 <= ref < 2.0 * math.pi
                f1, _ = analytic_port_split(delta, ref, target)
                assert f1 == pytest.approx(1.0, abs=1e-12)


class TestTreeStructure:
    def test_leaf_counts(self):
        assert CascadeNode().n_channels == 1
        assert CascadeNode(sorter=AnalyticStage(0.1)).n_channels == 2
        assert four_channel_tree().n_channels == 4

    def test_depth_first_channel_numbers(self):
        tree = four_channel_tree()
        channels = [ch for ch, _ in route(tree, LGMode(0, 0))]
        assert channels == [1, 2, 3, 4]


@pytest.fixture(scope="module")
def matrix():
    modes = [LGMode(p, 0) for p in range(4)]
    return routing_matrix(four_channel_tree(), modes)


class TestFourChannelTree:
    def test_rows_sum_to_one(self, matrix):
        for row in matrix:
            assert sum(row) == pytest.approx(1.0, abs=1e-12)

    def test_distinct_channels(self, matrix):
        # p = 0, 2, 1, 3 land on channels 1..4
        expected_channel = {0: 0, 2: 1, 1: 2, 3: 3}
        for p, row in enumerate(matrix):
            winner = max(range(4), key=lambda c: row[c])
            assert winner == expected_channel[p]

    def test_crosstalk_below_threshold(self, matrix):
        for row in matrix:
            top = max(row)
            assert top == pytest.approx(1.0, abs=1e-6)
            assert sum(row) - top < 1e-6


class TestCustomTrees:
    def test_pass_through_leaf(self):
        assert route(CascadeNode(), LGMode(3, 1)) == [(1, 1.0)]

    def test_single_half_pi_stage_splits_odd_order(self):
        stage = AnalyticStage(math.pi / 2, 0.0)
        tree = CascadeNode(sorter=stage)
        fractions = dict(route(tree, LGMode(0, 0)))  # m = 1, odd
        assert fractions[1] == pytest.approx(0.5, abs=1e-12)
        assert fractions[2] == pytest.approx(0.5, abs=1e-12)

    def test_asymmetric_tree(self):
        tree = CascadeNode(
            sorter=AnalyticStage(math.pi / 2, 0.0),
            port1=CascadeNode(sorter=AnalyticStage(math.pi / 4, 0.0)),
        )
        assert tree.n_channels == 3
        result = route(tree, LGMode(1, 1))  # m = 4: theta = 2*pi -> all port 1
        fractions = dict(result)
        assert fractions[1] + fractions[2] == pytest.approx(1.0, abs=1e-12)
        assert fractions[3] == pytest.approx(0.0, abs=1e-12)


class TestRoutingCsv:
    def test_layout(self, tmp_path):
        modes = [LGMode(p, 0) for p in range(4)]
        matrix = routing_matrix(four_channel_tree(), modes)
        path = tmp_path / "routing.csv"
        write_routing_csv(path, modes, matrix, comments=["four-channel tree"])
        lines = path.read_text().splitlines()
        assert lines[0] == "# four-channel tree"
        assert lines[1] == "p,ell,ch1,ch2,ch3,ch4"
        assert len(lines) == 2 + 4
        first = lines[2].split(",")
        assert first[0] == "0" and first[1] == "0"
        assert float(first[2]) == pytest.approx(1.0, abs=1e-6)
