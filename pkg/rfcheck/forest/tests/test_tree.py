import math

import numpy as np
import pytest

from rfcheck.datagen.dataset import Dataset
from rfcheck.errors import ConfigurationError, DomainError
from rfcheck.forest.splitter import Cut, best_cut, draw_mtry
from rfcheck.forest.tree import NO_CUT, Cell, grow
from rfcheck.streams import make_stream


def random_dataset(n, p, seed, grid=None):
    rng = np.random.default_rng(seed)
    features = rng.random((n, p))
    if grid:
        features = np.floor(features * grid) / grid
    responses = rng.normal(size=n) + features.sum(axis=1)
    return Dataset(features, responses)


def replay(dataset, subsample, leaves, mtry, rng):
    """
    Straight-line Algorithm 1: level lists, first cell of the current level,
    single-point and uncuttable cells moved to the next level, stop at
    `leaves` cells or when no waiting cell can be cut along any direction.
    Returns the cuts as a set of (cut, points) and the leaves as point sets.
    """
    features, responses = dataset.features, dataset.responses
    p = features.shape[1]
    levels = [[(np.zeros(p), np.ones(p), sorted(subsample))]]
    cuts = set()
    count = 1
    level = 0
    while count < leaves:
        if len(levels) == level + 1:
            levels.append([])
        if not levels[level]:
            level += 1
            if len(levels) == level + 1:
                levels.append([])
            waiting = levels[level]
            if not any(
                len(points) > 1 and np.ptp(features[points], axis=0).max() > 0
                for _, _, points in waiting
            ):
                break
            continue
        lower, upper, points = levels[level].pop(0)
        if len(points) == 1:
            levels[level + 1].append((lower, upper, points))
            continue
        directions = draw_mtry(p, mtry, rng)
        split = best_cut(features[points], responses[points], directions)
        if split is None:
            levels[level + 1].append((lower, upper, points))
            continue
        cut = split.cut
        left = [i for i in points if features[i, cut.axis] < cut.position]
        right = [i for i in points if features[i, cut.axis] >= cut.position]
        left_upper = upper.copy()
        left_upper[cut.axis] = cut.position
        right_lower = lower.copy()
        right_lower[cut.axis] = cut.position
        levels[level + 1].append((lower, left_upper, left))
        levels[level + 1].append((right_lower, upper, right))
        cuts.add((cut, tuple(sorted(points))))
        count += 1
    leaf_sets = {tuple(sorted(points)) for cells in levels for _, _, points in cells}
    return cuts, leaf_sets


def replay_instances():
    for instance in range(100):
        rng = np.random.default_rng(instance)
        n = int(rng.integers(2, 40))
        p = int(rng.integers(1, 4))
        grid = [None, 5, 10][instance % 3]
        a_n = int(rng.integers(1, n + 1))
        leaves = int(rng.integers(1, a_n + 1))
        mtry = int(rng.integers(1, p + 1))
        yield pytest.param(instance, n, p, grid, a_n, leaves, mtry, id=f"instance-{instance}")


@pytest.mark.parametrize(
    ["instance", "n", "p", "grid", "a_n", "leaves", "mtry"], list(replay_instances())
)
def test_grow_matches_replay(instance, n, p, grid, a_n, leaves, mtry):
    dataset = random_dataset(n, p, seed=instance, grid=grid)
    subsample = np.random.default_rng(1000 + instance).choice(n, a_n, replace=False)
    tree = grow(dataset, subsample, leaves, mtry, make_stream(instance, 3, 0))
    cuts, leaf_sets = replay(dataset, subsample, leaves, mtry, make_stream(instance, 3, 0))
    grown_cuts = {
        (node.cut, tuple(sorted(node.cell.point_indices.tolist())))
        for node in tree.internal_nodes()
    }
    grown_leaves = {
        tuple(sorted(cell.point_indices.tolist())) for cell in tree.leaf_cells()
    }
    assert grown_cuts == cuts
    assert grown_leaves == leaf_sets
    assert tree.leaf_count <= leaves
    tree.verify(dataset.features)


def test_single_leaf():
    dataset = random_dataset(20, 2, seed=1)
    tree = grow(dataset, np.arange(20), 1, 2, make_stream(1, 3, 0))
    assert tree.leaf_count == 1
    expected = dataset.responses.mean()
    assert tree.predict([0.3, 0.9]) == pytest.approx(expected, abs=1e-15)
    assert tree.cut_directions([0.3, 0.9], 3) == [NO_CUT, NO_CUT, NO_CUT]


def test_fully_grown_tree_interpolates():
    dataset = random_dataset(64, 3, seed=2)
    tree = grow(dataset, np.arange(64), 64, 1, make_stream(2, 3, 0))
    assert tree.leaf_count == 64
    assert all(cell.n_points == 1 for cell in tree.leaf_cells())
    np.testing.assert_array_equal(tree.predict_many(dataset.features), dataset.responses)


def test_constant_responses_predict_constant():
    features = np.random.default_rng(3).random((30, 2))
    dataset = Dataset(features, np.full(30, 2.5))
    tree = grow(dataset, np.arange(30), 10, 2, make_stream(3, 3, 0))
    queries = np.random.default_rng(4).random((50, 2))
    assert (tree.predict_many(queries) == 2.5).all()


def test_leaf_count_reaches_budget():
    dataset = random_dataset(200, 2, seed=5)
    tree = grow(dataset, np.arange(200), 37, 1, make_stream(5, 3, 0))
    assert tree.leaf_count == 37


def test_early_stop_on_duplicated_rows(caplog):
    features = np.array([[0.2, 0.2]] * 3 + [[0.7, 0.7]] * 3)
    dataset = Dataset(features, np.arange(6.0))
    tree = grow(dataset, np.arange(6), 5, 2, make_stream(6, 3, 0))
    assert tree.leaf_count == 2
    assert "tree growth stopped" in caplog.text


def test_partition_property():
    dataset = random_dataset(300, 3, seed=7)
    tree = grow(dataset, np.arange(300), 40, 2, make_stream(7, 3, 0))
    cells = tree.leaf_cells()
    assert sum(cell.volume for cell in cells) == pytest.approx(1.0, abs=1e-12)
    queries = np.random.default_rng(8).random((10_000, 3))
    queries[:10] = 1.0
    queries[10:20, 0] = 0.0
    memberships = np.stack([cell.contains(queries) for cell in cells])
    assert (memberships.sum(axis=0) == 1).all()
    leaf_ids = tree.apply(queries)
    for column, leaf_id in enumerate(leaf_ids[:500]):
        assert tree.nodes[leaf_id].cell.contains(queries[column])


def test_prediction_within_subsample_range():
    dataset = random_dataset(100, 2, seed=9)
    subsample = np.arange(0, 100, 2)
    tree = grow(dataset, subsample, 12, 1, make_stream(9, 3, 0))
    predictions = tree.predict_many(np.random.default_rng(10).random((500, 2)))
    responses = dataset.responses[subsample]
    assert predictions.min() >= responses.min()
    assert predictions.max() <= responses.max()


def test_grow_is_deterministic():
    dataset = random_dataset(150, 3, seed=11)
    trees = [grow(dataset, np.arange(150), 20, 2, make_stream(11, 3, 0)) for _ in range(2)]
    first, second = ([(node.cut, node.mean) for node in tree.nodes] for tree in trees)
    assert first == second


def test_cut_directions_depth_two():
    features = np.array([[0.2, 0.2], [0.8, 0.2], [0.2, 0.8], [0.8, 0.8]])
    dataset = Dataset(features, np.array([0.0, 1.0, 10.0, 10.0]))
    tree = grow(dataset, np.arange(4), 3, 2, make_stream(12, 3, 0))
    assert tree.cut_sequence([0.1, 0.1], 3) == [Cut(2, 0.5), Cut(1, 0.5)]
    assert tree.cut_directions([0.1, 0.1], 3) == [2, 1, NO_CUT]
    assert tree.cut_directions([0.9, 0.9], 2) == [2, NO_CUT]
    directions, positions = tree.cut_sequences_many([[0.1, 0.1], [0.9, 0.9]], 2)
    np.testing.assert_array_equal(directions, [[2, 1], [2, math.inf]])
    assert positions[0, 1] == 0.5 and np.isnan(positions[1, 1])
    cell = tree.empirical_cell_at_level([0.1, 0.1], 1)
    np.testing.assert_array_equal(cell.upper, [1.0, 0.5])


def test_cut_directions_one_dimension():
    dataset = random_dataset(20, 1, seed=13)
    tree = grow(dataset, np.arange(20), 4, 1, make_stream(13, 3, 0))
    assert tree.cut_directions([0.5], 1) == [1]


@pytest.mark.parametrize(
    ["subsample", "leaves"],
    [
        pytest.param([0, 1, 2], 4, id="leaves_above_subsample"),
        pytest.param([], 1, id="empty_subsample"),
        pytest.param([0, 0, 1], 2, id="repeated_rows"),
        pytest.param([0, 1], 0, id="zero_leaves"),
    ],
)
def test_grow_configuration_errors(subsample, leaves):
    dataset = random_dataset(5, 2, seed=14)
    with pytest.raises(ConfigurationError):
        grow(dataset, np.array(subsample, dtype=int), leaves, 1, make_stream(0, 3, 0))


def test_predict_outside_unit_cube():
    dataset = random_dataset(10, 2, seed=15)
    tree = grow(dataset, np.arange(10), 3, 2, make_stream(15, 3, 0))
    with pytest.raises(DomainError):
        tree.predict([1.2, 0.5])
    with pytest.raises(DomainError):
        tree.predict([0.5])


class Test_Cell:
    def test_unit(self):
        cell = Cell.unit(3, [0, 1])
        assert cell.volume == 1.0
        assert cell.n_points == 2

    def test_empty_side(self):
        with pytest.raises(DomainError):
            Cell([0.5], [0.5], [])

    def test_upper_face_closed_only_at_one(self):
        cell = Cell([0.0, 0.0], [0.5, 1.0], [])
        assert cell.contains([0.2, 1.0])
        assert not cell.contains([0.5, 0.2])

    def test_split_bounds(self):
        cell = Cell.unit(2, [])
        (left_lower, left_upper), (right_lower, right_upper) = cell.split_bounds(Cut(2, 0.25))
        np.testing.assert_array_equal(left_upper, [1.0, 0.25])
        np.testing.assert_array_equal(right_lower, [0.0, 0.25])

    def test_split_bounds_rejects_boundary_cut(self):
        with pytest.raises(DomainError):
            Cell.unit(1, []).split_bounds(Cut(1, 1.0))
