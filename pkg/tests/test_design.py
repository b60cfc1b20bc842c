import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointinquiry.design import (
    EntropyMap,
    JointEntropySelector,
    MapGrid,
    PredictionMode,
    decode_pgm,
    entropy_at,
    entropy_map,
    hill_climb_pair_search,
    joint_entropy_at,
    joint_entropy_map,
    joint_outcome_distribution,
    mutual_information_at,
    mutual_information_map,
    outcome_distribution,
    pair_joint_entropy_matrix,
    select_independent,
    select_joint_exhaustive,
    select_sequential_greedy,
)
from jointinquiry.exceptions import ValidationError
from jointinquiry.inference import GridPosterior, StateGrid, draw_samples, init_prior
from jointinquiry.world import CircleState, MeasurementLocation, SensorModel

from .oracles import brute_joint, entropy_float

IDEAL = SensorModel(noise=0.02)
M1 = MeasurementLocation(0.0, 0.0)
M2 = MeasurementLocation(10.0, 0.0)

# x in {0,5,10}, y in {0,20}, r in {2,6}
FOUR_GRID = StateGrid([0.0, 5.0, 10.0], [0.0, 20.0], [2.0, 6.0])
ONLY_M1 = FOUR_GRID.index_of(CircleState(0.0, 0.0, 2.0))
ONLY_M2 = FOUR_GRID.index_of(CircleState(10.0, 0.0, 2.0))
BOTH = FOUR_GRID.index_of(CircleState(5.0, 0.0, 6.0))
NEITHER = FOUR_GRID.index_of(CircleState(5.0, 20.0, 2.0))
FOUR_MAP = MapGrid([0.0, 5.0, 10.0], [0.0, 10.0, 20.0])


def four_posterior(ww=0.25, wb=0.25, bw=0.25, bb=0.25):
    mass = np.zeros(FOUR_GRID.size)
    mass[[BOTH, ONLY_M1, ONLY_M2, NEITHER]] = [ww, wb, bw, bb]
    return GridPosterior(FOUR_GRID, mass)


def delta_posterior(grid, index=0):
    mass = np.zeros(grid.size)
    mass[index] = 1.0
    return GridPosterior(grid, mass)


def random_posterior(seed, grid=None):
    rng = np.random.default_rng(seed)
    grid = grid or StateGrid.linspace((0, 30, 5), (0, 30, 5), (3, 15, 3))
    mass = rng.dirichlet(np.full(grid.size, 0.3))
    return GridPosterior(grid, mass / mass.sum())


def test_four_circle_construction_is_uniform():
    table = joint_outcome_distribution(four_posterior(), M1, M2, IDEAL)
    np.testing.assert_allclose(table, np.full((2, 2), 0.25))
    ref = brute_joint(FOUR_GRID.states, four_posterior().mass, (0, 0), (10, 0))
    np.testing.assert_array_equal(table, ref)
    assert joint_entropy_at(four_posterior(), M1, M2, IDEAL) == pytest.approx(2.0)


def test_outcome_distribution_examples():
    post = four_posterior()
    np.testing.assert_allclose(outcome_distribution(post, M1, IDEAL), [0.5, 0.5])
    delta = delta_posterior(FOUR_GRID, BOTH)
    np.testing.assert_array_equal(outcome_distribution(delta, M1, IDEAL), [0.0, 1.0])
    table = joint_outcome_distribution(delta, M1, M2, IDEAL)
    assert np.count_nonzero(table) == 1 and table.sum() == 1.0


def test_sampled_mode_counts_draws():
    post = four_posterior(0.4, 0.3, 0.2, 0.1)
    mode = PredictionMode.sampled(45, seed=11)
    draws = draw_samples(post, 45, seed=11)
    inside = sum(1 for i in draws if i in (BOTH, ONLY_M1))
    np.testing.assert_allclose(outcome_distribution(post, M1, IDEAL, mode), [(45 - inside) / 45, inside / 45])


def test_entropy_of_fifteen_thirty_split():
    # 30 of 45 samples contain the location
    grid = StateGrid([0.0], [0.0], [1.0, 5.0])
    post = GridPosterior(grid, [1 / 3, 2 / 3])
    m = MeasurementLocation(3.0, 0.0)
    np.testing.assert_allclose(outcome_distribution(post, m, IDEAL), [15 / 45, 30 / 45])
    assert entropy_at(post, m, IDEAL) == pytest.approx(0.9182958340544895, abs=1e-12)


def test_same_location_is_diagonal():
    post = random_posterior(3)
    m = MeasurementLocation(12.0, 14.0)
    table = joint_outcome_distribution(post, m, m, IDEAL)
    assert table[0, 1] == 0 and table[1, 0] == 0
    assert joint_entropy_at(post, m, m, IDEAL) == pytest.approx(entropy_at(post, m, IDEAL), abs=1e-12)
    assert mutual_information_at(post, m, m, IDEAL) == pytest.approx(entropy_at(post, m, IDEAL), abs=1e-12)


def test_independent_pair_is_additive():
    p, q = 0.3, 0.8
    post = four_posterior(p * q, p * (1 - q), (1 - p) * q, (1 - p) * (1 - q))
    h1 = entropy_at(post, M1, IDEAL)
    h2 = entropy_at(post, M2, IDEAL)
    assert joint_entropy_at(post, M1, M2, IDEAL) == pytest.approx(h1 + h2, abs=1e-9)
    assert mutual_information_at(post, M1, M2, IDEAL) == pytest.approx(0.0, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), pts=st.lists(st.floats(0, 30), min_size=4, max_size=4))
def test_entropy_identities(seed, pts):
    post = random_posterior(seed)
    m1, m2 = MeasurementLocation(pts[0], pts[1]), MeasurementLocation(pts[2], pts[3])
    h1, h2 = entropy_at(post, m1, IDEAL), entropy_at(post, m2, IDEAL)
    h12 = joint_entropy_at(post, m1, m2, IDEAL)
    mi = mutual_information_at(post, m1, m2, IDEAL)
    assert abs(h1 + h2 - mi - h12) < 1e-9
    assert max(h1, h2) - 1e-9 <= h12 <= h1 + h2 + 1e-9
    assert -1e-12 <= mi <= min(h1, h2) + 1e-9
    table = joint_outcome_distribution(post, m1, m2, IDEAL)
    np.testing.assert_allclose(table.sum(axis=1), outcome_distribution(post, m1, IDEAL), atol=1e-12)
    np.testing.assert_allclose(table.sum(axis=0), outcome_distribution(post, m2, IDEAL), atol=1e-12)
    ref = brute_joint(post.grid.states, post.mass, (m1.x, m1.y), (m2.x, m2.y))
    np.testing.assert_allclose(table, ref, atol=1e-15)
    assert h12 == pytest.approx(entropy_float(np.ravel(ref)), abs=1e-12)


def test_exact_mode_is_sampled_limit():
    for seed in range(3):
        post = random_posterior(seed)
        m = MeasurementLocation(15.0, 15.0)
        exact = outcome_distribution(post, m, IDEAL)
        sampled = outcome_distribution(post, m, IDEAL, PredictionMode.sampled(10**5, seed=seed))
        assert 0.5 * np.abs(exact - sampled).sum() < 0.01


def test_entropy_map_properties():
    grid = MapGrid.linspace((0, 30, 7), (0, 30, 6))
    post = random_posterior(8)
    emap = entropy_map(post, IDEAL, grid)
    assert emap.values.shape == (6, 7)
    assert np.all(emap.flat() >= 0) and np.all(emap.flat() <= 1.0)
    for k in range(grid.size):
        assert emap.flat()[k] == pytest.approx(entropy_at(post, grid.location(k), IDEAL), abs=1e-12)
    zero = entropy_map(delta_posterior(post.grid, 7), IDEAL, grid)
    assert np.all(zero.flat() == 0)


def test_joint_entropy_map_properties():
    grid = MapGrid.linspace((0, 30, 6), (0, 30, 6))
    post = random_posterior(4)
    e1 = grid.location(14)
    h1 = entropy_at(post, e1, IDEAL)
    jmap = joint_entropy_map(post, IDEAL, e1, grid).flat()
    hmap = entropy_map(post, IDEAL, grid).flat()
    mimap = mutual_information_map(post, IDEAL, e1, grid).flat()
    assert jmap[14] == pytest.approx(h1, abs=1e-12)
    assert np.all(jmap >= h1 - 1e-9)
    assert np.all(jmap <= h1 + hmap + 1e-9)
    np.testing.assert_allclose(h1 + hmap - mimap, jmap, atol=1e-9)


def test_select_independent():
    # unique peak at (10, 0)
    mass = np.zeros(FOUR_GRID.size)
    mass[[ONLY_M1, BOTH, ONLY_M2, NEITHER]] = [0.4, 0.3, 0.2, 0.1]
    post = GridPosterior(FOUR_GRID, mass)
    e1, e2 = select_independent(post, IDEAL, FOUR_MAP)
    assert e1 == e2 == M2
    assert mutual_information_at(post, e1, e2, IDEAL) == pytest.approx(entropy_at(post, e1, IDEAL))
    # two tied peaks at (0, 0) and (10, 0)
    assert select_independent(four_posterior(), IDEAL, FOUR_MAP) == (M1, M2)
    # all-zero map
    delta = delta_posterior(FOUR_GRID, 0)
    assert select_independent(delta, IDEAL, FOUR_MAP) == (FOUR_MAP.location(0), FOUR_MAP.location(1))


def test_select_sequential_greedy_four_circle():
    post = four_posterior()
    e1, e2 = select_sequential_greedy(post, IDEAL, FOUR_MAP)
    assert e1 == M1
    assert e2 != e1
    assert joint_entropy_at(post, e1, e2, IDEAL) == pytest.approx(2.0)


def test_select_joint_exhaustive_dominates():
    for seed in range(6):
        post = random_posterior(seed)
        grid = MapGrid.linspace((0, 30, 6), (0, 30, 6))
        best = joint_entropy_at(post, *select_joint_exhaustive(post, IDEAL, grid), IDEAL)
        for pair in (select_independent(post, IDEAL, grid), select_sequential_greedy(post, IDEAL, grid)):
            assert best >= joint_entropy_at(post, *pair, IDEAL) - 1e-12
        mat = pair_joint_entropy_matrix(post, IDEAL, grid)
        np.testing.assert_allclose(mat, mat.T, atol=1e-12)
        assert best == pytest.approx(mat.max(), abs=1e-12)
    pair = select_joint_exhaustive(four_posterior(), IDEAL, FOUR_MAP)
    assert joint_entropy_at(four_posterior(), *pair, IDEAL) == pytest.approx(2.0)


def test_pair_matrix_matches_pointwise_for_disk_sensor():
    disk = SensorModel("disk", noise=0.05, footprint_radius=4.0)
    post = random_posterior(2)
    grid = MapGrid.linspace((0, 30, 4), (0, 30, 3))
    mat = pair_joint_entropy_matrix(post, disk, grid)
    for i in range(grid.size):
        for j in range(grid.size):
            assert mat[i, j] == pytest.approx(
                joint_entropy_at(post, grid.location(i), grid.location(j), disk), abs=1e-10
            )
    emap = entropy_map(post, disk, grid)
    assert np.all(emap.flat() <= np.log2(16) + 1e-12)
    np.testing.assert_allclose(np.diag(mat), emap.flat(), atol=1e-10)


def test_hill_climb():
    post = four_posterior()
    pair = hill_climb_pair_search(post, IDEAL, FOUR_MAP, restarts=10, seed=1)
    assert joint_entropy_at(post, *pair, IDEAL) == pytest.approx(2.0)
    assert hill_climb_pair_search(post, IDEAL, FOUR_MAP, restarts=5, seed=3) == hill_climb_pair_search(
        post, IDEAL, FOUR_MAP, restarts=5, seed=3
    )
    delta = delta_posterior(FOUR_GRID)
    assert joint_entropy_at(delta, *hill_climb_pair_search(delta, IDEAL, FOUR_MAP), IDEAL) == 0.0
    with pytest.raises(ValidationError):
        hill_climb_pair_search(post, IDEAL, FOUR_MAP, restarts=0)


def test_hill_climb_unimodal_surface():
    # a single broad circle hypothesis family centred on the field: one ridge of maxima
    grid = StateGrid.linspace((45, 55, 3), (45, 55, 3), (20, 30, 3))
    post = init_prior(grid)
    mg = MapGrid.linspace((0, 100, 11), (0, 100, 11))
    best = pair_joint_entropy_matrix(post, IDEAL, mg).max()
    pair = hill_climb_pair_search(post, IDEAL, mg, restarts=20, seed=0)
    assert joint_entropy_at(post, *pair, IDEAL) == pytest.approx(best, abs=1e-12)


def test_entropy_map_serialisation():
    grid = MapGrid.linspace((0, 30, 5), (0, 20, 3))
    emap = entropy_map(random_posterior(1), IDEAL, grid)
    rows = emap.to_csv().splitlines()
    assert rows[0] == "x,y,value" and len(rows) == 16
    values = np.array([float(r.split(",")[2]) for r in rows[1:]]).reshape(3, 5)
    np.testing.assert_array_equal(values, emap.values)
    pgm = emap.to_pgm()
    assert pgm.startswith(b"P5\n5 3\n255\n")
    pixels = decode_pgm(pgm)
    np.testing.assert_array_equal(pixels, np.rint(255 * values / values.max()).astype(np.uint8))
    # top image row is max y
    assert pgm[len(b"P5\n5 3\n255\n") :][:5] == pixels[-1].tobytes()
    assert emap.to_pgm() == pgm
    zero = EntropyMap(grid, np.zeros((3, 5)))
    assert decode_pgm(zero.to_pgm()).sum() == 0


def test_selector_estimator():
    sel = JointEntropySelector(IDEAL, policy="sequential-greedy")
    assert sel.get_params()["policy"] == "sequential-greedy"
    sel.fit(FOUR_MAP.points, posterior=four_posterior())
    assert sel.pair_[0] == M1
    assert sel.joint_entropy_ == pytest.approx(2.0)
    out = sel.transform(FOUR_MAP.points)
    assert out.shape == (FOUR_MAP.size, 3)
    np.testing.assert_allclose(out[:, 0] + entropy_at(four_posterior(), M1, IDEAL) - out[:, 2], out[:, 1], atol=1e-12)
    for policy in ("independent", "joint-exhaustive", "joint-search"):
        JointEntropySelector(IDEAL, policy=policy).fit(FOUR_MAP, posterior=four_posterior())
    with pytest.raises(ValidationError):
        JointEntropySelector(IDEAL, policy="nope").fit(FOUR_MAP, posterior=four_posterior())
    with pytest.raises(ValidationError):
        JointEntropySelector(IDEAL).fit([[0, 0], [1, 1]], posterior=four_posterior())
