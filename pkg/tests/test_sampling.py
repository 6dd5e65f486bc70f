import json

import numpy as np
import pytest

from signcone.cone import HALFSPACE, HYPERPLANE, POINTED, brute_force_rays, is_feasible
from signcone.errors import (
    BudgetTooLarge,
    BudgetTooSmall,
    DuplicateVertex,
    InvalidVertex,
    NoUnsampledVertex,
)
from signcone.sampling import (
    GreedyState,
    SignOracle,
    SignSampleSet,
    greedy_sample,
    hypothesis_scores,
    load_samples,
    random_sample,
    sample_constraint,
    save_samples,
    seed_by_row_norms,
    select_bth_sample,
    sign,
    sign_sample,
)
from signcone.cone import cone_from_constraints
from signcone.spectral import Band, BandBasis


def toy_basis(rows):
    rows = np.array(rows, dtype=float)
    return BandBasis(matrix=rows, band=Band(1, rows.shape[1]))


# ---- sign -------------------------------------------------------------------

@pytest.mark.parametrize("v,expected", [(-2.5, -1), (0.0, 0), (3.7, 1), (1e-13, 0), (-1e-13, 0)])
def test_sign(v, expected):
    assert sign(v) == expected


def test_sign_sample():
    s = sign_sample([0.5, -0.3, 0.2], [0, 1])
    assert s.signs == (1, -1) and s.order == (0, 1) and s.n == 3
    assert len(sign_sample([0.5, -0.3, 0.2], [])) == 0
    assert sign_sample([0.5, -0.3, 0.0], [2]).signs == (0,)


def test_sign_sample_errors():
    with pytest.raises(InvalidVertex):
        sign_sample([1.0, 2.0], [2])
    with pytest.raises(DuplicateVertex):
        sign_sample([1.0, 2.0], [1, 1])


def test_oracle_is_repeatable_and_counts():
    o = SignOracle([0.5, -0.3, 0.0])
    assert [o.query(j) for j in (0, 1, 2, 0)] == [1, -1, 0, 1]
    assert o.queries == 4


# ---- constraints --------------------------------------------------------------

def test_sample_constraint_orientation():
    basis = toy_basis([[0.6, 0.8], [1.0, 0.0]])
    pos = sample_constraint(basis, 0, 1)
    assert pos.kind == HALFSPACE
    np.testing.assert_allclose(pos.normal, [-0.6, -0.8])
    neg = sample_constraint(basis, 0, -1)
    np.testing.assert_allclose(neg.normal, [0.6, 0.8])
    zero = sample_constraint(basis, 0, 0)
    assert zero.kind == HYPERPLANE and zero.label == 0


# ---- seeding ------------------------------------------------------------------

def test_seed_by_row_norms():
    basis = toy_basis([[0.9, 0.1], [0.3, 0.8], [0.1, 0.2]])
    norms = np.linalg.norm(basis.matrix, axis=1)
    np.testing.assert_allclose(norms, [0.9055, 0.8544, 0.2236], atol=1e-4)
    assert seed_by_row_norms(basis, 2) == [0, 1]
    assert seed_by_row_norms(basis, 0) == []


def test_seed_ties_go_to_lower_id():
    basis = toy_basis([[0.1, 0.1], [0.5, 0.5], [0.5, 0.5], [0.2, 0.0]])
    assert seed_by_row_norms(basis, 2) == [1, 2]


# ---- B-th pick ----------------------------------------------------------------

def _exhaustive_score(basis, constraints, j):
    """Min over sign hypotheses of the widest-angle cosine, from the brute-force ray oracle."""
    B = basis.B
    scores = []
    for sigma in (1, -1, 0):
        cons = list(constraints) + [sample_constraint(basis, j, sigma)]
        H = np.array([c.normal for c in cons])
        if np.linalg.matrix_rank(H, tol=1e-9) < B:
            scores.append(-1.0)  # contains a line
            continue
        Z = np.array([r.direction for r in brute_force_rays(B, cons)])
        if len(Z) < 2:
            scores.append(1.0)
        else:
            G = Z @ Z.T
            scores.append(float(G[np.triu_indices(len(Z), 1)].min()))
    return min(scores)


def _state_after(basis, samples):
    cons = [sample_constraint(basis, j, s) for j, s in samples]
    order = tuple(j for j, _ in samples)
    signs = tuple(s for _, s in samples)
    return GreedyState(basis, cone_from_constraints(basis.B, cons), SignSampleSet(order, signs, basis.n))


def test_bth_pick_toy_plane():
    # vertex 0 seeded with sign -1 gives constraint h = (1, 0)
    basis = toy_basis([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    state = _state_after(basis, [(0, -1)])
    np.testing.assert_allclose(state.cone.constraints[0].normal, [1, 0])
    expected = {j: _exhaustive_score(basis, state.cone.constraints, j) for j in (1, 2)}
    assert expected[2] == -1.0  # duplicate row never makes the cone pointed
    pick, score = select_bth_sample(state)
    assert pick == max(expected, key=lambda j: (expected[j], -j))
    assert score == pytest.approx(expected[pick])
    assert pick == 1


def test_bth_pick_matches_exhaustive_scoring(sensor_instance):
    _, _, basis, x = sensor_instance
    seeds = seed_by_row_norms(basis, basis.B - 1)
    state = _state_after(basis, [(j, sign(x[j])) for j in seeds])
    pick, score = select_bth_sample(state)
    candidates = [j for j in range(basis.n) if j not in seeds]
    scores = {j: min(hypothesis_scores(basis, state.cone.constraints, j)) for j in candidates}
    assert score == scores[pick]
    assert all(score >= s for s in scores.values())
    # spot-check the scoring path against the brute-force oracle
    for j in candidates[:5] + [pick]:
        assert scores[j] == pytest.approx(_exhaustive_score(basis, state.cone.constraints, j), abs=1e-9)


def test_bth_pick_last_vertex():
    basis = toy_basis([[1.0, 0.0], [0.0, 1.0]])
    state = _state_after(basis, [(0, 1)])
    assert select_bth_sample(state)[0] == 1


def test_bth_pick_no_candidates():
    basis = toy_basis([[1.0, 0.0], [0.0, 1.0]])
    state = _state_after(basis, [(0, 1), (1, 1)])
    with pytest.raises(NoUnsampledVertex):
        select_bth_sample(state)


# ---- greedy -------------------------------------------------------------------

def test_greedy_structure(sensor_instance):
    _, _, basis, x = sensor_instance
    oracle = SignOracle(x)
    s, state = greedy_sample(basis, 16, oracle)
    assert len(s) == 16 and len(set(s.order)) == 16
    seeds = seed_by_row_norms(basis, 6)
    assert list(s.order[:6]) == seeds
    assert state.history[:7] == ["row-norm"] * 6 + ["max-min"]
    assert len(state.history) == 16
    assert oracle.queries == 16 and oracle.log == list(s.order)
    assert s.signs == tuple(sign(x[j]) for j in s.order)


def test_greedy_consistency_and_nesting(sensor_instance):
    _, _, basis, x = sensor_instance
    alpha = basis.matrix.T @ x
    states = []

    def check(state):
        for c in state.cone.constraints:
            v = float(c.normal @ alpha)
            assert v <= 1e-9 and (c.kind != HYPERPLANE or abs(v) <= 1e-9)
        if states and states[-1].cone.status == POINTED:
            for r in state.cone.rays:
                assert is_feasible(states[-1].cone.constraints, r.direction, 1e-9)
        states.append(state)

    greedy_sample(basis, 20, SignOracle(x), on_step=check)
    assert len(states) == 20


def test_ray_sum_point_has_the_acquired_signs(sensor_instance):
    _, _, basis, x = sensor_instance
    s, state = greedy_sample(basis, 16, SignOracle(x))
    inside = state.cone.ray_matrix().sum(axis=0)
    for j, sigma in zip(s.order, s.signs):
        if sigma != 0:
            assert sign(basis.matrix[j] @ inside) == sigma


def test_greedy_deterministic(sensor_instance):
    _, _, basis, x = sensor_instance
    a, _ = greedy_sample(basis, 16, SignOracle(x))
    b, _ = greedy_sample(basis, 16, SignOracle(x))
    assert a == b


def test_greedy_prefix_property(sensor_instance):
    _, _, basis, x = sensor_instance
    small, _ = greedy_sample(basis, 12, SignOracle(x))
    large, _ = greedy_sample(basis, 20, SignOracle(x))
    assert large.order[:12] == small.order


def test_greedy_budget_checks(sensor_instance):
    _, _, basis, x = sensor_instance
    with pytest.raises(BudgetTooSmall):
        greedy_sample(basis, 6, SignOracle(x))
    with pytest.raises(BudgetTooLarge):
        greedy_sample(basis, 41, SignOracle(x))


def test_greedy_full_budget(sensor_instance):
    _, _, basis, x = sensor_instance
    s, _ = greedy_sample(basis, 40, SignOracle(x))
    assert sorted(s.order) == list(range(40))


# ---- random baseline ----------------------------------------------------------

def test_random_sample():
    assert sorted(random_sample(10, 10, seed=3)) == list(range(10))
    assert random_sample(10, 0, seed=3) == []
    assert random_sample(40, 16, seed=8) == random_sample(40, 16, seed=8)
    s = random_sample(40, 16, seed=8)
    assert len(set(s)) == 16 and all(0 <= v < 40 for v in s)
    with pytest.raises(BudgetTooLarge):
        random_sample(5, 6, seed=0)


def test_random_sample_is_roughly_uniform():
    counts = np.zeros(10)
    for seed in range(2000):
        counts[random_sample(10, 3, seed)] += 1
    # each vertex is picked with probability 0.3 -> 600 expected, sd ~ 20
    assert np.all(np.abs(counts - 600) < 100)


# ---- samples JSON -------------------------------------------------------------

def test_samples_json_round_trip(tmp_path):
    s = SignSampleSet((3, 1, 4), (1, -1, 0), 5)
    save_samples(s, tmp_path / "s.json", "greedy", None)
    obj = json.loads((tmp_path / "s.json").read_text())
    assert obj == {"order": [3, 1, 4], "signs": [1, -1, 0], "n": 5, "strategy": "greedy", "seed": None}
    assert load_samples(tmp_path / "s.json") == s
