import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _reference as ref
from _pools import pool_from_labels, pool_from_probs, random_pool
from sqdiv.pool import correctness
from sqdiv.qmetrics import FOCAL_ERRS, negative_samples
from sqdiv.sq import (
    EmptyFocalNegativesError,
    SQConfig,
    multiclass_kappa,
    sq_alpha,
    sq_epsilon,
    sq_score,
)
from sqdiv.teams import make_team


@pytest.fixture
def triad_pool():
    """Focal model 0 wrong everywhere; model 1 right on 3 of its 4 negatives,
    model 2 right on 1."""
    labels = [
        (3, 3, 3, 3),  # focal: always class 3
        (0, 1, 0, 3),  # right on s0, s1, s2
        (3, 3, 3, 2),  # right on s3 only
    ]
    return pool_from_labels(labels, truth=(0, 1, 0, 2), n_classes=4)


def focal_negatives(cm, team, focal):
    return negative_samples(cm, team, mode=FOCAL_ERRS, focal_id=focal)


def test_sq_epsilon_example(triad_pool):
    cm = correctness(triad_pool)
    team = make_team([0, 1, 2], 3)
    neg = focal_negatives(cm, team, 0)
    assert len(neg) == 4
    assert sq_epsilon(cm, team, 0, neg) == pytest.approx(0.5, abs=1e-12)


def test_sq_epsilon_clones_zero():
    labels = [(1, 1, 1), (1, 1, 1), (1, 1, 1)]
    pool = pool_from_labels(labels, truth=(0, 0, 0), n_classes=3)
    cm = correctness(pool)
    team = make_team([0, 1, 2], 3)
    neg = focal_negatives(cm, team, 0)
    assert sq_epsilon(cm, team, 0, neg) == 0.0


def test_sq_epsilon_perfect_correctors_one():
    labels = [(1, 1), (0, 2), (0, 2)]
    pool = pool_from_labels(labels, truth=(0, 2), n_classes=3)
    cm = correctness(pool)
    team = make_team([0, 1, 2], 3)
    neg = focal_negatives(cm, team, 0)
    assert sq_epsilon(cm, team, 0, neg) == 1.0


def test_sq_epsilon_empty_negatives_signal(triad_pool):
    cm = correctness(triad_pool)
    team = make_team([0, 1, 2], 3)
    with pytest.raises(EmptyFocalNegativesError, match="no negative samples"):
        sq_epsilon(cm, team, 0, ())


def test_sq_epsilon_rejects_foreign_negative_set(triad_pool):
    cm = correctness(triad_pool)
    team = make_team([0, 1, 2], 3)
    neg_for_1 = focal_negatives(cm, team, 1)
    with pytest.raises(ValueError, match="focal-errs"):
        sq_epsilon(cm, team, 0, neg_for_1)


def test_sq_alpha_example():
    # non-focal labels over four negatives: (a,b,a,c) vs (a,b,c,c)
    labels = [
        (0, 0, 0, 0),  # focal, wrong everywhere (truth is class 3)
        (0, 1, 0, 2),
        (0, 1, 2, 2),
    ]
    pool = pool_from_labels(labels, truth=(3, 3, 3, 3), n_classes=4)
    cm = correctness(pool)
    team = make_team([0, 1, 2], 3)
    neg = focal_negatives(cm, team, 0)
    assert sq_alpha(pool, team, 0, neg) == pytest.approx(7 / 11, abs=1e-12)


def test_sq_alpha_identical_labels_one(triad_pool):
    labels = [(2, 2, 2), (0, 1, 0), (0, 1, 0)]
    pool = pool_from_labels(labels, truth=(1, 0, 1), n_classes=3)
    cm = correctness(pool)
    team = make_team([0, 1, 2], 3)
    neg = focal_negatives(cm, team, 0)
    assert sq_alpha(pool, team, 0, neg) == 1.0


def test_sq_alpha_pair_team_zero(triad_pool):
    cm = correctness(triad_pool)
    team = make_team([0, 1], 3)
    neg = focal_negatives(cm, team, 0)
    assert sq_alpha(triad_pool, team, 0, neg) == 0.0


def test_multiclass_kappa_degenerate_marginals():
    assert multiclass_kappa([2, 2, 2], [2, 2, 2], 4) == 1.0
    assert multiclass_kappa([2, 2], [1, 1], 4) == 0.0


def test_sq_score_frozen_breakdown(triad_pool):
    cm = correctness(triad_pool)
    team = make_team([0, 1, 2], 3)
    breakdown = sq_score(triad_pool, cm, team)
    by_focal = {f.focal_id: f for f in breakdown.per_focal}
    assert set(by_focal) == {0, 1, 2}
    assert breakdown.skipped_focals == frozenset()
    assert not breakdown.all_skipped

    assert by_focal[0].negative_count == 4
    assert by_focal[0].sq_epsilon == pytest.approx(0.5, abs=1e-12)
    assert by_focal[0].sq_alpha == pytest.approx(-3 / 13, abs=1e-12)
    assert by_focal[0].combined == pytest.approx(7 / 26, abs=1e-12)

    assert by_focal[1].negative_count == 1
    assert by_focal[1].combined == pytest.approx(0.5, abs=1e-12)
    assert by_focal[2].negative_count == 3
    assert by_focal[2].combined == pytest.approx(0.5, abs=1e-12)

    assert breakdown.aggregate == pytest.approx(11 / 26, abs=1e-12)


def test_sq_score_zero_alpha_weight(triad_pool):
    cm = correctness(triad_pool)
    team = make_team([0, 1, 2], 3)
    breakdown = sq_score(triad_pool, cm, team, SQConfig(w_alpha=0.0))
    expected = np.mean([f.sq_epsilon for f in breakdown.per_focal])
    assert breakdown.aggregate == pytest.approx(expected, abs=1e-12)


def test_sq_score_perfect_team_all_skipped():
    labels = [(0, 1), (0, 1), (0, 1)]
    pool = pool_from_labels(labels, truth=(0, 1), n_classes=2)
    cm = correctness(pool)
    breakdown = sq_score(pool, cm, make_team([0, 1, 2], 3))
    assert breakdown.all_skipped
    assert breakdown.aggregate == 0.0
    assert breakdown.skipped_focals == frozenset({0, 1, 2})


def test_sq_score_partial_skip():
    # model 1 is perfect and takes no focal turn; models 0, 2 do
    labels = [(2, 1), (0, 1), (0, 2)]
    pool = pool_from_labels(labels, truth=(0, 1), n_classes=3)
    cm = correctness(pool)
    breakdown = sq_score(pool, cm, make_team([0, 1, 2], 3))
    assert breakdown.skipped_focals == frozenset({1})
    assert {f.focal_id for f in breakdown.per_focal} == {0, 2}


def test_sq_score_rejects_small_team(triad_pool):
    cm = correctness(triad_pool)
    with pytest.raises(ValueError, match="at least 2"):
        sq_score(triad_pool, cm, (0,))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_sq_epsilon_identity(seed):
    """Pairwise-disagreement form equals mean non-focal accuracy on the
    focal negatives, since the focal is wrong on all of them."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 6))
    pool = random_pool(seed, m, int(rng.integers(5, 40)), int(rng.integers(2, 5)))
    cm = correctness(pool)
    team = make_team(range(m), m)
    focal = int(rng.integers(0, m))
    neg = focal_negatives(cm, team, focal)
    if len(neg) == 0:
        return
    idx = list(neg.sample_indices)
    others = [i for i in range(m) if i != focal]
    direct = float(np.mean([cm.bits[i][idx].mean() for i in others]))
    assert sq_epsilon(cm, team, focal, neg) == pytest.approx(direct, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), w_eps=st.floats(0, 2), w_alpha=st.floats(0, 2))
def test_sq_aggregate_range(seed, w_eps, w_alpha):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 6))
    pool = random_pool(seed, m, int(rng.integers(3, 30)), int(rng.integers(2, 5)))
    cm = correctness(pool)
    breakdown = sq_score(pool, cm, make_team(range(m), m),
                         SQConfig(w_epsilon=w_eps, w_alpha=w_alpha))
    assert -w_alpha - 1e-12 <= breakdown.aggregate <= w_eps + w_alpha + 1e-12


def test_sq_score_deterministic_and_order_invariant():
    pool = random_pool(42, 4, 25, 3)
    cm = correctness(pool)
    a = sq_score(pool, cm, make_team([2, 0, 3], 4))
    b = sq_score(pool, cm, make_team([3, 2, 0], 4))
    assert a == b
    assert a.aggregate == b.aggregate


def test_sq_matches_reference_on_random_pools():
    for seed in range(25):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 6))
        pool = random_pool(seed + 1000, m, int(rng.integers(4, 30)), int(rng.integers(2, 5)))
        cm = correctness(pool)
        team = make_team(range(m), m)
        breakdown = sq_score(pool, cm, team)
        evaluated, skipped, aggregate = ref.sq_breakdown(
            pool.predicted_labels(), cm.bits, list(team.member_ids), pool.n_classes
        )
        assert breakdown.skipped_focals == frozenset(skipped)
        assert breakdown.aggregate == pytest.approx(aggregate, abs=1e-12)
        for f in breakdown.per_focal:
            count, eps, alpha, combined = evaluated[f.focal_id]
            assert f.negative_count == count
            assert f.sq_epsilon == pytest.approx(eps, abs=1e-12)
            assert f.sq_alpha == pytest.approx(alpha, abs=1e-12)


def test_sq_alpha_on_correctness_switch():
    pool = random_pool(5, 3, 30, 3)
    cm = correctness(pool)
    team = make_team([0, 1, 2], 3)
    on_labels = sq_score(pool, cm, team, SQConfig(alpha_on_labels=True))
    on_bits = sq_score(pool, cm, team, SQConfig(alpha_on_labels=False))
    _, _, expected = ref.sq_breakdown(
        pool.predicted_labels(), cm.bits, [0, 1, 2], pool.n_classes,
        alpha_on_labels=False,
    )
    assert on_bits.aggregate == pytest.approx(expected, abs=1e-12)
    assert on_bits.aggregate != on_labels.aggregate


def test_negative_cap_respected_and_deterministic():
    pool = random_pool(9, 3, 300, 3)
    cm = correctness(pool)
    team = make_team([0, 1, 2], 3)
    capped = sq_score(pool, cm, team, SQConfig(negative_cap=10, seed=4))
    again = sq_score(pool, cm, team, SQConfig(negative_cap=10, seed=4))
    assert capped == again
    assert all(f.negative_count <= 10 for f in capped.per_focal)


def test_monotone_synergy_flip():
    """Making every non-focal strictly more accurate on the focal's failures
    never lowers the aggregate."""
    for seed in (0, 7, 19, 101, 555):
        pool = random_pool(seed, 4, 30, 3)
        cm = correctness(pool)
        team = make_team([0, 1, 2], 4)
        base = sq_score(pool, cm, team).aggregate
        probs = np.array(pool.probs)
        fails = np.flatnonzero(~cm.bits[0])
        for member in (1, 2):
            for j in fails:
                row = np.full(pool.n_classes, 0.1)
                row[pool.truth[j]] = 0.8
                probs[member, j] = row / row.sum()
        improved = pool_from_probs(probs, pool.truth)
        after = sq_score(improved, correctness(improved), team).aggregate
        assert after >= base - 1e-12
