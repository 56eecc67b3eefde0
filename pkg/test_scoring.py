import numpy as np
import pytest

from conftest import synthetic_map
from errors import ContextsNotIncreasing, EmptyTrace, EnumerationCapExceeded, UnknownMechanism, UnknownService
from evidence.models import FeedbackTrace
from scoring.mechanisms import (
    AverageMechanism,
    LatestMechanism,
    RatingProjection,
    SumMechanism,
    build_mechanism,
    mu_average,
    mu_latest,
)
from scoring.recommendation import (
    Converged,
    NonConvergent,
    OnlineAverage,
    prefix_contexts,
    sigma_bruteforce,
    sigma_limit,
    sigma_online_average,
    sigma_service,
)
from scoring.selection import EvidenceSelection

RHO = RatingProjection(threshold=3, r_max=5)
AVERAGE = AverageMechanism(RHO, 0.5)
DETERMINISTIC = EvidenceSelection.deterministic()
UNIFORM = EvidenceSelection.uniform()


def alternating(n):
    return synthetic_map([[5 if k % 2 == 0 else 0] for k in range(n)])


# ==========================================
# MECHANISMS
# ==========================================
def test_rating_projection():
    assert [RHO.of_rating(r) for r in range(6)] == [0, 0, 0, 1, 1, 1]


def test_mechanisms_on_a_trace(fig2_map):
    trace = FeedbackTrace({fig2_map.interaction(1): fig2_map.feedbacks_of(1)[0],
                           fig2_map.interaction(2): fig2_map.feedbacks_of(2)[0]})
    assert mu_average(trace, RHO) == 0.5
    assert mu_latest(trace, RHO) == 1.0
    assert SumMechanism(RHO).evaluate(trace) == 1.0


def test_empty_trace():
    with pytest.raises(EmptyTrace):
        mu_average(FeedbackTrace(), RHO)
    with pytest.raises(EmptyTrace):
        LatestMechanism(RHO).evaluate(FeedbackTrace())
    assert AverageMechanism(RHO, 0.25)(FeedbackTrace()) == 0.25


def test_build_mechanism():
    mu = build_mechanism(' Latest ', RHO, 0.1)
    assert isinstance(mu, LatestMechanism)
    assert mu.empty_trace_value == 0.1
    assert not build_mechanism('sum').unit_bounded
    with pytest.raises(UnknownMechanism):
        build_mechanism('median')


# ==========================================
# WORKED EXAMPLE (service y1, both interactions)
# ==========================================
@pytest.mark.parametrize('sel, expected', [
    (EvidenceSelection.uniform(), 0.75),
    (EvidenceSelection.fresh(0.5), 5 / 6),
    (EvidenceSelection.deterministic(), 1.0),
    (EvidenceSelection.geometric(0.5), 2 / 3),
])
def test_worked_example_average(worked_map, sel, expected):
    result = sigma_service(worked_map, 'y1', None, AVERAGE, sel)
    assert result.value == pytest.approx(expected)
    assert result.context_size == 2


def test_worked_example_latest_and_sum(worked_map):
    assert sigma_service(worked_map, 'y1', None, LatestMechanism(RHO), UNIFORM).value == pytest.approx(1.0)
    assert sigma_service(worked_map, 'y1', None, SumMechanism(RHO), UNIFORM).value == pytest.approx(1.5)


def test_worked_example_restricted_context(worked_map):
    result = sigma_service(worked_map, 'y1', [1], AVERAGE, UNIFORM)
    assert result.value == pytest.approx(0.5)
    assert result.trace_count == 2


def test_context_without_feedback_scores_empty_value(worked_map):
    result = sigma_service(worked_map, 'y1', [3], AVERAGE, UNIFORM)
    assert (result.value, result.trace_count, result.context_size) == (0.5, 1, 0)


def test_unknown_service(worked_map):
    with pytest.raises(UnknownService):
        sigma_service(worked_map, 'y9', None, AVERAGE, UNIFORM)


def test_rejected_review_changes_nothing(fig2_map, worked_map):
    for sel in (UNIFORM, EvidenceSelection.fresh(0.5)):
        assert sigma_service(fig2_map, 'y1', None, AVERAGE, sel).value == \
            pytest.approx(sigma_service(worked_map, 'y1', None, AVERAGE, sel).value)


# ==========================================
# ENUMERATION CAP
# ==========================================
def test_cap_is_enforced():
    m = synthetic_map([[0, 5]] * 12)
    with pytest.raises(EnumerationCapExceeded) as info:
        sigma_bruteforce(m, None, AVERAGE, UNIFORM, cap=1000)
    assert info.value.details == {'trace_count': 4096, 'cap': 1000}


def test_pruning_zero_weights_keeps_the_value():
    m = synthetic_map([[0, 5]] * 12)
    pruned = sigma_bruteforce(m, None, AVERAGE, DETERMINISTIC, cap=10, prune_zero_weights=True)
    assert (pruned.value, pruned.trace_count) == (1.0, 1)
    full = sigma_bruteforce(m, None, AVERAGE, DETERMINISTIC, cap=10 ** 4)
    assert full.value == pytest.approx(1.0)


# ==========================================
# ONLINE EVALUATION
# ==========================================
def test_online_average_matches_deterministic_sigma():
    m = synthetic_map([[5], [0, 4], [1, 2, 3], [], [5, 0]])
    online = OnlineAverage(RHO, 0.5)
    for review in sorted((x for xs in m.reverse.values() for x in xs), key=lambda x: x.logical_time):
        online.add(review)
    exact = sigma_bruteforce(m, None, AVERAGE, DETERMINISTIC)
    assert online.value == pytest.approx(exact.value)
    assert online.count == 4


def test_online_re_review_replaces_previous_rating():
    m = synthetic_map([[5, 0]])
    stream = list(m.feedbacks_of(1))
    assert sigma_online_average(stream, RHO, 0.5) == 0.0
    # an older review arriving late does not override a newer one
    assert sigma_online_average(list(reversed(stream)), RHO, 0.5) == 0.0


def test_online_empty_values():
    online = OnlineAverage(RHO, 0.3)
    assert (online.value, online.latest_value, online.total) == (0.3, 0.3, 0.3)


# ==========================================
# LIMITS
# ==========================================
def test_alternating_stream_converges_to_half():
    m = alternating(800)
    result = sigma_limit(m, prefix_contexts(m), AVERAGE, DETERMINISTIC, tol=1e-3, max_steps=800)
    assert isinstance(result, Converged)
    assert 495 <= result.steps <= 510
    assert abs(result.value - 0.5) <= 1e-3


def test_bernoulli_stream_converges_near_its_mean():
    rng = np.random.default_rng(2024)
    m = synthetic_map([[5 if rng.random() < 0.7 else 0] for _ in range(10_000)])
    result = sigma_limit(m, prefix_contexts(m), AVERAGE, DETERMINISTIC, tol=5e-5, max_steps=10_000)
    assert isinstance(result, Converged)
    assert result.steps > 5000
    assert abs(result.value - 0.7) < 0.02


def test_latest_never_settles_on_alternating_stream():
    m = alternating(200)
    result = sigma_limit(m, prefix_contexts(m), LatestMechanism(RHO), DETERMINISTIC, tol=1e-3, max_steps=200)
    assert isinstance(result, NonConvergent)
    assert result.steps == 200
    assert result.last_delta == 1.0


def test_sum_diverges():
    m = alternating(100)
    result = sigma_limit(m, prefix_contexts(m), SumMechanism(RHO), DETERMINISTIC, tol=1e-3, max_steps=100)
    assert isinstance(result, NonConvergent)
    assert result.last_value == 50.0


def test_limit_by_enumeration_for_multi_feedback_maps():
    m = synthetic_map([[0, 5]] * 8)
    result = sigma_limit(m, prefix_contexts(m), AVERAGE, UNIFORM, tol=1e-6, max_steps=8)
    assert isinstance(result, Converged)
    assert result.steps == 4
    assert result.value == pytest.approx(0.5)


def test_explicit_nested_contexts():
    m = alternating(6)
    nested = [[1], [1, 2], [1, 2, 3], [1, 2, 3, 4]]
    result = sigma_limit(m, nested, AVERAGE, DETERMINISTIC, tol=1e-9, max_steps=10)
    assert isinstance(result, NonConvergent)
    assert result.steps == 4
    assert result.last_value == 0.5


def test_contexts_must_grow():
    m = alternating(4)
    with pytest.raises(ContextsNotIncreasing):
        sigma_limit(m, [[1, 2], [1, 2]], AVERAGE, DETERMINISTIC, tol=1e-3, max_steps=10)


def test_limit_needs_a_mechanism_object():
    m = alternating(4)
    with pytest.raises(TypeError):
        sigma_limit(m, prefix_contexts(m), mu_average, DETERMINISTIC, tol=1e-3, max_steps=10)
