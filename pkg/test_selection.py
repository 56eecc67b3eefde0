import math

import numpy as np
import pytest

from conftest import synthetic_map
from errors import InvalidSelection, NotAFeedbackOfInteraction
from evidence.evidence_map import enumerate_maximal_traces
from extensions import make_rng
from scoring.selection import EvidenceSelection


@pytest.mark.parametrize('text, kind, q', [
    ('deterministic', 'deterministic', None),
    ('Uniform', 'uniform', None),
    ('fresh(0.5)', 'fresh', 0.5),
    ('fresh-biased(0.25)', 'fresh', 0.25),
    (' geometric( 0.9 ) ', 'geometric', 0.9),
])
def test_parse(text, kind, q):
    sel = EvidenceSelection.parse(text)
    assert (sel.kind, sel.q) == (kind, q)


@pytest.mark.parametrize('text', ['fresh', 'fresh(0)', 'fresh(1)', 'geometric(1.5)', 'geometric(abc)',
                                  'uniform(0.5)', 'newest', 'fresh(nan)'])
def test_parse_rejects(text):
    with pytest.raises(InvalidSelection):
        EvidenceSelection.parse(text)


def test_describe_is_parseable():
    for sel in (EvidenceSelection.deterministic(), EvidenceSelection.uniform(),
                EvidenceSelection.fresh(0.5), EvidenceSelection.geometric(0.125)):
        assert EvidenceSelection.parse(sel.describe()) == sel
    assert str(EvidenceSelection.fresh(0.5)) == 'fresh(0.5)'


def test_weights_for_two_feedbacks():
    assert EvidenceSelection.deterministic().weights(2) == (0.0, 1.0)
    assert EvidenceSelection.uniform().weights(2) == (0.5, 0.5)
    assert EvidenceSelection.fresh(0.5).weights(2) == pytest.approx((1 / 3, 2 / 3))
    assert EvidenceSelection.geometric(0.5).weights(2) == pytest.approx((2 / 3, 1 / 3))


def test_fresh_and_geometric_mirror_each_other():
    fresh = EvidenceSelection.fresh(0.3).weights(5)
    geometric = EvidenceSelection.geometric(0.3).weights(5)
    assert fresh == pytest.approx(tuple(reversed(geometric)))
    assert list(fresh) == sorted(fresh)


def test_single_feedback_always_weighs_one():
    for sel in (EvidenceSelection.deterministic(), EvidenceSelection.uniform(),
                EvidenceSelection.fresh(0.1), EvidenceSelection.geometric(0.9)):
        assert sel.weights(1) == pytest.approx((1.0,))
    assert EvidenceSelection.uniform().weights(0) == ()


def test_weight_of_a_foreign_review_is_an_error(fig2_map):
    x2 = fig2_map.feedbacks_of(2)[0]
    with pytest.raises(NotAFeedbackOfInteraction):
        EvidenceSelection.uniform().weight(fig2_map, fig2_map.interaction(1), x2)


def test_trace_weights_sum_to_one():
    m = synthetic_map([[0, 5], [1, 2, 3], [4], [5, 5, 0, 1]])
    for sel in (EvidenceSelection.uniform(), EvidenceSelection.fresh(0.5), EvidenceSelection.geometric(0.2)):
        total = sum(sel.trace_weight(m, t) for t in enumerate_maximal_traces(m, None))
        assert math.isclose(total, 1.0, rel_tol=1e-12)


def test_weight_table_covers_every_feedback(fig2_map):
    table = EvidenceSelection.fresh(0.5).weight_table(fig2_map)
    assert len(table) == len(fig2_map.epsilon)
    assert table[(1, 'x3.0')] == pytest.approx(1 / 3)
    assert table[(1, 'x4.0')] == pytest.approx(2 / 3)
    assert table[(3, 'x3.2')] == 1.0


def test_deterministic_sampling_takes_newest(fig2_map):
    trace = EvidenceSelection.deterministic().select_trace(fig2_map, None, make_rng(1, 'selection'))
    assert trace[fig2_map.interaction(1)].id == 'x4.0'
    assert len(trace) == 3


def test_sampling_frequencies_follow_weights():
    m = synthetic_map([[0, 5]])
    sel = EvidenceSelection.fresh(0.5)
    rng = make_rng(11, 'selection')
    i1 = m.interaction(1)
    newest = sum(sel.select_trace(m, None, rng)[i1].rating == 5 for _ in range(3000))
    assert abs(newest / 3000 - 2 / 3) < 0.04


def test_uniform_sampling_splits_evenly():
    m = synthetic_map([[0, 5]])
    sel = EvidenceSelection.uniform()
    rng = make_rng(2024, 'selection')
    i1 = m.interaction(1)
    newest = sum(sel.select_trace(m, None, rng)[i1].rating == 5 for _ in range(10_000))
    assert 0.49 <= newest / 10_000 <= 0.51


def test_sampling_is_reproducible():
    m = synthetic_map([[0, 5, 3], [1, 2]])
    sel = EvidenceSelection.uniform()
    first = [sel.select_trace(m, None, make_rng(5, 'selection')) for _ in range(3)]
    second = [sel.select_trace(m, None, make_rng(5, 'selection')) for _ in range(3)]
    assert first == second
    assert isinstance(make_rng(5, 'selection'), np.random.Generator)
