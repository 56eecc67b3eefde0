import pytest

from conftest import synthetic_map
from errors import DanglingFeedback, UnknownService
from evidence.evidence_map import (
    build_evidence_map,
    context_for_users,
    context_for_window,
    count_maximal_traces,
    empty_evidence_map,
    enumerate_maximal_traces,
    evidence_from_chain,
    feedbacks_for_service,
    interactions_for_service,
    review_id,
    trace_leq,
)
from evidence.models import FeedbackTrace
from ledger.models import EventKind, FeedbackEventPayload, InteractionEventPayload, LedgerEvent
from sim.fixtures import replay_fixture


def ids(reviews):
    return sorted(x.id for x in reviews)


# ==========================================
# BUILDING THE MAP
# ==========================================
def test_fig2_map_shape(fig2, fig2_map):
    labels = fig2.labels
    assert len(fig2_map.interactions) == 3
    assert len(fig2_map.epsilon) == 4
    assert len(fig2_map.reviews) == 5
    assert {uid: s.id for uid, s in fig2_map.pi.items()} == {1: 'y1', 2: 'y1', 3: 'y3'}
    assert [x.id for x in fig2_map.feedbacks_of(labels['i1'])] == [labels['x11'], labels['x12']]
    assert fig2_map.epsilon[labels['x2']].uid == labels['i2']


def test_rejected_review_is_evidence_but_not_feedback(fig2_map):
    (bare,) = [x for x in fig2_map.reviews if not fig2_map.is_feedback(x)]
    assert bare.uid is None
    assert bare.submitter == 'u4'
    assert bare.id.startswith('rejected-')
    assert bare.logical_time[0] == 3


def test_worked_example_has_no_bare_reviews(worked_map):
    assert len(worked_map.reviews) == len(worked_map.epsilon) == 4


def test_rank_follows_logical_time(fig2, fig2_map):
    i1 = fig2_map.interaction(fig2.labels['i1'])
    x11, x12 = fig2_map.feedbacks_of(i1)
    assert (fig2_map.rank_of(i1, x11), fig2_map.rank_of(i1, x12)) == (0, 1)
    assert fig2_map.rank_of(fig2_map.interaction(2), x11) is None


def test_dangling_feedback_is_refused():
    ev = LedgerEvent(EventKind.FEEDBACK, 1, 0, FeedbackEventPayload('u', 'o', 5, 7))
    with pytest.raises(DanglingFeedback):
        build_evidence_map([ev])


def test_events_are_ordered_before_building():
    events = [
        LedgerEvent(EventKind.FEEDBACK, 3, 0, FeedbackEventPayload('u', 'o', 5, 1)),
        LedgerEvent(EventKind.FEEDBACK, 2, 0, FeedbackEventPayload('u', 'o', 0, 1)),
        LedgerEvent(EventKind.INTERACTION, 1, 0, InteractionEventPayload(user='u', resource='s', uid=1)),
    ]
    m = build_evidence_map(events)
    assert [x.rating for x in m.feedbacks_of(1)] == [0, 5]
    assert [x.id for x in m.feedbacks_of(1)] == ['x2.0', 'x3.0']


def test_extended_leaves_the_original_alone(fig2):
    blocks = fig2.blocks
    early = evidence_from_chain(blocks[:4])
    grown = early.extended(blocks[4].events)
    assert len(early.epsilon) == 3
    assert len(grown.epsilon) == 4
    assert dict(grown.epsilon) == dict(evidence_from_chain(blocks).epsilon)


def test_empty_map():
    m = empty_evidence_map()
    assert m.plus(None) == []
    assert count_maximal_traces(m, None) == 1
    assert list(enumerate_maximal_traces(m, None)) == [FeedbackTrace()]


def test_review_ids_name_the_event_position():
    assert review_id(3, 0) == 'x3.0'


# ==========================================
# QUERIES
# ==========================================
def test_service_queries(fig2, fig2_map):
    labels = fig2.labels
    assert [i.uid for i in interactions_for_service(fig2_map, 'y1')] == [1, 2]
    assert ids(feedbacks_for_service(fig2_map, 'y1')) == sorted([labels['x11'], labels['x12'], labels['x2']])
    assert ids(feedbacks_for_service(fig2_map, 'y3')) == [labels['x3']]
    with pytest.raises(UnknownService):
        interactions_for_service(fig2_map, 'y2')


def test_contexts_by_user_and_window(fig2_map):
    assert {i.uid for i in context_for_users(fig2_map, ['u1', 'u3'])} == {1, 3}
    assert {i.uid for i in context_for_window(fig2_map, 2, 2)} == {1, 2, 3}
    assert context_for_window(fig2_map, 3, 10) == frozenset()


def test_resolve_drops_unknown_uids(fig2_map):
    assert [i.uid for i in fig2_map.resolve([3, 99, 1])] == [1, 3]
    assert [i.uid for i in fig2_map.plus([2, 3])] == [2, 3]


def test_plus_skips_unreviewed_interactions():
    m = synthetic_map([[5], [], [0]])
    assert [i.uid for i in m.plus(None)] == [1, 3]


# ==========================================
# TRACES
# ==========================================
def test_fig2_has_two_maximal_traces(fig2, fig2_map):
    traces = list(enumerate_maximal_traces(fig2_map, None))
    assert count_maximal_traces(fig2_map, None) == len(traces) == 2
    assert len(set(traces)) == 2
    i1 = fig2_map.interaction(fig2.labels['i1'])
    assert {t[i1].id for t in traces} == {fig2.labels['x11'], fig2.labels['x12']}
    assert all(t.is_valid(fig2_map) and len(t) == 3 for t in traces)


def test_trace_counts_multiply():
    m = synthetic_map([[0, 5], [1, 2, 3], [4]])
    assert count_maximal_traces(m, None) == 6
    assert len(set(enumerate_maximal_traces(m, None))) == 6


def test_invalid_traces(fig2, fig2_map):
    i1, i2 = fig2_map.interaction(1), fig2_map.interaction(2)
    x2 = fig2_map.feedbacks_of(i2)[0]
    assert not FeedbackTrace({i1: x2}).is_valid(fig2_map)
    assert FeedbackTrace({i2: x2}).is_valid(fig2_map)


def test_trace_order(fig2_map):
    full = next(enumerate_maximal_traces(fig2_map, None))
    part = full.restrict([fig2_map.interaction(1)])
    assert trace_leq(part, full)
    assert trace_leq(FeedbackTrace(), part)
    assert not trace_leq(full, part)


def test_latest_picks_newest_interaction(fig2_map):
    full = next(enumerate_maximal_traces(fig2_map, None))
    assert full.latest() is full[fig2_map.interaction(3)]
    assert FeedbackTrace().latest() is None


def test_alternating_fixture_map():
    m = evidence_from_chain(replay_fixture('alternating-stream', n=6).blocks)
    assert [m.feedbacks_of(uid)[0].rating for uid in range(1, 7)] == [5, 0, 5, 0, 5, 0]
    assert count_maximal_traces(m, None) == 1
