"""
The evidence map (review -> interaction) and the service projection
(interaction -> service), built from sealed ledger events.

Feedbacks of one interaction are kept in logical-time order; a feedback's rank
is its position in that list, rank 0 being the oldest.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Tuple

from errors import DanglingFeedback, UnknownService
from evidence.models import FeedbackTrace, Interaction, Review, Service
from ledger.models import EventKind, TxKind, TxStatus

logger = logging.getLogger(__name__)


def review_id(block_number, index_in_block):
    return f"x{block_number}.{index_in_block}"


@dataclass(frozen=True)
class EvidenceMap:
    reviews: Tuple[Review, ...]
    epsilon: Mapping[str, Interaction]
    pi: Mapping[int, Service]
    interactions: Mapping[int, Interaction]
    reverse: Mapping[int, Tuple[Review, ...]]
    services: Mapping[str, Service]

    # ==========================================
    # LOOKUPS
    # ==========================================
    def interaction(self, uid):
        return self.interactions.get(uid)

    def feedbacks_of(self, interaction):
        uid = interaction.uid if isinstance(interaction, Interaction) else interaction
        return self.reverse.get(uid, ())

    def rank_of(self, interaction, review):
        feedbacks = self.feedbacks_of(interaction)
        for k, x in enumerate(feedbacks):
            if x.id == review.id:
                return k
        return None

    def is_feedback(self, review):
        return review.id in self.epsilon

    def resolve(self, context):
        """Known interactions of a context given as Interactions or uids, ordered by uid."""
        if context is None:
            return sorted(self.interactions.values(), key=lambda i: i.uid)
        out = {}
        for item in context:
            uid = item.uid if isinstance(item, Interaction) else int(item)
            if uid in self.interactions:
                out[uid] = self.interactions[uid]
        return [out[uid] for uid in sorted(out)]

    def plus(self, context):
        """The interactions of the context that have at least one feedback."""
        return [i for i in self.resolve(context) if self.reverse.get(i.uid)]

    # ==========================================
    # INCREMENTAL BUILD
    # ==========================================
    def extended(self, events, rejected_reviews=()):
        """A new map with the given (later) events added; this map is unchanged."""
        builder = _Builder.from_map(self)
        builder.add_events(events)
        builder.add_rejected(rejected_reviews)
        return builder.freeze()


class _Builder:
    def __init__(self):
        self.reviews = []
        self.epsilon = {}
        self.pi = {}
        self.interactions = {}
        self.reverse = {}
        self.services = {}

    @classmethod
    def from_map(cls, m):
        b = cls()
        b.reviews = list(m.reviews)
        b.epsilon = dict(m.epsilon)
        b.pi = dict(m.pi)
        b.interactions = dict(m.interactions)
        b.reverse = {uid: list(xs) for uid, xs in m.reverse.items()}
        b.services = dict(m.services)
        return b

    def add_events(self, events):
        for ev in sorted(events, key=lambda e: e.logical_time):
            if ev.kind == EventKind.INTERACTION:
                p = ev.payload
                service = self.services.setdefault(p.resource, Service(p.resource))
                interaction = Interaction(uid=p.uid, user=p.user, service=service.id, logical_time=ev.logical_time)
                self.interactions[p.uid] = interaction
                self.pi[p.uid] = service
                self.reverse.setdefault(p.uid, [])
            elif ev.kind == EventKind.FEEDBACK:
                p = ev.payload
                interaction = self.interactions.get(p.uid)
                if interaction is None:
                    raise DanglingFeedback(f"feedback at {ev.logical_time} references unknown uid {p.uid}")
                review = Review(id=review_id(*ev.logical_time), submitter=p.submitter, uid=p.uid,
                                rating=p.rating, logical_time=ev.logical_time)
                self.reviews.append(review)
                self.epsilon[review.id] = interaction
                self.reverse[p.uid].append(review)

    def add_rejected(self, reviews):
        for review in reviews:
            self.reviews.append(review)

    def freeze(self):
        for xs in self.reverse.values():
            xs.sort(key=lambda x: x.logical_time)
        return EvidenceMap(
            reviews=tuple(sorted(self.reviews, key=lambda x: (x.logical_time, x.id))),
            epsilon=MappingProxyType(self.epsilon),
            pi=MappingProxyType(self.pi),
            interactions=MappingProxyType(self.interactions),
            reverse=MappingProxyType({uid: tuple(xs) for uid, xs in self.reverse.items()}),
            services=MappingProxyType(self.services),
        )


def empty_evidence_map():
    return _Builder().freeze()


def build_evidence_map(events, rejected_reviews=()):
    builder = _Builder()
    builder.add_events(events)
    builder.add_rejected(rejected_reviews)
    return builder.freeze()


def rejected_reviews_in(blocks):
    """Reverted review submissions: reviews the chain saw but never turned into feedback."""
    out = []
    for block in blocks:
        for position, tx in enumerate(block.transactions):
            if tx.kind == TxKind.REVIEW_SUBMISSION and tx.status == TxStatus.REVERTED:
                out.append(Review(id=f"rejected-{tx.seq}", submitter=tx.payload.submitter, uid=None,
                                  rating=tx.payload.rating, logical_time=(block.number, -1 - position)))
    return out


def evidence_from_chain(blocks):
    events = [ev for b in blocks for ev in b.events
              if ev.kind in (EventKind.INTERACTION, EventKind.FEEDBACK)]
    m = build_evidence_map(events, rejected_reviews_in(blocks))
    logger.debug(f"Evidence map: {len(m.interactions)} interactions, {len(m.epsilon)} feedbacks, "
                 f"{len(m.reviews) - len(m.epsilon)} bare reviews")
    return m


# ==========================================
# QUERIES
# ==========================================
def _service_id(m, y):
    sid = y.id if isinstance(y, Service) else str(y)
    if sid not in m.services:
        raise UnknownService(f"service {sid} has no interactions")
    return sid


def interactions_for_service(m, y):
    sid = _service_id(m, y)
    return tuple(i for uid, i in sorted(m.interactions.items()) if i.service == sid)


def feedbacks_for_service(m, y):
    """(epsilon . pi)^-1(y): every feedback whose interaction belongs to y."""
    sid = _service_id(m, y)
    return frozenset(x for x_id, i in m.epsilon.items() if i.service == sid
                     for x in m.reverse[i.uid] if x.id == x_id)


def context_for_users(m, users):
    users = set(users)
    return frozenset(i for i in m.interactions.values() if i.user in users)


def context_for_window(m, first_block, last_block):
    return frozenset(i for i in m.interactions.values() if first_block <= i.logical_time[0] <= last_block)


def trace_leq(a, b):
    """a <= b iff a is b restricted to a's domain."""
    return all(i in b and b[i] == x for i, x in a.items())


def count_maximal_traces(m, context):
    return math.prod(len(m.reverse[i.uid]) for i in m.plus(context))


def enumerate_maximal_traces(m, context):
    """
    Every trace with domain A+ exactly once, in odometer order over uids
    (the last interaction's feedback varies fastest).
    """
    aplus = m.plus(context)
    for combo in itertools.product(*(m.reverse[i.uid] for i in aplus)):
        yield FeedbackTrace(dict(zip(aplus, combo)))
