from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Optional, Tuple


@dataclass(frozen=True)
class Service:
    id: str


@dataclass(frozen=True)
class Interaction:
    uid: int
    user: str
    service: str
    logical_time: Tuple[int, int]


@dataclass(frozen=True)
class Review:
    """
    One rating submission. Feedbacks carry the uid of the interaction they
    review; reviews that never became feedback carry no uid.
    """
    id: str
    submitter: str
    uid: Optional[int]
    rating: int
    logical_time: Tuple[int, int]


class FeedbackTrace:
    """
    A partial assignment of reviews to interactions (interaction -> review).

    Immutable and hashable. Validity against an evidence map (every assigned
    review is a feedback of its interaction, no review used twice) is checked
    by is_valid.
    """

    __slots__ = ('_assignment', '_hash')

    def __init__(self, assignment=None):
        items = sorted((assignment or {}).items(), key=lambda kv: kv[0].uid)
        self._assignment = MappingProxyType(dict(items))
        self._hash = None

    @property
    def assignment(self):
        return self._assignment

    @property
    def domain(self):
        return frozenset(self._assignment)

    def __len__(self):
        return len(self._assignment)

    def __iter__(self):
        return iter(self._assignment)

    def __contains__(self, interaction):
        return interaction in self._assignment

    def __getitem__(self, interaction):
        return self._assignment[interaction]

    def items(self):
        return self._assignment.items()

    def reviews(self):
        return list(self._assignment.values())

    def restrict(self, interactions):
        keep = set(interactions)
        return FeedbackTrace({i: x for i, x in self._assignment.items() if i in keep})

    def latest(self):
        """The review assigned to the interaction with the greatest logical time."""
        if not self._assignment:
            return None
        newest = max(self._assignment, key=lambda i: i.logical_time)
        return self._assignment[newest]

    def is_valid(self, evidence_map):
        seen = set()
        for interaction, review in self._assignment.items():
            if evidence_map.epsilon.get(review.id) != interaction:
                return False
            if review.id in seen:
                return False
            seen.add(review.id)
        return True

    def __eq__(self, other):
        if not isinstance(other, FeedbackTrace):
            return NotImplemented
        return dict(self._assignment) == dict(other._assignment)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._assignment.items()))
        return self._hash

    def __repr__(self):
        inner = ', '.join(f"{i.uid}->{x.id}" for i, x in self._assignment.items())
        return f"FeedbackTrace({{{inner}}})"
