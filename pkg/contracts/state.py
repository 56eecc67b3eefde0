"""
World state of the three contracts: resources, feedback validation, trust-provider registry.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from config import get_config
from ledger.models import EventKind


@dataclass
class ResourceRecord:
    resource: str
    owner: str
    price: int


@dataclass
class CachedScore:
    score: float
    as_of_block: int
    basis_block: int


@dataclass
class ProviderRecord:
    provider: str
    fee: int
    mechanism: str = 'average'
    selection: str = 'deterministic'
    empty_trace_value: float = 0.5
    threshold: int = 3
    registered_at: int = 0
    active: bool = True
    cached_scores: Dict[str, CachedScore] = field(default_factory=dict)

    def cached(self, service):
        return self.cached_scores.get(service)


@dataclass
class FeedbackState:
    """
    Which user interacted with which resource under which uid, and how many
    feedbacks each interaction has collected so far.
    """
    valid_interactions: Dict[int, Tuple[str, str]] = field(default_factory=dict)
    review_counts: Dict[int, int] = field(default_factory=dict)

    def record_interaction(self, uid, user, resource):
        self.valid_interactions[uid] = (user, resource)
        self.review_counts.setdefault(uid, 0)

    def record_feedback(self, uid):
        self.review_counts[uid] = self.review_counts.get(uid, 0) + 1

    def interacting_user(self, uid) -> Optional[str]:
        entry = self.valid_interactions.get(uid)
        return entry[0] if entry else None

    @classmethod
    def from_events(cls, events):
        """Rebuilds the state from sealed events in logical-time order."""
        state = cls()
        for ev in events:
            if ev.kind == EventKind.INTERACTION:
                state.record_interaction(ev.payload.uid, ev.payload.user, ev.payload.resource)
            elif ev.kind == EventKind.FEEDBACK:
                state.record_feedback(ev.payload.uid)
        return state


@dataclass
class ContractState:
    feedback: FeedbackState = field(default_factory=FeedbackState)
    resources: Dict[str, ResourceRecord] = field(default_factory=dict)
    providers: Dict[str, ProviderRecord] = field(default_factory=dict)
    next_uid: int = 1
    r_max: int = field(default_factory=lambda: get_config().R_MAX)

    def fresh_uid(self):
        uid = self.next_uid
        self.next_uid += 1
        return uid

    def active_provider(self, address) -> Optional[ProviderRecord]:
        record = self.providers.get(address)
        if record is None or not record.active:
            return None
        return record
