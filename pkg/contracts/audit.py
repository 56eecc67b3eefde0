import logging
from dataclasses import dataclass

from ledger.models import EventKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Violation:
    block_number: int
    index_in_block: int
    reason: str


def scan_property2(blocks):
    """
    Full-chain scan: every FeedbackEvent must reference a uid whose
    InteractionEvent came before it and whose user is the feedback's submitter.
    """
    users_by_uid = {}
    violations = []
    for block in blocks:
        for ev in block.events:
            if ev.kind == EventKind.INTERACTION:
                users_by_uid[ev.payload.uid] = ev.payload.user
            elif ev.kind == EventKind.FEEDBACK:
                user = users_by_uid.get(ev.payload.uid)
                if user is None:
                    violations.append(Violation(ev.block_number, ev.index_in_block,
                                                f"feedback for unknown uid {ev.payload.uid}"))
                elif user != ev.payload.submitter:
                    violations.append(Violation(ev.block_number, ev.index_in_block,
                                                f"uid {ev.payload.uid} used by {user}, reviewed by {ev.payload.submitter}"))
    if violations:
        logger.error(f"Property 2 scan found {len(violations)} unbacked feedbacks")
    return violations


def scan_cache_provenance(state, blocks):
    """Every cached score must equal the ScoreUpdateEvent its provider sealed at as_of_block."""
    latest = {}
    for block in blocks:
        for ev in block.events_of(EventKind.SCORE_UPDATE):
            latest[(ev.payload.provider, ev.payload.service)] = ev
    violations = []
    for address, record in sorted(state.providers.items()):
        for service, cached in sorted(record.cached_scores.items()):
            ev = latest.get((address, service))
            if ev is None or ev.block_number != cached.as_of_block or ev.payload.score != cached.score:
                violations.append(Violation(cached.as_of_block, -1,
                                            f"cache of {address} for {service} has no matching update event"))
    return violations
