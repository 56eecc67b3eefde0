import logging
from dataclasses import dataclass

from evidence.evidence_map import empty_evidence_map, rejected_reviews_in
from ledger.models import EventKind, TxKind, TxStatus
from scoring.mechanisms import RatingProjection, build_mechanism
from scoring.recommendation import sigma_service
from scoring.selection import EvidenceSelection

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AuditFinding:
    block_number: int
    service: str
    pushed: float
    expected: float
    basis_block: int


def declared_descriptor(blocks, provider):
    """The (mechanism, selection, empty value, threshold) of the provider's last successful registration."""
    declared = None
    for block in blocks:
        for tx in block.transactions:
            if tx.sender == provider and tx.kind == TxKind.PROVIDER_REGISTRATION and tx.status == TxStatus.SUCCESS:
                declared = tx.payload
    return declared


def audit_cached_scores(blocks, provider, tolerance=1e-9, r_max=5):
    """
    Recomputes every score the provider pushed, at the basis block it claims,
    under the scoring it declared at registration. Returns the mismatches.
    """
    declared = declared_descriptor(blocks, provider)
    if declared is None:
        logger.warning(f"{provider} never registered; nothing to audit")
        return []
    mu = build_mechanism(declared.mechanism, RatingProjection(declared.threshold, r_max), declared.empty_trace_value)
    sel = EvidenceSelection.parse(declared.selection)

    updates = sorted(((ev.payload.basis_block, ev.block_number, ev.payload) for block in blocks
                      for ev in block.events_of(EventKind.SCORE_UPDATE) if ev.payload.provider == provider),
                     key=lambda t: (t[0], t[1]))

    findings = []
    m = empty_evidence_map()
    position = 0
    for basis, sealed_at, payload in updates:
        while position < len(blocks) and blocks[position].number <= basis:
            block = blocks[position]
            events = [ev for ev in block.events if ev.kind in (EventKind.INTERACTION, EventKind.FEEDBACK)]
            m = m.extended(events, rejected_reviews_in([block]))
            position += 1
        if payload.service in m.services:
            expected = sigma_service(m, payload.service, None, mu, sel, prune_zero_weights=True).value
        else:
            expected = mu.empty_trace_value
        if abs(expected - payload.score) > tolerance:
            findings.append(AuditFinding(block_number=sealed_at, service=payload.service, pushed=payload.score,
                                         expected=expected, basis_block=basis))
    if findings:
        logger.warning(f"{provider}: {len(findings)} pushed scores do not match its declared scoring")
    return findings
