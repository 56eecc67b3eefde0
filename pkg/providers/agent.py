"""
Trust-provider agent: follows the chain block by block, keeps its own evidence
map, recomputes scores under its recompute policy and pushes changed scores
on-chain as ScoreUpdate transactions.
"""
import logging

from errors import OutOfOrderBlock, TrustLedgerError
from evidence.evidence_map import empty_evidence_map, rejected_reviews_in
from ledger.models import (
    EventKind,
    ProviderRegistrationPayload,
    ScoreUpdatePayload,
    TxKind,
)
from providers.detectors import SERIAL_NEGATIVE, SHORT_LIVED_ACCOUNT, run_detectors
from scoring.mechanisms import RatingProjection, build_mechanism
from scoring.recommendation import ScoreResult, sigma_service
from scoring.selection import EvidenceSelection

logger = logging.getLogger(__name__)

# report kinds whose subject is an account
ACCOUNT_REPORTS = (SHORT_LIVED_ACCOUNT, SERIAL_NEGATIVE)


class TrustProvider:
    """One provider's view of the chain. Never shares state with another provider."""

    def __init__(self, config, ledger=None, r_max=5):
        self.config = config
        self.address = config.address
        self.ledger = ledger
        self.rho = RatingProjection(threshold=config.threshold, r_max=r_max)
        self.mechanism = build_mechanism(config.mechanism, self.rho, config.empty_trace_value)
        self.selection = EvidenceSelection.parse(config.selection)

        self.evidence = empty_evidence_map()
        self.last_block = 0
        self.current_score = {}
        self.pushed = {}
        self.trajectory = []
        self.recompute_log = []
        self.updates = []
        self.reports = []
        self._dirty = set()

    # ==========================================
    # ON-CHAIN PRESENCE
    # ==========================================
    def registration_payload(self):
        return ProviderRegistrationPayload(
            fee=self.config.fee,
            mechanism=self.mechanism.name,
            selection=self.selection.describe(),
            empty_trace_value=self.mechanism.empty_trace_value,
            threshold=self.rho.threshold,
        )

    def register(self):
        """Opens the provider's account if needed and queues its registration."""
        if self.ledger is None:
            return None
        if self.address not in self.ledger.accounts:
            self.ledger.open_account(self.address, self.config.initial_balance)
        return self.ledger.submit_transaction(self.address, TxKind.PROVIDER_REGISTRATION,
                                              self.registration_payload())

    # ==========================================
    # BLOCK STREAM
    # ==========================================
    def ingest_block(self, block):
        """Extends the evidence with one block; returns the ScoreUpdate payloads it pushed."""
        if block.number == 0 and self.last_block == 0:
            return []
        if block.number != self.last_block + 1:
            raise OutOfOrderBlock(f"{self.address} expected block {self.last_block + 1}, got {block.number}")

        evidence_events = [ev for ev in block.events if ev.kind in (EventKind.INTERACTION, EventKind.FEEDBACK)]
        rejected = rejected_reviews_in([block])
        if evidence_events or rejected:
            self.evidence = self.evidence.extended(evidence_events, rejected)
        self.last_block = block.number

        for ev in evidence_events:
            if ev.kind == EventKind.INTERACTION:
                self._dirty.add(ev.payload.resource)
            else:
                self._dirty.add(self.evidence.pi[ev.payload.uid].id)

        if self.config.detectors and evidence_events:
            self.reports = run_detectors(self.evidence, self.config.detectors, head_block=block.number,
                                         rating_threshold=self.rho.threshold)

        policy = self.config.recompute_policy
        if policy == 'every_block' and self._dirty:
            services = sorted(self._dirty)
        elif policy == 'every_n_blocks' and block.number % self.config.n == 0:
            services = sorted(self.evidence.services)
        else:
            return []
        self._dirty.clear()
        return self._recompute(block.number, services)

    def ingest_chain(self, blocks):
        pushed = []
        for block in blocks:
            if block.number > self.last_block or (block.number == 0 and self.last_block == 0):
                pushed += self.ingest_block(block)
        return pushed

    def _recompute(self, block_number, services):
        self.recompute_log.append((block_number, tuple(services)))
        pushed = []
        for service in services:
            value = self.score(service).value
            self.current_score[service] = value
            self.trajectory.append((block_number, service, value))
            previous = self.pushed.get(service)
            if previous is None or abs(value - previous) > self.config.update_epsilon:
                pushed.append(self._push(service, value, block_number))
        return pushed

    def _push(self, service, value, basis_block):
        payload = ScoreUpdatePayload(service=service, score=value, basis_block=basis_block)
        self.pushed[service] = value
        self.updates.append(payload)
        if self.ledger is not None:
            try:
                self.ledger.submit_transaction(self.address, TxKind.SCORE_UPDATE, payload)
            except TrustLedgerError as e:
                logger.warning(f"{self.address} could not push score for {service}: {e}")
        logger.debug(f"{self.address} pushes {service} = {value:.6f} (basis block {basis_block})")
        return payload

    # ==========================================
    # SCORES
    # ==========================================
    def flagged_accounts(self):
        return {r.subject for r in self.reports if r.kind in ACCOUNT_REPORTS}

    def _context(self, context):
        if not self.config.exclude_flagged:
            return context
        flagged = self.flagged_accounts()
        if not flagged:
            return context
        pool = self.evidence.resolve(context)
        return [i for i in pool if i.user not in flagged]

    def score(self, service, context=None):
        """Fresh sigma(service | context) over everything ingested so far."""
        if service not in self.evidence.services:
            return ScoreResult(value=self.mechanism.empty_trace_value, trace_count=1, context_size=0)
        return sigma_service(self.evidence, service, self._context(context), self.mechanism, self.selection,
                             cap=self.config.cap, prune_zero_weights=True)

    def answer_query(self, service, context=None):
        """Cached score, or a fresh one for on-demand providers and explicit contexts."""
        if self.config.recompute_policy == 'on_demand' or context is not None:
            return self.score(service, context).value
        return self.current_score.get(service, self.mechanism.empty_trace_value)
