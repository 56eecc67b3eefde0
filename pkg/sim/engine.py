"""
Seeded scenario engine.

Block 1 carries the registrations; every later block collects the honest
users' accesses and feedbacks, the attackers' traffic and the providers'
score updates. Honest traffic draws from its own random streams, so a run and
its attack-free baseline see exactly the same honest behavior.
"""
import logging
from dataclasses import dataclass
from typing import Optional

from config import resolve_seed
from contracts.audit import scan_property2
from errors import TrustLedgerError
from extensions import make_rng
from ledger.chain import Ledger
from ledger.models import (
    AccessRequestPayload,
    EventKind,
    ResourceRegistrationPayload,
    ReviewSubmissionPayload,
    ScoreQueryPayload,
    TxKind,
)
from providers.agent import TrustProvider
from providers.detectors import FEEDBACK_SPIKE, SERVICE_TURNED_HOSTILE
from sim.attacks import build_attack
from sim.fixtures import replay_fixture
from sim.metrics import MetricsBundle, block_row, blocks_frame, chain_summary, score_displacement, scores_frame

logger = logging.getLogger(__name__)

OWNER_BALANCE = 10 ** 12
# blocks allowed after the scenario ends for queued feedback and score updates to land
DRAIN_LIMIT = 20


@dataclass
class ScenarioResult:
    config: object
    seed: int
    ledger: Ledger
    providers: list
    metrics: MetricsBundle
    verification: object
    violations: list
    baseline: Optional['ScenarioResult'] = None

    @property
    def ok(self):
        return bool(self.verification) and not self.violations


class Simulation:
    """The world of one run: ledger, honest users, providers and attackers."""

    def __init__(self, config, seed):
        self.config = config
        self.seed = seed
        self.r_max = config.rating.r_max
        self.duration_blocks = config.duration_blocks
        self.user_rng = make_rng(seed, 'users')
        self.rating_rng = make_rng(seed, 'ratings')
        self.query_rng = make_rng(seed, 'queries')

        if config.fixture:
            self.ledger = replay_fixture(config.fixture, n=config.fixture_n, r_max=self.r_max).ledger
        else:
            self.ledger = Ledger(block_interval=config.ledger.block_interval,
                                 block_gas_limit=config.ledger.block_gas_limit,
                                 base_gas_price=config.ledger.base_gas_price,
                                 r_max=self.r_max)
        self.start_height = self.ledger.height

        self.services = {s.id: s for s in config.services}
        self.service_ids = sorted(self.services)
        self.users = [f"user{k}" for k in range(config.users.count)]
        self._honest = set(self.users)
        self.providers = [TrustProvider(p, ledger=self.ledger, r_max=self.r_max) for p in config.providers]
        self.attacks = [build_attack(k, a, self) for k, a in enumerate(config.attacks)]
        self._attacker_of = {}
        self.pending_feedback = []
        self.block_rows = []
        self.rejected_submissions = 0

    # ==========================================
    # HELPERS FOR USERS AND ATTACKS
    # ==========================================
    def price_of(self, service):
        record = self.ledger.contracts.resources.get(service)
        return record.price if record else self.services[service].price

    def quality(self, service, block_number):
        base = self.services[service].true_quality if service in self.services else 1.0
        for attack in self.attacks:
            base = attack.quality(service, block_number, base)
        return base

    def submit(self, sender, kind, payload):
        try:
            self.ledger.submit_transaction(sender, kind, payload)
            return True
        except TrustLedgerError as e:
            self.rejected_submissions += 1
            logger.debug(f"Submission of {kind.value} by {sender} refused: {e}")
            return False

    # ==========================================
    # BLOCK LOOP
    # ==========================================
    def _produce(self):
        now = self.ledger.head.timestamp + self.ledger.params.block_interval
        block = self.ledger.produce_block(now)
        for provider in self.providers:
            provider.ingest_block(block)
        self.block_rows.append(block_row(block, self.ledger.pending_depth, self.ledger.params.block_interval))
        self._schedule_feedback(block)
        return block

    def _schedule_feedback(self, block):
        for ev in block.events_of(EventKind.INTERACTION):
            user, resource, uid = ev.payload.user, ev.payload.resource, ev.payload.uid
            attack = self._attacker_of.get(user)
            if attack is not None:
                rating = attack.rating_value()
            elif user in self._honest:
                satisfied = self.rating_rng.random() < self.quality(resource, block.number)
                rating = self.r_max if satisfied else 0
            else:
                continue
            self.pending_feedback.append((block.number + 1, user, uid, rating))

    def _submit_due_feedback(self, block_number):
        due = [f for f in self.pending_feedback if f[0] <= block_number]
        self.pending_feedback = [f for f in self.pending_feedback if f[0] > block_number]
        for _, user, uid, rating in due:
            self.submit(user, TxKind.REVIEW_SUBMISSION, ReviewSubmissionPayload(user, uid, rating))

    def _honest_traffic(self):
        if not self.service_ids:
            return
        rate = self.config.users.interaction_rate
        query_probability = self.config.users.query_probability
        for user in self.users:
            for _ in range(int(self.user_rng.poisson(rate))):
                service = self.service_ids[int(self.user_rng.integers(len(self.service_ids)))]
                if self.providers and query_probability > 0 and self.query_rng.random() < query_probability:
                    provider = self.providers[int(self.query_rng.integers(len(self.providers)))]
                    self.submit(user, TxKind.SCORE_QUERY,
                                ScoreQueryPayload(provider.address, service, provider.config.fee))
                self.submit(user, TxKind.ACCESS_REQUEST, AccessRequestPayload(service, self.price_of(service)))

    def _setup(self):
        for service in self.config.services:
            owner = service.owner_address
            if owner not in self.ledger.accounts:
                self.ledger.open_account(owner, OWNER_BALANCE)
            self.submit(owner, TxKind.RESOURCE_REGISTRATION, ResourceRegistrationPayload(service.id, service.price))
        for user in self.users:
            self.ledger.open_account(user, self.config.users.initial_balance)
        for provider in self.providers:
            provider.register()
        for attack in self.attacks:
            attack.setup()
        self._track_attackers()
        # providers catch up on a replayed fixture before their first block
        for provider in self.providers:
            provider.ingest_chain(self.ledger.blocks)
        self._produce()

    def _track_attackers(self):
        for attack in self.attacks:
            for address in attack.accounts:
                self._attacker_of.setdefault(address, attack)

    def run(self):
        logger.info(f"Scenario {self.config.name}: seed {self.seed}, {self.duration_blocks} blocks, "
                    f"{len(self.users)} users, {len(self.attacks)} attacks")
        self._setup()
        last = self.start_height + self.duration_blocks
        while self.ledger.height < last:
            number = self.ledger.height + 1
            self._submit_due_feedback(number)
            self._honest_traffic()
            for attack in self.attacks:
                attack.act(number)
            self._track_attackers()
            self._produce()

        for _ in range(DRAIN_LIMIT):
            if not self.ledger.pending_depth and not self.pending_feedback:
                break
            self._submit_due_feedback(self.ledger.height + 1)
            self._produce()
        return self

    # ==========================================
    # RESULTS
    # ==========================================
    def attack_outcomes(self):
        outcomes = []
        for attack in self.attacks:
            accounts = set(attack.accounts)
            triggered = {(p.address, r.kind, r.subject) for p in self.providers for r in p.reports
                         if r.subject in accounts or (r.service == attack.config.target
                                                      and r.kind in (FEEDBACK_SPIKE, SERVICE_TURNED_HOSTILE))}
            outcomes.append({
                'kind': attack.config.kind,
                'target': attack.config.target,
                'accounts': len(accounts),
                'feedbacks': attack.feedbacks_requested,
                'cost': attack.cost(),
                'reports_triggered': len(triggered),
                'displacement': 0.0,
            })
        return outcomes

    def final_scores(self):
        scores = {}
        for provider in self.providers:
            services = sorted(set(self.service_ids) | set(provider.evidence.services))
            scores[provider.address] = {s: provider.answer_query(s) for s in services}
        return scores

    def collect(self, verification, violations):
        reports = [{'provider': p.address, **r.to_dict()} for p in self.providers for r in p.reports]
        summary = {
            'scenario': self.config.name,
            'seed': self.seed,
            'verified': bool(verification),
            'property2_violations': len(violations),
            'scores': self.final_scores(),
            'attacks': self.attack_outcomes(),
            'rejected_submissions': self.rejected_submissions,
            'dropped_transactions': len(self.ledger.dropped),
            'chain': chain_summary(self.ledger),
        }
        return MetricsBundle(blocks=blocks_frame(self.block_rows), scores=scores_frame(self.providers),
                             attacks=summary['attacks'], reports=reports, summary=summary)


def run_scenario(config, seed=None, with_baseline=True):
    """Runs the scenario (and, with attacks, its attack-free baseline at the same seed)."""
    seed = resolve_seed(config.seed, seed)
    sim = Simulation(config, seed).run()

    verification = sim.ledger.verify_chain()
    violations = scan_property2(sim.ledger.blocks)
    metrics = sim.collect(verification, violations)
    result = ScenarioResult(config=config, seed=seed, ledger=sim.ledger, providers=sim.providers,
                            metrics=metrics, verification=verification, violations=violations)

    if config.attacks and with_baseline:
        result.baseline = run_scenario(config.without_attacks(), seed, with_baseline=False)
        empty = sim.providers[0].mechanism.empty_trace_value if sim.providers else 0.5
        for outcome in metrics.attacks:
            outcome['displacement'] = score_displacement(metrics.scores, result.baseline.metrics.scores,
                                                         outcome['target'], empty)
    logger.info(f"Scenario {config.name} finished at block {sim.ledger.height} "
                f"(verified={bool(verification)}, property2 violations={len(violations)})")
    return result
