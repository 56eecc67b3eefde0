"""
Throughput benchmark under the block model.

Each workload runs one round on a fresh ledger:
  1. register a resource and a trust provider
  2. open a fresh user account
  3. time one score query from that account
  4. for review workloads, pre-seed accesses so every review has an interaction
  5. submit the whole workload at once and produce blocks until it is included
Times are simulated (block timestamps), not wall clock.
"""
import logging

import pandas as pd

from config import get_config
from ledger.chain import Ledger
from ledger.models import (
    AccessRequestPayload,
    ProviderRegistrationPayload,
    ResourceRegistrationPayload,
    ReviewSubmissionPayload,
    ScoreQueryPayload,
    TxKind,
)

logger = logging.getLogger(__name__)

BENCH_KINDS = (TxKind.REVIEW_SUBMISSION, TxKind.ACCESS_REQUEST, TxKind.SCORE_QUERY)
BENCH_COLUMNS = ['workload', 'total_time', 'tps', 'avg_tx_per_block', 'avg_gas_cost', 'blocks', 'query_time']

RESOURCE = 'bench-resource'
PROVIDER = 'bench-provider'
OWNER = 'bench-owner'
USER = 'bench-user'
PRICE = 100
FUNDING = 10 ** 18


class _Round:
    def __init__(self, ledger_kwargs):
        self.ledger = Ledger(**ledger_kwargs)

    def next_block(self):
        return self.ledger.produce_block(self.ledger.head.timestamp + self.ledger.params.block_interval)

    def drain(self):
        """Produces blocks until the pool is empty; returns them."""
        blocks = []
        while self.ledger.pending_depth:
            blocks.append(self.next_block())
        return blocks

    def setup(self):
        ledger = self.ledger
        ledger.open_account(OWNER, FUNDING)
        ledger.open_account(PROVIDER, FUNDING)
        ledger.submit_transaction(OWNER, TxKind.RESOURCE_REGISTRATION, ResourceRegistrationPayload(RESOURCE, PRICE))
        ledger.submit_transaction(PROVIDER, TxKind.PROVIDER_REGISTRATION, ProviderRegistrationPayload(fee=0))
        self.drain()
        ledger.open_account(USER, FUNDING)

    def time_query(self):
        submitted_at = self.ledger.head.timestamp
        self.ledger.submit_transaction(USER, TxKind.SCORE_QUERY, ScoreQueryPayload(PROVIDER, RESOURCE, 0))
        blocks = self.drain()
        return blocks[-1].timestamp - submitted_at

    def preseed(self, accesses):
        for _ in range(accesses):
            self.ledger.submit_transaction(USER, TxKind.ACCESS_REQUEST, AccessRequestPayload(RESOURCE, PRICE))
        self.drain()

    def payload(self, kind, k):
        if kind == TxKind.REVIEW_SUBMISSION:
            return ReviewSubmissionPayload(USER, k + 1, 5)
        if kind == TxKind.ACCESS_REQUEST:
            return AccessRequestPayload(RESOURCE, PRICE)
        return ScoreQueryPayload(PROVIDER, RESOURCE, 0)

    def run_workload(self, kind, workload):
        submitted_at = self.ledger.head.timestamp
        for k in range(workload):
            self.ledger.submit_transaction(USER, kind, self.payload(kind, k))
        blocks = self.drain()
        fees = [tx.fee for b in blocks for tx in b.transactions]
        total_time = blocks[-1].timestamp - submitted_at
        return {
            'workload': workload,
            'total_time': total_time,
            'tps': workload / total_time,
            'avg_tx_per_block': workload / len(blocks),
            'avg_gas_cost': sum(fees) / len(fees),
            'blocks': len(blocks),
        }


def bench_throughput(workloads=None, kind=TxKind.REVIEW_SUBMISSION, preseed=None, **ledger_kwargs):
    """One table row per workload: simulated time, tps, block occupancy and mean fee."""
    cfg = get_config()
    workloads = list(workloads or cfg.BENCH_WORKLOADS)
    kind = TxKind(kind)
    if kind not in BENCH_KINDS:
        raise ValueError(f"cannot benchmark {kind.value}; choose from {[k.value for k in BENCH_KINDS]}")
    if any(w <= 0 for w in workloads):
        raise ValueError("workloads must be positive")
    preseed = cfg.BENCH_PRESEED_ACCESSES if preseed is None else preseed
    if kind == TxKind.REVIEW_SUBMISSION and max(workloads) > preseed:
        raise ValueError(f"review workloads need at most {preseed} pre-seeded interactions")

    rows = []
    for workload in workloads:
        bench = _Round(ledger_kwargs)
        bench.setup()
        query_time = bench.time_query()
        if kind == TxKind.REVIEW_SUBMISSION:
            bench.preseed(preseed)
        row = bench.run_workload(kind, workload)
        row['query_time'] = query_time
        rows.append(row)
        logger.info(f"Bench {kind.value} x{workload}: {row['blocks']} blocks, tps {row['tps']:.2f}, "
                    f"avg fee {row['avg_gas_cost']:.0f}")
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)
