import json
import logging
import os
from dataclasses import dataclass, field

import pandas as pd

from ledger.models import EventKind, TxStatus

logger = logging.getLogger(__name__)

BLOCK_COLUMNS = ['block', 'timestamp', 'tx_count', 'reverted', 'gas_used', 'pending_depth', 'tps']
SCORE_COLUMNS = ['provider', 'block', 'service', 'score']
EVENT_COLUMNS = ['block', 'index', 'kind', 'user', 'resource', 'uid', 'submitter', 'delegator', 'rating',
                 'provider', 'service', 'score']


@dataclass
class MetricsBundle:
    """Per-block table, per-provider score trajectories, attack outcomes and a run summary."""
    blocks: pd.DataFrame
    scores: pd.DataFrame
    attacks: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            'metrics': os.path.join(out_dir, 'metrics.csv'),
            'scores': os.path.join(out_dir, 'scores.csv'),
            'summary': os.path.join(out_dir, 'summary.json'),
        }
        self.blocks.to_csv(paths['metrics'], index=False)
        self.scores.to_csv(paths['scores'], index=False)
        if self.reports:
            paths['reports'] = os.path.join(out_dir, 'reports.csv')
            pd.DataFrame(self.reports).to_csv(paths['reports'], index=False)
        with open(paths['summary'], 'w', encoding='utf-8') as f:
            json.dump(self.summary, f, sort_keys=True, indent=2)
            f.write('\n')
        logger.info(f"Metrics written to {out_dir}")
        return paths


def block_row(block, pending_depth, block_interval):
    return {
        'block': block.number,
        'timestamp': block.timestamp,
        'tx_count': len(block.transactions),
        'reverted': sum(1 for tx in block.transactions if tx.status == TxStatus.REVERTED),
        'gas_used': block.gas_used,
        'pending_depth': pending_depth,
        'tps': len(block.transactions) / block_interval,
    }


def blocks_frame(rows):
    return pd.DataFrame(rows, columns=BLOCK_COLUMNS)


def scores_frame(providers):
    rows = [{'provider': p.address, 'block': b, 'service': s, 'score': v}
            for p in providers for b, s, v in p.trajectory]
    return pd.DataFrame(rows, columns=SCORE_COLUMNS)


def _series(scores, provider, service, index, empty):
    rows = scores[(scores['provider'] == provider) & (scores['service'] == service)]
    series = rows.groupby('block')['score'].last()
    return series.reindex(index).ffill().fillna(empty)


def score_displacement(scores, baseline, service, empty_trace_value=0.5):
    """Largest |attacked - baseline| score of the service over every provider and block."""
    if scores.empty and baseline.empty:
        return 0.0
    last = int(max(scores['block'].max() if not scores.empty else 0,
                   baseline['block'].max() if not baseline.empty else 0))
    index = pd.RangeIndex(1, last + 1)
    providers = sorted(set(scores['provider']) | set(baseline['provider']))
    worst = 0.0
    for provider in providers:
        attacked = _series(scores, provider, service, index, empty_trace_value)
        honest = _series(baseline, provider, service, index, empty_trace_value)
        worst = max(worst, float((attacked - honest).abs().max()))
    return worst


def events_table(blocks):
    """Every sealed event as one row; absent fields stay empty."""
    rows = []
    for block in blocks:
        for ev in block.events:
            p = ev.payload
            row = {'block': ev.block_number, 'index': ev.index_in_block, 'kind': ev.kind.value}
            if ev.kind == EventKind.INTERACTION:
                row.update(user=p.user, resource=p.resource, uid=p.uid)
            elif ev.kind == EventKind.FEEDBACK:
                row.update(submitter=p.submitter, delegator=p.delegator, uid=p.uid, rating=p.rating)
            elif ev.kind == EventKind.SCORE_UPDATE:
                row.update(provider=p.provider, service=p.service, score=p.score)
            elif ev.kind == EventKind.SCORE_RESPONSE:
                row.update(provider=p.provider, service=p.service, user=p.recipient, score=p.score)
            rows.append(row)
    return pd.DataFrame(rows, columns=EVENT_COLUMNS)


def chain_summary(ledger):
    blocks = ledger.blocks
    counts = {kind.value: 0 for kind in EventKind}
    for block in blocks:
        for ev in block.events:
            counts[ev.kind.value] += 1
    txs = [tx for b in blocks for tx in b.transactions]
    return {
        'height': ledger.height,
        'head_hash': ledger.head.hash,
        'transactions': len(txs),
        'reverted': sum(1 for tx in txs if tx.status == TxStatus.REVERTED),
        'events': counts,
        'collected_fees': ledger.collected_fees,
        'accounts': len(ledger.accounts),
    }
