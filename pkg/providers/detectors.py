"""
Attack-detection heuristics over the evidence on the ledger.

Detectors only annotate. Each report names the accounts or service it
concerns, the block range it looked at and the counts behind the flag, so
anyone replaying the same chain prefix gets the same reports.
"""
import logging
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from config import get_config
from errors import InsufficientHistory

logger = logging.getLogger(__name__)

FEEDBACK_SPIKE = 'FeedbackSpike'
SERIAL_NEGATIVE = 'SerialNegative'
SHORT_LIVED_ACCOUNT = 'ShortLivedAccount'
SERVICE_TURNED_HOSTILE = 'ServiceTurnedHostile'


@dataclass
class DetectionReport:
    kind: str
    subject: str
    window: Tuple[int, int]
    evidence: dict = field(default_factory=dict)
    service: Optional[str] = None

    def to_dict(self):
        data = asdict(self)
        data['window'] = list(self.window)
        return data


def _negative(review, threshold):
    return review.rating < threshold


def _threshold(threshold):
    return get_config().POSITIVE_THRESHOLD if threshold is None else threshold


def _feedbacks_by_time(m):
    return sorted((x for x in m.reviews if x.id in m.epsilon), key=lambda x: x.logical_time)


def _head_of(m):
    blocks = [i.logical_time[0] for i in m.interactions.values()]
    blocks += [x.logical_time[0] for x in m.reviews]
    return max(blocks, default=0)


# ==========================================
# BURSTS
# ==========================================
def detect_spike(m, window, threshold, min_rate=1.0, head_block=None, rating_threshold=None):
    """
    Counts negative feedbacks per service in windows aligned from block 1 and
    flags a window whose count exceeds threshold times the mean of all earlier
    windows (never less than min_rate).
    """
    head = _head_of(m) if head_block is None else head_block
    n_windows = (head - 1) // window + 1 if head >= 1 else 0
    if n_windows < 2:
        raise InsufficientHistory(f"spike detection needs two windows of {window} blocks, head is {head}")

    positive_at = _threshold(rating_threshold)
    counts = defaultdict(lambda: np.zeros(n_windows, dtype=int))
    for x in _feedbacks_by_time(m):
        block = x.logical_time[0]
        if block > head or not _negative(x, positive_at):
            continue
        counts[m.epsilon[x.id].service][(block - 1) // window] += 1

    reports = []
    for service in sorted(counts):
        series = counts[service]
        trailing = np.cumsum(series)[:-1] / np.arange(1, n_windows)
        for w in range(1, n_windows):
            baseline = max(float(trailing[w - 1]), min_rate)
            if series[w] > threshold * baseline:
                first = w * window + 1
                reports.append(DetectionReport(
                    kind=FEEDBACK_SPIKE, subject=service, service=service,
                    window=(first, first + window - 1),
                    evidence={'negatives': int(series[w]), 'trailing_mean': float(trailing[w - 1]),
                              'threshold': float(threshold)}))
    if reports:
        logger.warning(f"Feedback spike on {len({r.subject for r in reports})} service(s)")
    return reports


# ==========================================
# PER-ACCOUNT PATTERNS
# ==========================================
def detect_serial_negative(m, k=None, rating_threshold=None):
    """Flags (user, service) pairs with at least k consecutive negative feedbacks."""
    k = get_config().SERIAL_NEGATIVE_RUN if k is None else k
    positive_at = _threshold(rating_threshold)
    runs = defaultdict(list)
    for x in _feedbacks_by_time(m):
        runs[(x.submitter, m.epsilon[x.id].service)].append(x)

    reports = []
    for (user, service), feedbacks in sorted(runs.items()):
        streak, start, best = 0, None, None
        for x in feedbacks:
            if _negative(x, positive_at):
                streak += 1
                start = x if streak == 1 else start
                if streak >= k and (best is None or streak > best[0]):
                    best = (streak, start.logical_time[0], x.logical_time[0])
            else:
                streak = 0
        if best is not None:
            reports.append(DetectionReport(kind=SERIAL_NEGATIVE, subject=user, service=service,
                                           window=(best[1], best[2]), evidence={'run': best[0], 'k': k}))
    return reports


def detect_short_lived(m, min_lifetime):
    """
    Flags accounts whose whole footprint spans fewer than min_lifetime blocks
    and whose feedbacks all target one service.
    """
    first, last = {}, {}
    targets = defaultdict(set)

    def touch(address, block):
        first[address] = min(first.get(address, block), block)
        last[address] = max(last.get(address, block), block)

    for i in m.interactions.values():
        touch(i.user, i.logical_time[0])
    for x in m.reviews:
        touch(x.submitter, x.logical_time[0])
        if x.id in m.epsilon:
            targets[x.submitter].add(m.epsilon[x.id].service)

    reports = []
    for address in sorted(targets):
        lifetime = last[address] - first[address]
        if lifetime < min_lifetime and len(targets[address]) == 1:
            service = next(iter(targets[address]))
            reports.append(DetectionReport(kind=SHORT_LIVED_ACCOUNT, subject=address, service=service,
                                           window=(first[address], last[address]),
                                           evidence={'lifetime': lifetime, 'min_lifetime': min_lifetime}))
    if reports:
        logger.warning(f"{len(reports)} short-lived single-target accounts")
    return reports


def detect_service_turned(m, recent=10, min_reporters=3, rating_threshold=None):
    """
    A service whose last `recent` feedbacks are all negative and come from at
    least min_reporters distinct users looks like it changed behavior, not
    like a handful of colluders.
    """
    positive_at = _threshold(rating_threshold)
    per_service = defaultdict(list)
    for x in _feedbacks_by_time(m):
        per_service[m.epsilon[x.id].service].append(x)

    reports = []
    for service, feedbacks in sorted(per_service.items()):
        tail = feedbacks[-recent:]
        if len(tail) < recent or not all(_negative(x, positive_at) for x in tail):
            continue
        reporters = {x.submitter for x in tail}
        if len(reporters) >= min_reporters:
            reports.append(DetectionReport(kind=SERVICE_TURNED_HOSTILE, subject=service, service=service,
                                           window=(tail[0].logical_time[0], tail[-1].logical_time[0]),
                                           evidence={'negatives': len(tail), 'reporters': len(reporters)}))
    return reports


def run_detectors(m, detectors, head_block=None, rating_threshold=None):
    """Runs every configured detector; a spike detector short of history reports nothing."""
    reports = []
    for det in detectors:
        if det.kind == 'spike':
            try:
                reports += detect_spike(m, det.window, det.threshold, det.min_rate, head_block, rating_threshold)
            except InsufficientHistory as e:
                logger.debug(f"Spike detector skipped: {e}")
        elif det.kind == 'serial_negative':
            reports += detect_serial_negative(m, det.k, rating_threshold)
        elif det.kind == 'short_lived':
            reports += detect_short_lived(m, det.min_lifetime)
        elif det.kind == 'service_turned':
            reports += detect_service_turned(m, det.recent, det.min_reporters, rating_threshold)
    return reports
