"""
Evidence selections: per-interaction probability weights over that
interaction's feedbacks.

Feedbacks of an interaction are ranked by logical time, rank 0 the oldest.
FreshBiased(q) weighs rank k of N by q^(N-1-k), Geometric(q) by q^k; both are
normalized over the N feedbacks so every interaction's weights sum to 1.
"""
import logging
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from errors import InvalidSelection, NotAFeedbackOfInteraction
from evidence.models import FeedbackTrace

logger = logging.getLogger(__name__)

DETERMINISTIC = 'deterministic'
UNIFORM = 'uniform'
FRESH = 'fresh'
GEOMETRIC = 'geometric'

SELECTION_KINDS = (DETERMINISTIC, UNIFORM, FRESH, GEOMETRIC)

_SPEC_RE = re.compile(r'^\s*(?P<kind>[a-z_-]+)\s*(?:\(\s*(?P<q>[^)]*?)\s*\))?\s*$')

_ALIASES = {
    'fresh-biased': FRESH,
    'fresh_biased': FRESH,
    'freshbiased': FRESH,
}


@lru_cache(maxsize=4096)
def _weights(kind, q, n):
    ranks = np.arange(n, dtype=float)
    if kind == DETERMINISTIC:
        w = np.zeros(n)
        w[-1] = 1.0
    elif kind == UNIFORM:
        w = np.full(n, 1.0 / n)
    elif kind == FRESH:
        w = np.power(q, n - 1 - ranks)
        w = w / w.sum()
    else:
        w = np.power(q, ranks)
        w = w / w.sum()
    return tuple(float(v) for v in w)


@dataclass(frozen=True)
class EvidenceSelection:
    """An immutable selection variant; q is only meaningful for fresh and geometric."""
    kind: str = DETERMINISTIC
    q: Optional[float] = None

    def __post_init__(self):
        if self.kind not in SELECTION_KINDS:
            raise InvalidSelection(f"unknown selection kind {self.kind!r}")
        if self.kind in (FRESH, GEOMETRIC):
            if self.q is None or isinstance(self.q, bool):
                raise InvalidSelection(f"{self.kind} needs a parameter q")
            q = float(self.q)
            if math.isnan(q) or not 0.0 < q < 1.0:
                raise InvalidSelection(f"q must lie in (0, 1), got {self.q}")
            object.__setattr__(self, 'q', q)
        elif self.q is not None:
            raise InvalidSelection(f"{self.kind} takes no parameter")

    # ==========================================
    # CONSTRUCTION
    # ==========================================
    @classmethod
    def parse(cls, text):
        """Accepts deterministic, uniform, fresh(q) and geometric(q)."""
        if isinstance(text, EvidenceSelection):
            return text
        match = _SPEC_RE.match(str(text).lower())
        if not match:
            raise InvalidSelection(f"cannot parse selection {text!r}")
        kind = _ALIASES.get(match.group('kind'), match.group('kind'))
        raw_q = match.group('q')
        q = None
        if raw_q:
            try:
                q = float(raw_q)
            except ValueError:
                raise InvalidSelection(f"q is not a number in {text!r}")
        return cls(kind=kind, q=q)

    @classmethod
    def deterministic(cls):
        return cls(DETERMINISTIC)

    @classmethod
    def uniform(cls):
        return cls(UNIFORM)

    @classmethod
    def fresh(cls, q):
        return cls(FRESH, q)

    @classmethod
    def geometric(cls, q):
        return cls(GEOMETRIC, q)

    def describe(self):
        if self.q is None:
            return self.kind
        return f"{self.kind}({self.q:g})"

    def __str__(self):
        return self.describe()

    # ==========================================
    # WEIGHTS
    # ==========================================
    def weights(self, n):
        """Weights for ranks 0..n-1 (oldest first)."""
        if n <= 0:
            return ()
        return _weights(self.kind, self.q, int(n))

    def weight(self, m, interaction, review):
        feedbacks = m.feedbacks_of(interaction)
        rank = m.rank_of(interaction, review)
        if rank is None:
            uid = getattr(interaction, 'uid', interaction)
            raise NotAFeedbackOfInteraction(f"{review.id} is not a feedback of interaction {uid}")
        return self.weights(len(feedbacks))[rank]

    def trace_weight(self, m, trace):
        """Product of the weights of every assignment in the trace."""
        return math.prod(self.weight(m, i, x) for i, x in trace.items())

    def weight_table(self, m):
        """(uid, review id) -> weight for every feedback in the map."""
        table = {}
        for uid, feedbacks in m.reverse.items():
            for x, w in zip(feedbacks, self.weights(len(feedbacks))):
                table[(uid, x.id)] = w
        return table

    # ==========================================
    # SAMPLING
    # ==========================================
    def select_trace(self, m, context, rng):
        """Draws one feedback per interaction of A+ independently, by weight."""
        assignment = {}
        for interaction in m.plus(context):
            feedbacks = m.reverse[interaction.uid]
            if len(feedbacks) == 1 or self.kind == DETERMINISTIC:
                assignment[interaction] = feedbacks[-1]
                continue
            k = int(rng.choice(len(feedbacks), p=np.asarray(self.weights(len(feedbacks)))))
            assignment[interaction] = feedbacks[k]
        return FeedbackTrace(assignment)
