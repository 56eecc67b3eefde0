"""
Recommendation scores: mu averaged over every maximal feedback trace of a
context, each trace weighted by the product of its selection weights.

The exact evaluator enumerates all traces and is exponential in the number of
multiply-reviewed interactions; it refuses to go past the enumeration cap.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

from config import get_config
from errors import ContextsNotIncreasing, EnumerationCapExceeded
from evidence.evidence_map import interactions_for_service
from evidence.models import FeedbackTrace, Interaction
from scoring.mechanisms import RatingProjection, ScoringMechanism
from scoring.selection import DETERMINISTIC

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoreResult:
    value: float
    trace_count: int
    context_size: int

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class Converged:
    value: float
    steps: int


@dataclass(frozen=True)
class NonConvergent:
    steps: int
    last_value: Optional[float] = None
    last_delta: Optional[float] = None


# ==========================================
# EXACT EVALUATION
# ==========================================
def sigma_bruteforce(m, context, mu, sel, cap=None, prune_zero_weights=False):
    """
    Sum over maximal traces of mu(trace) times its weight.

    With prune_zero_weights, feedbacks of weight 0 are skipped; the result is
    unchanged and the cap counts only the traces actually enumerated.
    """
    cap = get_config().ENUMERATION_CAP if cap is None else cap
    aplus = m.plus(context)
    if not aplus:
        return ScoreResult(value=mu.empty_trace_value, trace_count=1, context_size=0)

    choices = []
    for interaction in aplus:
        feedbacks = m.reverse[interaction.uid]
        pairs = list(zip(feedbacks, sel.weights(len(feedbacks))))
        if prune_zero_weights:
            pairs = [(x, w) for x, w in pairs if w > 0.0]
        choices.append(pairs)

    count = math.prod(len(pairs) for pairs in choices)
    if count > cap:
        raise EnumerationCapExceeded(f"{count} maximal traces exceed the cap of {cap}",
                                     trace_count=count, cap=cap)

    total = 0.0
    for combo in itertools.product(*choices):
        trace = FeedbackTrace({i: x for i, (x, _) in zip(aplus, combo)})
        total += mu.evaluate(trace) * math.prod(w for _, w in combo)
    return ScoreResult(value=total, trace_count=count, context_size=len(aplus))


def sigma_service(m, y, U, mu, sel, cap=None, prune_zero_weights=False):
    """sigma(y|U): the context is pi^-1(y) intersected with U; U=None means every interaction."""
    interactions = interactions_for_service(m, y)
    if U is not None:
        wanted = {i.uid if isinstance(i, Interaction) else int(i) for i in U}
        interactions = [i for i in interactions if i.uid in wanted]
    return sigma_bruteforce(m, interactions, mu, sel, cap=cap, prune_zero_weights=prune_zero_weights)


# ==========================================
# ONLINE EVALUATION
# ==========================================
class OnlineAverage:
    """
    Running (sum, count) over the newest feedback of each interaction.

    A re-review replaces the interaction's previous rating. Also tracks the
    rating of the newest interaction so the latest mechanism can be served
    from the same state.
    """

    def __init__(self, rho=None, empty_trace_value=None):
        self.rho = rho or RatingProjection.from_config()
        self.empty_trace_value = float(get_config().EMPTY_TRACE_VALUE
                                       if empty_trace_value is None else empty_trace_value)
        self.running_sum = 0
        self.count = 0
        self._effective = {}
        self._newest_interaction = None

    def add(self, review, interaction_time=None):
        value = self.rho(review)
        current = self._effective.get(review.uid)
        if current is None:
            self.running_sum += value
            self.count += 1
        elif review.logical_time >= current[0]:
            self.running_sum += value - current[1]
        else:
            return
        self._effective[review.uid] = (review.logical_time, value)
        key = interaction_time if interaction_time is not None else review.logical_time
        if self._newest_interaction is None or key > self._newest_interaction[0]:
            self._newest_interaction = (key, review.uid)

    @property
    def value(self):
        if self.count == 0:
            return self.empty_trace_value
        return self.running_sum / self.count

    @property
    def latest_value(self):
        if self._newest_interaction is None:
            return self.empty_trace_value
        return float(self._effective[self._newest_interaction[1]][1])

    @property
    def total(self):
        if self.count == 0:
            return self.empty_trace_value
        return float(self.running_sum)


def sigma_online_average(stream, rho=None, empty_trace_value=None):
    online = OnlineAverage(rho=rho, empty_trace_value=empty_trace_value)
    for review in stream:
        online.add(review)
    return online.value


# ==========================================
# LIMITS OVER NESTED CONTEXTS
# ==========================================
class PrefixContexts:
    """A1 < A2 < ... where An holds the first n interactions in logical-time order."""

    def __init__(self, interactions):
        self.interactions = tuple(sorted(interactions, key=lambda i: i.logical_time))

    def __len__(self):
        return len(self.interactions)

    def __iter__(self):
        for n in range(1, len(self.interactions) + 1):
            yield frozenset(self.interactions[:n])

    def increments(self):
        for interaction in self.interactions:
            yield (interaction,)


def prefix_contexts(m, interactions=None):
    if interactions is None:
        interactions = m.interactions.values()
    return PrefixContexts(m.resolve(interactions))


def _increments(nested):
    """New interactions per step; rejects sequences that are not strictly increasing."""
    if isinstance(nested, PrefixContexts):
        yield from nested.increments()
        return
    previous = frozenset()
    for step, ctx in enumerate(nested):
        current = frozenset(i.uid if isinstance(i, Interaction) else int(i) for i in ctx)
        if not previous < current:
            raise ContextsNotIncreasing(f"context {step} is not a strict superset of the one before it")
        yield tuple(sorted(current - previous))
        previous = current


def _online_value(mu, online):
    if mu.name == 'average':
        return online.value
    if mu.name == 'latest':
        return online.latest_value
    return online.total


def sigma_limit(m, nested, mu, sel, tol, max_steps, cap=None, sustain=3):
    """
    Follows sigma(A1), sigma(A2), ... and reports Converged once |delta| < tol
    for `sustain` consecutive steps, NonConvergent after max_steps otherwise.
    """
    if not isinstance(mu, ScoringMechanism):
        raise TypeError("mu must be a ScoringMechanism")

    online_ok = mu.name in ('average', 'latest', 'sum') and (
        sel.kind == DETERMINISTIC or all(len(xs) <= 1 for xs in m.reverse.values()))
    online = OnlineAverage(rho=mu.rho, empty_trace_value=mu.empty_trace_value) if online_ok else None
    seen = []

    previous, delta, streak, steps = None, None, 0, 0
    for new in _increments(nested):
        if steps >= max_steps:
            break
        steps += 1
        if online is not None:
            for item in new:
                uid = item.uid if isinstance(item, Interaction) else item
                interaction = m.interaction(uid)
                if interaction is None:
                    continue
                for review in m.reverse.get(uid, ()):
                    online.add(review, interaction_time=interaction.logical_time)
            value = _online_value(mu, online)
        else:
            seen.extend(new)
            value = sigma_bruteforce(m, seen, mu, sel, cap=cap).value

        if previous is not None:
            delta = abs(value - previous)
            streak = streak + 1 if delta < tol else 0
            if streak >= sustain:
                logger.debug(f"sigma converged to {value} after {steps} contexts")
                return Converged(value=value, steps=steps)
        previous = value

    logger.debug(f"sigma did not converge within {steps} contexts (last delta {delta})")
    return NonConvergent(steps=steps, last_value=previous, last_delta=delta)
