import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

from config import get_config
from errors import EmptyTrace, UnknownMechanism

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RatingProjection:
    """Binary satisfaction: 1 when the rating reaches the threshold, else 0."""
    threshold: int = 3
    r_max: int = 5

    @classmethod
    def from_config(cls):
        cfg = get_config()
        return cls(threshold=cfg.POSITIVE_THRESHOLD, r_max=cfg.R_MAX)

    def __call__(self, review):
        return self.of_rating(review.rating)

    def of_rating(self, rating):
        return 1 if rating >= self.threshold else 0


def _require_nonempty(trace):
    if len(trace) == 0:
        raise EmptyTrace("scoring mechanisms are undefined on the empty trace")


def mu_average(trace, rho):
    _require_nonempty(trace)
    return sum(rho(x) for x in trace.reviews()) / len(trace)


def mu_latest(trace, rho=None):
    _require_nonempty(trace)
    rho = rho or RatingProjection.from_config()
    return float(rho(trace.latest()))


def mu_sum(trace, rho):
    """Bounded by the trace size, but unbounded over growing contexts."""
    _require_nonempty(trace)
    return float(sum(rho(x) for x in trace.reviews()))


# ==========================================
# MECHANISM OBJECTS
# ==========================================
class ScoringMechanism(ABC):
    """
    A scoring mechanism mu with its empty-trace convention.

    Calling the mechanism on the empty trace returns empty_trace_value;
    evaluate() itself raises EmptyTrace.
    """
    name = ''
    # every value lies in [0, 1]
    unit_bounded = True

    def __init__(self, rho=None, empty_trace_value=None):
        self.rho = rho or RatingProjection.from_config()
        self.empty_trace_value = float(get_config().EMPTY_TRACE_VALUE
                                       if empty_trace_value is None else empty_trace_value)

    @abstractmethod
    def evaluate(self, trace):
        pass

    def __call__(self, trace):
        if len(trace) == 0:
            return self.empty_trace_value
        return self.evaluate(trace)

    def __repr__(self):
        return f"{self.__class__.__name__}(threshold={self.rho.threshold}, empty={self.empty_trace_value})"


class AverageMechanism(ScoringMechanism):
    name = 'average'

    def evaluate(self, trace):
        return mu_average(trace, self.rho)


class LatestMechanism(ScoringMechanism):
    name = 'latest'

    def evaluate(self, trace):
        return mu_latest(trace, self.rho)


class SumMechanism(ScoringMechanism):
    name = 'sum'
    unit_bounded = False

    def evaluate(self, trace):
        return mu_sum(trace, self.rho)


MECHANISMS = {
    'average': AverageMechanism,
    'latest': LatestMechanism,
    'sum': SumMechanism,
}


def build_mechanism(name, rho=None, empty_trace_value=None):
    cls = MECHANISMS.get(str(name).strip().lower())
    if cls is None:
        raise UnknownMechanism(f"unknown scoring mechanism {name!r}; choose from {', '.join(MECHANISMS)}")
    return cls(rho=rho, empty_trace_value=empty_trace_value)
