"""
Transaction handlers: the resource contract, the feedback contract and the
trust-provider contract.

Every handler validates completely before touching state, so a raised
ContractError leaves the world state as it was; the ledger then burns the gas
and records the revert.
"""
import logging
import math
from dataclasses import dataclass

from errors import (
    AlreadyRegistered,
    InsufficientFee,
    InsufficientPayment,
    NoSuchInteraction,
    PaymentExceedsBalance,
    RatingOutOfRange,
    ScoreOutOfRange,
    SubmitterMismatch,
    UnknownProvider,
    UnknownResource,
)
from contracts.state import CachedScore, ProviderRecord, ResourceRecord
from ledger.models import (
    EventKind,
    FeedbackEventPayload,
    InteractionEventPayload,
    ReviewSubmissionPayload,
    ScoreResponseEventPayload,
    ScoreUpdateEventPayload,
    TxKind,
)

logger = logging.getLogger(__name__)


@dataclass
class ExecutionContext:
    """What a handler may see: contract state, token balances, the block being built."""
    state: object
    balances: object
    block_number: int


def _require_funds(ctx, sender, amount):
    if ctx.balances.balance_of(sender) < amount:
        raise PaymentExceedsBalance(f"{sender} cannot pay {amount}")


# ==========================================
# RESOURCE CONTRACT
# ==========================================
def register_resource(ctx, owner, resource, price):
    if resource in ctx.state.resources:
        raise AlreadyRegistered(f"resource {resource} already registered")
    if price < 0:
        raise InsufficientPayment("access price cannot be negative")
    record = ResourceRecord(resource=resource, owner=owner, price=int(price))
    ctx.state.resources[resource] = record
    logger.debug(f"Resource {resource} registered by {owner} at price {price}")
    return record


def exec_access_request(ctx, sender, resource, payment):
    """Pays for one use of a resource and emits its proof of interaction."""
    record = ctx.state.resources.get(resource)
    if record is None:
        raise UnknownResource(f"resource {resource} is not registered")
    if payment < record.price:
        raise InsufficientPayment(f"paid {payment}, price is {record.price}")
    _require_funds(ctx, sender, payment)

    ctx.balances.move(sender, record.owner, payment)
    uid = ctx.state.fresh_uid()
    ctx.state.feedback.record_interaction(uid, sender, resource)
    return InteractionEventPayload(user=sender, resource=resource, uid=uid)


# ==========================================
# FEEDBACK CONTRACT
# ==========================================
def exec_review_submission(ctx, payload, sender=None):
    """
    Turns a review into a feedback iff the interaction exists, the submitter is
    the account that interacted, and the rating is a whole number in [0, R_max].
    """
    if not isinstance(payload, ReviewSubmissionPayload):
        raise NoSuchInteraction("malformed review payload")
    feedback = ctx.state.feedback
    user = feedback.interacting_user(payload.uid)
    if user is None:
        raise NoSuchInteraction(f"no interaction with uid {payload.uid}")
    if payload.submitter != user or (sender is not None and sender != payload.submitter):
        raise SubmitterMismatch(f"uid {payload.uid} belongs to {user}, not {payload.submitter}")
    rating = payload.rating
    if isinstance(rating, bool) or not isinstance(rating, int):
        raise RatingOutOfRange(f"rating {rating!r} is not a whole number")
    if rating < 0 or rating > ctx.state.r_max:
        raise RatingOutOfRange(f"rating {rating} outside [0, {ctx.state.r_max}]")

    resource = feedback.valid_interactions[payload.uid][1]
    delegator = ctx.state.resources[resource].owner if resource in ctx.state.resources else resource
    feedback.record_feedback(payload.uid)
    return FeedbackEventPayload(submitter=payload.submitter, delegator=delegator, rating=rating, uid=payload.uid)


# ==========================================
# TRUST-PROVIDER CONTRACT
# ==========================================
def register_provider(ctx, provider, fee, mechanism='average', selection='deterministic',
                      empty_trace_value=0.5, threshold=3):
    existing = ctx.state.providers.get(provider)
    if existing is not None and existing.active:
        raise AlreadyRegistered(f"provider {provider} already registered")
    if fee < 0:
        raise InsufficientFee("provider fee cannot be negative")
    record = ProviderRecord(
        provider=provider,
        fee=int(fee),
        mechanism=mechanism,
        selection=selection,
        empty_trace_value=float(empty_trace_value),
        threshold=int(threshold),
        registered_at=ctx.block_number,
    )
    ctx.state.providers[provider] = record
    logger.info(f"Trust provider {provider} registered (fee {fee}, {mechanism}/{selection})")
    return record


def deregister_provider(ctx, provider):
    record = ctx.state.active_provider(provider)
    if record is None:
        raise UnknownProvider(f"{provider} is not a registered provider")
    record.active = False
    logger.info(f"Trust provider {provider} deregistered")
    return record


def exec_score_query(ctx, sender, provider, service, fee):
    """Pays the provider and delivers its cached score in an event addressed to the sender."""
    record = ctx.state.active_provider(provider)
    if record is None:
        raise UnknownProvider(f"{provider} is not a registered provider")
    if fee < record.fee:
        raise InsufficientFee(f"paid {fee}, provider charges {record.fee}")
    _require_funds(ctx, sender, fee)

    ctx.balances.move(sender, provider, fee)
    cached = record.cached(service)
    if cached is None:
        return ScoreResponseEventPayload(provider=provider, service=service, recipient=sender,
                                         score=record.empty_trace_value, as_of_block=None)
    return ScoreResponseEventPayload(provider=provider, service=service, recipient=sender,
                                     score=cached.score, as_of_block=cached.as_of_block)


def exec_score_update(ctx, provider, service, score, basis_block=0):
    record = ctx.state.active_provider(provider)
    if record is None:
        raise UnknownProvider(f"{provider} is not a registered provider")
    if not isinstance(score, (int, float)) or isinstance(score, bool) or math.isnan(score) \
            or score < 0 or score > 1:
        raise ScoreOutOfRange(f"score {score!r} outside [0, 1]")

    record.cached_scores[service] = CachedScore(score=float(score), as_of_block=ctx.block_number,
                                                basis_block=int(basis_block))
    return ScoreUpdateEventPayload(provider=provider, service=service, score=float(score),
                                   basis_block=int(basis_block))


def exec_transfer(ctx, sender, recipient, amount):
    if amount < 0:
        raise PaymentExceedsBalance("transfer amount cannot be negative")
    _require_funds(ctx, sender, amount)
    ctx.balances.move(sender, recipient, amount)


# ==========================================
# DISPATCH
# ==========================================
def execute(ctx, tx):
    """Runs one transaction; returns the (kind, payload) pairs of the events it emits."""
    p = tx.payload
    if tx.kind == TxKind.ACCESS_REQUEST:
        return [(EventKind.INTERACTION, exec_access_request(ctx, tx.sender, p.resource, p.payment))]
    if tx.kind == TxKind.REVIEW_SUBMISSION:
        return [(EventKind.FEEDBACK, exec_review_submission(ctx, p, sender=tx.sender))]
    if tx.kind == TxKind.SCORE_QUERY:
        return [(EventKind.SCORE_RESPONSE, exec_score_query(ctx, tx.sender, p.provider, p.service, p.fee))]
    if tx.kind == TxKind.SCORE_UPDATE:
        return [(EventKind.SCORE_UPDATE, exec_score_update(ctx, tx.sender, p.service, p.score, p.basis_block))]
    if tx.kind == TxKind.PROVIDER_REGISTRATION:
        register_provider(ctx, tx.sender, p.fee, p.mechanism, p.selection, p.empty_trace_value, p.threshold)
        return []
    if tx.kind == TxKind.PROVIDER_DEREGISTRATION:
        deregister_provider(ctx, tx.sender)
        return []
    if tx.kind == TxKind.RESOURCE_REGISTRATION:
        register_resource(ctx, tx.sender, p.resource, p.price)
        return []
    if tx.kind == TxKind.TRANSFER:
        exec_transfer(ctx, tx.sender, p.recipient, p.amount)
        return []
    raise ValueError(f"unhandled transaction kind {tx.kind}")
