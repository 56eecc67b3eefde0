"""
Value types of the simulated ledger: accounts, transactions, events, blocks.

Everything that ends up in a sealed block is a frozen dataclass so a block can
be shared between readers without copying.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import Optional, Union


class TxKind(str, Enum):
    ACCESS_REQUEST = 'AccessRequest'
    REVIEW_SUBMISSION = 'ReviewSubmission'
    SCORE_QUERY = 'ScoreQuery'
    SCORE_UPDATE = 'ScoreUpdate'
    PROVIDER_REGISTRATION = 'ProviderRegistration'
    PROVIDER_DEREGISTRATION = 'ProviderDeregistration'
    RESOURCE_REGISTRATION = 'ResourceRegistration'
    TRANSFER = 'Transfer'


class EventKind(str, Enum):
    INTERACTION = 'InteractionEvent'
    FEEDBACK = 'FeedbackEvent'
    SCORE_UPDATE = 'ScoreUpdateEvent'
    SCORE_RESPONSE = 'ScoreResponseEvent'


class TxStatus(str, Enum):
    PENDING = 'pending'
    SUCCESS = 'success'
    REVERTED = 'reverted'


@dataclass
class Account:
    address: str
    balance: int = 0


# ==========================================
# TRANSACTION PAYLOADS
# ==========================================
@dataclass(frozen=True)
class AccessRequestPayload:
    resource: str
    payment: int


@dataclass(frozen=True)
class ReviewSubmissionPayload:
    """The three parts a review must carry: who, which interaction, what rating."""
    submitter: str
    uid: int
    rating: int


@dataclass(frozen=True)
class ScoreQueryPayload:
    provider: str
    service: str
    fee: int


@dataclass(frozen=True)
class ScoreUpdatePayload:
    service: str
    score: float
    basis_block: int = 0


@dataclass(frozen=True)
class ProviderRegistrationPayload:
    fee: int
    mechanism: str = 'average'
    selection: str = 'deterministic'
    empty_trace_value: float = 0.5
    threshold: int = 3


@dataclass(frozen=True)
class ProviderDeregistrationPayload:
    pass


@dataclass(frozen=True)
class ResourceRegistrationPayload:
    resource: str
    price: int


@dataclass(frozen=True)
class TransferPayload:
    recipient: str
    amount: int


TX_PAYLOAD_TYPES = {
    TxKind.ACCESS_REQUEST: AccessRequestPayload,
    TxKind.REVIEW_SUBMISSION: ReviewSubmissionPayload,
    TxKind.SCORE_QUERY: ScoreQueryPayload,
    TxKind.SCORE_UPDATE: ScoreUpdatePayload,
    TxKind.PROVIDER_REGISTRATION: ProviderRegistrationPayload,
    TxKind.PROVIDER_DEREGISTRATION: ProviderDeregistrationPayload,
    TxKind.RESOURCE_REGISTRATION: ResourceRegistrationPayload,
    TxKind.TRANSFER: TransferPayload,
}


def payment_of(kind, payload):
    """Tokens the sender hands over on top of the fee."""
    if kind == TxKind.ACCESS_REQUEST:
        return payload.payment
    if kind == TxKind.SCORE_QUERY:
        return payload.fee
    if kind == TxKind.TRANSFER:
        return payload.amount
    return 0


@dataclass(frozen=True)
class Transaction:
    seq: int
    sender: str
    kind: TxKind
    payload: object
    gas_used: int
    fee: int = 0
    status: TxStatus = TxStatus.PENDING
    error: Optional[str] = None

    @property
    def payment(self):
        return payment_of(self.kind, self.payload)

    def to_dict(self):
        return {
            'seq': self.seq,
            'sender': self.sender,
            'kind': self.kind.value,
            'payload': asdict(self.payload),
            'gasUsed': self.gas_used,
            'fee': self.fee,
            'status': self.status.value,
            'error': self.error,
        }

    @classmethod
    def from_dict(cls, data):
        kind = TxKind(data['kind'])
        return cls(
            seq=data['seq'],
            sender=data['sender'],
            kind=kind,
            payload=TX_PAYLOAD_TYPES[kind](**data['payload']),
            gas_used=data['gasUsed'],
            fee=data['fee'],
            status=TxStatus(data['status']),
            error=data['error'],
        )


# ==========================================
# EVENT PAYLOADS
# ==========================================
@dataclass(frozen=True)
class InteractionEventPayload:
    user: str
    resource: str
    uid: int


@dataclass(frozen=True)
class FeedbackEventPayload:
    submitter: str
    delegator: str
    rating: int
    uid: int


@dataclass(frozen=True)
class ScoreUpdateEventPayload:
    provider: str
    service: str
    score: float
    basis_block: int


@dataclass(frozen=True)
class ScoreResponseEventPayload:
    provider: str
    service: str
    recipient: str
    score: float
    as_of_block: Optional[int]


EVENT_PAYLOAD_TYPES = {
    EventKind.INTERACTION: InteractionEventPayload,
    EventKind.FEEDBACK: FeedbackEventPayload,
    EventKind.SCORE_UPDATE: ScoreUpdateEventPayload,
    EventKind.SCORE_RESPONSE: ScoreResponseEventPayload,
}

EventPayload = Union[
    InteractionEventPayload, FeedbackEventPayload, ScoreUpdateEventPayload, ScoreResponseEventPayload
]


@dataclass(frozen=True)
class LedgerEvent:
    kind: EventKind
    block_number: int
    index_in_block: int
    payload: EventPayload

    @property
    def logical_time(self):
        return (self.block_number, self.index_in_block)

    def addresses(self):
        """Every address named by the payload."""
        out = set()
        for f in fields(self.payload):
            if f.name in ('user', 'resource', 'submitter', 'delegator', 'provider', 'service', 'recipient'):
                out.add(getattr(self.payload, f.name))
        return out

    def to_dict(self):
        return {
            'kind': self.kind.value,
            'blockNumber': self.block_number,
            'indexInBlock': self.index_in_block,
            'payload': asdict(self.payload),
        }

    @classmethod
    def from_dict(cls, data):
        kind = EventKind(data['kind'])
        return cls(
            kind=kind,
            block_number=data['blockNumber'],
            index_in_block=data['indexInBlock'],
            payload=EVENT_PAYLOAD_TYPES[kind](**data['payload']),
        )


GENESIS_PARENT_HASH = '0' * 64


@dataclass(frozen=True)
class Block:
    number: int
    parent_hash: str
    timestamp: int
    transactions: tuple = ()
    events: tuple = ()
    gas_used: int = 0
    hash: str = ''

    def events_of(self, kind):
        return [e for e in self.events if e.kind == kind]


@dataclass(frozen=True)
class SubmissionToken:
    """Acceptance handed back by submit_transaction."""
    seq: int
    sender: str
    kind: TxKind
    estimated_fee: int
    pool_position: int


@dataclass
class VerificationResult:
    ok: bool
    block_number: Optional[int] = None
    reason: str = ''
    checked_blocks: int = 0

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class EventFilter:
    kind: Optional[EventKind] = None
    address: Optional[str] = None
    uid: Optional[int] = None
    block_range: Optional[tuple] = None

    def matches(self, event):
        if self.kind is not None and event.kind != EventKind(self.kind):
            return False
        if self.block_range is not None:
            first, last = self.block_range
            if event.block_number < first or event.block_number > last:
                return False
        if self.uid is not None and getattr(event.payload, 'uid', None) != self.uid:
            return False
        if self.address is not None and self.address not in event.addresses():
            return False
        return True


@dataclass
class LedgerParams:
    block_interval: int
    block_gas_limit: int
    base_gas_price: int
    gas_costs: dict = field(default_factory=dict)
    # highest accepted rating; None falls back to the configured default
    r_max: Optional[int] = None

    def to_dict(self):
        return {
            'blockInterval': self.block_interval,
            'blockGasLimit': self.block_gas_limit,
            'baseGasPrice': self.base_gas_price,
            'gasCosts': dict(sorted(self.gas_costs.items())),
            'rMax': self.r_max,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            block_interval=data['blockInterval'],
            block_gas_limit=data['blockGasLimit'],
            base_gas_price=data['baseGasPrice'],
            gas_costs=dict(data['gasCosts']),
            r_max=data.get('rMax'),
        )
