"""
Small hand-built chains used as reference cases.

fig2            two services y1 and y3, three interactions, four feedbacks
                (interaction i1 reviewed twice) and one review that names a
                non-existent interaction and is rejected.
worked-example  the same chain without the rejected review.
alternating-stream(n)
                n interactions with one service, rated R_max, 0, R_max, ...
"""
import logging
from dataclasses import dataclass, field

from errors import UnknownFixture
from ledger.chain import Ledger
from ledger.models import (
    AccessRequestPayload,
    ResourceRegistrationPayload,
    ReviewSubmissionPayload,
    TxKind,
)

logger = logging.getLogger(__name__)

FIXTURES = ('fig2', 'worked-example', 'alternating-stream')

FUNDING = 10 ** 15
PRICE = 100


@dataclass
class FixtureChain:
    name: str
    ledger: Ledger
    # reference names (i1, x11, y1, ...) -> uid, review id or service id
    labels: dict = field(default_factory=dict)

    @property
    def blocks(self):
        return self.ledger.blocks


def _next_block(ledger):
    return ledger.produce_block(ledger.head.timestamp + ledger.params.block_interval)


def _drain(ledger):
    block = _next_block(ledger)
    while ledger.pending_depth:
        block = _next_block(ledger)
    return block


def _fund(ledger, *addresses):
    for address in addresses:
        ledger.open_account(address, FUNDING)


def _two_services(with_dangling_review, r_max):
    ledger = Ledger(r_max=r_max)
    _fund(ledger, 'owner-y1', 'owner-y3', 'u1', 'u2', 'u3', 'u4')

    ledger.submit_transaction('owner-y1', TxKind.RESOURCE_REGISTRATION, ResourceRegistrationPayload('y1', PRICE))
    ledger.submit_transaction('owner-y3', TxKind.RESOURCE_REGISTRATION, ResourceRegistrationPayload('y3', PRICE))
    _next_block(ledger)

    for user, service in (('u1', 'y1'), ('u2', 'y1'), ('u3', 'y3')):
        ledger.submit_transaction(user, TxKind.ACCESS_REQUEST, AccessRequestPayload(service, PRICE))
    _next_block(ledger)

    ledger.submit_transaction('u1', TxKind.REVIEW_SUBMISSION, ReviewSubmissionPayload('u1', 1, 0))
    ledger.submit_transaction('u2', TxKind.REVIEW_SUBMISSION, ReviewSubmissionPayload('u2', 2, r_max))
    ledger.submit_transaction('u3', TxKind.REVIEW_SUBMISSION, ReviewSubmissionPayload('u3', 3, r_max))
    if with_dangling_review:
        # x4: a review with no interaction behind it
        ledger.submit_transaction('u4', TxKind.REVIEW_SUBMISSION, ReviewSubmissionPayload('u4', 99, r_max))
    _next_block(ledger)

    ledger.submit_transaction('u1', TxKind.REVIEW_SUBMISSION, ReviewSubmissionPayload('u1', 1, r_max))
    _next_block(ledger)

    labels = {
        'y1': 'y1', 'y3': 'y3',
        'i1': 1, 'i2': 2, 'i3': 3,
        'x11': 'x3.0', 'x2': 'x3.1', 'x3': 'x3.2', 'x12': 'x4.0',
    }
    return ledger, labels


def _alternating(n, r_max):
    ledger = Ledger(r_max=r_max)
    _fund(ledger, 'owner-s', 'u')
    ledger.submit_transaction('owner-s', TxKind.RESOURCE_REGISTRATION, ResourceRegistrationPayload('s', PRICE))
    _next_block(ledger)
    for _ in range(n):
        ledger.submit_transaction('u', TxKind.ACCESS_REQUEST, AccessRequestPayload('s', PRICE))
    _drain(ledger)
    for k in range(n):
        rating = r_max if k % 2 == 0 else 0
        ledger.submit_transaction('u', TxKind.REVIEW_SUBMISSION, ReviewSubmissionPayload('u', k + 1, rating))
    _drain(ledger)
    return ledger, {'s': 's', **{f'i{k + 1}': k + 1 for k in range(n)}}


def replay_fixture(name, n=10, r_max=5):
    key = name.strip().lower().replace('_', '-')
    if key == 'fig2':
        ledger, labels = _two_services(True, r_max)
    elif key == 'worked-example':
        ledger, labels = _two_services(False, r_max)
    elif key == 'alternating-stream':
        if n < 1:
            raise UnknownFixture("alternating-stream needs n >= 1")
        ledger, labels = _alternating(n, r_max)
    else:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    logger.info(f"Replayed fixture {key}: {ledger.height} blocks")
    return FixtureChain(name=key, ledger=ledger, labels=labels)
