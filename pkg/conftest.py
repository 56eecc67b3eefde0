import os

os.environ.setdefault('TRUSTLEDGER_ENV', 'testing')

import pytest

from evidence.evidence_map import build_evidence_map, evidence_from_chain
from ledger.chain import Ledger
from ledger.models import EventKind, FeedbackEventPayload, InteractionEventPayload, LedgerEvent
from sim.fixtures import replay_fixture

RICH = 10 ** 15


def synthetic_map(ratings, service='y', users=None):
    """
    Evidence map straight from events: interaction k (uid k+1) sits at (1, k)
    and its j-th feedback at (2+j, k), so rank j is the j-th rating listed.
    """
    events = []
    for k, feedbacks in enumerate(ratings):
        user = users[k] if users else f"u{k}"
        events.append(LedgerEvent(EventKind.INTERACTION, 1, k,
                                  InteractionEventPayload(user=user, resource=service, uid=k + 1)))
        for j, rating in enumerate(feedbacks):
            events.append(LedgerEvent(EventKind.FEEDBACK, 2 + j, k,
                                      FeedbackEventPayload(submitter=user, delegator=f"owner-{service}",
                                                           rating=rating, uid=k + 1)))
    return build_evidence_map(events)


@pytest.fixture
def fig2():
    return replay_fixture('fig2')


@pytest.fixture
def fig2_map(fig2):
    return evidence_from_chain(fig2.blocks)


@pytest.fixture
def worked_map():
    return evidence_from_chain(replay_fixture('worked-example').blocks)


@pytest.fixture
def ledger():
    ledger = Ledger()
    for address in ('alice', 'bob', 'carol', 'owner'):
        ledger.open_account(address, RICH)
    return ledger


def next_block(ledger):
    return ledger.produce_block(ledger.head.timestamp + ledger.params.block_interval)
