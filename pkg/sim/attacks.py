"""
Attack injectors. Each attack owns its accounts, pays for every interaction it
needs through the ledger like anyone else, and reports what it spent.

Feedback attacks (bad/good-mouthing, collusion, sybil) buy one access per
feedback they want to leave; quality attacks (on-off, opportunistic) change
what honest users experience from the target service.
"""
import logging

from ledger.models import AccessRequestPayload, TxKind

logger = logging.getLogger(__name__)


class Attack:
    """Base attack: no accounts, no traffic, quality untouched."""

    def __init__(self, index, config, world):
        self.index = index
        self.config = config
        self.world = world
        self.accounts = []
        self.minted = 0
        self.feedbacks_requested = 0

    @property
    def label(self):
        return f"{self.config.kind.lower()}{self.index}"

    def rating_value(self):
        return self.world.r_max if self.config.rating == 'positive' else 0

    def active(self, block_number):
        return self.config.active(block_number, self.world.duration_blocks)

    def setup(self):
        pass

    def quality(self, service_id, block_number, base):
        return base

    def act(self, block_number):
        pass

    def _open(self, address, balance):
        self.world.ledger.open_account(address, balance)
        self.accounts.append(address)
        self.minted += balance

    def _access(self, sender):
        price = self.world.price_of(self.config.target)
        if self.world.submit(sender, TxKind.ACCESS_REQUEST, AccessRequestPayload(self.config.target, price)):
            self.feedbacks_requested += 1

    def cost(self):
        ledger = self.world.ledger
        return self.minted - sum(ledger.balance_of(a) for a in self.accounts)


class _FeedbackFlood(Attack):
    """Spreads `intensity` accesses per block over its attacker accounts, round robin."""

    def setup(self):
        for k in range(self.config.n_attackers):
            self._open(f"{self.label}-{k}", self.config.budget)
        self._turn = 0

    def _per_block(self):
        return self.config.intensity

    def act(self, block_number):
        if not self.active(block_number):
            return
        for _ in range(self._per_block()):
            self._access(self.accounts[self._turn % len(self.accounts)])
            self._turn += 1


class BadMouthing(_FeedbackFlood):
    def rating_value(self):
        return 0


class GoodMouthing(_FeedbackFlood):
    def rating_value(self):
        return self.world.r_max


class Collusion(_FeedbackFlood):
    """Every colluder leaves `intensity` feedbacks per block at once."""

    def _per_block(self):
        return self.config.intensity * self.config.n_attackers


class Sybil(Attack):
    """
    Clones opened at start_block with just enough minted funds for one access
    and one review each.
    """

    def act(self, block_number):
        if block_number != self.config.start_block:
            return
        ledger = self.world.ledger
        # head room for congestion between submission and inclusion
        depth = ledger.pending_depth + 2 * self.config.n_clones + 1000
        allowance = (self.world.price_of(self.config.target)
                     + ledger.schedule.fee(TxKind.ACCESS_REQUEST, depth)
                     + ledger.schedule.fee(TxKind.REVIEW_SUBMISSION, depth))
        for k in range(self.config.n_clones):
            address = f"{self.label}-clone{k}"
            self._open(address, allowance)
            self._access(address)
        logger.info(f"{self.label}: {self.config.n_clones} clones target {self.config.target}")


class OnOff(Attack):
    """The target alternates between its configured quality and 0 every `period` blocks."""

    def quality(self, service_id, block_number, base):
        if service_id != self.config.target or not self.active(block_number):
            return base
        phase = ((block_number - self.config.start_block) // self.config.period) % 2
        return base if phase == 0 else 0.0


class Opportunistic(Attack):
    """The target behaves until switch_block, then serves everyone badly."""

    def quality(self, service_id, block_number, base):
        switch = self.config.switch_block or self.config.start_block
        if service_id == self.config.target and block_number >= switch:
            return 0.0
        return base


ATTACKS = {
    'BadMouthing': BadMouthing,
    'GoodMouthing': GoodMouthing,
    'Collusion': Collusion,
    'Sybil': Sybil,
    'OnOff': OnOff,
    'Opportunistic': Opportunistic,
}


def build_attack(index, config, world):
    return ATTACKS[config.kind](index, config, world)
