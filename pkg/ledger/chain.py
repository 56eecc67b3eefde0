"""
The simulated append-only ledger.

One writer drives it: harness code opens accounts and submits transactions,
the simulator calls produce_block with its virtual clock. Readers take a
snapshot (an immutable chain prefix) and never see a block change.
"""
import logging
import operator
from collections import deque
from dataclasses import dataclass, replace

from config import get_config
from contracts.handlers import ExecutionContext, execute
from contracts.state import ContractState
from errors import BlockTooEarly, ContractError, DuplicateAccount, InsufficientBalance, UnknownAccount
from ledger import codec
from ledger.gas import GasSchedule
from ledger.models import (
    GENESIS_PARENT_HASH,
    TX_PAYLOAD_TYPES,
    Account,
    Block,
    EventFilter,
    EventKind,
    LedgerEvent,
    LedgerParams,
    SubmissionToken,
    Transaction,
    TxKind,
    TxStatus,
    VerificationResult,
    payment_of,
)

logger = logging.getLogger(__name__)


def genesis_block():
    return codec.seal(Block(number=0, parent_hash=GENESIS_PARENT_HASH, timestamp=0))


def filter_events(blocks, flt):
    if flt.block_range is not None:
        first, last = flt.block_range
        blocks = [b for b in blocks if first <= b.number <= last]
    return [ev for b in blocks for ev in b.events if flt.matches(ev)]


def verify_blocks(blocks, block_gas_limit=None):
    """Recomputes every digest and link; stops at the first violation."""
    if not blocks:
        return VerificationResult(False, None, 'chain has no blocks')
    genesis = genesis_block()
    first = blocks[0]
    if (first.number, first.parent_hash, first.timestamp, first.transactions, first.events) != \
            (0, GENESIS_PARENT_HASH, 0, (), ()) or first.hash != genesis.hash:
        return VerificationResult(False, 0, 'genesis block differs from the fixed genesis')

    seen_uids = set()
    for n, block in enumerate(blocks):
        if block.number != n:
            return VerificationResult(False, n, f'block at height {n} claims number {block.number}', n)
        if codec.compute_hash(block) != block.hash:
            return VerificationResult(False, n, 'block hash does not match its contents', n)
        if n > 0:
            parent = blocks[n - 1]
            if block.parent_hash != parent.hash:
                return VerificationResult(False, n, 'parentHash does not match the previous block', n)
            if block.timestamp <= parent.timestamp:
                return VerificationResult(False, n, 'timestamp is not strictly increasing', n)
        if block_gas_limit is not None and block.gas_used > block_gas_limit:
            return VerificationResult(False, n, 'gas used exceeds the block gas limit', n)
        for index, ev in enumerate(block.events):
            if ev.block_number != n or ev.index_in_block != index:
                return VerificationResult(False, n, f'event {index} carries a wrong logical timestamp', n)
            if ev.kind == EventKind.INTERACTION:
                if ev.payload.uid in seen_uids:
                    return VerificationResult(False, n, f'duplicate interaction uid {ev.payload.uid}', n)
                seen_uids.add(ev.payload.uid)
    return VerificationResult(True, None, '', len(blocks))


@dataclass(frozen=True)
class ChainSnapshot:
    """An immutable chain prefix, safe to hand to any number of readers."""
    blocks: tuple

    @property
    def head(self):
        return self.blocks[-1]

    def events(self):
        for block in self.blocks:
            yield from block.events

    def query_events(self, kind=None, address=None, uid=None, block_range=None):
        return filter_events(self.blocks, EventFilter(kind, address, uid, block_range))


class _ReplayBalances:
    """Unlimited funds; used when re-deriving contract state from a restored chain."""

    def balance_of(self, address):
        return float('inf')

    def move(self, src, dst, amount):
        pass


class Ledger:
    """
    Accounts, a FIFO pending pool, gas-limited block production and the
    contract state that block production drives.
    """

    def __init__(self, block_interval=None, block_gas_limit=None, base_gas_price=None,
                 gas_costs=None, r_max=None):
        cfg = get_config()
        r_max = int(r_max if r_max is not None else cfg.R_MAX)
        self.schedule = GasSchedule(costs=gas_costs, base_price=base_gas_price)
        self.params = LedgerParams(
            block_interval=int(block_interval if block_interval is not None else cfg.BLOCK_INTERVAL),
            block_gas_limit=int(block_gas_limit if block_gas_limit is not None else cfg.BLOCK_GAS_LIMIT),
            base_gas_price=self.schedule.base_price,
            gas_costs=self.schedule.as_dict(),
            r_max=r_max,
        )
        self.accounts = {}
        self.pool = deque()
        self.commitments = {}
        self._committed_by_seq = {}
        self.contracts = ContractState(r_max=r_max)
        self.collected_fees = 0
        self.minted = 0
        self.dropped = []
        self._next_seq = 1
        self._blocks = [genesis_block()]

    # ==========================================
    # ACCOUNTS
    # ==========================================
    def open_account(self, address, balance=0):
        if address in self.accounts:
            raise DuplicateAccount(f"account {address} already exists")
        if balance < 0:
            raise InsufficientBalance("opening balance cannot be negative")
        account = Account(address=address, balance=int(balance))
        self.accounts[address] = account
        self.minted += account.balance
        return account

    def balance_of(self, address):
        account = self.accounts.get(address)
        return account.balance if account else 0

    def move(self, src, dst, amount):
        if self.balance_of(src) < amount:
            raise InsufficientBalance(f"{src} cannot move {amount}")
        self.accounts[src].balance -= amount
        if dst not in self.accounts:
            self.accounts[dst] = Account(address=dst)
        self.accounts[dst].balance += amount

    def total_supply(self):
        return sum(a.balance for a in self.accounts.values()) + self.collected_fees

    # ==========================================
    # CHAIN VIEW
    # ==========================================
    @property
    def blocks(self):
        return tuple(self._blocks)

    @property
    def head(self):
        return self._blocks[-1]

    @property
    def height(self):
        return self.head.number

    @property
    def pending_depth(self):
        return len(self.pool)

    def snapshot(self):
        return ChainSnapshot(tuple(self._blocks))

    def gas_price(self, pool_depth=None):
        return self.schedule.gas_price(self.pending_depth if pool_depth is None else pool_depth)

    # ==========================================
    # WRITES
    # ==========================================
    def submit_transaction(self, sender, kind, payload):
        """Queues a transaction; nothing changes until a block includes it."""
        kind = TxKind(kind)
        if not isinstance(payload, TX_PAYLOAD_TYPES[kind]):
            raise TypeError(f"{kind.value} needs a {TX_PAYLOAD_TYPES[kind].__name__}")
        if sender not in self.accounts:
            raise UnknownAccount(f"account {sender} does not exist")

        gas = self.schedule.cost_of(kind)
        fee = gas * self.schedule.gas_price(len(self.pool))
        needed = fee + payment_of(kind, payload)
        available = self.balance_of(sender) - self.commitments.get(sender, 0)
        if available < needed:
            raise InsufficientBalance(f"{sender} has {available} available, needs {needed}")

        tx = Transaction(seq=self._next_seq, sender=sender, kind=kind, payload=payload, gas_used=gas)
        try:
            codec.canonical_bytes(tx.to_dict())
        except (TypeError, ValueError) as e:
            raise ValueError(f"{kind.value} payload cannot be sealed into a block: {e}") from e
        self._next_seq += 1
        self.pool.append(tx)
        self.commitments[sender] = self.commitments.get(sender, 0) + needed
        self._committed_by_seq[tx.seq] = needed
        logger.debug(f"Queued {kind.value} #{tx.seq} from {sender} (est. fee {fee})")
        return SubmissionToken(seq=tx.seq, sender=sender, kind=kind, estimated_fee=fee,
                               pool_position=len(self.pool) - 1)

    def _release(self, tx):
        committed = self._committed_by_seq.pop(tx.seq, 0)
        left = self.commitments.get(tx.sender, 0) - committed
        if left > 0:
            self.commitments[tx.sender] = left
        else:
            self.commitments.pop(tx.sender, None)

    def produce_block(self, now):
        """Seals the next block from the head of the pool until the gas limit is reached."""
        try:
            now = operator.index(now)
        except TypeError:
            raise TypeError(f"block time must be an integer, got {now!r}") from None
        parent = self.head
        if now < parent.timestamp + self.params.block_interval:
            raise BlockTooEarly(f"next block is due at {parent.timestamp + self.params.block_interval}, now is {now}")

        number = parent.number + 1
        price = self.schedule.gas_price(len(self.pool))
        ctx = ExecutionContext(state=self.contracts, balances=self, block_number=number)
        included, events, gas_used = [], [], 0

        while self.pool:
            tx = self.pool[0]
            if gas_used + tx.gas_used > self.params.block_gas_limit:
                break
            self.pool.popleft()
            self._release(tx)

            fee = tx.gas_used * price
            payment = payment_of(tx.kind, tx.payload)
            if self.balance_of(tx.sender) < fee + payment:
                logger.warning(f"Dropped {tx.kind.value} #{tx.seq}: {tx.sender} cannot cover fee {fee} "
                               f"plus payment {payment}")
                self.dropped.append(tx)
                continue

            self.accounts[tx.sender].balance -= fee
            self.collected_fees += fee
            try:
                emitted = execute(ctx, tx)
                sealed_tx = replace(tx, fee=fee, status=TxStatus.SUCCESS)
            except ContractError as e:
                emitted = []
                sealed_tx = replace(tx, fee=fee, status=TxStatus.REVERTED, error=type(e).__name__)
                logger.warning(f"Reverted {tx.kind.value} #{tx.seq} from {tx.sender}: {e}")

            for kind, payload in emitted:
                events.append(LedgerEvent(kind=kind, block_number=number, index_in_block=len(events),
                                          payload=payload))
            included.append(sealed_tx)
            gas_used += tx.gas_used

        block = codec.seal(Block(number=number, parent_hash=parent.hash, timestamp=now,
                                 transactions=tuple(included), events=tuple(events), gas_used=gas_used))
        self._blocks.append(block)
        logger.info(f"Sealed block {number} at t={now}: {len(included)} tx, {len(events)} events, "
                    f"gas {gas_used}, {len(self.pool)} pending")
        return block

    # ==========================================
    # READS
    # ==========================================
    def query_events(self, kind=None, address=None, uid=None, block_range=None):
        return filter_events(self._blocks, EventFilter(kind, address, uid, block_range))

    def verify_chain(self):
        result = verify_blocks(self._blocks, self.params.block_gas_limit)
        if not result:
            logger.error(f"Chain verification failed at block {result.block_number}: {result.reason}")
        return result

    # ==========================================
    # DUMP / RESTORE
    # ==========================================
    def dump(self, path):
        codec.write_dump(path, self.params, self._blocks,
                         {a: acc.balance for a, acc in self.accounts.items()},
                         self.collected_fees, self.minted)

    @classmethod
    def restore(cls, path):
        """Loads a dump as-is; call verify_chain before trusting it."""
        params, blocks, balances, collected_fees, minted = codec.read_dump(path)
        ledger = cls(block_interval=params.block_interval, block_gas_limit=params.block_gas_limit,
                     base_gas_price=params.base_gas_price, gas_costs=params.gas_costs, r_max=params.r_max)
        ledger._blocks = list(blocks)
        ledger._next_seq = 1 + max((tx.seq for b in blocks for tx in b.transactions), default=0)
        ledger.accounts = {a: Account(address=a, balance=b) for a, b in balances.items()}
        ledger.collected_fees = collected_fees
        ledger.minted = minted
        ledger._rederive_contract_state()
        return ledger

    def _rederive_contract_state(self):
        """Re-executes every successful transaction against unlimited balances."""
        self.contracts = ContractState(r_max=self.contracts.r_max)
        for block in self._blocks[1:]:
            ctx = ExecutionContext(state=self.contracts, balances=_ReplayBalances(), block_number=block.number)
            for tx in block.transactions:
                if tx.status != TxStatus.SUCCESS:
                    continue
                try:
                    execute(ctx, tx)
                except ContractError as e:
                    logger.warning(f"Restored block {block.number} does not replay cleanly: {e}")
