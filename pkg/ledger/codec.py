"""
Canonical block serialization, block hashing and the line-delimited dump format.

Hash input: the block object without its ``hash`` key, rendered as JSON with
sorted keys, no whitespace, ASCII only, and floats in shortest round-trip form.
The digest is SHA-256 over the UTF-8 bytes, in hex.

Dump file: line 1 is a header object
    {"format": "trustledger-chain", "version": 1, "params": ..., "balances": ..., "collectedFees": ..., "minted": ...}
and every following line is one block object whose keys appear in this order:
    number, parentHash, timestamp, gasUsed, transactions, events, hash
"""
import hashlib
import json
import logging

from errors import MalformedDump
from ledger.models import Block, LedgerEvent, LedgerParams, Transaction

logger = logging.getLogger(__name__)

DUMP_FORMAT = 'trustledger-chain'
DUMP_VERSION = 1


def block_body(block):
    return {
        'number': block.number,
        'parentHash': block.parent_hash,
        'timestamp': block.timestamp,
        'gasUsed': block.gas_used,
        'transactions': [tx.to_dict() for tx in block.transactions],
        'events': [ev.to_dict() for ev in block.events],
    }


def canonical_bytes(body):
    return json.dumps(body, sort_keys=True, separators=(',', ':'), ensure_ascii=True, allow_nan=False).encode('utf-8')


def compute_hash(block):
    return hashlib.sha256(canonical_bytes(block_body(block))).hexdigest()


def seal(block):
    """Returns a copy of the block carrying its own digest."""
    return Block(
        number=block.number,
        parent_hash=block.parent_hash,
        timestamp=block.timestamp,
        transactions=tuple(block.transactions),
        events=tuple(block.events),
        gas_used=block.gas_used,
        hash=compute_hash(block),
    )


def block_to_dict(block):
    body = block_body(block)
    body['hash'] = block.hash
    return body


def block_from_dict(data):
    try:
        return Block(
            number=data['number'],
            parent_hash=data['parentHash'],
            timestamp=data['timestamp'],
            gas_used=data['gasUsed'],
            transactions=tuple(Transaction.from_dict(t) for t in data['transactions']),
            events=tuple(LedgerEvent.from_dict(e) for e in data['events']),
            hash=data['hash'],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedDump(f"bad block object: {e}") from e


def write_dump(path, params, blocks, balances, collected_fees, minted):
    header = {
        'format': DUMP_FORMAT,
        'version': DUMP_VERSION,
        'params': params.to_dict(),
        'balances': dict(sorted(balances.items())),
        'collectedFees': collected_fees,
        'minted': minted,
    }
    with open(path, 'w', encoding='utf-8') as f:
        f.write(json.dumps(header, allow_nan=False) + '\n')
        for block in blocks:
            f.write(json.dumps(block_to_dict(block), allow_nan=False) + '\n')
    logger.info(f"Chain dumped: {len(blocks)} blocks -> {path}")


def read_dump(path):
    """Returns (params, blocks, balances, collected_fees, minted) without validating the chain."""
    with open(path, 'r', encoding='utf-8') as f:
        lines = [line for line in f.read().splitlines() if line.strip()]
    if not lines:
        raise MalformedDump(f"{path} is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise MalformedDump(f"header is not JSON: {e}") from e
    if header.get('format') != DUMP_FORMAT:
        raise MalformedDump(f"{path} is not a {DUMP_FORMAT} dump")
    blocks = []
    for n, line in enumerate(lines[1:], start=2):
        try:
            blocks.append(block_from_dict(json.loads(line)))
        except json.JSONDecodeError as e:
            raise MalformedDump(f"line {n} is not JSON: {e}") from e
    return (
        LedgerParams.from_dict(header['params']),
        blocks,
        dict(header['balances']),
        header['collectedFees'],
        header['minted'],
    )
