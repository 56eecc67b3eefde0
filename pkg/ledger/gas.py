import logging

from config import get_config
from ledger.models import TxKind

logger = logging.getLogger(__name__)


class GasSchedule:
    """
    Fixed per-kind gas costs plus a congestion-dependent price.

    The price grows linearly with the pending pool: base * (1 + depth/1000),
    rounded up to a whole price unit.
    """

    def __init__(self, costs=None, base_price=None):
        cfg = get_config()
        self.costs = {TxKind(k): int(v) for k, v in (costs or cfg.GAS_COSTS).items()}
        self.base_price = int(base_price if base_price is not None else cfg.BASE_GAS_PRICE)
        if self.base_price <= 0:
            raise ValueError("base gas price must be positive")
        missing = [k for k in TxKind if k not in self.costs]
        if missing:
            raise ValueError(f"gas schedule lacks costs for {[k.value for k in missing]}")

    def cost_of(self, kind):
        return self.costs[TxKind(kind)]

    def gas_price(self, pool_depth):
        if pool_depth < 0:
            raise ValueError("pool depth cannot be negative")
        # integer ceil of base * (1000 + depth) / 1000
        return -(-self.base_price * (1000 + pool_depth) // 1000)

    def fee(self, kind, pool_depth):
        return self.cost_of(kind) * self.gas_price(pool_depth)

    def as_dict(self):
        return {k.value: v for k, v in self.costs.items()}


def gas_price(pool_depth, base_price=None):
    return GasSchedule(base_price=base_price).gas_price(pool_depth)
