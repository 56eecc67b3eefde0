"""
Scenario configuration: a JSON file validated with pydantic.

Validation failures of any kind (missing file, bad JSON, schema errors)
surface as ConfigInvalid.
"""
import json
import logging
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import get_config
from errors import ConfigInvalid
from providers.config import TrustProviderConfig

logger = logging.getLogger(__name__)

ATTACK_KINDS = ('BadMouthing', 'GoodMouthing', 'Collusion', 'Sybil', 'OnOff', 'Opportunistic')


class UsersConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    count: int = Field(default=10, ge=0)
    # mean accesses per user per block
    interaction_rate: float = Field(default=0.2, ge=0)
    initial_balance: int = Field(default=10 ** 12, ge=0)
    query_probability: float = Field(default=0.0, ge=0, le=1)


class ServiceConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    id: str = Field(min_length=1)
    true_quality: float = Field(ge=0, le=1)
    price: int = Field(default=1000, ge=0)
    owner: Optional[str] = None

    @property
    def owner_address(self):
        return self.owner or f"owner-{self.id}"


class AttackConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['BadMouthing', 'GoodMouthing', 'Collusion', 'Sybil', 'OnOff', 'Opportunistic']
    target: str
    start_block: int = Field(default=2, ge=1)
    end_block: Optional[int] = Field(default=None, ge=1)
    # feedbacks per block (per attacker for Collusion)
    intensity: int = Field(default=1, ge=0)
    n_attackers: int = Field(default=1, ge=1)
    n_clones: int = Field(default=1, ge=1)
    period: int = Field(default=5, ge=1)
    switch_block: Optional[int] = Field(default=None, ge=1)
    rating: Literal['negative', 'positive'] = 'negative'
    budget: int = Field(default=10 ** 12, ge=0)

    @model_validator(mode='after')
    def _window(self):
        if self.end_block is not None and self.end_block < self.start_block:
            raise ValueError("end_block precedes start_block")
        return self

    def active(self, block_number, duration_blocks):
        end = self.end_block if self.end_block is not None else duration_blocks
        return self.start_block <= block_number <= end


class LedgerConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    block_interval: int = Field(default_factory=lambda: get_config().BLOCK_INTERVAL, ge=1)
    block_gas_limit: int = Field(default_factory=lambda: get_config().BLOCK_GAS_LIMIT, ge=1)
    base_gas_price: int = Field(default_factory=lambda: get_config().BASE_GAS_PRICE, ge=1)


class RatingConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    r_max: int = Field(default_factory=lambda: get_config().R_MAX, ge=1)
    threshold: int = Field(default_factory=lambda: get_config().POSITIVE_THRESHOLD, ge=0)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    name: str = 'scenario'
    seed: Optional[int] = None
    duration_blocks: int = Field(default=50, ge=0)
    users: UsersConfig = Field(default_factory=UsersConfig)
    services: List[ServiceConfig] = Field(default_factory=list)
    providers: List[TrustProviderConfig] = Field(default_factory=list)
    attacks: List[AttackConfig] = Field(default_factory=list)
    ledger: LedgerConfig = Field(default_factory=LedgerConfig)
    rating: RatingConfig = Field(default_factory=RatingConfig)
    fixture: Optional[str] = None
    fixture_n: int = Field(default=10, ge=1)

    @model_validator(mode='after')
    def _consistent(self):
        ids = [s.id for s in self.services]
        if len(ids) != len(set(ids)):
            raise ValueError("service ids must be unique")
        addresses = [p.address for p in self.providers]
        if len(addresses) != len(set(addresses)):
            raise ValueError("provider addresses must be unique")
        for attack in self.attacks:
            if attack.target not in ids:
                raise ValueError(f"attack target {attack.target} is not a configured service")
            if attack.start_block >= self.duration_blocks:
                raise ValueError(f"{attack.kind} starts after the scenario ends")
        return self

    # ==========================================
    # LOADING
    # ==========================================
    @classmethod
    def from_dict(cls, data):
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigInvalid(f"invalid scenario: {e.error_count()} problem(s)\n{e}")

    @classmethod
    def load(cls, path):
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigInvalid(f"scenario file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigInvalid(f"scenario file {path} is not valid JSON: {e}")
        config = cls.from_dict(data)
        logger.info(f"Loaded scenario {config.name} from {path}")
        return config

    def without_attacks(self):
        return self.model_copy(update={'attacks': []})
