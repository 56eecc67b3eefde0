from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import get_config
from errors import TrustLedgerError
from scoring.mechanisms import MECHANISMS
from scoring.selection import EvidenceSelection

RECOMPUTE_POLICIES = ('every_block', 'every_n_blocks', 'on_demand')
DETECTOR_KINDS = ('spike', 'serial_negative', 'short_lived', 'service_turned')


class DetectorConfig(BaseModel):
    """One detector with its thresholds; unused fields are ignored by the other kinds."""
    model_config = ConfigDict(extra='forbid')

    kind: Literal['spike', 'serial_negative', 'short_lived', 'service_turned']
    # spike
    window: int = Field(default=5, ge=1)
    threshold: float = Field(default=5.0, gt=0)
    min_rate: float = Field(default=1.0, gt=0)
    # serial_negative
    k: int = Field(default_factory=lambda: get_config().SERIAL_NEGATIVE_RUN, ge=1)
    # short_lived
    min_lifetime: int = Field(default=10, ge=1)
    # service_turned
    recent: int = Field(default=10, ge=1)
    min_reporters: int = Field(default=3, ge=1)


class TrustProviderConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    address: str = Field(min_length=1)
    fee: int = Field(default=0, ge=0)
    mechanism: str = 'average'
    selection: str = 'deterministic'
    empty_trace_value: float = Field(default_factory=lambda: get_config().EMPTY_TRACE_VALUE, ge=0)
    threshold: int = Field(default_factory=lambda: get_config().POSITIVE_THRESHOLD, ge=0)
    recompute_policy: Literal['every_block', 'every_n_blocks', 'on_demand'] = 'every_block'
    n: Optional[int] = Field(default=None, ge=1)
    update_epsilon: float = Field(default_factory=lambda: get_config().SCORE_UPDATE_EPSILON, ge=0)
    detectors: List[DetectorConfig] = Field(default_factory=list)
    # drop feedbacks of flagged accounts from the context before scoring
    exclude_flagged: bool = False
    cap: Optional[int] = Field(default=None, ge=1)
    initial_balance: int = Field(default=10 ** 12, ge=0)

    @field_validator('mechanism')
    @classmethod
    def _known_mechanism(cls, v):
        name = v.strip().lower()
        if name not in MECHANISMS:
            raise ValueError(f"unknown mechanism {v!r}")
        return name

    @field_validator('selection')
    @classmethod
    def _known_selection(cls, v):
        try:
            return EvidenceSelection.parse(v).describe()
        except TrustLedgerError as e:
            raise ValueError(str(e))

    @model_validator(mode='after')
    def _policy_parameter(self):
        if self.recompute_policy == 'every_n_blocks' and self.n is None:
            raise ValueError("every_n_blocks needs n")
        return self
