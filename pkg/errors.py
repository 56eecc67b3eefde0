"""
Typed failures for every layer of the trust ledger.

Each class carries a short ``code`` so receipts and CLI messages can name the
failure without the traceback.
"""


class TrustLedgerError(Exception):
    code = 'error'

    def __init__(self, message='', **details):
        super().__init__(message or self.__class__.__name__)
        self.details = details


# ==========================================
# LEDGER
# ==========================================
class LedgerError(TrustLedgerError):
    code = 'ledger'


class UnknownAccount(LedgerError):
    code = 'unknown_account'


class DuplicateAccount(LedgerError):
    code = 'duplicate_account'


class InsufficientBalance(LedgerError):
    code = 'insufficient_balance'


class BlockTooEarly(LedgerError):
    code = 'block_too_early'


class MalformedDump(LedgerError):
    code = 'malformed_dump'


# ==========================================
# CONTRACTS (each one reverts the transaction)
# ==========================================
class ContractError(TrustLedgerError):
    code = 'contract'


class UnknownResource(ContractError):
    code = 'unknown_resource'


class InsufficientPayment(ContractError):
    code = 'insufficient_payment'


class NoSuchInteraction(ContractError):
    code = 'no_such_interaction'


class SubmitterMismatch(ContractError):
    code = 'submitter_mismatch'


class RatingOutOfRange(ContractError):
    code = 'rating_out_of_range'


class UnknownProvider(ContractError):
    code = 'unknown_provider'


class InsufficientFee(ContractError):
    code = 'insufficient_fee'


class ScoreOutOfRange(ContractError):
    code = 'score_out_of_range'


class AlreadyRegistered(ContractError):
    code = 'already_registered'


class PaymentExceedsBalance(ContractError):
    code = 'payment_exceeds_balance'


# ==========================================
# EVIDENCE / SELECTION / SCORING
# ==========================================
class EvidenceError(TrustLedgerError):
    code = 'evidence'


class DanglingFeedback(EvidenceError):
    code = 'dangling_feedback'


class UnknownService(EvidenceError):
    code = 'unknown_service'


class SelectionError(TrustLedgerError):
    code = 'selection'


class InvalidSelection(SelectionError):
    code = 'invalid_selection'


class NotAFeedbackOfInteraction(SelectionError):
    code = 'not_a_feedback_of_interaction'


class ScoringError(TrustLedgerError):
    code = 'scoring'


class EmptyTrace(ScoringError):
    code = 'empty_trace'


class EnumerationCapExceeded(ScoringError):
    code = 'enumeration_cap_exceeded'


class UnknownMechanism(ScoringError):
    code = 'unknown_mechanism'


class ContextsNotIncreasing(ScoringError):
    code = 'contexts_not_increasing'


# ==========================================
# PROVIDERS / SIMULATION
# ==========================================
class ProviderError(TrustLedgerError):
    code = 'provider'


class OutOfOrderBlock(ProviderError):
    code = 'out_of_order_block'


class InsufficientHistory(ProviderError):
    code = 'insufficient_history'


class SimulationError(TrustLedgerError):
    code = 'simulation'


class ConfigInvalid(SimulationError):
    code = 'config_invalid'


class UnknownFixture(SimulationError):
    code = 'unknown_fixture'
