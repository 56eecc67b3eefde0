import os
from dotenv import load_dotenv

basedir = os.path.abspath(os.path.dirname(__file__))
load_dotenv(os.path.join(basedir, '.env'))


def _env_int(name, default):
    return int(os.environ.get(f'TRUSTLEDGER_{name}', default))


def _env_float(name, default):
    return float(os.environ.get(f'TRUSTLEDGER_{name}', default))


class Config:
    """Defaults for the ledger, the contracts, the scorers and the harnesses."""
    LOG_LEVEL = os.environ.get('TRUSTLEDGER_LOG_LEVEL', 'INFO')

    # Randomness
    DEFAULT_SEED = _env_int('DEFAULT_SEED', 7)

    # Block production
    BLOCK_INTERVAL = _env_int('BLOCK_INTERVAL', 12)
    BASE_GAS_PRICE = _env_int('BASE_GAS_PRICE', 1000)
    GAS_COSTS = {
        'AccessRequest': _env_int('GAS_ACCESS_REQUEST', 50_000),
        'ReviewSubmission': _env_int('GAS_REVIEW_SUBMISSION', 80_000),
        'ScoreQuery': _env_int('GAS_SCORE_QUERY', 30_000),
        'ScoreUpdate': _env_int('GAS_SCORE_UPDATE', 40_000),
        'Transfer': _env_int('GAS_TRANSFER', 21_000),
        'ProviderRegistration': _env_int('GAS_PROVIDER_REGISTRATION', 60_000),
        'ProviderDeregistration': _env_int('GAS_PROVIDER_DEREGISTRATION', 30_000),
        'ResourceRegistration': _env_int('GAS_RESOURCE_REGISTRATION', 60_000),
    }
    # 5000 review submissions fit in one block
    BLOCK_GAS_LIMIT = _env_int('BLOCK_GAS_LIMIT', 5000 * GAS_COSTS['ReviewSubmission'])

    # Ratings
    R_MAX = _env_int('R_MAX', 5)
    POSITIVE_THRESHOLD = _env_int('POSITIVE_THRESHOLD', 3)

    # Scoring
    EMPTY_TRACE_VALUE = _env_float('EMPTY_TRACE_VALUE', 0.5)
    ENUMERATION_CAP = _env_int('ENUMERATION_CAP', 10 ** 6)
    WEIGHT_TOLERANCE = 1e-9

    # Providers
    SCORE_UPDATE_EPSILON = _env_float('SCORE_UPDATE_EPSILON', 0.005)
    SERIAL_NEGATIVE_RUN = _env_int('SERIAL_NEGATIVE_RUN', 3)

    # Benchmark
    BENCH_PRESEED_ACCESSES = _env_int('BENCH_PRESEED_ACCESSES', 11_110)
    BENCH_WORKLOADS = (10, 100, 1000, 10_000)

    # Output
    OUTPUT_DIR = os.environ.get('TRUSTLEDGER_OUTPUT_DIR') or os.path.join(basedir, 'out')


class DevelopmentConfig(Config):
    LOG_LEVEL = 'DEBUG'


class TestingConfig(Config):
    LOG_LEVEL = 'WARNING'
    # Small cap so the exponential wall shows up in unit tests
    ENUMERATION_CAP = 10 ** 5


def get_config():
    env = os.environ.get('TRUSTLEDGER_ENV', 'production')
    if env == 'development':
        return DevelopmentConfig
    if env == 'testing':
        return TestingConfig
    return Config


def resolve_seed(config_seed=None, cli_seed=None):
    """CLI flag beats TRUSTLEDGER_SEED, which beats the seed in the config file."""
    if cli_seed is not None:
        return int(cli_seed)
    env_seed = os.environ.get('TRUSTLEDGER_SEED')
    if env_seed:
        return int(env_seed)
    if config_seed is not None:
        return int(config_seed)
    return get_config().DEFAULT_SEED
