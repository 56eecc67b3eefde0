# ==============================================================================
# TRUSTLEDGER | COMMAND LINE
# ==============================================================================
"""
Entry point: run scenarios, benchmark, score services on a chain dump,
verify dumps, replay fixtures and export chain data.

Exit codes: 0 ok, 1 other error, 2 config or usage error, 3 post-run
Property-2 scan failed, 4 chain verification failed.
"""
import functools
import json
import logging
import os
import sys

import click

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from config import get_config
from errors import (
    ConfigInvalid,
    InvalidSelection,
    MalformedDump,
    TrustLedgerError,
    UnknownFixture,
    UnknownMechanism,
)
from evidence.evidence_map import context_for_users, evidence_from_chain
from extensions import configure_logging
from ledger.chain import Ledger
from scoring.mechanisms import RatingProjection, build_mechanism
from scoring.recommendation import sigma_service
from scoring.selection import EvidenceSelection
from sim.bench import bench_throughput
from sim.engine import run_scenario
from sim.fixtures import replay_fixture
from sim.metrics import chain_summary, events_table
from sim.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_PROPERTY2 = 3
EXIT_VERIFY = 4

USAGE_ERRORS = (ConfigInvalid, UnknownFixture, InvalidSelection, UnknownMechanism)


# ==============================================================================
# HELPERS
# ==============================================================================

def handle_errors(f):
    """Maps typed errors onto exit codes with a one-line message on stderr."""
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except USAGE_ERRORS as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except MalformedDump as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_VERIFY)
        except TrustLedgerError as e:
            click.echo(f"error ({e.code}): {e}", err=True)
            sys.exit(EXIT_ERROR)
    return wrapper


def load_verified(path):
    ledger = Ledger.restore(path)
    result = ledger.verify_chain()
    if not result:
        click.echo(f"verification failed at block {result.block_number}: {result.reason}", err=True)
        sys.exit(EXIT_VERIFY)
    return ledger


def parse_context(m, text):
    """'1,2,user=u1' -> uids 1 and 2 plus every interaction of u1."""
    if not text:
        return None
    uids = set()
    for item in (part.strip() for part in text.split(',')):
        if not item:
            continue
        if item.startswith('user='):
            uids |= {i.uid for i in context_for_users(m, [item[len('user='):]])}
        else:
            try:
                uids.add(int(item))
            except ValueError:
                raise click.BadParameter(f"{item!r} is neither a uid nor user=ADDRESS", param_hint='--context')
    return uids


def parse_workloads(text):
    try:
        workloads = [int(w) for w in text.split(',') if w.strip()]
    except ValueError:
        raise click.BadParameter(f"{text!r} is not a comma list of integers", param_hint='--workloads')
    if not workloads or any(w <= 0 for w in workloads):
        raise click.BadParameter("workloads must be positive integers", param_hint='--workloads')
    return workloads


# ==============================================================================
# COMMANDS
# ==============================================================================

@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Debug logging.')
def cli(verbose):
    """Evidence-based trust scoring on a simulated ledger."""
    configure_logging('DEBUG' if verbose else get_config().LOG_LEVEL)


@cli.command()
@click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False),
              help='Scenario JSON file.')
@click.option('--seed', type=int, default=None, help='Overrides the scenario and TRUSTLEDGER_SEED.')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None, help='Output directory.')
@handle_errors
def run(config_path, seed, out_dir):
    """Run a scenario; write metrics, summary and the chain dump."""
    scenario = ScenarioConfig.load(config_path)
    result = run_scenario(scenario, seed=seed)
    out_dir = out_dir or os.path.join(get_config().OUTPUT_DIR, scenario.name)
    result.metrics.write(out_dir)
    result.ledger.dump(os.path.join(out_dir, 'chain.jsonl'))

    for provider, scores in sorted(result.metrics.summary['scores'].items()):
        for service, value in sorted(scores.items()):
            click.echo(f"{provider}\t{service}\t{value:.6f}")

    if result.violations:
        click.echo(f"property 2 scan found {len(result.violations)} unbacked feedbacks", err=True)
        sys.exit(EXIT_PROPERTY2)
    if not result.verification:
        click.echo(f"verification failed at block {result.verification.block_number}", err=True)
        sys.exit(EXIT_VERIFY)


@cli.command()
@click.option('--chain', 'chain_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--service', required=True)
@click.option('--mechanism', default='average', show_default=True)
@click.option('--selection', default='deterministic', show_default=True,
              help='deterministic | uniform | fresh(q) | geometric(q)')
@click.option('--context', default=None, help='Comma list of uids and/or user=ADDRESS entries.')
@click.option('--threshold', type=int, default=None, help='Lowest rating counted as positive.')
@click.option('--empty-value', type=float, default=None, help='Score of an empty context.')
@handle_errors
def score(chain_path, service, mechanism, selection, context, threshold, empty_value):
    """Print sigma(service | context) for a chain dump, to 6 decimals."""
    ledger = load_verified(chain_path)
    cfg = get_config()
    rho = RatingProjection(threshold=cfg.POSITIVE_THRESHOLD if threshold is None else threshold,
                           r_max=ledger.contracts.r_max)
    mu = build_mechanism(mechanism, rho, empty_value)
    sel = EvidenceSelection.parse(selection)
    m = evidence_from_chain(ledger.blocks)
    result = sigma_service(m, service, parse_context(m, context), mu, sel)
    click.echo(f"{result.value:.6f}")


@cli.command()
@click.option('--workloads', default=','.join(str(w) for w in get_config().BENCH_WORKLOADS), show_default=True)
@click.option('--kind', default='ReviewSubmission', show_default=True,
              type=click.Choice(['ReviewSubmission', 'AccessRequest', 'ScoreQuery']))
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None, help='CSV output file.')
@handle_errors
def bench(workloads, kind, out_path):
    """Throughput of a batch of transactions under the block model."""
    table = bench_throughput(parse_workloads(workloads), kind)
    click.echo(table.to_string(index=False))
    if out_path:
        os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
        table.to_csv(out_path, index=False)


@cli.command()
@click.option('--chain', 'chain_path', required=True, type=click.Path(exists=True, dir_okay=False))
@handle_errors
def verify(chain_path):
    """Recompute every block hash and link of a chain dump."""
    ledger = Ledger.restore(chain_path)
    result = ledger.verify_chain()
    if not result:
        click.echo(f"FAILED at block {result.block_number}: {result.reason}")
        sys.exit(EXIT_VERIFY)
    click.echo(f"ok: {result.checked_blocks} blocks, head {ledger.head.hash}")


@cli.command()
@click.argument('name')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False))
@click.option('--n', 'n', type=int, default=10, show_default=True, help='Length of alternating-stream.')
@handle_errors
def fixture(name, out_path, n):
    """Replay a reference fixture (fig2, worked-example, alternating-stream) and dump its chain."""
    chain = replay_fixture(name, n=n)
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    chain.ledger.dump(out_path)
    click.echo(f"{chain.name}: {chain.ledger.height + 1} blocks written to {out_path}")


@cli.command()
@click.option('--chain', 'chain_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--format', 'fmt', type=click.Choice(['csv', 'summary']), default='csv', show_default=True)
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False))
@handle_errors
def export(chain_path, fmt, out_path):
    """Export the events of a chain dump as CSV, or a JSON summary."""
    ledger = load_verified(chain_path)
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    if fmt == 'csv':
        table = events_table(ledger.blocks)
        table.to_csv(out_path, index=False)
        click.echo(f"{len(table)} events written to {out_path}")
        return
    m = evidence_from_chain(ledger.blocks)
    summary = chain_summary(ledger)
    summary['evidence'] = {
        'interactions': len(m.interactions),
        'feedbacks': len(m.epsilon),
        'reviews': len(m.reviews),
        'services': sorted(m.services),
    }
    with open(out_path, 'w', encoding='utf-8') as f:
        json.dump(summary, f, sort_keys=True, indent=2)
        f.write('\n')
    click.echo(f"summary written to {out_path}")


if __name__ == '__main__':
    cli()
