import json
import os

import pytest

from contracts.audit import scan_property2
from errors import ConfigInvalid, UnknownFixture
from ledger.models import EventKind, TxKind
from providers.detectors import FEEDBACK_SPIKE, SHORT_LIVED_ACCOUNT
from sim.bench import BENCH_COLUMNS, bench_throughput
from sim.engine import Simulation, run_scenario
from sim.fixtures import replay_fixture
from sim.scenario import ScenarioConfig

SCENARIOS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'scenarios')
SCENARIO_NAMES = sorted(f[:-5] for f in os.listdir(SCENARIOS) if f.endswith('.json'))


def scenario(name):
    return ScenarioConfig.load(os.path.join(SCENARIOS, f"{name}.json"))


def single_service(quality, users=5, rate=0.5, blocks=20, **provider):
    provider.setdefault('address', 'tp')
    return ScenarioConfig.from_dict({
        'name': f"quality-{quality}",
        'seed': 3,
        'duration_blocks': blocks,
        'users': {'count': users, 'interaction_rate': rate},
        'services': [{'id': 's', 'true_quality': quality}],
        'providers': [provider],
    })


# ==========================================
# CONFIGURATION
# ==========================================
def test_every_bundled_scenario_loads():
    assert 'worked_example' in SCENARIO_NAMES
    for name in SCENARIO_NAMES:
        assert scenario(name).name == name


@pytest.mark.parametrize('data', [
    {'services': [{'id': 's', 'true_quality': 1.5}]},
    {'services': [{'id': 's', 'true_quality': 0.5}, {'id': 's', 'true_quality': 0.5}]},
    {'services': [{'id': 's', 'true_quality': 0.5}], 'attacks': [{'kind': 'Sybil', 'target': 'x'}]},
    {'duration_blocks': 10, 'services': [{'id': 's', 'true_quality': 0.5}],
     'attacks': [{'kind': 'OnOff', 'target': 's', 'start_block': 10}]},
    {'attacks': [{'kind': 'Eclipse', 'target': 's'}]},
    {'providers': [{'address': 'a'}, {'address': 'a'}]},
    {'unexpected': True},
])
def test_invalid_scenarios(data):
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.from_dict(data)


def test_missing_and_garbled_files(tmp_path):
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.load(tmp_path / 'absent.json')
    bad = tmp_path / 'bad.json'
    bad.write_text('{"name": ')
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.load(bad)


# ==========================================
# FIXTURES
# ==========================================
def test_fixture_labels(fig2):
    assert fig2.labels['x12'] == 'x4.0'
    assert fig2.ledger.height == 4
    assert len(fig2.ledger.query_events(kind=EventKind.FEEDBACK)) == 4


def test_alternating_fixture_spans_blocks_when_large():
    chain = replay_fixture('alternating-stream', n=6000)
    assert len(chain.ledger.query_events(kind=EventKind.FEEDBACK)) == 6000
    assert chain.ledger.pending_depth == 0


@pytest.mark.parametrize('name, n', [('fig3', 10), ('alternating-stream', 0)])
def test_unknown_fixture(name, n):
    with pytest.raises(UnknownFixture):
        replay_fixture(name, n=n)


# ==========================================
# SCENARIOS
# ==========================================
def test_perfect_service_scores_one():
    result = run_scenario(single_service(1.0))
    assert result.ok
    assert result.metrics.summary['scores']['tp']['s'] == 1.0


def test_average_settles_near_true_quality():
    config = single_service(0.7, users=30, rate=1.0, blocks=100,
                            recompute_policy='every_n_blocks', n=25)
    result = run_scenario(config)
    feedbacks = len(result.ledger.query_events(kind=EventKind.FEEDBACK))
    assert feedbacks > 2500
    assert abs(result.providers[0].score('s').value - 0.7) < 0.03


def test_same_seed_same_chain():
    config = single_service(0.6, blocks=15)
    first, second = run_scenario(config), run_scenario(config)
    assert first.ledger.head.hash == second.ledger.head.hash
    assert first.metrics.summary == second.metrics.summary


def test_seed_override_changes_the_run():
    config = single_service(0.6, blocks=15)
    assert run_scenario(config, seed=1).ledger.head.hash != run_scenario(config, seed=2).ledger.head.hash


def test_worked_example_scenario():
    result = run_scenario(scenario('worked_example'))
    scores = result.metrics.summary['scores']
    assert scores['tp-uniform']['y1'] == pytest.approx(0.75)
    assert scores['tp-fresh']['y1'] == pytest.approx(5 / 6)
    assert result.ledger.contracts.providers['tp-fresh'].cached('y1').score == pytest.approx(5 / 6)
    assert result.verification.ok
    assert result.violations == []


def test_sybil_clones_are_flagged_and_pay_their_way():
    result = run_scenario(scenario('sybil'))
    (outcome,) = result.metrics.attacks
    assert outcome['accounts'] == 20
    assert outcome['cost'] >= 20 * (1000 + 50_000 * 1000)
    assert outcome['displacement'] > 0

    flagged = {r.subject for r in result.providers[0].reports if r.kind == SHORT_LIVED_ACCOUNT}
    clones = {f"sybil0-clone{k}" for k in range(20)}
    assert flagged == clones
    assert result.ok


def test_collusion_spike_is_caught_only_under_attack():
    result = run_scenario(scenario('collusion_spike'))
    spikes = [r for r in result.providers[0].reports if r.kind == FEEDBACK_SPIKE]
    assert spikes
    assert all(r.subject == 'target' and r.window[0] <= 35 and r.window[1] >= 31 for r in spikes)
    assert not [r for r in result.baseline.providers[0].reports if r.kind == FEEDBACK_SPIKE]
    assert result.metrics.attacks[0]['reports_triggered'] >= 1


def test_filtering_flagged_accounts_resists_bad_mouthing():
    result = run_scenario(scenario('bad_mouthing'), with_baseline=False)
    naive, filtered = result.providers
    assert 'badmouthing0-0' in filtered.flagged_accounts()
    assert filtered.answer_query('target') > naive.answer_query('target')


def test_quality_attacks_shape_honest_experience():
    sim = Simulation(scenario('on_off'), seed=1)
    assert [sim.quality('target', b) for b in (9, 10, 18, 26)] == [0.9, 0.9, 0.0, 0.9]
    assert sim.quality('other', 18) == 0.7

    sim = Simulation(scenario('opportunistic'), seed=1)
    assert (sim.quality('target', 49), sim.quality('target', 50)) == (0.95, 0.0)


def planned_feedbacks(attack, duration):
    """Accesses an attack buys: intensity times the blocks it is active (block 1 is setup)."""
    if attack.kind == 'Sybil':
        return attack.n_clones
    if attack.kind in ('OnOff', 'Opportunistic'):
        return 0
    per_block = attack.intensity * (attack.n_attackers if attack.kind == 'Collusion' else 1)
    return per_block * sum(attack.active(b, duration) for b in range(2, duration + 1))


@pytest.mark.parametrize('name', [n for n in SCENARIO_NAMES if scenario(n).attacks])
def test_every_attack_pays_for_its_interactions(name):
    config = scenario(name)
    result = run_scenario(config, with_baseline=False)
    schedule = result.ledger.schedule
    for attack, outcome in zip(config.attacks, result.metrics.attacks):
        price = result.ledger.contracts.resources[attack.target].price
        cheapest = price + schedule.fee(TxKind.ACCESS_REQUEST, 0) + schedule.fee(TxKind.REVIEW_SUBMISSION, 0)
        assert outcome['feedbacks'] == planned_feedbacks(attack, config.duration_blocks)
        assert outcome['cost'] >= outcome['feedbacks'] * cheapest


def test_more_sybil_clones_never_displace_less():
    with open(os.path.join(SCENARIOS, 'sybil.json'), encoding='utf-8') as f:
        base = json.load(f)
    displacements = []
    for clones in (5, 10, 20, 40):
        base['attacks'][0]['n_clones'] = clones
        (outcome,) = run_scenario(ScenarioConfig.from_dict(base)).metrics.attacks
        displacements.append(outcome['displacement'])
    assert displacements == sorted(displacements)
    assert displacements[0] > 0


def test_identical_providers_agree():
    config = ScenarioConfig.from_dict({
        'name': 'twins',
        'seed': 5,
        'duration_blocks': 30,
        'users': {'count': 8, 'interaction_rate': 0.5},
        'services': [{'id': 's1', 'true_quality': 0.6}, {'id': 's2', 'true_quality': 0.9}],
        'providers': [{'address': 'tp-a', 'selection': 'uniform'},
                      {'address': 'tp-b', 'selection': 'uniform'}],
    })
    first, second = run_scenario(config).providers
    assert first.trajectory
    assert [(b, s) for b, s, _ in first.trajectory] == [(b, s) for b, s, _ in second.trajectory]
    assert max(abs(x - y) for (_, _, x), (_, _, y) in zip(first.trajectory, second.trajectory)) <= 1e-12


@pytest.mark.parametrize('name', SCENARIO_NAMES)
def test_shipped_scenarios_hold_up(name):
    result = run_scenario(scenario(name), with_baseline=False)
    assert result.verification.ok
    assert scan_property2(result.ledger.blocks) == []
    assert result.violations == []


def test_no_unbacked_feedback_in_any_attack():
    result = run_scenario(scenario('bad_mouthing'), with_baseline=False)
    assert result.violations == []
    reverted = [tx for b in result.ledger.blocks for tx in b.transactions
                if tx.kind == TxKind.REVIEW_SUBMISSION and tx.error]
    assert reverted == []


def test_metrics_files(tmp_path):
    result = run_scenario(single_service(0.8, blocks=10))
    paths = result.metrics.write(tmp_path / 'run')
    assert set(paths) == {'metrics', 'scores', 'summary'}
    summary = json.loads((tmp_path / 'run' / 'summary.json').read_text())
    assert summary['verified'] is True
    assert summary['property2_violations'] == 0
    assert len(result.metrics.blocks) == result.ledger.height


# ==========================================
# BENCHMARK
# ==========================================
def test_bench_table():
    table = bench_throughput([10, 100, 1000], preseed=1000)
    assert list(table.columns) == BENCH_COLUMNS
    assert list(table['avg_tx_per_block']) == [10, 100, 1000]
    assert list(table['avg_gas_cost']) == [80_000 * 1010, 80_000 * 1100, 80_000 * 2000]
    assert list(table['tps']) == pytest.approx([10 / 12, 100 / 12, 1000 / 12])
    assert list(table['query_time']) == [12, 12, 12]


def test_bench_full_table():
    table = bench_throughput([10, 100, 1000, 10_000])
    assert list(table['avg_tx_per_block']) == [10, 100, 1000, 5000]
    assert list(table['blocks']) == [1, 1, 1, 2]
    fees = list(table['avg_gas_cost'])
    assert fees == sorted(fees)
    assert fees[-1] == 80_000 * 8500 > fees[0]
    tps = list(table['tps'])
    assert tps[:3] == sorted(tps[:3])


def test_bench_splits_oversized_workloads():
    table = bench_throughput([6000], preseed=6000)
    (row,) = table.to_dict('records')
    assert row['blocks'] == 2
    assert row['avg_tx_per_block'] == 3000
    assert row['tps'] <= 6000 / 12


@pytest.mark.parametrize('kwargs', [
    {'workloads': [10], 'kind': 'Transfer'},
    {'workloads': [0]},
    {'workloads': [50], 'preseed': 10},
])
def test_bench_rejects(kwargs):
    with pytest.raises(ValueError):
        bench_throughput(**kwargs)
