import os
import sys
import pytest
from unittest.mock import Mock

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from services.channel_service import SimPlan, simulate_ecdp
from services.coset_service import build_coset_code, make_nested_pair
from services.errors import UsageFailure
from services.lattice_service import Lattice
from services.runner_service import RunnerKind, TrialRunner, batch_rng, batch_sizes
from services.search_service import SearchConfig, probabilistic_wr_search


@pytest.fixture
def small_code():
    identity = Lattice.from_rows([[1, 0], [0, 1]])
    double = Lattice.from_rows([[2, 0], [0, 2]])
    return build_coset_code(make_nested_pair(identity, double), 4)


def serial_runner():
    # Mock: same interface as a pool, runs tasks in order
    runner = Mock(spec=TrialRunner)
    runner.map.side_effect = lambda func, tasks: [func(t) for t in tasks]
    return runner


# ---------------- TrialRunner ----------------

def test_runner_rejects_bad_worker_count():
    with pytest.raises(UsageFailure):
        TrialRunner(workers=0)


def test_runner_rejects_unknown_kind():
    with pytest.raises(UsageFailure):
        TrialRunner(workers=2, kind="cluster")


def test_runner_preserves_task_order():
    runner = TrialRunner(workers=3, kind="thread")
    assert runner.kind is RunnerKind.THREAD
    assert runner.map(lambda x: x * x, range(10)) == [x * x for x in range(10)]


def test_single_worker_never_builds_a_pool(mocker):
    pool = mocker.patch('services.runner_service.ProcessPoolExecutor')
    runner = TrialRunner(workers=1, kind="process")
    assert runner.map(abs, [-1, -2]) == [1, 2]
    pool.assert_not_called()


# ---------------- batching ----------------

def test_batch_sizes_split_with_remainder():
    assert batch_sizes(5000, 2048) == [2048, 2048, 904]
    assert batch_sizes(4096, 2048) == [2048, 2048]
    with pytest.raises(UsageFailure):
        batch_sizes(10, 0)


def test_batch_rng_is_keyed():
    a = batch_rng(7, 0, 1).integers(0, 2 ** 32, size=4)
    b = batch_rng(7, 0, 1).integers(0, 2 ** 32, size=4)
    c = batch_rng(7, 1, 0).integers(0, 2 ** 32, size=4)
    assert (a == b).all()
    assert not (a == c).all()


# ---------------- services driving a runner ----------------

def test_simulation_hands_every_batch_to_the_runner(small_code):
    runner = serial_runner()
    plan = SimPlan(small_code, (0.5, 1.0), trials=5000, master_seed=2)

    curve = simulate_ecdp(plan, runner)

    runner.map.assert_called_once()
    _, tasks = runner.map.call_args.args
    assert len(tasks) == 2 * 3
    assert [p.trials for p in curve.points] == [5000, 5000]
    assert curve.points == simulate_ecdp(plan).points


def test_search_hands_blocks_to_the_runner():
    runner = serial_runner()
    config = SearchConfig(n=2, target_index=5, max_iterations=3000, seed=3, block_size=1000)

    hits = probabilistic_wr_search(config, runner)

    assert runner.map.called
    assert [h.to_dict() for h in hits] == [h.to_dict() for h in probabilistic_wr_search(config)]
