import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from services.errors import BoundsExceeded, HermiteViolation, UnsupportedDimension, UsageFailure  # noqa: E402
from services.lattice_service import WrKind, column_hnf, hermite_bound_holds  # noqa: E402
from services.runner_service import TrialRunner  # noqa: E402
from services.search_service import (  # noqa: E402
    SearchConfig, SearchMode, count_hnf_bases, exhaustive_wr_search, hnf_bases,
    probabilistic_wr_search, run_search, vectors_of_norm,
)


# --- candidate vectors -------------------------------------------------------

def test_vectors_of_norm_one_per_sign_pair():
    assert vectors_of_norm(2, 1) == [(0, 1), (1, 0)]
    assert vectors_of_norm(2, 5) == [(1, -2), (1, 2), (2, -1), (2, 1)]


def test_vectors_of_norm_counts_representations():
    # r_4(20) = 8·(1 + 2 + 5 + 10) = 144 lattice vectors, half of them up to sign
    assert len(vectors_of_norm(4, 20)) == 72


def test_vectors_of_norm_needs_positive_norm():
    with pytest.raises(UsageFailure):
        vectors_of_norm(3, 0)


# --- configuration ---------------------------------------------------------------

def test_config_defaults_to_hermite_interval():
    config = SearchConfig(n=4, target_index=256)
    assert config.norm_candidates == tuple(range(16, 23))
    assert config.mode is SearchMode.PROBABILISTIC


def test_config_rejects_norms_outside_interval():
    with pytest.raises(UsageFailure):
        SearchConfig(n=4, target_index=256, norm_candidates=(15, 20))


def test_config_rejects_unsupported_dimension():
    with pytest.raises(UnsupportedDimension):
        SearchConfig(n=9, target_index=10)


def test_config_rejects_empty_budget():
    with pytest.raises(UsageFailure):
        SearchConfig(n=2, target_index=5, max_iterations=0)


# --- exhaustive enumeration ------------------------------------------------------------

def test_hnf_enumeration_counts_sublattices():
    # sigma(4) = 7 sublattices of index 4 in Z^2
    assert count_hnf_bases(2, 4) == 7
    assert len(list(hnf_bases(2, 4))) == 7
    assert count_hnf_bases(3, 2) == 7


def test_exhaustive_search_finds_planar_index_216_lattice():
    config = SearchConfig(n=2, target_index=216, mode=SearchMode.EXHAUSTIVE)
    hits = exhaustive_wr_search(config)
    target = column_hnf([[3, 15], [15, 3]])
    assert any(hit.basis == target and hit.lambda1 == 234 for hit in hits)
    assert all(hit.index == 216 for hit in hits)
    assert [h.lambda1 for h in hits] == sorted((h.lambda1 for h in hits), reverse=True)


def test_exhaustive_search_of_index_one_is_the_whole_lattice():
    hits = exhaustive_wr_search(SearchConfig(n=2, target_index=1, mode=SearchMode.EXHAUSTIVE))
    assert len(hits) == 1
    assert hits[0].basis == ((1, 0), (0, 1))
    assert hits[0].wr_class is WrKind.STRONGLY_WR


def test_exhaustive_search_is_bounded():
    with pytest.raises(BoundsExceeded):
        exhaustive_wr_search(SearchConfig(n=5, target_index=2, mode=SearchMode.EXHAUSTIVE))


# --- probabilistic search ----------------------------------------------------------------

def test_probabilistic_search_index_one():
    hits = probabilistic_wr_search(SearchConfig(n=2, target_index=1, max_iterations=2000))
    assert len(hits) == 1
    assert hits[0].basis == ((1, 0), (0, 1))
    assert hits[0].iterations_used >= 1


def test_probabilistic_search_index_five():
    hits = probabilistic_wr_search(SearchConfig(n=2, target_index=5, max_iterations=4000, seed=3))
    assert {h.lambda1 for h in hits} == {5}
    assert len(hits) == 2
    for hit in hits:
        assert hermite_bound_holds(hit.lattice)[3]


def test_probabilistic_search_agrees_with_exhaustive_oracle():
    config = SearchConfig(n=2, target_index=25, max_iterations=20000, seed=1, stop_at_first_norm=False)
    sampled = {h.basis for h in probabilistic_wr_search(config)}
    oracle = {h.basis for h in exhaustive_wr_search(SearchConfig(n=2, target_index=25,
                                                                 mode=SearchMode.EXHAUSTIVE))}
    assert sampled <= oracle


def test_probabilistic_search_is_reproducible_across_runners():
    config = SearchConfig(n=3, target_index=8, max_iterations=6000, seed=9, block_size=1000)
    serial = probabilistic_wr_search(config)
    threaded = probabilistic_wr_search(config, TrialRunner(workers=3, kind="thread"))
    assert [h.to_dict() for h in serial] == [h.to_dict() for h in threaded]


def test_probabilistic_search_can_come_back_empty():
    # index 3 in Z^2: the only norm allowed is 3, which is not a sum of two squares
    assert probabilistic_wr_search(SearchConfig(n=2, target_index=3, max_iterations=100)) == []


def test_run_search_dispatches_on_mode(mocker):
    exhaustive = mocker.patch("services.search_service.exhaustive_wr_search", return_value=[])
    probabilistic = mocker.patch("services.search_service.probabilistic_wr_search", return_value=[])
    run_search(SearchConfig(n=2, target_index=1, mode=SearchMode.EXHAUSTIVE))
    exhaustive.assert_called_once()
    probabilistic.assert_not_called()


def test_hit_report_fields():
    hit = exhaustive_wr_search(SearchConfig(n=2, target_index=1, mode=SearchMode.EXHAUSTIVE))[0]
    assert hit.to_dict() == {
        "basis": [[1, 0], [0, 1]],
        "lambda1_sq": 1,
        "index": 1,
        "wr_class": "StronglyWR",
        "iterations_used": 1,
    }


@pytest.mark.slow
def test_probabilistic_search_reproduces_lambda1_20_at_index_256():
    config = SearchConfig(n=4, target_index=256, norm_candidates=(20,), seed=7)
    hits = probabilistic_wr_search(config)
    assert hits
    assert all(h.lambda1 == 20 for h in hits)
    assert all(hermite_bound_holds(h.lattice)[3] for h in hits)


def test_hermite_violation_is_raised(mocker):
    mocker.patch("services.search_service.hermite_bound_holds", return_value=(2, 1, 3, False))
    with pytest.raises(HermiteViolation):
        exhaustive_wr_search(SearchConfig(n=2, target_index=1, mode=SearchMode.EXHAUSTIVE))


@pytest.mark.slow
def test_probabilistic_search_finds_lambda1_22_at_index_302():
    config = SearchConfig(n=4, target_index=302, norm_candidates=(22,), seed=7)
    hits = probabilistic_wr_search(config)
    assert hits
    for hit in hits:
        assert hit.index == 302
        assert hit.lambda1 == 22
        assert hit.wr_class is not WrKind.NOT_WR
        assert hermite_bound_holds(hit.lattice)[3]
