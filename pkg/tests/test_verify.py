import pytest

from trivium_hf.verify import CATALOG, run_check

# statements that simulation refutes; each must keep failing with a counterexample
REFUTED = {"prop1", "lemma8-2", "prop2", "prop2-rank", "prop3-rank", "lemma14"}


@pytest.mark.parametrize("check_id", sorted(set(CATALOG) - REFUTED))
def test_check_passes(check_id):
    res = run_check(check_id, trials=3, seed=1)
    assert res.passed, (res.detail, res.counterexample)


@pytest.mark.parametrize("check_id", sorted(REFUTED))
def test_refuted_statement_reports_counterexample(check_id):
    res = run_check(check_id, trials=3, seed=1)
    assert not res.passed
    assert res.counterexample and "mask" in res.counterexample


def test_catalog_covers_numbered_results():
    wanted = [f"lemma{i}" for i in (1, 2, 3, 4, 5, 6, 7, 9, 10, 11, 12, 14, 15, 16, 17)]
    wanted += ["lemma8-1", "lemma8-2", "lemma13-1", "lemma13-2", "prop4-5", "features", "probabilities"]
    wanted += [f"prop{i}" for i in (1, 2, 3, 6, 7, 8, 9, 10)]
    assert set(wanted) <= set(CATALOG)


def test_unknown_and_bad_trials():
    with pytest.raises(KeyError):
        run_check("lemma99")
    with pytest.raises(ValueError):
        run_check("lemma1", trials=0)


def test_deterministic():
    assert run_check("prop2-rank", 2, 5) == run_check("prop2-rank", 2, 5)
