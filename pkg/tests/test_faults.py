import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from trivium_hf.faults import (
    EMPTY_MASK,
    BernoulliWithinRegister,
    CaseLabel,
    FaultMask,
    KWithinRegister,
    MaskError,
    SingleUniform,
    case_positions,
    case_probability,
    classify_case,
    ground_truth_case,
    parse_model,
    register_of,
    sample_fault_mask,
    sample_masks,
    tally_cases,
)

EXPECTED = {
    CaseLabel.CASE1: (94, 162),
    CaseLabel.CASE2: (178, 243),
    CaseLabel.CASE3: (1, 66),
    CaseLabel.CASE4: (163, 171),
    CaseLabel.CASE5: (172, 176),
    CaseLabel.CASE6: (177, 177),
}


@pytest.mark.parametrize("label,bounds", EXPECTED.items())
def test_case_ranges(label, bounds):
    lo, hi = bounds
    assert case_positions(label) == list(range(lo, hi + 1))
    for p in (lo, hi):
        assert classify_case(FaultMask.of(p)) is label


def test_case7_positions():
    want = list(range(67, 94)) + list(range(244, 289))
    assert case_positions(CaseLabel.CASE7) == want


def test_partition():
    seen = sorted(p for c in CaseLabel for p in case_positions(c))
    assert seen == list(range(1, 289))


@given(st.sets(st.integers(178, 288), min_size=1, max_size=5))
def test_case_uses_lowest_position(pos):
    assert classify_case(FaultMask(frozenset(pos))) is classify_case(FaultMask.of(min(pos)))


def test_empty_mask_is_case7():
    assert ground_truth_case(EMPTY_MASK) is CaseLabel.CASE7


def test_registers():
    assert [register_of(p) for p in (1, 93, 94, 177, 178, 288)] == [0, 0, 1, 1, 2, 2]
    with pytest.raises(ValueError):
        register_of(0)


def test_parse():
    assert FaultMask.parse("100") == FaultMask.of(100)
    assert FaultMask.parse("200, 250") == FaultMask.of(200, 250)
    assert FaultMask.parse("1-3") == FaultMask.of(1, 2, 3)
    assert FaultMask.parse("") == EMPTY_MASK
    assert str(FaultMask.of(250, 200)) == "200,250"
    for bad in ("x", "0", "289", "5,100"):
        with pytest.raises(MaskError):
            FaultMask.parse(bad)


def test_exact_probabilities():
    p = case_probability()
    assert [p[c] for c in CaseLabel] == [Fraction(n, 288) for n in (69, 66, 66, 9, 5, 1, 72)]
    assert sum(p.values()) == 1


def test_models():
    assert parse_model("single") == SingleUniform()
    assert parse_model("k:3") == KWithinRegister(3)
    assert parse_model("bernoulli:0.1") == BernoulliWithinRegister(0.1)
    for bad in ("k:0", "bernoulli:1.5", "nope", "single:2"):
        with pytest.raises(ValueError):
            parse_model(bad)


@pytest.mark.parametrize("model", [SingleUniform(), KWithinRegister(4), BernoulliWithinRegister(0.05)])
def test_sampling_reproducible(model):
    a = sample_masks(model, 50, seed=9)
    assert a == sample_masks(model, 50, seed=9)
    assert a[1:] == sample_masks(model, 49, seed=10)
    for m in a:
        assert m and len({register_of(p) for p in m}) == 1


def test_k_model_size():
    rng = random.Random(1)
    for _ in range(50):
        assert len(sample_fault_mask(KWithinRegister(3), rng)) == 3


def test_monte_carlo_estimate():
    est = case_probability(SingleUniform(), samples=20000, seed=1)
    for c, n in zip(CaseLabel, (69, 66, 66, 9, 5, 1, 72)):
        assert abs(est[c].probability - n / 288) <= 4 * max(est[c].stderr, 1e-3)
    counts = tally_cases(sample_masks(SingleUniform(), 1000, 0))
    assert sum(counts.values()) == 1000
