import random

import pytest

from trivium_hf.core import ZERO_IV, Key
from trivium_hf.detector import (
    PERIOD_CASE2,
    Detected,
    FaultedMachine,
    bits_for,
    check_feature,
    detect_batch,
    detect_case,
    features_needed,
    label_from_features,
    score,
)
from trivium_hf.faults import EMPTY_MASK, FaultMask

# expected features 1..6 for a single fault at each position range
SURVEY = [
    ((1, 66), (0, 0, 1, 0, 0, 0)),
    ((67, 93), (0, 0, 0, 0, 0, 0)),
    ((94, 162), (1, 1, 0, 0, 0, 0)),
    ((163, 171), (0, 0, 0, 1, 0, 0)),
    ((172, 172), (0, 0, 0, 0, 1, 0)),
    ((173, 177), (0, 0, 0, 0, 1, 1)),
    ((178, 243), (0, 1, 0, 0, 1, 1)),
    ((244, 288), (0, 0, 0, 0, 0, 0)),
]


@pytest.mark.parametrize("bounds,want", SURVEY)
def test_feature_survey(bounds, want):
    rng = random.Random(bounds[0])
    for p in {bounds[0], bounds[1], rng.randint(*bounds)}:
        m = FaultedMachine(Key.random(rng), FaultMask.of(p))
        got = tuple(int(check_feature(m, i)) for i in range(1, 7))
        assert got == want, p


@pytest.mark.parametrize(
    "pos,label",
    [(100, Detected.CASE1), (200, Detected.CASE2), (50, Detected.CASE3), (165, Detected.CASE4),
     (172, Detected.CASE5), (174, Detected.CASE5OR6), (177, Detected.CASE5OR6), (80, Detected.CASE7),
     (250, Detected.CASE7)],
)
def test_detect_labels(pos, label):
    res = detect_case(FaultedMachine(Key(0x1234567), FaultMask.of(pos)))
    assert res.label is label


def test_resolve_case5():
    res = detect_case(FaultedMachine(Key(5), FaultMask.of(177)), resolve_case5=True)
    assert res.label is Detected.CASE5
    assert not score(res, FaultMask.of(177))
    assert score(detect_case(FaultedMachine(Key(5), FaultMask.of(177))), FaultMask.of(177))


def test_clean_machine_is_case7():
    assert detect_case(FaultedMachine(Key(77), EMPTY_MASK)).label is Detected.CASE7


def test_lazy_bits_and_features():
    m = FaultedMachine(Key(9), FaultMask.of(100))
    res = detect_case(m)
    assert res.features == (True, None, None, None, None, None)
    assert res.bits_consumed == 138 == m.bits_consumed
    res2 = detect_case(FaultedMachine(Key(9), FaultMask.of(200)))
    assert res2.features[:2] == (False, True)
    assert res2.bits_consumed == 2 * PERIOD_CASE2


def test_bits_match_machine_accounting():
    rng = random.Random(4)
    for p in (10, 80, 100, 165, 174, 200, 270):
        m = FaultedMachine(Key.random(rng), FaultMask.of(p))
        assert detect_case(m).bits_consumed == m.bits_consumed


def test_decision_list_helpers():
    assert label_from_features([False, False, False, False, True, True]) is Detected.CASE5OR6
    assert label_from_features([False, True, None, None, None, None]) is Detected.CASE2
    assert features_needed([False, False, False, False, False, True]) == [1, 2, 3, 4, 5]
    assert bits_for([1]) == 138


def test_batch_equals_single():
    rng = random.Random(21)
    keys, masks = [], []
    for _ in range(60):
        keys.append(Key.random(rng))
        masks.append(FaultMask.of(rng.randint(1, 288)))
    batch = detect_batch(keys, masks)
    for k, m, b in zip(keys, masks, batch):
        assert detect_case(FaultedMachine(k, m)) == b


def test_observe_bounds():
    with pytest.raises(ValueError):
        FaultedMachine(Key(1), EMPTY_MASK).observe(ZERO_IV, -1)
    with pytest.raises(ValueError):
        check_feature(FaultedMachine(Key(1), EMPTY_MASK), 7)
