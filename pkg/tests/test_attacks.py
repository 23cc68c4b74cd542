import random

import pytest

from trivium_hf import attacks
from trivium_hf.core import ZERO_IV, Key, faulted_keystream, trajectory
from trivium_hf.faults import CaseLabel, FaultMask


def instance(seed, lo, hi):
    rng = random.Random(seed)
    return Key.random(rng), FaultMask.of(rng.randint(lo, hi))


# -- Case 1


@pytest.mark.parametrize("seed", range(5))
def test_case1_candidates_contain_key(seed):
    key, mask = instance(seed, 94, 162)
    kk = attacks.attack_case1(faulted_keystream(key, ZERO_IV, mask, 138))
    assert kk.consistent_with(key)
    assert len(kk.candidates) == 8
    assert all(r.holds(key) for r in kk.relations)


def test_case1_output_map_is_affine():
    assert all(p.degree() <= 1 for p in attacks.case1_output_map())


def test_case1_rejects_aperiodic():
    key, mask = instance(1, 178, 243)
    with pytest.raises(attacks.WrongCaseError):
        attacks.attack_case1(faulted_keystream(key, ZERO_IV, mask, 138))


# -- Case 2


@pytest.mark.parametrize("seed", range(4))
def test_case2_ground_truth_satisfies_rows(seed):
    key, mask = instance(seed, 178, 243)
    z = faulted_keystream(key, ZERO_IV, mask, attacks.CASE2_ROWS)
    system = attacks.build_case2_system(z)
    assert system.nvars == 216
    assert system.satisfied_by(attacks.case2_reference_vector(trajectory(key, ZERO_IV, mask, 100)))


def test_case2_key_polynomials_match_simulation():
    key, mask = instance(7, 178, 243)
    x = attacks.case2_reference_vector(trajectory(key, ZERO_IV, mask, 100))
    point = sum(1 << i for i in range(1, 81) if key.bit(i))
    got = sum(p.evaluate(point) << k for k, p in enumerate(attacks.case2_key_polynomials()))
    assert got == x


@pytest.mark.parametrize("seed", range(6))
def test_case2_full_key(seed):
    key, mask = instance(seed, 178, 243)
    kk, rep = attacks.solve_case2(faulted_keystream(key, ZERO_IV, mask, attacks.CASE2_ROWS))
    assert kk.is_full() and kk.consistent_with(key)
    assert rep.survivors == 1
    assert rep.candidates_before_filter == 1 << (216 - rep.rank_observed)


def test_case2_multi_fault_register3():
    key = Key(0xBEEF)
    mask = FaultMask.of(190, 230, 260)
    kk, _ = attacks.solve_case2(faulted_keystream(key, ZERO_IV, mask, attacks.CASE2_ROWS))
    assert kk.recovered_hex()[0] == key.hex()


def test_case2_rejects_wrong_case():
    key, mask = instance(3, 1, 66)
    with pytest.raises(attacks.AttackFailure):
        attacks.solve_case2(faulted_keystream(key, ZERO_IV, mask, attacks.CASE2_ROWS))


def test_case2_short_keystream():
    with pytest.raises(ValueError):
        attacks.build_case2_system([0] * 100)


def test_a_sequence_period():
    key, mask = instance(5, 178, 243)
    a = attacks.a_sequence_from_trajectory(trajectory(key, ZERO_IV, mask, 200), "case2")
    assert a.first == 28 and a.last == 96


# -- Case 3


@pytest.mark.parametrize("seed", range(3))
def test_case3_ground_truth_satisfies_rows(seed):
    key, mask = instance(seed, 1, 66)
    z = faulted_keystream(key, ZERO_IV, mask, attacks.CASE3_ROWS)
    system = attacks.build_case3_system(z)
    assert system.nvars == 243
    assert system.satisfied_by(attacks.case3_reference_vector(trajectory(key, ZERO_IV, mask, 180)))


@pytest.mark.parametrize("seed", range(3))
def test_case3_a_sequence(seed):
    key, mask = instance(seed, 1, 66)
    tr = trajectory(key, ZERO_IV, mask, 100)
    a, kk, rep = attacks.solve_case3(faulted_keystream(key, ZERO_IV, mask, attacks.CASE3_ROWS))
    assert a == attacks.a_sequence_from_trajectory(tr, "case3")
    assert kk.consistent_with(key)
    assert rep.extra["zero_block_survivors"] == 1


def test_case3_partial_key_soundness():
    rng = random.Random(8)
    triggered = 0
    for _ in range(200):
        key = Key.random(rng)
        pl = rng.randint(1, 66)
        extra = {93} if rng.random() < 0.3 else set()
        mask = FaultMask(frozenset({pl} | extra))
        a = attacks.a_sequence_from_trajectory(trajectory(key, ZERO_IV, mask, 100), "case3")
        kk = attacks.case3_partial_key(a)
        assert kk.consistent_with(key)
        triggered += bool(kk.known)
    assert triggered > 0


def test_case3_partial_key_rejects_other_context():
    key, mask = instance(2, 178, 243)
    a = attacks.a_sequence_from_trajectory(trajectory(key, ZERO_IV, mask, 100), "case2")
    with pytest.raises(ValueError):
        attacks.case3_partial_key(a)


# -- Cases 4 to 6


def test_structural_reports():
    r4 = attacks.structural_report(CaseLabel.CASE4)
    assert (r4.width, r4.reversible, r4.iv_invariant_bits) == (273, True, (70,))
    r6 = attacks.structural_report(CaseLabel.CASE6)
    assert (r6.width, r6.reversible, r6.iv_invariant_bits) == (287, False, (79, 80))
    with pytest.raises(ValueError):
        attacks.structural_report(CaseLabel.CASE7)
