"""Tests for the pure bound calculators."""

import random

import pytest

from zerosum.arith import INFINITE
from zerosum.bounds import (
    BoundConsistencyError,
    BoundError,
    KnownValues,
    collect_bounds,
    cpr_upper,
    delta_upper,
    e2g_bounds,
    e2g_d0_bounds,
    e2g_d2_upper,
    e2g_kd_upper,
    e2g_s2m_upper,
    e2g_split_upper,
    elb_lower,
    evaluate_rule,
    inductive_ub,
    k_times_d,
    kd_upper,
    lower_direct_sum,
    lower_dstar,
    lower_max_length,
    remark_ub,
    s_le_from_extension,
    step_append_lower,
    step_ub,
    ub_recursion,
)
from zerosum.gf2 import SmallRankEngine
from zerosum.groups import make_group

C2 = make_group((2,))
C23 = make_group((2, 2, 2))
C24 = make_group((2, 2, 2, 2))
C25 = make_group((2, 2, 2, 2, 2))
C33 = make_group((3, 3, 3))
C32 = make_group((3, 3))


class TestRecursion:
    def test_empty_level_list_gives_k_times_d(self):
        assert ub_recursion(C23, [], [], 4, 3).value == 12
        assert k_times_d(3, 4).value == 12

    def test_rank3_two_blocks(self):
        rep = ub_recursion(C23, [2], [8], 4, 2)
        assert rep.value == 7

    def test_forced_count_below_first_threshold(self):
        # m below the threshold leaves only the final coarse layer
        assert lower_max_length([2], [8], 4, 6) == 2
        assert lower_max_length([2], [8], 4, 4) == 1

    def test_forced_count_non_decreasing(self):
        values = [lower_max_length([2, 4], [32, 9], 6, m) for m in range(0, 40)]
        assert values == sorted(values)

    def test_infinite_threshold_rejected(self):
        with pytest.raises(BoundError):
            ub_recursion(C23, [2], [INFINITE], 4, 2)

    def test_levels_must_increase(self):
        with pytest.raises(BoundError):
            ub_recursion(C23, [2, 2], [8, 8], 4, 2)

    def test_level_range_checked(self):
        with pytest.raises(BoundError):
            ub_recursion(C23, [1], [8], 4, 2)


class TestRemark:
    def test_rank4_example(self):
        assert remark_ub(C24, 3, 2, 16, 5).value == 18

    def test_k1_collapses_to_max(self):
        rep = remark_ub(C24, 1, 2, 16, 5)
        assert rep.value == max(5, 16 - 2) == 14
        assert rep.value >= 5

    def test_rank2_sharp_shape(self):
        # p = 3, r = 2: thread the extension bound s_le(3) <= 7 into the
        # one-long-block cap; it meets the layered lower bound exactly
        ext = s_le_from_extension(3, 7, 5)
        assert ext.input_value("m") == 3
        rep = remark_ub(C32, 2, 3, ext.value, 5)
        assert rep.value == 8
        assert lower_dstar(C32, 2).value == 8
        assert cpr_upper(3, 2, 2, 1).value == 8

    def test_level_outside_range_rejected(self):
        with pytest.raises(BoundError):
            remark_ub(C24, 2, 1, 16, 5)
        with pytest.raises(BoundError):
            remark_ub(C24, 2, 5, 16, 5)

    def test_cyclic_degenerate_range_allowed(self):
        # exponent == D leaves no room below D; the level pins to the exponent
        rep = remark_ub(make_group((5,)), 2, 5, 5, 5)
        assert rep.value == 5 + max(5, 0) == 10


class TestStep:
    def test_upper_step(self):
        assert step_ub(6, 4, 9).value == max(10, 8) == 10

    def test_lower_step(self):
        assert step_append_lower(6).value == 8


class TestExtension:
    def test_rank4_through_doubling(self):
        rep = s_le_from_extension(2, 6, 5)
        assert rep.input_value("m") == 4
        assert rep.value == 6

    def test_n1_degenerates_to_davenport(self):
        rep = s_le_from_extension(1, 5, 5)
        assert rep.input_value("m") == 5
        assert rep.value == 5


class TestHomogeneous:
    def test_p2_r4(self):
        assert cpr_upper(2, 4, 2, 2).value == 9

    def test_p3_r2(self):
        assert cpr_upper(3, 2, 1, 1).value == 5

    def test_precondition_rejected(self):
        with pytest.raises(BoundError):
            cpr_upper(2, 8, 1, 1)


class TestInductive:
    def test_table_form(self):
        # push through a rank-2 summand of the rank-4 group
        eng2_d1, eng2_d3 = 3, 7
        rep = inductive_ub(eng2_d1, quotient_dk=eng2_d3)
        assert rep.value == 7

    def test_closed_form(self):
        rep = inductive_ub(3, ell=2, D_quot=3, s_quot=4)
        assert rep.value == 2 * 2 + max(3, 2) == 7

    def test_missing_inputs_rejected(self):
        with pytest.raises(BoundError):
            inductive_ub(3)


class TestLowerBounds:
    def test_direct_sum(self):
        assert lower_direct_sum(4, 4).value == 7

    def test_dstar_rank5(self):
        assert lower_dstar(C25, 2).value == 8

    def test_enriched_values(self):
        assert elb_lower(C24, 3, 1, 2).value == 8
        assert elb_lower(make_group((2,) * 6), 4, 1, 2).value == 11
        assert elb_lower(C25, 3, 1, 2).value == 9
        assert elb_lower(C33, 2, 1, 2).value == 10

    def test_enriched_odd_factor_adds_one(self):
        rep = elb_lower(C33, 2, 1, 2)
        assert rep.input_value("delta") == 1

    def test_enriched_preconditions(self):
        with pytest.raises(BoundError):
            elb_lower(C24, 1, 1, 2)
        with pytest.raises(BoundError):
            elb_lower(C24, 3, 1, 1)
        with pytest.raises(BoundError):
            elb_lower(C24, 4, 2, 2)  # 6 pair patterns, 3 positions


class TestBigIntegerBounds:
    def test_delta_order2_vacuous(self):
        rep = delta_upper(C2)
        assert rep.value == 4**7
        assert "vacuous" in rep.note

    def test_delta_order8(self):
        rep = delta_upper(C23)
        assert rep.value == 16**25
        assert isinstance(rep.value, int)

    def test_kd_crude(self):
        assert kd_upper(C23).value == 16**34

    def test_kd_refined(self):
        rep = kd_upper(C23, delta_val=2, atoms_count=100, eta_val=8, d_minus=3)
        assert rep.value == 2 * 2 * 100 + 8 - 3

    def test_kd_partial_inputs_rejected(self):
        with pytest.raises(BoundError):
            kd_upper(C23, delta_val=2)


class TestElementary2Group:
    def test_two_block_cap(self):
        assert e2g_d2_upper(5).value == 10
        assert e2g_d2_upper(4).value == 8
        assert e2g_d2_upper(6).value == 11

    def test_counting_threshold(self):
        assert e2g_s2m_upper(5, 2).value == 9
        assert e2g_s2m_upper(4, 2).value == 7

    def test_counting_threshold_root_is_exact(self):
        rep = e2g_s2m_upper(10, 3)
        u = rep.input_value("root")
        assert u**3 >= 6 * 2**10 > (u - 1) ** 3

    def test_split(self):
        assert e2g_split_upper(2, 3, 9).value == 11

    def test_offset_bracket(self):
        lo, hi = e2g_d0_bounds(5)
        assert (lo.value, hi.value) == (11, 16)
        lo4, hi4 = e2g_d0_bounds(4)
        assert (lo4.value, hi4.value) == (5, 9)

    def test_onset_cap(self):
        assert e2g_kd_upper(5).value == 10
        assert e2g_kd_upper(3).value == 2

    def test_family_report(self):
        reps = e2g_bounds(5, 2)
        rules = {r.rule_id for r in reps}
        assert "ub.e2g_d2" in rules and "ub.e2g_kd" in rules


class TestEvaluateRule:
    def test_round_trip_every_rule(self):
        reports = [
            k_times_d(3, 4),
            ub_recursion(C23, [2], [8], 4, 2),
            remark_ub(C24, 3, 2, 16, 5),
            step_ub(6, 4, 9),
            s_le_from_extension(2, 6, 5),
            cpr_upper(2, 4, 2, 2),
            inductive_ub(3, quotient_dk=7),
            inductive_ub(3, ell=2, D_quot=3, s_quot=4),
            delta_upper(C23),
            kd_upper(C23),
            kd_upper(C23, delta_val=2, atoms_count=100, eta_val=8, d_minus=3),
            lower_direct_sum(4, 4),
            lower_dstar(C25, 2),
            elb_lower(C25, 3, 1, 2),
            step_append_lower(6),
            e2g_d2_upper(5),
            e2g_s2m_upper(5, 2),
            e2g_split_upper(2, 3, 9),
            e2g_d0_bounds(5)[0],
            e2g_d0_bounds(5)[1],
            e2g_kd_upper(5),
        ]
        for rep in reports:
            plain = {name: iv.value for name, iv in rep.inputs}
            assert evaluate_rule(rep.rule_id, plain) == rep.value, rep.rule_id

    def test_unknown_rule_rejected(self):
        with pytest.raises(BoundError):
            evaluate_rule("search.sweep", {})

    def test_json_shape(self):
        rep = elb_lower(C25, 3, 1, 2)
        blob = rep.to_json()
        assert blob["rule"] == "lb.elb"
        assert blob["inputs"]["k"]["provenance"] == "supplied"
        assert blob["value"] == 9


# exact tables used for sandwich checks: engine results for small rank,
# the layered formula for cyclic groups and for rank 2 at p = 3
RANK5_EXACT = {1: (6, 6), 2: (10, 10), 3: (13, 14), 4: (16, 17), 5: (19, 19),
               6: (21, 21), 7: (23, 23), 8: (26, 26), 9: (28, 28), 10: (31, 31)}

RANK5_S_LE = {2: 32, 3: 17, 4: 9}


class TestConsistency:
    def test_rank5_two_blocks_sandwich(self):
        reps = collect_bounds(C25, 2, KnownValues(D=6, s_le=RANK5_S_LE))
        lowers = [r.value for r in reps if r.direction == "lower" and r.constant == "D_k"]
        uppers = [r.value for r in reps if r.direction == "upper" and r.constant == "D_k"]
        assert max(lowers) == 9
        assert min(uppers) == 10

    def test_rank5_exact_values_inside_all_rules(self):
        for k, (lo_exact, hi_exact) in RANK5_EXACT.items():
            reps = collect_bounds(C25, k, KnownValues(D=6, s_le=RANK5_S_LE))
            lowers = [r.value for r in reps if r.direction == "lower" and r.constant == "D_k"]
            uppers = [r.value for r in reps if r.direction == "upper" and r.constant == "D_k"]
            assert max(lowers) <= lo_exact
            assert hi_exact <= min(uppers)

    def test_small_rank_engine_values_inside_all_rules(self):
        for r, s_le in ((3, {2: 8}), (4, {2: 16, 4: 6})):
            eng = SmallRankEngine(r)
            G = make_group((2,) * r)
            for k in range(1, 6):
                reps = collect_bounds(G, k, KnownValues(D=r + 1, s_le=s_le))
                lowers = [x.value for x in reps if x.direction == "lower" and x.constant == "D_k"]
                uppers = [x.value for x in reps if x.direction == "upper" and x.constant == "D_k"]
                assert max(lowers) <= eng.dk(k) <= min(uppers), (r, k)

    def test_cyclic_rules_pin_exact_value(self):
        for n in (2, 3, 5, 8, 12):
            G = make_group((n,))
            for k in (1, 2, 3):
                reps = collect_bounds(G, k, KnownValues(D=n, s_le={n: n}))
                lowers = [x.value for x in reps if x.direction == "lower" and x.constant == "D_k"]
                uppers = [x.value for x in reps if x.direction == "upper" and x.constant == "D_k"]
                assert max(lowers) == k * n == min(uppers)

    def test_rank2_p3_rules_pin_exact_value(self):
        for k in (1, 2, 3, 4):
            reps = collect_bounds(C32, k, KnownValues(D=5, s_le={3: 9}))
            lowers = [x.value for x in reps if x.direction == "lower" and x.constant == "D_k"]
            uppers = [x.value for x in reps if x.direction == "upper" and x.constant == "D_k"]
            assert max(lowers) == 3 * k + 2 == min(uppers)

    def test_inconsistent_inputs_abort(self):
        with pytest.raises(BoundConsistencyError):
            collect_bounds(C25, 2, KnownValues(D=2, s_le={2: 32}))


class TestRecursionMatchesSingleBlockCap:
    # Known values (D, threshold at the exponent) for a pool of groups.
    POOL = [
        ((2, 2), 3, 4),
        ((2, 2, 2), 4, 8),
        ((2, 2, 2, 2), 5, 16),
        ((3, 3), 5, 7),
        ((2,), 2, 2),
        ((3,), 3, 3),
        ((4,), 4, 4),
        ((5,), 5, 5),
        ((6,), 6, 6),
        ((7,), 7, 7),
        ((8,), 8, 8),
        ((9,), 9, 9),
    ]

    def test_single_level_recursion_reproduces_single_block_cap(self):
        # Stated relation: with one level at the exponent the recursion
        # and the one-long-block cap agree. This fails: for the rank-3
        # group of exponent 2 at k=2 the recursion yields 7 while the
        # one-long-block cap yields 8. The recursion is strictly finer.
        rng = random.Random(31415)
        for _ in range(100):
            factors, D, eta = rng.choice(self.POOL)
            k = rng.randint(1, 5)
            G = make_group(factors)
            exp = factors[-1]
            rec = ub_recursion(G, [exp], [eta], D, k).value
            cap = remark_ub(G, k, exp, eta, D).value
            assert rec == cap, (factors, k, rec, cap)

    def test_single_level_recursion_never_exceeds_single_block_cap(self):
        rng = random.Random(27182)
        for _ in range(100):
            factors, D, eta = rng.choice(self.POOL)
            k = rng.randint(1, 5)
            G = make_group(factors)
            exp = factors[-1]
            rec = ub_recursion(G, [exp], [eta], D, k).value
            cap = remark_ub(G, k, exp, eta, D).value
            assert rec <= cap, (factors, k, rec, cap)
