import io

import numpy as np
import pytest

import vbsense as vb
from tests.conftest import make_spec


def hand_state(hand_graph, hand_signal, **opts):
    c = vb.measure(hand_graph, hand_signal)
    return vb.init_state(hand_graph, c, oracle=hand_signal, options=vb.RecoveryOptions(**opts))


class TestInitState:
    def test_residuals_are_measurements(self, hand_graph):
        c = np.array([0.0, 5.0, 1.0])
        st = vb.init_state(hand_graph, c)
        assert st.residual_value.tolist() == [0.0, 5.0, 1.0]
        assert st.residual_degree.tolist() == [2, 2, 3]
        assert not st.verified.any()
        assert st.iteration == 0

    def test_oracle_consistency_all_zero(self, hand_graph):
        sig = vb.SignalVector(np.zeros(4))
        st = vb.init_state(hand_graph, vb.measure(hand_graph, sig), oracle=sig)
        assert np.all(np.abs(st.residual_value) == 0)
        assert st.unverified_nonzero_fraction == 0.0

    def test_random_instance_passes_invariants(self):
        spec = make_spec("x^4", "x^5", 100, 0.4)
        g, s, c = vb.sample_instance(spec, 2)
        st = vb.init_state(g, c, oracle=s)
        implied = vb.residuals_from_oracle(g, s, st.verified)
        np.testing.assert_allclose(st.residual_value, implied, rtol=1e-6)
        assert np.array_equal(st.residual_degree, g.check_degrees)

    def test_dimension_mismatch(self, hand_graph):
        with pytest.raises(vb.DimensionMismatch):
            vb.init_state(hand_graph, np.zeros(5))
        with pytest.raises(vb.DimensionMismatch):
            vb.init_state(hand_graph, np.zeros(3), oracle=np.zeros(7))


class TestVerifyAndPeel:
    def test_zero_peel_keeps_values(self, hand_graph, hand_signal):
        st = hand_state(hand_graph, hand_signal)
        before = st.residual_value.copy()
        ev = vb.verify_and_peel(st, 1, 0.0, "ZCN")
        assert ev.variable == 1 and ev.rule == "ZCN"
        np.testing.assert_array_equal(st.residual_value, before)
        assert st.residual_degree.tolist() == [1, 1, 3]

    def test_value_peel_hand_traced(self, hand_graph, hand_signal):
        st = hand_state(hand_graph, hand_signal)
        vb.verify_and_peel(st, 0, 5.0, "D1CN")
        # check 2 held 12 over {v0,v2,v3}; peeling v0=5 leaves 7, degree 2
        assert st.residual_value[2] == pytest.approx(7.0)
        assert st.residual_degree[2] == 2

    def test_peel_everything_telescopes(self, hand_graph, hand_signal):
        st = hand_state(hand_graph, hand_signal)
        for j, val in enumerate(hand_signal.values):
            vb.verify_and_peel(st, j, float(val), "D1CN")
        assert np.all(st.residual_degree == 0)
        np.testing.assert_allclose(st.effective_residuals(), 0.0, atol=1e-12)

    def test_double_verification_rejected(self, hand_graph, hand_signal):
        st = hand_state(hand_graph, hand_signal)
        vb.verify_and_peel(st, 1, 0.0, "ZCN")
        with pytest.raises(vb.AlreadyVerified):
            vb.verify_and_peel(st, 1, 0.0, "ZCN")


class TestApplyZcn:
    def test_zero_check_verifies_neighbors(self, hand_graph, hand_signal):
        st = hand_state(hand_graph, hand_signal)
        events = vb.apply_zcn(st)
        assert {(e.variable, e.value) for e in events} == {(1, 0.0), (2, 0.0)}

    def test_no_zero_checks_no_events(self, hand_graph):
        sig = vb.SignalVector(np.array([1.0, 2.0, 3.0, 4.0]))
        st = hand_state(hand_graph, sig)
        st.oracle = None
        st2 = vb.init_state(hand_graph, vb.measure(hand_graph, sig))
        assert vb.apply_zcn(st2) == []

    def test_all_zero_signal_one_pass(self):
        spec = make_spec("x^3", "x^6", 200, 0.0)
        g, s, c = vb.sample_instance(spec, 1)
        st = vb.init_state(g, c, oracle=s)
        events = vb.apply_zcn(st)
        assert len(events) == 200
        assert st.all_verified()


class TestApplyD1cn:
    def test_degree_one_check_assigns_value(self):
        # single check of degree 1 holding 2.5
        g = vb.SensingGraph(1, 1, np.array([0]), np.array([0]), np.ones(1))
        st = vb.init_state(g, np.array([2.5]))
        events = vb.apply_d1cn(st)
        assert len(events) == 1
        assert events[0].variable == 0 and events[0].value == pytest.approx(2.5)
        assert events[0].rule == "D1CN"

    def test_no_degree_one_checks(self, hand_graph, hand_signal):
        st = hand_state(hand_graph, hand_signal)
        assert vb.apply_d1cn(st) == []

    def test_chain_after_zcn(self, hand_graph, hand_signal):
        st = hand_state(hand_graph, hand_signal)
        vb.apply_zcn(st)
        events = vb.apply_d1cn(st)
        assert (events[0].variable, events[0].value) == (0, 5.0)

    def test_weighted_division(self):
        g = vb.SensingGraph(1, 1, np.array([0]), np.array([0]), np.array([2.0]))
        st = vb.init_state(g, np.array([5.0]))
        events = vb.apply_d1cn(st)
        assert events[0].value == pytest.approx(2.5)

    def test_conflicting_assignment_diagnostic(self):
        # two degree-1 checks watch the same variable but disagree
        g = vb.SensingGraph(1, 2, np.array([0, 0]), np.array([0, 1]), np.ones(2))
        st = vb.init_state(g, np.array([2.0, 3.0]))
        with pytest.raises(vb.ConflictingAssignment):
            vb.apply_d1cn(st)


class TestApplyEcn:
    def test_equal_pair_with_unique_common(self):
        # c0 = 3.7 over {v0,v1}, c1 = 3.7 over {v0,v2}, c2 distinct value
        g = vb.SensingGraph(
            3, 3, np.array([0, 1, 0, 2, 1, 2]), np.array([0, 0, 1, 1, 2, 2]), np.ones(6)
        )
        st = vb.init_state(g, np.array([3.7, 3.7, 9.9]))
        events = vb.apply_ecn(st)
        got = {(e.variable, e.value, e.rule) for e in events}
        assert (1, 0.0, "ECN-zero") in got
        assert (2, 0.0, "ECN-zero") in got
        assert (0, 3.7, "ECN-unique") in got

    def test_all_distinct_values_no_events(self, hand_graph, hand_signal):
        st = hand_state(hand_graph, hand_signal)
        st2 = vb.init_state(hand_graph, np.array([1.0, 2.0, 3.0]))
        assert vb.apply_ecn(st2) == []

    def test_equal_pair_without_common_neighbor(self):
        # c0 = 3.7 over {v0,v1}, c1 = 3.7 over {v2,v3}: all four zeroed, no rule 2
        g = vb.SensingGraph(
            4, 2, np.array([0, 1, 2, 3]), np.array([0, 0, 1, 1]), np.ones(4)
        )
        st = vb.init_state(g, np.array([3.7, 3.7]))
        events = vb.apply_ecn(st)
        assert {(e.variable, e.rule) for e in events} == {
            (0, "ECN-zero"),
            (1, "ECN-zero"),
            (2, "ECN-zero"),
            (3, "ECN-zero"),
        }

    def test_two_common_neighbors_blocks_rule_two(self):
        # c0, c1 both over {v0,v1} plus private neighbors; equal values
        g = vb.SensingGraph(
            4,
            2,
            np.array([0, 1, 2, 0, 1, 3]),
            np.array([0, 0, 0, 1, 1, 1]),
            np.ones(6),
        )
        st = vb.init_state(g, np.array([3.7, 3.7]))
        events = vb.apply_ecn(st)
        assert {(e.variable, e.rule) for e in events} == {(2, "ECN-zero"), (3, "ECN-zero")}


class TestRunSbb:
    def test_hand_instance_full_recovery(self, hand_graph, hand_signal):
        c = vb.measure(hand_graph, hand_signal)
        rep = vb.run_sbb(hand_graph, c, oracle=hand_signal)
        assert rep.success
        assert rep.stop_reason == "all_verified"
        assert rep.iterations_run == 3
        trace = [(e.rule, e.variable, e.value) for e in rep.events]
        assert trace == [
            ("ZCN", 1, 0.0),
            ("ZCN", 2, 0.0),
            ("D1CN", 0, 5.0),
            ("D1CN", 3, 7.0),
        ]

    def test_all_zero_signal(self):
        spec = make_spec("x^3", "x^6", 120, 0.0)
        g, s, c = vb.sample_instance(spec, 0)
        rep = vb.run_sbb(g, c, oracle=s)
        assert rep.success and rep.iterations_run == 1
        assert rep.stop_reason == "all_verified"
        assert rep.trajectory == [0.0]

    def test_above_threshold_stalls(self):
        spec = make_spec("x^4", "x^5", 5000, 0.48)
        g, s, c = vb.sample_instance(spec, 3)
        rep = vb.run_sbb(g, c, oracle=s)
        assert not rep.success
        assert rep.stop_reason == "stalled"
        assert rep.trajectory[-1] > 0.1

    def test_iteration_cap(self):
        spec = make_spec("x^4", "x^5", 2000, 0.40)
        g, s, c = vb.sample_instance(spec, 4)
        rep = vb.run_sbb(g, c, oracle=s, options=vb.RecoveryOptions(max_iterations=1))
        assert rep.stop_reason == "iteration_cap"
        assert rep.iterations_run == 1

    def test_determinism(self):
        spec = make_spec("0.9x^3+0.1x^13", "x^5", 1500, 0.35)
        g, s, c = vb.sample_instance(spec, 5)
        r1 = vb.run_sbb(g, c, oracle=s)
        r2 = vb.run_sbb(g, c, oracle=s)
        assert [(e.variable, e.value, e.rule) for e in r1.events] == [
            (e.variable, e.value, e.rule) for e in r2.events
        ]

    def test_trajectory_non_increasing(self):
        for seed in range(5):
            spec = make_spec("x^4", "x^5", 3000, 0.40)
            g, s, c = vb.sample_instance(spec, (9, seed))
            rep = vb.run_sbb(g, c, oracle=s)
            tr = np.asarray(rep.trajectory)
            assert np.all(np.diff(tr) <= 1e-12)

    def test_monotone_verified_growth(self):
        spec = make_spec("x^4", "x^5", 2000, 0.38)
        g, s, c = vb.sample_instance(spec, 6)
        counts = []

        def grab(state, phase):
            counts.append(state.num_verified)

        vb.run_sbb(g, c, oracle=s, instrument=grab)
        assert all(b >= a for a, b in zip(counts, counts[1:]))

    def test_success_requires_correct_values(self, hand_graph, hand_signal):
        c = vb.measure(hand_graph, hand_signal)
        wrong = vb.SignalVector(np.array([5.0, 0.0, 0.0, 6.0]))
        rep = vb.run_sbb(hand_graph, c, oracle=wrong)
        assert not rep.success  # all verified, but one value disagrees


class TestBookkeepingOracle:
    def test_incremental_matches_recomputation(self):
        for seed in range(20):
            spec = make_spec("0.9x^3+0.1x^13", "x^5", 500, 0.45)
            g, s, c = vb.sample_instance(spec, (21, seed))

            def check(state, phase):
                values, degrees = vb.recompute_residuals(g, c, state)
                np.testing.assert_allclose(
                    state.residual_value, values, rtol=1e-6, atol=1e-9
                )
                assert np.array_equal(state.residual_degree, degrees)
                implied = vb.residuals_from_oracle(g, s, state.verified)
                np.testing.assert_allclose(
                    state.effective_residuals(), implied, rtol=1e-6, atol=1e-9
                )

            vb.run_sbb(g, c, oracle=s, instrument=check)


class TestNoFalseVerification:
    def test_gaussian_runs(self):
        bad = 0
        for seed in range(100):
            spec = make_spec("x^4", "x^5", 2000, 0.40)
            g, s, c = vb.sample_instance(spec, (31, seed))
            rep = vb.run_sbb(g, c, oracle=s)
            bad += not vb.check_false_verification(rep, s)
        assert bad == 0

    def test_exact_mode_big_int_signals(self):
        opts = vb.RecoveryOptions(exact=True)
        for seed in range(30):
            spec = make_spec(
                "0.9x^3+0.1x^13",
                "x^5",
                1000,
                0.45,
                signal_model=vb.SignalModel.big_int(),
            )
            g, s, c = vb.sample_instance(spec, (41, seed))
            rep = vb.run_sbb(g, c, oracle=s, options=opts)
            assert vb.check_false_verification(rep, s)

    def test_oracle_required(self, hand_graph, hand_signal):
        c = vb.measure(hand_graph, hand_signal)
        rep = vb.run_sbb(hand_graph, c)
        with pytest.raises(vb.OracleRequired):
            vb.check_false_verification(rep, None)


class TestScheduleSensitivity:
    def test_greedy_schedule_dominates_round_schedule(self):
        """The final verified set is NOT schedule-independent: a greedy
        schedule firing the equal-check zero rule on its own verifies a
        superset on stalled instances (the round schedule realizes that
        rule only through the peel-then-zero-check cascade).  What must
        hold: greedy covers the round schedule, both agree on perfect
        recoveries, and neither ever assigns a wrong value."""
        agree = 0
        for seed in range(100):
            spec = make_spec("x^4", "x^5", 400, 0.40)
            g, s, c = vb.sample_instance(spec, (51, seed))
            rep = vb.run_sbb(g, c, oracle=s)
            prod = np.isin(np.arange(g.n), rep.events.variables)

            st = vb.init_state(g, c, oracle=s)
            while True:
                fired = len(vb.apply_d1cn(st)) + len(vb.apply_ecn(st)) + len(vb.apply_zcn(st))
                if fired == 0:
                    break
            assert np.all(prod <= st.verified), "greedy schedule lost a verification"
            assert np.all(
                np.abs(st.verified_value[st.verified] - s.values[st.verified]) <= st.value_tol
            )
            if rep.success:
                assert st.verified.all()
            agree += np.array_equal(st.verified, prod)
        # sensitivity is real but bounded: most instances agree exactly
        assert agree >= 60


class TestEventLog:
    def test_csv_export(self, hand_graph, hand_signal):
        c = vb.measure(hand_graph, hand_signal)
        rep = vb.run_sbb(hand_graph, c, oracle=hand_signal)
        buf = io.StringIO()
        rep.events.write_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "iteration,round,half_round,rule,variable,value"
        assert len(lines) == 1 + len(rep.events)
        assert lines[1].endswith("ZCN,1,0.0")

    def test_sequence_protocol(self, hand_graph, hand_signal):
        c = vb.measure(hand_graph, hand_signal)
        rep = vb.run_sbb(hand_graph, c, oracle=hand_signal)
        assert len(rep.events) == 4
        assert rep.events[-1].variable == 3
        assert [e.rule for e in rep.events[:2]] == ["ZCN", "ZCN"]

    def test_each_variable_at_most_once(self):
        spec = make_spec("0.9x^3+0.1x^13", "x^5", 1500, 0.5)
        g, s, c = vb.sample_instance(spec, 13)
        rep = vb.run_sbb(g, c, oracle=s)
        vars_seen = rep.events.variables
        assert np.unique(vars_seen).size == vars_seen.size
