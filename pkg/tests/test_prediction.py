"""Tests de predictores fuertes, autómatas con salida y compiladores a martingalas."""
import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from models.schemas import Prediction, RunLengthParams
from services.martingale_service import check_fairness, run_capital, succeeds_empirically
from services.prediction_service import (
    PartialPredictor,
    PredictorFAO,
    TotalPredictor,
    check_predictability,
    check_run_bound,
    compile_martingale_partial,
    compile_martingale_total,
    constant_predictor,
    ends_with_guarded_zero_run,
    estimate_runlength_params,
    fao_run,
    report_csv,
    report_text,
    synth_runlength_fao,
)
from services.sequence_service import GeneratorSource, PeriodicSource, max_zero_run
from tests.strategies import all_strings, bounded_run_sequence, clean_runs, table_predictors
from utils.errors import SpecError

N, ZERO, ONE = Prediction.SUSPEND, Prediction.ZERO, Prediction.ONE


class TestFAO:
    def test_runs_synthesized_automaton(self):
        M = synth_runlength_fao(0, 2)
        assert fao_run(M, "00") is ONE
        assert fao_run(M, "10") is N
        assert fao_run(M, "") is M.outputs[M.start]

    def test_transition_table(self):
        M = synth_runlength_fao(0, 2)
        assert M.transitions == ((1, 0), (2, 0), (2, 0))
        assert M.outputs == (N, N, ONE)

    def test_two_state_automaton(self):
        M = synth_runlength_fao(0, 1)
        assert len(M.states) == 2
        for x in all_strings(10):
            assert (fao_run(M, x) is ONE) == x.endswith("0")

    def test_short_prefix_stays_suspended(self):
        assert fao_run(synth_runlength_fao(2, 1), "0") is N

    @pytest.mark.parametrize("m, L", [(-1, 1), (0, 0)])
    def test_invalid_parameters(self, m, L):
        with pytest.raises(ValueError):
            synth_runlength_fao(m, L)

    def test_invalid_automata(self):
        with pytest.raises(ValueError):
            PredictorFAO(transitions=((0, 1),), outputs=(N,))
        with pytest.raises(ValueError):
            PredictorFAO(transitions=((0, 0),), outputs=(N,), start=3)

    def test_text_round_trip(self):
        M = synth_runlength_fao(1, 2)
        loaded = PredictorFAO.from_text(M.to_text())
        assert loaded.transitions == M.transitions and loaded.outputs == M.outputs

    def test_text_errors(self):
        with pytest.raises(SpecError):
            PredictorFAO.from_text("start 0\n0 0 0\nout 0 N\n")
        with pytest.raises(SpecError):
            PredictorFAO.from_text("start 0\n0 0 0\n0 1 0\nout 0 X\n")

    def test_characterization_exhaustive(self):
        for m, L in itertools.product(range(4), range(1, 4)):
            M = synth_runlength_fao(m, L)
            for x in all_strings(12):
                result = fao_run(M, x)
                assert result is not ZERO
                assert (result is ONE) == ends_with_guarded_zero_run(x, m, L)

    def test_incremental_matches_direct(self):
        M = synth_runlength_fao(2, 2)
        x = "1100100011"
        assert list(M.predictions_along(x)) == [fao_run(M, x[:n]) for n in range(len(x) + 1)]


class TestCheckPredictability:
    def test_always_suspend(self):
        report = check_predictability(constant_predictor("N"), PeriodicSource("0110"), 100)
        assert report.predictions_made == 0 and report.mispredictions == [] and report.suspensions == 100

    def test_runlength_on_period_three(self):
        M = synth_runlength_fao(0, 2)
        at_99 = check_predictability(M, PeriodicSource("100"), 99)
        assert at_99.mispredictions == [] and at_99.predictions_made == 32
        at_100 = check_predictability(M, PeriodicSource("100"), 100)
        assert at_100.clean and at_100.predictions_made == 33

    def test_predict_one_on_zeros(self):
        report = check_predictability(constant_predictor("1"), PeriodicSource("0"), 5)
        assert report.mispredictions == [0, 1, 2, 3, 4]

    def test_partial_undefined(self):
        F = PartialPredictor(lambda x: None if len(x) == 3 else "N")
        report = check_predictability(F, PeriodicSource("1"), 10)
        assert report.undefined_at == 3 and report.unreached == 6 and report.suspensions == 3

    def test_horizon_precondition(self):
        with pytest.raises(ValueError):
            check_predictability(constant_predictor("N"), PeriodicSource("1"), 0)

    def test_wrappers_agree(self):
        M = synth_runlength_fao(1, 2)
        X = PeriodicSource("1001000", prefix="0000")
        total = M.as_total_predictor()
        direct = check_predictability(M, X, 200)
        assert check_predictability(total, X, 200) == direct
        assert check_predictability(total.as_partial_predictor(), X, 200) == direct
        plain = TotalPredictor(M.run)
        assert check_predictability(plain, X, 200) == direct

    def test_report_rendering(self):
        report = check_predictability(synth_runlength_fao(0, 2), PeriodicSource("100"), 100)
        assert report_csv(report) == (
            "horizon,predictions_made,suspensions,mispredictions,undefined_at,unreached\n"
            "100,33,67,,,0\n"
        )
        assert "33/100" in report_text(report, "runlength")


class TestCompiledMartingales:
    def test_suspend_everywhere_is_constant(self):
        B = compile_martingale_total(constant_predictor("N"))
        assert all(B(x) == 1 for x in all_strings(6))

    def test_always_zero(self):
        B = compile_martingale_total(constant_predictor("0"))
        assert B("000") == 8 and B("001") == 0

    def test_partial_undefined_at_root(self):
        B = compile_martingale_partial(PartialPredictor(lambda x: None))
        assert B("") == 1 and B("0") is None and B("1") is None

    def test_partial_domain_of_depth_three(self):
        B = compile_martingale_partial(PartialPredictor(lambda x: "N" if len(x) < 3 else None))
        assert all(B(x) == 1 for x in all_strings(3))
        assert B("0000") is None
        assert check_fairness(B, 6).passed

    def test_partial_single_bet(self):
        B = compile_martingale_partial(PartialPredictor(lambda x: "0" if x == "" else None))
        assert (B("0"), B("1")) == (2, 0)
        assert B("00") is None and B("10") is None

    def test_total_rejects_partial(self):
        with pytest.raises(ValueError):
            compile_martingale_total(PartialPredictor(lambda x: "N"))

    @settings(max_examples=200)
    @given(table_predictors(depth=10))
    def test_fairness_of_random_predictors(self, F):
        assert check_fairness(compile_martingale_total(F), 10).passed

    @settings(max_examples=100)
    @given(clean_runs(length=64))
    def test_capital_identity(self, case):
        x, F, commits = case
        B = compile_martingale_total(F)
        trace = run_capital(B, GeneratorSource(x), 64)
        made = 0
        for n, capital in enumerate(trace.values):
            assert capital == 2 ** made
            if n < 64 and F(x[:n]) is not N:
                made += 1
        assert made == commits

    def test_misprediction_zeroes_capital(self):
        for x in all_strings(12):
            for wrong_at in range(len(x)):
                table = {x[:wrong_at]: ONE if x[wrong_at] == "0" else ZERO}
                F = TotalPredictor(lambda y, t=table: t.get(y, N))
                values = compile_martingale_total(F).trajectory(x)
                assert values[:wrong_at + 1] == [1] * (wrong_at + 1)
                assert all(v == 0 for v in values[wrong_at + 1:])

    def test_automaton_compiles_directly(self):
        B = compile_martingale_total(synth_runlength_fao(0, 2))
        assert B("") == 1 and B("0") == 1 and B("00") == 1
        assert B("001") == 2 and B("000") == 0
        assert check_fairness(B, 8).passed

    def test_long_trajectory_beyond_cache(self):
        B = compile_martingale_total(synth_runlength_fao(0, 2))
        x = PeriodicSource("100").prefix(99)
        assert B(x) == 2 ** 32
        assert run_capital(B, PeriodicSource("100"), 100).final == 2 ** 33

    def test_runlength_reaches_threshold(self):
        x, guaranteed = bounded_run_sequence(3, 2, 400, seed=7)
        B = compile_martingale_total(synth_runlength_fao(3, 2))
        observation = succeeds_empirically(B, GeneratorSource(x), 2 ** 20, 400)
        assert guaranteed >= 20 and observation.reached


class TestSoundness:
    def test_bounded_run_sequences(self):
        horizon = 10_000
        for seed in range(1000):
            m, L = seed % 5, 1 + seed % 3
            x, guaranteed = bounded_run_sequence(m, L, horizon, seed)
            report = check_predictability(synth_runlength_fao(m, L), GeneratorSource(x), horizon)
            assert report.mispredictions == []
            assert report.predictions_made >= guaranteed

    def test_generator_counts_forced_blocks(self):
        # bloques de a lo sumo L+3 bits: al menos un bloque forzado cada 3(L+3)
        x, guaranteed = bounded_run_sequence(2, 3, 300, seed=1)
        assert len(x) == 301
        assert guaranteed >= 300 // 18 - 1
        assert max_zero_run(x[3:]) <= 3


class TestEstimate:
    def test_period_three(self):
        x = PeriodicSource("100").prefix(60)
        assert estimate_runlength_params(x, Fraction(1, 2)) == RunLengthParams(m=0, L=2)

    def test_long_run_outside_tail(self):
        x = "0000" + PeriodicSource("10").prefix(40)
        assert estimate_runlength_params(x, Fraction(1, 2)) == RunLengthParams(m=4, L=1)

    @given(st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)]))
    def test_no_zeros(self, fraction):
        assert estimate_runlength_params("1111", fraction) is None

    def test_tail_fraction_range(self):
        with pytest.raises(ValueError):
            estimate_runlength_params("1010", Fraction(0))


class TestRunBound:
    def test_not_violated(self):
        verdict = check_run_bound(PeriodicSource("100"), 3, 300)
        assert not verdict.violated and verdict.horizon == 300

    def test_violated_position(self):
        verdict = check_run_bound(PeriodicSource("0"), 2, 10)
        assert verdict.violated and verdict.position == 2

    def test_ones(self):
        assert not check_run_bound(PeriodicSource("1"), 1, 50).violated

    def test_horizon_precondition(self):
        with pytest.raises(ValueError):
            check_run_bound(PeriodicSource("1"), 5, 4)
