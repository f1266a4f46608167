import pytest

from wmdistill import bell_edp, multipartite_edp, oracle
from wmdistill.exceptions import ConfigError


def by_name(reports):
    return {r.quantity: r for r in reports}


def assert_all_pass(reports):
    bad = [(r.quantity, r.case, r.abs_error) for r in reports if not r.passed]
    assert not bad


def test_report_pass_flag():
    r = oracle.OracleReport("x", 1.0, 1.0 + 2e-12, 2e-12)
    assert not r.passed and r.as_row()["pass"] is False
    assert oracle.OracleReport("x", 1.0, 1.0, 0.0).passed


def test_bell_filter_trivial():
    reports = by_name(oracle.validate_bell_filter(0.5, 0.5, 0.0, 0.0))
    assert_all_pass(reports.values())
    assert reports["bell.P_w"].simulated == pytest.approx(1.0, abs=1e-15)


def test_bell_filter_generic():
    assert_all_pass(oracle.validate_bell_filter(0.3, 0.7, 0.2, 0.6))


def test_bell_filter_concurrence_pair():
    reports = by_name(oracle.validate_bell_filter(0.5, 0.5, 0.5, 0.5))
    assert reports["bell.C(rho_d)"].simulated == pytest.approx(0.5, abs=1e-12)
    assert reports["bell.C(rho_w)"].simulated == pytest.approx(2 / 3, abs=1e-12)


def test_two_copy_round_examples():
    pure = by_name(oracle.validate_two_copy_round(bell_edp.TwoCopyRoundParams(1.0, 1.0, 0.0)))
    assert_all_pass(pure.values())
    assert pure["two_copy.P1"].simulated == pytest.approx(0.5, abs=1e-15)
    params, _, _ = bell_edp.bell_filtered_state(bell_edp.BellScenario(0.5, 0.5))
    half = by_name(oracle.validate_two_copy_round(params))
    assert_all_pass(half.values())
    assert half["two_copy.P1"].simulated == pytest.approx(0.125, abs=1e-12)


def test_nonmax_pipeline():
    assert_all_pass(oracle.validate_nonmax_pipeline(0.4, 0.3))


def test_ghz_examples():
    pure = by_name(oracle.validate_ghz_round(0.0, 0.0))
    assert_all_pass(pure.values())
    assert pure["ghz.P111"].simulated == pytest.approx(0.5, abs=1e-15)
    noisy = by_name(oracle.validate_ghz_round(0.5, 0.5))
    assert_all_pass(noisy.values())
    assert noisy["ghz.P_w"].simulated == pytest.approx(0.234375, abs=1e-12)


def test_w_fixed_point():
    reports = by_name(oracle.validate_w_round(3, 0.4, 0.5))
    assert_all_pass(reports.values())
    assert reports["w.F_1"].simulated == pytest.approx(0.75, abs=1e-12)
    assert reports["w.p_1"].simulated == pytest.approx(0.25, abs=1e-12)


def test_w_below_threshold_improves_unfiltered():
    reports = by_name(oracle.validate_w_round(3, 0.1, 0.0))
    assert_all_pass(reports.values())
    assert reports["w.F_1"].simulated > reports["w.F_w"].simulated


@pytest.mark.parametrize("n", [2, 4, 5])
def test_w_other_sizes(n):
    assert_all_pass(oracle.validate_w_round(n, 0.15, 0.35, steps=2))


def test_w_size_guard():
    with pytest.raises(ConfigError):
        oracle.validate_w_round(6, 0.1, 0.1)
    with pytest.raises(ConfigError):
        oracle.run_all(samples=1, w_parties=[6])


def test_discarded_mass_closes():
    params, _, _ = bell_edp.bell_filtered_state(bell_edp.BellScenario(0.2, 0.6, 0.1, 0.4))
    groups = [
        by_name(oracle.validate_two_copy_round(params, second_round=False)),
        by_name(oracle.validate_ghz_round(0.3, 0.2)),
    ]
    kept_two = groups[0]["two_copy.P1"].simulated + groups[0]["two_copy.P0"].simulated
    assert kept_two + groups[0]["two_copy.P_discard"].simulated == pytest.approx(1.0, abs=1e-12)
    kept_ghz = groups[1]["ghz.P111"].simulated + groups[1]["ghz.P000"].simulated
    assert kept_ghz + groups[1]["ghz.P_discard"].simulated == pytest.approx(1.0, abs=1e-12)
    w = by_name(oracle.validate_w_round(3, 0.2, 0.3))
    assert w["w.p_1"].simulated + w["w.discard_1"].simulated == pytest.approx(1.0, abs=1e-12)


def test_seeded_run_is_reproducible():
    a = oracle.run_all(seed=7, samples=2)
    b = oracle.run_all(seed=7, samples=2)
    assert [r.case for r in a.reports] == [r.case for r in b.reports]
    assert a.passed and a.seed == 7


def test_perturbed_closed_form_is_caught(monkeypatch):
    original = multipartite_edp.w_round

    def skewed(n, f):
        out, p = original(n, f)
        return out * (1 + 1e-9), p

    monkeypatch.setattr(multipartite_edp, "w_round", skewed)
    run = oracle.run_all(samples=2)
    assert not run.passed
    assert {r.quantity for r in run.failures} >= {"w.F_1"}
