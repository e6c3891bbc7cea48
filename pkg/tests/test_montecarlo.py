import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyberadequacy.adequacy import lole_daily_peak, lole_hourly
from cyberadequacy.copt import build_copt
from cyberadequacy.errors import DomainError, ValidationError
from cyberadequacy.fleet import synth_profile
from cyberadequacy.montecarlo import (
    CyberScenario,
    McConfig,
    availability_series,
    estimate_lole,
    lole_histogram,
    lolp_series,
    run_replications,
    simulate_year,
)
from cyberadequacy.montecarlo._backend import load_kernel
from cyberadequacy.montecarlo._rng import replication_key, uniforms

from conftest import flat_profile, make_fleet

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def ref_mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, MASK), st.integers(0, 10**6), st.integers(0, 10**7))
def test_rng_matches_integer_reference(seed, rep, k):
    key = ref_mix64((seed + GOLDEN * (rep + 1)) & MASK)
    expect = (ref_mix64((key + GOLDEN * (k + 1)) & MASK) >> 11) / 2.0**53
    got = uniforms(replication_key(seed, rep), [k])[0]
    assert got == expect


def test_known_splitmix_vector():
    # first splitmix64 output for seed 0
    assert ref_mix64(GOLDEN) == 0xE220A8397B1DCDAF


NO_ATTACK = CyberScenario.no_attack()


def test_perfect_fleet_never_short():
    fleet = make_fleet([(100, 0.0), (50, 0.0)])
    tr = simulate_year(fleet, flat_profile(150), NO_ATTACK, seed=7)
    assert np.all(tr.hourly_available == 150.0)
    assert not tr.hourly_deficit.any()
    assert np.all(tr.hourly_online_fraction == 1.0)
    est = estimate_lole(fleet, flat_profile(150), NO_ATTACK, McConfig(replications=50))
    assert est.mean == 0.0 and est.std_error == 0.0
    assert est.histogram == ((0.0, 50),)


def test_simulate_year_deterministic():
    fleet = make_fleet([(100, 0.1), (60, 0.2)], exposed=True)
    prof = synth_profile(120, 0.6)
    sc = CyberScenario()
    a = simulate_year(fleet, prof, sc, seed=99)
    b = simulate_year(fleet, prof, sc, seed=99)
    c = simulate_year(fleet, prof, sc, seed=100)
    for name in ("hourly_available", "hourly_deficit", "hourly_online_fraction"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()
        assert getattr(a, name).shape == (8760,)
    assert a.hourly_available.tobytes() != c.hourly_available.tobytes()
    assert np.all((a.hourly_online_fraction >= 0) & (a.hourly_online_fraction <= 1))


def test_simulate_year_matches_run_replications():
    fleet = make_fleet([(100, 0.1), (60, 0.2), (30, 0.3)], exposed=True)
    prof = synth_profile(150, 0.5)
    sc = CyberScenario(window_start=100, window_hours=500, degraded_availability=0.5)
    run = run_replications(fleet, prof, sc, McConfig(replications=5, seed=11))
    traces = [simulate_year(fleet, prof, sc, seed=11, replication=r) for r in range(5)]
    assert np.array_equal(run.hour_deficit, np.sum([t.hourly_deficit for t in traces], axis=0))
    assert run.rep_deficit_hours.tolist() == [int(t.hourly_deficit.sum()) for t in traces]
    online = np.sum([t.hourly_online_fraction * 3 for t in traces], axis=0)
    assert np.array_equal(run.hour_online, np.rint(online).astype(np.int64))


def test_deficit_fraction_binomial(one_unit):
    n = 10_000
    run = run_replications(one_unit, flat_profile(50), NO_ATTACK, McConfig(replications=n, seed=3))
    frac = run.hour_deficit.sum() / (8760 * n)
    sigma = math.sqrt(0.05 * 0.95 / (8760 * n))
    assert abs(frac - 0.05) <= 3 * sigma


def test_mc_matches_analytic_three_units():
    fleet = make_fleet([(100, 0.05), (80, 0.08), (50, 0.1)])
    prof = flat_profile(140)
    analytic = lole_daily_peak(build_copt(fleet), prof).lole_days_per_year
    est = estimate_lole(fleet, prof, NO_ATTACK, McConfig(replications=10_000, seed=5))
    assert est.std_error > 0
    assert abs(est.mean - analytic) <= 3 * est.std_error


@pytest.mark.parametrize("seed", [1, 2])
def test_mc_matches_analytic_shaped_load(seed):
    fleet = make_fleet([(200, 0.05), (150, 0.05), (100, 0.05), (80, 0.05), (50, 0.05), (30, 0.05)])
    prof = synth_profile(480, 0.6)
    t = build_copt(fleet)
    run = run_replications(fleet, prof, NO_ATTACK, McConfig(replications=3000, seed=seed))
    dp = run.lole("daily_peak")
    assert abs(dp.mean - lole_daily_peak(t, prof).lole_days_per_year) <= 3 * dp.std_error
    hr = run.lole("hourly")
    assert abs(hr.mean - lole_hourly(t, prof).lole_days_per_year) <= 3 * hr.std_error
    # any-hour counts a superset of the peak-hour days
    assert np.all(run.rep_any_days >= run.rep_peak_days)


def test_single_replication_series_is_binary():
    fleet = make_fleet([(100, 0.3), (100, 0.3)])
    s = lolp_series(fleet, flat_profile(150), NO_ATTACK, McConfig(replications=1))
    assert s.shape == (8760,)
    assert set(np.unique(s).tolist()) <= {0.0, 1.0}


def test_availability_nominal_and_degraded():
    fleet = make_fleet([(100, 0.05)] * 11, exposed=True)
    n = 2000
    sc = CyberScenario(window_start=4020, window_hours=720, degraded_availability=0.88)
    series = availability_series(fleet, sc, McConfig(replications=n, seed=4380))
    inside = np.zeros(8760, dtype=bool)
    inside[4020:4740] = True
    draws_in = inside.sum() * n * 11
    draws_out = (~inside).sum() * n * 11
    assert abs(series[inside].mean() - 0.88) <= 3 * math.sqrt(0.88 * 0.12 / draws_in)
    assert abs(series[~inside].mean() - 0.95) <= 3 * math.sqrt(0.95 * 0.05 / draws_out)
    # per-hour values within 3 sigma of the hour's nominal (allow the expected few outliers)
    sig = np.where(inside, math.sqrt(0.88 * 0.12 / (n * 11)), math.sqrt(0.95 * 0.05 / (n * 11)))
    target = np.where(inside, 0.88, 0.95)
    assert np.mean(np.abs(series - target) <= 3 * sig) > 0.99
    drop = series[~inside].mean() - series[inside].mean()
    assert 0.05 <= drop <= 0.08


def test_outside_window_identical_to_no_attack():
    fleet = make_fleet([(100, 0.05), (100, 0.05), (50, 0.05)], exposed=True)
    prof = synth_profile(200, 0.6)
    cfg = McConfig(replications=300, seed=8)
    attack = run_replications(fleet, prof, CyberScenario(window_start=1000, window_hours=200), cfg)
    base = run_replications(fleet, prof, NO_ATTACK, cfg)
    out = np.ones(8760, dtype=bool)
    out[1000:1200] = False
    assert np.array_equal(attack.hour_deficit[out], base.hour_deficit[out])
    assert np.array_equal(attack.hour_online[out], base.hour_online[out])


def test_unexposed_units_ignore_window():
    fleet = make_fleet([(100, 0.05), (100, 0.05)], exposed=False)
    cfg = McConfig(replications=50, seed=1)
    a = availability_series(fleet, CyberScenario(degraded_availability=0.1), cfg)
    b = availability_series(fleet, NO_ATTACK, cfg)
    assert a.tobytes() == b.tobytes()


def test_degradation_monotone_under_crn():
    fleet = make_fleet([(100, 0.05), (100, 0.05), (80, 0.05)], exposed=True)
    prof = synth_profile(220, 0.6)
    cfg = McConfig(replications=200, seed=21)
    prev = None
    for a in (0.95, 0.9, 0.85, 0.8, 0.7):
        sc = CyberScenario(window_start=3000, window_hours=600, degraded_availability=a)
        run = run_replications(fleet, prof, sc, cfg)
        if prev is not None:
            assert np.all(run.hour_deficit >= prev.hour_deficit)
            assert np.all(run.rep_peak_days >= prev.rep_peak_days)
        prev = run


def test_attack_raises_lole_significantly():
    fleet = make_fleet([(100, 0.05)] * 6, exposed=True)
    prof = synth_profile(480, 0.6)
    cfg = McConfig(replications=2000, seed=13)
    base = estimate_lole(fleet, prof, NO_ATTACK, cfg)
    hit = estimate_lole(fleet, prof, CyberScenario(window_start=4020, window_hours=720), cfg)
    assert hit.mean - base.mean > 3 * math.hypot(hit.std_error, base.std_error)


def test_peak_hour_run_equals_full_run():
    fleet = make_fleet([(100, 0.1), (70, 0.1), (40, 0.2)], exposed=True)
    prof = synth_profile(170, 0.5)
    sc = CyberScenario()
    cfg = McConfig(replications=100, seed=17)
    full = run_replications(fleet, prof, sc, cfg).lole("daily_peak")
    sparse = estimate_lole(fleet, prof, sc, cfg)
    assert sparse.samples.tobytes() == full.samples.tobytes()


def test_backends_bit_identical():
    backend, _ = load_kernel("numba")
    if backend != "numba":
        pytest.skip("numba not installed")
    fleet = make_fleet([(100, 0.1), (70, 0.1), (40, 0.2)], exposed=True)
    prof = synth_profile(170, 0.5)
    sc = CyberScenario(degraded_availability=0.7)
    cfg = McConfig(replications=40, seed=2**63 + 5)
    a = run_replications(fleet, prof, sc, cfg, backend="numpy")
    b = run_replications(fleet, prof, sc, cfg, backend="numba")
    for name in ("hour_deficit", "hour_online", "rep_peak_days", "rep_any_days", "rep_deficit_hours"):
        assert np.array_equal(getattr(a, name), getattr(b, name)), name


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_worker_count_invariant(workers):
    fleet = make_fleet([(100, 0.1), (70, 0.1), (40, 0.2)], exposed=True)
    prof = synth_profile(170, 0.5)
    sc = CyberScenario()
    one = run_replications(fleet, prof, sc, McConfig(replications=37, seed=4))
    many = run_replications(fleet, prof, sc, McConfig(replications=37, seed=4, workers=workers))
    for name in ("hour_deficit", "hour_online", "rep_peak_days", "rep_any_days", "rep_deficit_hours"):
        assert np.array_equal(getattr(one, name), getattr(many, name)), name


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 365), min_size=1, max_size=200))
def test_histogram_counts(samples):
    hist = lole_histogram(samples)
    assert sum(c for _, c in hist) == len(samples)
    edges = [e for e, _ in hist]
    assert edges == sorted(edges)
    for s in samples:
        assert any(e <= s < e + 1 for e in edges)


def test_estimate_fields(two_units):
    est = estimate_lole(two_units, flat_profile(150), NO_ATTACK, McConfig(replications=64, seed=9))
    assert est.replications == 64 and est.seed == 9
    assert sum(c for _, c in est.histogram) == 64
    assert est.std_error >= 0
    assert est.summary()["replications"] == 64


def test_input_validation():
    with pytest.raises(ValidationError):
        McConfig(replications=0)
    with pytest.raises(ValidationError):
        McConfig(hours=100)
    with pytest.raises(ValidationError):
        CyberScenario(window_start=8000, window_hours=800)
    with pytest.raises(DomainError):
        CyberScenario(degraded_availability=1.2)
    with pytest.raises(DomainError):
        CyberScenario(delta=-0.1)
    with pytest.raises(ValueError):
        estimate_lole(make_fleet([(1, 0.1)]), flat_profile(1), NO_ATTACK, McConfig(), method="weekly")
