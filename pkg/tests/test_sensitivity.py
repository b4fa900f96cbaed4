import math

import numpy as np
import pytest

from dpensemble.constants import UnitError
from dpensemble.detector import DetectorSpec
from dpensemble.sensitivity import (
    ISOTROPIC_COS_THETA,
    REF_CHI,
    ScanPlan,
    ScanWarning,
    SensitivityQuery,
    chi_scaled_form,
    chi_sensitivity,
    confidence,
    exclusion_curve,
    plan_scan,
    reconcile_duration,
    shot_counts,
)

TWO_PI = 2 * math.pi
REF_DET = DetectorSpec(omega_eg=TWO_PI * 1e9, ensemble_size=100_000)


def chi(p=1e-4, logp=-math.inf, det=REF_DET, tau=1e-4, rho=0.45, cos_theta=1.0):
    return chi_sensitivity(SensitivityQuery(p, logp, det, tau, rho, cos_theta))


def test_reference_point():
    r = chi()
    assert r.excess and r.chi == pytest.approx(1.075e-12, rel=5e-3)
    assert chi_scaled_form(1e-4, 1e5, 1e-4, TWO_PI * 1e9, mass_mev=0.51) == pytest.approx(REF_CHI, rel=1e-15)


def test_scalings():
    base = chi().chi
    assert chi(det=REF_DET.with_size(400_000)).chi == pytest.approx(base / 2, rel=1e-14)
    assert chi(tau=2e-4).chi == pytest.approx(base / 2, rel=1e-14)
    assert chi(p=4e-4).chi == pytest.approx(2 * base, rel=1e-14)
    assert chi(cos_theta=-0.5).chi == pytest.approx(2 * base, rel=1e-14)
    assert chi_scaled_form(1e-4, 1e7, 1e-4, TWO_PI * 1e9, mass_mev=0.51) == pytest.approx(1.075e-13, rel=1e-14)


def test_no_excess_is_a_result():
    r = chi(p=1e-9, logp=-8.0)
    assert not r.excess and r.chi is None and math.isnan(float(r))
    assert not chi(p=1e-8, logp=-8.0).excess


def test_query_validation():
    for kw in (dict(p=1.5), dict(tau=0.0), dict(rho=0.0), dict(cos_theta=0.0)):
        with pytest.raises(UnitError):
            chi(**kw)
    with pytest.raises(UnitError):
        chi_scaled_form(0.0, 1e5, 1e-4, 1e9)


def test_mm_point_order():
    c = chi_scaled_form(1e-4, 1e8, 1e-5, TWO_PI * 160e9)
    assert 1e-12 <= c <= 1e-11


def test_confidence():
    c = confidence(1.645 * 10, 100)
    assert c.level == pytest.approx(0.95, abs=1e-3) and not c.passes_95
    assert confidence(1.6451 * 10, 100).passes_95
    z = confidence(0.0, 100)
    assert z.level == 0.5 and not z.passes_95
    d = confidence(5.0, 0.0)
    assert d.degenerate and d.passes_95
    assert not confidence(0.0, 0.0).passes_95
    s, b = shot_counts(10_000, 1e-4, 1.4e-9)
    assert confidence(s, b).significance == pytest.approx(2.7e2, rel=0.02)
    with pytest.raises(UnitError):
        confidence(-1.0, 1.0)


def test_plans():
    cm = plan_scan(ScanPlan(4.5e9, 6.5e9, 10.0, bandwidth=5.5e3))
    assert cm.points == 363_637 and cm.total_days == pytest.approx(42.1, abs=0.05)
    mm = plan_scan(ScanPlan(120e9, 200e9, 100.0, bandwidth=1.6e6, tau=1e-5))
    assert mm.points == 50_000 and mm.total_days == pytest.approx(57.9, abs=0.05)
    twice = plan_scan(ScanPlan(4.5e9, 6.5e9, 20.0, bandwidth=5.5e3))
    assert twice.total_time == 2 * cm.total_time
    q = ScanPlan(4.5e9, 6.5e9, 10.0, quality_factor=1e6)
    assert q.point_bandwidth == pytest.approx(5.5e3)


def test_plan_warnings_and_errors():
    with pytest.warns(ScanWarning):
        s = plan_scan(ScanPlan(4.5e9, 6.5e9, 0.5, bandwidth=5.5e3))
    assert s.notes
    for kw in (dict(f_lo=2.0, f_hi=1.0), dict(dwell=0.0), dict(bandwidth=None)):
        base = dict(f_lo=1.0, f_hi=2.0, dwell=1.0, bandwidth=0.1) | kw
        with pytest.raises(UnitError):
            ScanPlan(**base)


def test_reconcile():
    ok = reconcile_duration(ScanPlan(4.5e9, 6.5e9, 10.0, bandwidth=5.5e3), 42)
    assert ok["consistent"] and "note" not in ok
    off = reconcile_duration(ScanPlan(120e9, 200e9, 10.0, bandwidth=1.6e6, tau=1e-5), 58)
    assert not off["consistent"] and "100 s" in off["note"]
    assert off["dwell_for_quote"] == pytest.approx(100.2, abs=0.05)


def test_exclusion_curves():
    det = DetectorSpec(mode="y")
    c = exclusion_curve(det, (4.5e9, 6.5e9), 1e-4, 1e-4, n_atoms=10**8, points=41, cos_theta=1.0)
    lo, hi = c.envelope
    assert 1e-14 <= lo <= hi <= 1e-13
    assert np.all(np.diff(c.chi) > 0)
    assert c.cos_theta == 1.0 and c.n_atoms == 10**8
    iso = exclusion_curve(det, (4.5e9, 6.5e9), 1e-4, 1e-4, n_atoms=10**8, points=41)
    assert iso.cos_theta == ISOTROPIC_COS_THETA
    np.testing.assert_allclose(iso.chi, c.chi * math.sqrt(3), rtol=1e-12)
    rows = list(c.rows())
    assert rows[0][0] == pytest.approx(18.61, rel=1e-4) and rows[0][2:] == (10**8, 1e-4, 1e-4, 10.0)
    with pytest.raises(UnitError):
        exclusion_curve(det, (100e9, 120e9), 1e-4, 1e-4)


def test_exclusion_no_excess_rows_are_nan():
    det = DetectorSpec(mode="y", temperature=1.0)
    c = exclusion_curve(det, (4.5e9, 6.5e9), 1e-9, 1e-4, n_atoms=10**8, points=5)
    assert np.all(np.isnan(c.chi))
