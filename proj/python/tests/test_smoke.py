import math

import pytest

import pwfield as pw


def test_normal_forms_round_trip():
    for label in pw.portrait_labels():
        c = pw.classify(pw.normal_form(label))
        assert c.in_omega0
        assert c.label == label
        assert c.stratum == pw.Stratum.Omega1
        assert c.structurally_stable()


def test_center_is_not_structurally_stable():
    c = pw.classify(pw.z0(-1, -1))
    assert c.stratum == pw.Stratum.Omega2
    assert c.ell == 0
    assert not c.structurally_stable()
    assert pw.classify(pw.counterexample_zstar(linearized=True)).omega3


def test_inline_field_and_errors():
    z = pw.inline_field("a*x - y", "x + a*y", "-x - y", "x - y", params={"a": 0.2})
    assert pw.classify(z).ell == pytest.approx(-0.8)
    assert pw.classify(pw.inline_field("1", "x", "-y", "x")).omega0_failure == "NotEquilibrium"
    with pytest.raises(pw.ParseError):
        pw.inline_field("(x", "x", "-y", "x")
    with pytest.raises(pw.CatalogError):
        pw.z0(0, -1)
    with pytest.raises(ValueError):
        pw.normal_form("FF-9")


def test_full_map_multiplier_law():
    s = pw.full_map(pw.normal_form("FF-1"), 0.1)
    assert s.ok
    assert s.value == pytest.approx(0.1 * math.exp(-2 * math.pi), rel=1e-3)
    e = pw.ell_from_map(pw.linear([0.2, -1, 1, 0.2], [-0.5, -1, 1, -0.5]), [4e-3, 2e-3, 1e-3])
    assert e["value"] == pytest.approx(-0.3, abs=1e-6)


def test_integrate_center_orbit():
    tr = pw.integrate(pw.z0(-1, -1), (0.3, 0.0), 6.5)
    kinds = [e.kind for e in tr.events]
    assert kinds == [pw.EventKind.CrossDown, pw.EventKind.CrossUp]
    assert tr.events[1].t == pytest.approx(2 * math.pi, rel=1e-8)
    assert tr.events_consistent()
    assert len(tr.points) == len(tr.t) == len(tr.regimes)


def test_polynomial_family_cycles():
    fam = pw.PolynomialFamily(a=-0.25, b=-0.25, eps=0.05, m=3)
    r = pw.run_polynomial_family(fam, grid_n=150)
    assert r.passed, r.mismatches
    xs = [c.x_star for c in r.cycles]
    assert xs == pytest.approx(fam.predicted_cycles(), abs=1e-6)
    assert [c.stability for c in r.cycles] == fam.predicted_stability()
    assert "cycle" in r.report()


def test_find_cycles_direct():
    rep = pw.find_cycles(pw.prop52(-0.25, -0.25, 2, 0.05), 0.005, 0.1, n=100)
    assert [round(c.x_star, 9) for c in rep.cycles] == [0.025, 0.05]
    assert not rep.degenerate


def test_pseudo_hopf_scan_is_one_sided():
    base = pw.theorem13_perturbation(pw.normal_form("FF-1"), eps1=0.1)
    r = pw.pseudo_hopf_scan(base, [-0.01, 0.01], window_lo=1e-8, window_hi=1.0)
    assert r.focus == pw.Stability.Stable
    counts = {o.delta: len(o.cycles) for o in r.outcomes}
    assert counts == {-0.01: 1, 0.01: 0}
    assert r.one_sided and r.passed
    with pytest.raises(pw.PreconditionError):
        pw.pseudo_hopf_scan(pw.normal_form("FF-1"), [0.01])


def test_sliding_value_is_convex():
    w, v = pw.sliding_value((1.0, -1.0), (3.0, 1.0))
    assert 0 <= w <= 1
    assert w * -1.0 + (1 - w) * 1.0 == pytest.approx(0, abs=1e-15)
    assert v == pytest.approx(w * 1.0 + (1 - w) * 3.0)


def test_module_location():
    import os

    stage = os.environ.get("PWFIELD_EXPECT_STAGE")
    if stage:
        assert os.path.realpath(pw.__file__).startswith(os.path.realpath(stage))
