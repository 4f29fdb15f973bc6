import json

import pytest

from tensional import casebook as Cb
from tensional.errors import UnknownCase


def test_default_suite_passes():
    summary = Cb.run_all()
    failing = {r.case_id: [c.quantity for c in r.failures()] for r in summary.reports
               if not r.passed}
    assert summary.passed, failing
    assert len(summary.reports) == len(Cb.DEFAULT_SUITE)


def test_every_check_has_basis_and_reference():
    rep = Cb.run_case("hyperbolic_identity(2+sqrt(2))")
    assert rep.checks
    for c in rep.checks:
        assert c.basis in ("closed-form", "elementary", "independent")
        assert c.reference
    assert rep.verdicts["hs_tensional"] is True
    assert rep.verdicts["hm_tensional"] is False


def test_registry_covers_required_cases():
    for name in ("kelvin", "hyperbolic_identity", "euclidean_identity", "position_field",
                 "multilinear_field", "sphere", "plane", "circle", "helix", "helicoid_patch",
                 "convex_norm_square"):
        assert name in Cb.REGISTRY


@pytest.mark.parametrize("case_id, name, args", [
    ("kelvin(3,1)", "kelvin", [3, 1]),
    (" sphere(0.5, 2) ", "sphere", [0.5, 2]),
    ("plane", "plane", []),
    ("multilinear_field(x1*x2)", "multilinear_field", ["x1*x2"]),
])
def test_parse_case_id(case_id, name, args):
    assert Cb.parse_case_id(case_id) == (name, args)


def test_hyperbolic_parameter_parsed_as_expression():
    name, (p,) = Cb.parse_case_id("hyperbolic_identity(2-sqrt(2))")
    assert p == pytest.approx(0.5857864376269049)


@pytest.mark.parametrize("bad", ["nope", "kelvin(3)", "kelvin", "plane(1)"])
def test_unknown_cases(bad):
    with pytest.raises(UnknownCase):
        Cb.run_case(bad)


def test_report_serializes_deterministically():
    a = json.dumps(Cb.run_case("kelvin(4,2)").to_dict(), sort_keys=True)
    b = json.dumps(Cb.run_case("kelvin(4,2)").to_dict(), sort_keys=True)
    assert a == b


def test_nonharmonic_kelvin_hs_cases():
    for m, l in ((4, 2), (5, -2), (3, 1)):
        rep = Cb.run_case(f"kelvin({m},{l})")
        assert rep.passed
        assert rep.verdicts["nonharmonic_hs"] is True
    rep = Cb.run_case("kelvin(3,2)")
    assert rep.passed and rep.verdicts["hs_tensional"] is False


def test_multilinear_note_recorded():
    rep = Cb.run_case("multilinear_field(x1*x2+x3)")
    assert rep.passed and rep.notes
