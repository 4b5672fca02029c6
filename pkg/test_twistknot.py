"""
Test the twist-knot sequences, the published recursions and the q = 1 checks
"""
import json
import os
import shutil
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app.core import telescope, twistknot
from app.core.config import settings
from app.core.errors import AJCheckError, ConventionError, DomainError, SearchExhaustedError, UnsupportedKnotError
from app.core.exactfield import QXY, Q, X, QPoly
from app.core.expressions import shadow_ring
from app.core.fixtures import DEFAULT_FIXTURE_DIR, load_fixture
from app.core.oreops import InhomRec, OreOp, normalize_rec
from app.core.telescope import residuals
from app.core.twistknot import (
    _step_coefficients,
    annihilation_check,
    check_AJ,
    colored_jones,
    compare_with_fixture,
    cyclotomic_kernel,
    derive,
    expected_order,
    hoste_shanahan_check,
    jhat,
    jhat_recursion,
    kernel_value,
    meridian_squared,
    resolve_mode,
    specialize_q1,
    step_identity,
    verify,
)

FIXTURE_P = [1, -1, 2, -2, 3, -3]


class StepClock:
    """Stands in for the time module; every reading is ten seconds after the last"""

    def __init__(self):
        self.now = 0.0

    def monotonic(self):
        self.now += 10.0
        return self.now


def fixture_copy(tmp_path, p, **changes):
    """The bundled fixtures copied under tmp_path with fields of one recursion replaced"""
    target = tmp_path / "fixtures"
    shutil.copytree(DEFAULT_FIXTURE_DIR, target)
    path = target / ("thm0" if abs(p) <= 2 else "appB") / f"p{p}.json"
    data = json.loads(path.read_text())
    data.update(changes)
    path.write_text(json.dumps(data))
    return str(target)


def test_kernel_values():
    assert kernel_value(5, 0) == QPoly.one()
    assert kernel_value(2, 1) == QPoly.from_terms({-2: 1, -1: -1, 1: -1, 2: 1})
    assert kernel_value(3, 3).is_zero
    assert kernel_value(2, 5).is_zero


def test_jhat_values():
    assert jhat(1, 0) == QPoly.one()
    assert jhat(1, 1) == QPoly.monomial(2, -1)
    assert jhat(1, 2) == QPoly.monomial(5)
    assert jhat(-1, 1) == QPoly.one()


def test_colored_jones_values():
    for p in FIXTURE_P:
        assert colored_jones(p, 1) == QPoly.one()
    assert str(colored_jones(1, 2)) == "q + q^3 - q^4"


def test_sequences_reject_bad_arguments():
    with pytest.raises(UnsupportedKnotError):
        colored_jones(0, 3)
    with pytest.raises(DomainError):
        jhat(1, -1)


def test_expected_order():
    assert [expected_order(p) for p in FIXTURE_P] == [1, 2, 3, 4, 5, 6]


@pytest.mark.parametrize("p", FIXTURE_P)
def test_published_recursions_annihilate(p):
    rec = load_fixture(p)
    assert rec.order == expected_order(p)
    assert annihilation_check(p, 10, rec).passed


def test_corrupted_recursion_fails_annihilation():
    rec = load_fixture(1)
    broken = InhomRec(rec.op, rec.rhs + X)
    report = annihilation_check(1, 10, broken)
    assert not report.passed
    assert report.failing_n is not None


def test_annihilation_needs_enough_values():
    with pytest.raises(DomainError):
        annihilation_check(-1, 1, load_fixture(-1))


def test_specialize_first_twist_knot():
    LQ = shadow_ring(("L", "Q"))
    L, Qs = LQ.gens
    shadow = specialize_q1(load_fixture(1))
    assert shadow.operator == (Qs - 1) * (L + Qs ** 3)
    assert shadow.rhs == Qs ** 3 - Qs
    assert not shadow.degree_drop


def test_specialize_reports_degree_drop():
    shadow = specialize_q1(InhomRec(OreOp.from_coeffs([X, Q - 1]), QXY.zero))
    assert shadow.degree_drop


def test_aj_first_twist_knot():
    LQ = shadow_ring(("L", "Q"))
    report = check_AJ(1, load_fixture(1))
    assert report.passed
    assert report.quotient == LQ.gens[1] - 1


@pytest.mark.parametrize("p", FIXTURE_P)
def test_aj_published_recursions(p):
    assert check_AJ(p, load_fixture(p)).passed


def test_aj_mismatch_raises():
    with pytest.raises(AJCheckError):
        check_AJ(2, load_fixture(1))
    assert not check_AJ(2, load_fixture(1), strict=False).passed


def test_meridian_squared_rejects_odd_powers():
    LM = shadow_ring(("L", "M"))
    L, M = LM.gens
    with pytest.raises(ConventionError):
        meridian_squared(L + M ** 3)


def test_fixture_comparison_detects_changed_rhs():
    published = load_fixture(3)
    changed = InhomRec(published.op, published.rhs * (X + 7))
    report = compare_with_fixture(3, changed)
    assert report.method == "pointwise"
    assert not report.passed
    assert any(point["match"] == "false" for point in report.points)

    published = load_fixture(-2)
    assert not compare_with_fixture(-2, InhomRec(published.op, published.rhs * (X + 7))).passed


def test_fixture_self_comparison():
    assert compare_with_fixture(2, load_fixture(2)).method == "structural"
    assert compare_with_fixture(2, load_fixture(2)).passed
    pointwise = compare_with_fixture(3, load_fixture(3))
    assert pointwise.method == "pointwise"
    assert pointwise.passed
    assert not compare_with_fixture(1, load_fixture(-1)).passed


def test_auto_mode_routing():
    assert resolve_mode(1, "auto") == "symbolic"
    for p in FIXTURE_P + [4, -4]:
        assert resolve_mode(p, "auto") == "symbolic"
    with pytest.raises(DomainError):
        resolve_mode(1, "guess")


def test_auto_mode_routing_with_lower_limit(monkeypatch):
    monkeypatch.setattr(settings, "SYMBOLIC_P_LIMIT", 2)
    assert resolve_mode(2, "auto") == "symbolic"
    assert resolve_mode(-3, "auto") == "pointwise"
    assert resolve_mode(4, "auto") == "symbolic"


def test_pointwise_certifies_operator_and_rhs():
    result = derive(1, "pointwise")
    assert result.pointwise
    assert result.rec == normalize_rec(load_fixture(1))
    assert len(result.points) == settings.POINTWISE_POINTS
    assert result.boundary_sign in (-1, 1)
    assert len(result.to_json()["certified_points"]) == settings.POINTWISE_POINTS
    with pytest.raises(DomainError):
        residuals(result, cyclotomic_kernel(), jhat_recursion(1))


def test_pointwise_rejects_changed_rhs(tmp_path):
    assert derive(1, "pointwise").pointwise
    changed = fixture_copy(tmp_path, 1, rhs="(q^(2*n+1)-1)*q^n*(q^n+7)")
    with pytest.raises(SearchExhaustedError) as info:
        derive(1, "pointwise", directory=changed)
    assert "rhs" in info.value.message


def test_pointwise_rejects_changed_operator(tmp_path):
    published = json.loads((DEFAULT_FIXTURE_DIR / "thm0" / "p-1.json").read_text())["operator"]
    changed = fixture_copy(tmp_path, -1, operator=published.replace("(q^n-1)", "(q^n-2)", 1))
    with pytest.raises(SearchExhaustedError):
        derive(-1, "pointwise", directory=changed)


def test_pointwise_verify_uses_given_directory(tmp_path):
    changed = fixture_copy(tmp_path, 1, rhs="(q^(2*n+1)-1)*q^n*(q^n+7)")
    assert verify(1, 8, "pointwise").fixture.method == "certified"
    with pytest.raises(SearchExhaustedError):
        verify(1, 8, "pointwise", directory=changed)


def test_step_identity_on_zero():
    c0, c1 = _step_coefficients()
    zero = c0.ring.zero
    assert step_identity([zero, zero, zero], c0, c1, True)
    assert not step_identity([c0.ring.one, zero, zero], c0, c1, True)


def test_step_check_needs_one_side():
    with pytest.raises(DomainError):
        hoste_shanahan_check(-1)


def test_step_check_records_unavailable_recursions(monkeypatch):
    def exhausted(*args, **kwargs):
        raise SearchExhaustedError("no recursion within the bounds")

    monkeypatch.setattr(twistknot, "noncomm_A", exhausted)
    report = hoste_shanahan_check(1)
    assert report.errors
    assert "no recursion within the bounds" in report.errors[0]
    assert len(report.tried) == 4
    assert all(reading.startswith("A-polynomial") for reading in report.tried)
    assert report.to_dict()["errors"] == report.errors


def test_verify_reports_exhausted_search(monkeypatch):
    monkeypatch.setattr(settings, "SEARCH_BUDGET_SECONDS", 5.0)
    monkeypatch.setattr(telescope, "time", StepClock())
    report = verify(4)
    assert report.status == "search-exhausted"
    assert not report.passed
    assert report.order is None
    assert report.to_dict()["search_exhausted"]["message"]


def test_verify_published_knot_raises_on_exhausted_search(monkeypatch):
    def exhausted(*args, **kwargs):
        raise SearchExhaustedError("no recursion within the bounds")

    monkeypatch.setattr(twistknot, "derive", exhausted)
    with pytest.raises(SearchExhaustedError):
        verify(-2)


@pytest.mark.parametrize("p", [1, -1])
def test_verify_small_p(p):
    report = verify(p, 8, "symbolic")
    assert report.passed
    assert report.order == expected_order(p)
    assert report.to_dict()["aj"]["passed"]
    assert report.to_dict()["annihilation"]["skipped_n"] == []
    assert report.status == "passed"


@pytest.mark.slow
@pytest.mark.parametrize("p", [2, -2, 3, -3])
def test_verify_larger_twist_knots(p):
    report = verify(p)
    assert report.mode == "symbolic"
    assert report.order == expected_order(p)
    assert report.fixture.method == ("structural" if abs(p) <= 2 else "pointwise")
    assert report.fixture.passed
    assert report.annihilation.passed
    assert report.aj.passed
    assert report.passed


@pytest.mark.slow
@pytest.mark.parametrize("p", [3, -3])
def test_verify_pointwise_third_twist_knots(p):
    report = verify(p, 10, "pointwise")
    assert report.mode == "pointwise"
    assert report.fixture.method == "certified"
    assert report.passed


@pytest.mark.slow
@pytest.mark.parametrize("p", [4, -4])
def test_verify_unpublished_knot_within_budget(monkeypatch, p):
    monkeypatch.setattr(settings, "SEARCH_BUDGET_SECONDS", 120.0)
    report = verify(p)
    assert report.status in ("passed", "search-exhausted")
    if report.status == "passed":
        assert report.annihilation.passed
        assert report.skipped == ["fixture", "aj"]


@pytest.mark.slow
def test_step_check_runs():
    report = hoste_shanahan_check(1, "pointwise")
    assert len(report.tried) == 12
    assert report.to_dict()["conjectural"]


if __name__ == "__main__":
    test_kernel_values()
    test_jhat_values()
    test_colored_jones_values()
    test_expected_order()
    for p in FIXTURE_P:
        test_published_recursions_annihilate(p)
        test_aj_published_recursions(p)
    test_specialize_first_twist_knot()
    test_aj_first_twist_knot()
    test_fixture_self_comparison()
    test_fixture_comparison_detects_changed_rhs()
    test_pointwise_certifies_operator_and_rhs()
    print("twistknot tests passed")
