"""
Test the gamma kernel, H(k, z) and the two routes to F(z, q)
"""
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app.core.errors import DomainError, UnsupportedKnotError
from app.core.exactfield import Q
from app.core.genfun import (
    QG,
    Z,
    closed_form_recursion_ok,
    expand,
    f_series,
    gamma,
    genfun_report,
    h_closed,
    h_closed_parts,
    h_series,
    rederive_certificate,
    series_shift,
    verify_h,
    wz_residual,
)
from app.core.twistknot import kernel_value


def test_gamma_values():
    for n in range(1, 6):
        assert gamma(n, 0) == 1 - Q ** n
        assert gamma(n, n) == 0
    assert gamma(2, 1) == (1 - Q) * (1 - Q ** 2) * (1 - Q ** 3) / Q ** 2


def test_gamma_is_scaled_kernel():
    for n in range(9):
        for k in range(n + 1):
            assert gamma(n, k) == (1 - Q ** n) * kernel_value(n, k).to_ratfun()


def test_gamma_domain():
    with pytest.raises(DomainError):
        gamma(2, 3)


def test_h_closed_at_zero():
    h = h_closed(0)
    expected = (1 - QG) / ((1 - Z) * (1 - QG * Z))
    assert h.numer * expected.denom == expected.numer * h.denom


def test_h_closed_parts_degrees():
    # (q;q)_(2k+1) over k + (k + 2) linear factors in z
    for k in range(7):
        num, den = h_closed_parts(k)
        assert num.degree(0) == 0
        assert den.degree(0) == 2 * k + 2
        assert h_closed(k).numer == num


def test_h_closed_at_k_six():
    series = expand(h_closed(6), 20)
    assert series_shift(h_series(6, 20), series) == 1


def test_h_series_head():
    series = h_series(0, 2)
    assert list(series.coeffs) == [0, 1 - Q, 1 - Q ** 2]


def test_expand_geometric():
    series = expand(1 / (1 - QG * Z), 3)
    assert list(series.coeffs) == [1, Q, Q ** 2, Q ** 3]


def test_series_offset_is_one():
    for k in range(4):
        assert series_shift(h_series(k, 8), expand(h_closed(k), 8)) == 1


def test_closed_form_recursion():
    assert closed_form_recursion_ok(4)
    assert closed_form_recursion_ok(8)


def test_wz_certificate():
    g = rederive_certificate()
    assert g is not None
    assert not wz_residual(g)


def test_verify_h():
    report = verify_h(3, 8)
    assert report.identity_ok
    assert report.delta == 1
    assert report.to_dict()["closed_form_recursion_ok"]


def test_verify_h_full_range():
    report = verify_h(6, 20)
    assert report.identity_ok
    assert report.delta == 1
    assert set(report.deltas) == set(range(7))
    assert report.closed_form_recursion_ok


@pytest.mark.parametrize("p", [1, -1, 2])
def test_generating_function_routes_agree(p):
    direct, interchanged = f_series(p, 6)
    assert direct.first_difference(interchanged) is None
    assert direct[0] == 0
    assert direct[1] == 1 - Q


@pytest.mark.parametrize("p", [1, -1])
def test_generating_function_to_z_ten(p):
    direct, interchanged = f_series(p, 10)
    assert direct.order == 10
    assert direct.first_difference(interchanged) is None


def test_generating_function_needs_knot():
    with pytest.raises(UnsupportedKnotError):
        f_series(0, 4)


def test_genfun_report():
    report = genfun_report(1, 3, 8)
    assert report.passed
    assert report.cyclotomic_equality_holds
    assert not report.printed_equality_holds
    assert report.to_dict()["series_match_up_to"] == 8


@pytest.mark.slow
def test_genfun_report_default_sizes():
    report = genfun_report(1)
    assert report.passed
    assert report.h.delta == 1
    assert report.series_match_up_to == 20


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn) and not name.startswith("test_generating_function_"):
            fn()
    for p in (1, -1, 2):
        test_generating_function_routes_agree(p)
    for p in (1, -1):
        test_generating_function_to_z_ten(p)
    test_generating_function_needs_knot()
    print("genfun tests passed")
