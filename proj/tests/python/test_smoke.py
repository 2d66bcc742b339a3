import cmath
import math

import looppencil as lp

PI = math.pi

def zero_pencil(m: int) -> "lp.Pencil":
    return lp.Pencil([([0.0], [0.0])] * m)

def test_version():
    assert lp.__version__

def test_zero_edge_closed_form():
    pencil = zero_pencil(2)
    lam = 2.0 + 0.5j
    values = lp.integrate_edge(pencil, 0, lam)
    assert abs(values["s"] - cmath.sin(lam * PI) / lam) < 1e-10
    assert abs(values["sp"] - cmath.cos(lam * PI)) < 1e-10
    # Wronskian identity.
    wronskian = values["c"] * values["sp"] - values["cp"] * values["s"]
    assert abs(wronskian - 1.0) < 1e-10

def test_delta_closed_form():
    pencil = zero_pencil(2)
    lam = 0.7
    expected = math.sin(lam * PI) * (3.0 * math.cos(lam * PI) - 2.0) / lam
    assert abs(lp.delta(pencil, lam) - expected) < 1e-9
    assert abs(lp.dm(pencil, lam) - (2.0 * math.cos(lam * PI) - 2.0)) < 1e-9

def test_assumption_report():
    ok = lp.Pencil([([0.3], [0.0]), ([0.7], [0.0]), ([0.0], [0.0])])
    assert ok.assumption_a()["A_holds"]
    bad = zero_pencil(2)
    report = bad.assumption_a()
    assert not report["A_holds"]
    assert not report["A_ii"]

def test_betas_and_d_function():
    betas = lp.solve_betas([0.3])
    assert len(betas) == 4
    assert betas[-1] == 0.0
    for beta in betas:
        assert abs(lp.d_function([0.3], beta)) < 1e-10

def test_locate_closed_form_eigenvalues():
    pencil = zero_pencil(2)
    found = lp.locate_eigenvalues(pencil, 0.1, 1.5, 0.5)
    roots = sorted(entry["lambda"].real for entry in found["entries"])
    assert len(roots) == 2
    assert abs(roots[0] - math.acos(2.0 / 3.0) / PI) < 1e-8
    assert abs(roots[1] - 1.0) < 1e-8

def test_kernel_extraction_zero_pencil():
    kernels = lp.extract_kernels(zero_pencil(2), 10)
    for edge in kernels["edges"]:
        assert max(abs(c) for c in edge["K"]["coef"]) < 1e-10
    assert max(abs(c) for c in kernels["T"]["coef"]) < 1e-10

def test_normalization_shift():
    pencil = lp.Pencil([([0.4], [0.0]), ([1.0], [0.0])])
    shifted, shift = pencil.normalized()
    assert abs(shift - (-1.0)) < 1e-12
    assert abs(shifted.alphas()[-1]) < 1e-12

def test_sine_type_check():
    report = lp.sine_type_check([-0.5, -0.1, 0.4, 0.0])
    assert report["separated"]
    assert abs(report["separation"] - 0.2) < 1e-12

def test_edge_inverse_round_trip():
    # Higher Chebyshev coefficients sit on odd modes so the leading entries
    # are exactly the edge means.
    pencil = lp.Pencil(
        [
            ([0.35, 0.0, 0.0, 0.04], [0.0, 0.05]),
            ([0.62, 0.0, 0.0, -0.035], [0.05, 0.04]),
            ([0.0, 0.09], [0.0, 0.06]),
        ]
    )
    assert pencil.assumption_a()["A_holds"]
    result = lp.invert_edge(pencil, n_window=6, truncation=10)
    assert abs(result["alpha1"] - 0.35) < 1e-3
    assert result["sup_gap_s1"] < 5e-3
