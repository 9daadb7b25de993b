"""Shared field-model fixtures: charts, plane waves, curvature-linked configs."""

import numpy as np

from gafields.expr import CExpr, ZERO, Const, parse
from gafields.fields import FieldConfig
from gafields.manifold import Chart, FormField, scalar_field
from gafields.dirac import column_embed, gamma_matrices, plane_wave_spinor


def flat_minkowski_chart(lo=-1.0, hi=1.0):
    rows = [["-1", "0", "0", "0"], ["0", "-1", "0", "0"],
            ["0", "0", "-1", "0"], ["0", "0", "0", "1"]]
    return Chart([[parse(s, 4) for s in row] for row in rows],
                 [(lo, hi)] * 4)


def random_form_field(chart, rng, grades=None, pool=None):
    if pool is None:
        pool = ["x1*x2", "sin(x1)", "cos(x2)*x3", "x4^2", "x3 + 1",
                "sin(x4)*x1", "exp(0.2*x2)", "x1 - x3"]
    coeffs = {}
    for mask in range(1 << chart.dim):
        if grades is not None and bin(mask).count("1") not in grades:
            continue
        coeffs[mask] = CExpr(
            parse(pool[int(rng.integers(len(pool)))], chart.dim),
            parse(pool[int(rng.integers(len(pool)))], chart.dim))
    return FormField(chart, coeffs)


def smooth_config(rng, with_b=True):
    """Flat-background configuration with smooth psi, imaginary a, real B."""
    chart = flat_minkowski_chart()
    psi = random_form_field(chart, rng)
    a = [scalar_field(chart, CExpr(ZERO, parse(src, 4)))
         for src in ("0.3*x2", "x1*x3", "0.1*x4", "x1 + x2")]
    b = []
    for k in range(4):
        if with_b:
            coeffs = {}
            for mask in (0b0011, 0b0101, 0b1010):
                coeffs[mask] = CExpr(parse(f"0.2*x{k + 1}", 4), ZERO)
            b.append(FormField(chart, coeffs))
        else:
            b.append(FormField(chart))
    h = FormField(chart, {0b1000: CExpr.of(1.0)})
    return FieldConfig(chart, psi, a, b, h, 1.1)


def phase_cexpr(k_vec, dim=4):
    """exp(-i k_j x^j) as a complex expression."""
    theta = None
    for j, kj in enumerate(k_vec):
        if kj == 0.0:
            continue
        term = Const(float(kj)) * parse(f"x{j + 1}", dim)
        theta = term if theta is None else theta + term
    if theta is None:
        theta = ZERO
    from gafields.expr import call
    return CExpr(call("cos", theta), -1.0 * call("sin", theta))


def plane_wave_config(k_vec=(1.0, 0.0, 0.0, 2.0), chart=None):
    """Exact solution of the flat main equation from a Dirac plane wave."""
    k_vec = np.asarray(k_vec, dtype=float)
    m = float(np.sqrt(k_vec[3] ** 2 - k_vec[0] ** 2
                      - k_vec[1] ** 2 - k_vec[2] ** 2))
    rep = gamma_matrices()
    u = plane_wave_spinor(k_vec, m, rep)
    psi0 = column_embed(u, rep)
    if chart is None:
        chart = flat_minkowski_chart()
    phase = phase_cexpr(k_vec)
    coeffs = {int(mk): CExpr.of(complex(psi0.coeffs[mk])) * phase
              for mk in np.nonzero(psi0.coeffs)[0]}
    psi = FormField(chart, coeffs)
    zero = [FormField(chart) for _ in range(4)]
    h = FormField(chart, {0b1000: CExpr.of(1.0)})
    return FieldConfig(chart, psi, zero,
                       [FormField(chart) for _ in range(4)], h, m)


def curved_link_chart():
    """Sphere block times a flat (-,+) block."""
    g = [["1", "0", "0", "0"],
         ["0", "sin(x1)^2", "0", "0"],
         ["0", "0", "-1", "0"],
         ["0", "0", "0", "1"]]
    return Chart([[parse(s, 4) for s in row] for row in g],
                 [(0.5, 2.6), (0.1, 3.0), (-1.0, 1.0), (-1.0, 1.0)])


def curvature_linked_config():
    """Config whose gravitational strength matches the curvature forms at
    the chart midpoint: B_j = sum_i (x^i - p0^i) C_ij with C = -D/4."""
    chart = curved_link_chart()
    p0 = chart.midpoint()
    cd = chart.curvature(p0)
    n = chart.dim
    b = []
    for j in range(n):
        coeffs = {}
        for mask in range(1 << n):
            if bin(mask).count("1") != 2:
                continue
            expr = None
            for i in range(n):
                c = -0.25 * cd.d_forms[i][j].coeffs[mask].real
                if c == 0.0:
                    continue
                term = Const(c) * (parse(f"x{i + 1}", n) - Const(p0[i]))
                expr = term if expr is None else expr + term
            if expr is not None:
                coeffs[mask] = CExpr(expr, ZERO)
        b.append(FormField(chart, coeffs))
    psi = FormField(chart)
    a = [FormField(chart) for _ in range(n)]
    h = FormField(chart, {0b1000: CExpr.of(1.0)})
    return FieldConfig(chart, psi, a, b, h, 1.0), p0
