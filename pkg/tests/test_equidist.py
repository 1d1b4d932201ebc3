import math

import numpy as np
import pytest

import cubiclab as cl
from cubiclab.equidist import (
    discrepancy,
    equidist_experiment,
    erdos_turan_bound,
    linear_values_mod1,
    write_equidist_csv,
)
from cubiclab.lattice_enum import count, zero_points


def test_weyl_geometric_oracle():
    # zeros of x1^3 + x2^3 lie on the line x2 = -x1, so the sum telescopes to
    # a Dirichlet kernel with the closed form sin((2P+1) pi lam) / sin(pi lam)
    C = cl.CubicForm.diagonal([1, 1])
    Ls = cl.LinearSystem.from_rows([[math.sqrt(2), 0.0]])
    ws = cl.weyl_sum(C, Ls, [1], 5)
    lam = math.sqrt(2)
    oracle = math.sin(11 * math.pi * lam) / math.sin(math.pi * lam)
    assert ws.N == 11
    assert abs(ws.sum) == pytest.approx(abs(oracle), abs=1e-9)
    assert abs(ws.normalized) <= 1


def test_weyl_conjugation():
    C = cl.taxicab_form()
    Ls = cl.LinearSystem.from_rows([[0.7, math.sqrt(2), math.sqrt(3), math.sqrt(5)]])
    a = cl.weyl_sum(C, Ls, [2], 6)
    b = cl.weyl_sum(C, Ls, [-2], 6)
    assert b.sum == pytest.approx(a.sum.conjugate(), abs=1e-9)


def test_weyl_rejects_zero_frequency(taxicab, irr_linsys):
    with pytest.raises(ValueError):
        cl.weyl_sum(taxicab, irr_linsys, [0], 5)


def test_discrepancy_single_point():
    pts = np.full((50, 1), 0.5)
    stat = discrepancy(pts, boxes=100, seed=3)
    assert stat.value >= 0.49


def test_discrepancy_regular_grid():
    pts = (np.arange(100) / 100).reshape(-1, 1)
    stat = discrepancy(pts, boxes=500, seed=3)
    assert stat.value <= 0.02


def test_discrepancy_uniform_sample():
    rng = np.random.default_rng(12)
    pts = rng.uniform(size=(10_000, 1))
    stat = discrepancy(pts, boxes=500, seed=3)
    assert stat.value <= 0.05


def test_discrepancy_deterministic():
    pts = np.random.default_rng(5).uniform(size=(500, 2))
    a = discrepancy(pts, boxes=200, seed=17)
    b = discrepancy(pts, boxes=200, seed=17)
    assert a.value == b.value


def test_zero_count_agrees_with_lattice_module(taxicab):
    Ls = cl.LinearSystem.from_rows([[0.3, math.sqrt(2), math.sqrt(3), math.sqrt(5)]])
    ws = cl.weyl_sum(taxicab, Ls, [1], 9)
    res = count(cl.CountQuery(C=taxicab, P=9, weighted=False))
    assert ws.N == res.value


def test_erdos_turan_one_sided(taxicab, irr_linsys):
    P = 30
    mags = [abs(cl.weyl_sum(taxicab, irr_linsys, [k], P, strategy="mim").normalized)
            for k in range(1, 6)]
    pts, _ = zero_points(taxicab, P, "mim")
    vals = linear_values_mod1(irr_linsys, pts)
    stat = discrepancy(vals, boxes=500, seed=11)
    # random-box discrepancy is at most twice the star discrepancy
    assert stat.value <= 2 * erdos_turan_bound(mags)


def test_translation_invariance(taxicab):
    base = [0.41, math.sqrt(2), math.sqrt(3), math.sqrt(5)]
    shifted = [base[0] + 3, base[1] - 2, base[2], base[3] + 1]
    La = cl.LinearSystem.from_rows([base])
    Lb = cl.LinearSystem.from_rows([shifted])
    a = cl.weyl_sum(taxicab, La, [1], 7)
    b = cl.weyl_sum(taxicab, Lb, [1], 7)
    assert b.sum == pytest.approx(a.sum, abs=1e-7)
    pts, _ = zero_points(taxicab, 7, "direct")
    va = linear_values_mod1(La, pts)
    vb = linear_values_mod1(Lb, pts)
    assert np.allclose(np.minimum(np.abs(va - vb), 1 - np.abs(va - vb)), 0, atol=1e-9)


def test_experiment_table_and_csv(tmp_path, taxicab, irr_linsys):
    rows = equidist_experiment(taxicab, irr_linsys, [10, 20], [[1], [2]],
                               boxes=200, seed=11)
    assert [row.P for row in rows] == [10, 20]
    for row in rows:
        assert 0 <= row.discrepancy <= 1
        for _, mag in row.weyl:
            assert mag <= 1
        assert {k for k, _ in row.weyl} == {(1,), (2,)}
    out = tmp_path / "table.csv"
    write_equidist_csv(rows, str(out))
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("P,N,discrepancy")
    assert len(lines) == 3
