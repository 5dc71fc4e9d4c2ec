import math

import numpy as np
import pytest

from kzlab.errors import BudgetError, ValidationError
from kzlab.kernels import k_w4, k_w6
from kzlab.spectral import TestFunctionSpec
from kzlab.transforms import (ScanTable, build_grid, decay_scan, phi_w4, phi_w5, phi_w6)

TF = TestFunctionSpec(3.0)


@pytest.fixture(scope="module")
def grid():
    return build_grid(TF, eta=TF.R / 2)


def test_grid_invariants(grid):
    assert grid.size > 0 and grid.symmetric
    t1, t2, t3 = (m.imag for m in grid.mu)
    assert np.allclose(t1 + t2 + t3, 0)
    assert np.allclose([m.real for m in grid.mu], 0)
    # lattice closed under the Weyl group: for every node, its swap (j, i) is present
    nodes = {tuple(r) for r in grid.ij.tolist()}
    assert all((j, i) in nodes for i, j in nodes)
    with pytest.raises(ValidationError):
        build_grid(TF, W=-1.0)
    with pytest.raises(ValidationError):
        phi_w4(1.0, TestFunctionSpec(4.0), grid)


def test_phi_w4_matches_node_sum(grid):
    y = 2.0
    direct = sum(w * k_w4(y, m, tol=None).value for w, m in zip(grid.weight, zip(*grid.mu)))
    res = phi_w4(y, TF, grid)
    assert abs(res.value - direct) <= 1e-10 * abs(direct)


def test_phi_w4_linear_in_h(grid):
    a = phi_w4(5.0, TF, grid).value
    tf2 = TF.scaled(2.0)
    b = phi_w4(5.0, tf2, build_grid(tf2, eta=TF.R / 2)).value
    assert b == 2 * a


def test_phi_w5_is_conjugate_of_phi_w4(grid):
    for y in (1.5, -20.0):
        a = phi_w4(y, TF, grid).value
        b = phi_w5(y, TF, grid).value
        assert abs(b - a.conjugate()) <= 1e-12 * abs(a)
    assert abs(phi_w4(1.5, TF, grid).value - phi_w4(-1.5, TF, grid).value) > 1e-6


def test_phi_w5_reflection_with_symmetric_centre():
    # mu0 = (a, 0, -a) is closed under negation up to a Weyl permutation
    tf = TestFunctionSpec(3.0, mu0=(3j, 0j, -3j), check_generic=False)
    g = build_grid(tf, eta=tf.R / 2)
    for y in (2.0, -7.0):
        a = phi_w5(y, tf, g).value
        b = phi_w4(-y, tf, g).value
        assert abs(a - b) <= 1e-12 * abs(b)


def test_phi_w6_plus_plus_matches_node_sum(grid):
    y1, y2 = 0.02, 0.03
    direct = sum(w * k_w6(y1, y2, m, tol=None).value for w, m in zip(grid.weight, zip(*grid.mu)))
    res = phi_w6(y1, y2, TF, grid)
    assert abs(res.value - direct) <= 1e-9 * abs(direct)


def test_phi_w6_budget(grid):
    with pytest.raises(BudgetError):
        phi_w6(0.5, -0.5, TF, grid, budget=1000)


def test_decay_scan_shapes():
    empty = decay_scan("w4", [])
    assert empty.rows == [] and empty.complete
    table = decay_scan("w4", [2.0], eta=math.sqrt(2) / 2)
    assert [r["regime"] for r in table.rows] == ["small", "large"]
    assert math.isfinite(table.ratio(2.0))
    assert math.isnan(table.ratio(5.0))
    partial = decay_scan("w4", [2.0, 3.0], eta=1.0, time_budget=0.0)
    assert not partial.complete
    with pytest.raises(ValidationError):
        decay_scan("w4", [25.0])
    with pytest.raises(ValidationError):
        decay_scan("w7", [2.0])
    assert isinstance(table, ScanTable)
