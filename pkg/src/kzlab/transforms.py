"""Spectral integrals Phi_w4, Phi_w5, Phi_w6 of the kernels against h, and
decay scans.

The plane Re mu = 0 is parameterised by (t1, t2) = Im(mu1, mu2) and
discretised on the lattice eta (i, j). The lattice is closed under the Weyl
group (coordinate permutations of (t1, t2, -t1-t2)), so Weyl-invariant
integrands are summed over orbit representatives with multiplicities.
Grid error is |Phi(eta) - Phi(2 eta)|, using the even sublattice.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ._numeric import chunked, ordered_map, pairwise_sum
from .errors import BudgetError, ValidationError
from .kernels import (_EPS, ContourSpec, QuadratureResult, Rule, _checked, _fine_grid,
                      _log_g_tilde_terms, _signs, _w6_conv, _w6_direct, _w6_parts, path,
                      resolve_w4, resolve_w6)
from .spectral import WEYL_GROUP, TestFunctionSpec, spec_measure, test_function_h, weyl_apply

# G~ has no poles right of the pole lines, so the transforms sit further
# right than the kernel default: the analyticity strip widens and the
# trapezoid step triples.
DEFAULT_W4_CONTOUR = ContourSpec(sigma=1.0)

# Nodes where h falls below this fraction of its maximum are dropped.
PRUNE = 1e-17


@dataclass(frozen=True)
class SpectralGrid:
    """Lattice nodes on Re mu = 0 with weights spec(mu) eta^2 h(mu).

    ``ij`` are integer lattice coordinates, ``mu`` the purely imaginary
    triples (arrays of shape (n,)), ``weight`` = h * spec * eta^2.
    """

    center: tuple
    W: float
    eta: float
    ij: np.ndarray
    mu: tuple
    weight: np.ndarray
    symmetric: bool = True

    @property
    def size(self) -> int:
        return int(self.ij.shape[0])

    def nodes(self):
        from .spectral import SpectralPoint

        return [SpectralPoint((self.mu[0][k], self.mu[1][k], self.mu[2][k])) for k in range(self.size)]


def build_grid(tf: TestFunctionSpec, W: float | None = None, eta: float | None = None,
               weight=None) -> SpectralGrid:
    """Grid covering the Weyl images of the ball |mu - mu0| <= W.

    ``weight`` optionally multiplies h (e.g. h1 = h * W * V~); it receives
    the mu triple of arrays and must return an array.
    """
    R = tf.R
    W = 5 * R if W is None else float(W)
    eta = R / 8 if eta is None else float(eta)
    if W <= 0 or eta <= 0:
        raise ValidationError("W and eta must be positive")
    centres = [weyl_apply(w, tf.mu0) for w in WEYL_GROUP]
    t1 = [c[0].imag for c in centres]
    t2 = [c[1].imag for c in centres]
    i = np.arange(math.floor((min(t1) - W) / eta), math.ceil((max(t1) + W) / eta) + 1)
    j = np.arange(math.floor((min(t2) - W) / eta), math.ceil((max(t2) + W) / eta) + 1)
    I, J = np.meshgrid(i, j, indexing="ij")
    I, J = I.ravel(), J.ravel()
    mu = (1j * eta * I, 1j * eta * J, -1j * eta * (I + J))
    h = np.asarray(test_function_h(mu, tf), dtype=complex)
    if weight is not None:
        h = h * np.asarray(weight(mu), dtype=complex)
    # distance to the nearest Weyl centre must be within W, plus h above the floor
    near = np.zeros(I.size, dtype=bool)
    for c in centres:
        d2 = (eta * I - c[0].imag) ** 2 + (eta * J - c[1].imag) ** 2 + (-eta * (I + J) - c[2].imag) ** 2
        near |= d2 <= W * W
    keep = near & (np.abs(h) >= PRUNE * np.max(np.abs(h)))
    I, J, h = I[keep], J[keep], h[keep]
    mu = (1j * eta * I, 1j * eta * J, -1j * eta * (I + J))
    sm = np.asarray(spec_measure(mu), dtype=complex)
    return SpectralGrid(tf.mu0, W, eta, np.stack([I, J], axis=1), mu, h * sm * eta**2,
                        symmetric=weight is None)


def _orbits(grid: SpectralGrid):
    """Orbit representatives (as triples of arrays) and weights for eta and 2 eta.

    Returns (mu_rep, w_full, w_sub); w_sub sums only even-lattice nodes with
    their (2 eta)^2 / eta^2 = 4 fold weight.
    """
    I, J = grid.ij[:, 0], grid.ij[:, 1]
    K = -(I + J)
    trip = np.sort(np.stack([I, J, K], axis=1), axis=1)[:, ::-1]
    keys, inv = np.unique(trip, axis=0, return_inverse=True)
    inv = inv.ravel()
    even = (I % 2 == 0) & (J % 2 == 0)
    w_full = np.zeros(len(keys), dtype=complex)
    w_sub = np.zeros(len(keys), dtype=complex)
    np.add.at(w_full, inv, grid.weight)
    np.add.at(w_sub, inv, np.where(even, 4.0 * grid.weight, 0.0))
    e = grid.eta
    rep = (1j * e * keys[:, 0], 1j * e * keys[:, 1], 1j * e * keys[:, 2])
    return rep, w_full, w_sub


def _full(grid: SpectralGrid):
    I, J = grid.ij[:, 0], grid.ij[:, 1]
    even = (I % 2 == 0) & (J % 2 == 0)
    return grid.mu, grid.weight.astype(complex), np.where(even, 4.0 * grid.weight, 0.0).astype(complex)


def _nodes_for(grid: SpectralGrid, invariant: bool):
    if invariant and grid.symmetric:
        return _orbits(grid)
    return _full(grid)


def _grid_for(tf: TestFunctionSpec, grid: SpectralGrid | None) -> SpectralGrid:
    if grid is None:
        return build_grid(tf)
    if any(abs(complex(a) - complex(b)) > 1e-12 for a, b in zip(grid.center, tf.mu0)):
        raise ValidationError("grid must be centred at the test function's mu0")
    return grid


def _phi_w4_many(ys, tf, grid, contour, reflect, workers):
    """Phi_w4 (reflect=False) or Phi_w5 (reflect=True) at several y.

    F^sign(s) = |y0|^(-s) sum_mu weight(mu) G~^sign(s, +-mu), y0 = max |y|,
    is formed once on the refined contour nodes and reused for every y of
    that sign; the remaining factor (|y|/|y0|)^(-s) cannot overflow on the
    left-bent contour.
    """
    ys = [float(y) for y in ys]
    if any(y == 0 or not math.isfinite(y) for y in ys):
        raise ValidationError("y must be nonzero reals")
    grid = _grid_for(tf, grid)
    mu, w_full, w_sub = _nodes_for(grid, True)
    if reflect:
        mu = tuple(-m for m in mu)
    c = resolve_w4(DEFAULT_W4_CONTOUR if contour is None else contour, max(abs(y) for y in ys),
                   np.concatenate(mu))
    if c.rule is not Rule.TRAPEZOID:
        raise ValidationError("spectral transforms use the trapezoid rule")
    n = int(math.ceil(2 * c.H / c.step - 1e-9))
    t = np.linspace(-2 * c.H, 2 * c.H, 4 * n + 1)
    h = 2 * c.H / n
    wt = np.full(t.size, h / 2)
    wt[0] = wt[-1] = h / 4
    s, ds = path(t, c)
    pref = ds * wt / (2j * math.pi)
    ly0 = math.log(max(abs(y) for y in ys))
    out = {}
    # kernel sign per y: K_w4(y; mu) uses sgn y, K_w4(-y; -mu) uses -sgn y
    signs = sorted({(1 if y > 0 else -1) * (-1 if reflect else 1) for y in ys})
    aw = np.abs(w_full)
    for sign in signs:
        def block(sl, sign=sign):
            ss = s[sl][None, :]
            with np.errstate(under="ignore"):
                logs = _log_g_tilde_terms(ss, tuple(m[:, None] for m in mu), sign) - ss * ly0
                vals = np.exp(logs).sum(axis=0)
            return np.stack([w_full @ vals, w_sub @ vals, aw @ np.abs(vals)])

        F = np.concatenate(ordered_map(block, chunked(t.size), workers), axis=1)
        for y in ys:
            if (1 if y > 0 else -1) * (-1 if reflect else 1) != sign:
                continue
            with np.errstate(under="ignore"):
                ypow = np.exp(-s * (math.log(abs(y)) - ly0)) * pref
            terms = F[0] * ypow
            fine = pairwise_sum(terms)
            cw = np.zeros(t.size)
            cw[n : 3 * n + 1 : 2] = 2.0
            cw[n] = cw[3 * n] = 1.0
            coarse = pairwise_sum(terms * cw)
            sub = pairwise_sum(F[1] * ypow)
            abs_sum = float(pairwise_sum(F[2].real * np.abs(ypow)))
            err = abs(fine - coarse) + abs(fine - sub) + _EPS * abs_sum
            out[y] = QuadratureResult(complex(fine), float(err), int(t.size * len(w_full)), abs_sum, c)
    return [out[y] for y in ys]


def phi_w4(y: float, tf: TestFunctionSpec, grid: SpectralGrid | None = None,
           contour: ContourSpec | None = None, tol: float | None = None, workers=None) -> QuadratureResult:
    """Phi_w4(y) = sum over grid nodes of h K_w4(y; mu) spec(mu) eta^2."""
    return _checked(_phi_w4_many([y], tf, grid, contour, False, workers)[0], tol)


def phi_w5(y: float, tf: TestFunctionSpec, grid: SpectralGrid | None = None,
           contour: ContourSpec | None = None, tol: float | None = None, workers=None) -> QuadratureResult:
    """Phi_w5(y) = sum over grid nodes of h K_w4(-y; -mu) spec(mu) eta^2."""
    return _checked(_phi_w4_many([y], tf, grid, contour, True, workers)[0], tol)


# Work cap for the mixed-sign w6 transform: kernel terms summed over all nodes.
W6_BUDGET = 2 * 10**9


def phi_w6(y1: float, y2: float, tf: TestFunctionSpec, grid: SpectralGrid | None = None,
           contour: ContourSpec | None = None, tol: float | None = None, workers=None,
           budget: int = W6_BUDGET) -> QuadratureResult:
    """Phi_w6(y) = sum over grid nodes of h K_w6^(sgn y1, sgn y2)(y; mu) spec(mu) eta^2."""
    y1, y2 = float(y1), float(y2)
    if y1 == 0 or y2 == 0:
        raise ValidationError("y1, y2 must be nonzero")
    eps = _signs(y1, y2)
    grid = _grid_for(tf, grid)
    mu, w_full, w_sub = _nodes_for(grid, eps == (1, 1))
    c = resolve_w6(contour, y1, y2, np.concatenate(mu), eps)
    per_node = _fine_grid(c)[1].size ** 2
    conv = c.tilt == 0
    if not conv and per_node * len(w_full) > budget:
        raise BudgetError(f"phi_w6 needs {per_node * len(w_full):.3e} kernel terms (budget {budget:.3e})")

    def one(k):
        m = (mu[0][k], mu[1][k], mu[2][k])
        parts = _w6_parts(eps, m, y1, y2)
        if conv:
            return _w6_conv(parts, c)[:3]
        return _w6_direct(parts, c, 1)[:3]

    res = np.array(ordered_map(one, range(len(w_full)), workers), dtype=complex).reshape(-1, 3)
    fine = pairwise_sum(w_full * res[:, 0])
    coarse = pairwise_sum(w_full * res[:, 1])
    sub = pairwise_sum(w_sub * res[:, 0])
    abs_sum = float(pairwise_sum(np.abs(w_full) * res[:, 2].real))
    err = abs(fine - coarse) + abs(fine - sub) + _EPS * abs_sum
    out = QuadratureResult(complex(fine), float(err), int(per_node * len(w_full)), abs_sum, c)
    return _checked(out, tol)


@dataclass
class ScanTable:
    rows: list
    complete: bool = True

    def ratio(self, T: float):
        """|Phi(small)| / |Phi(large)| for the two rows of one T."""
        rs = [r for r in self.rows if r["T"] == T]
        small = [r for r in rs if r["regime"] == "small"]
        large = [r for r in rs if r["regime"] == "large"]
        if not small or not large or large[0]["abs_phi"] == 0:
            return math.nan
        return small[0]["abs_phi"] / large[0]["abs_phi"]


# Default scan geometry: exponents of T for the small and large argument.
W4_EXPONENTS = (2.5, 3.5)
W6_EXPONENTS = (0.8, 1.3)


def decay_scan(transform: str, Ts, exponents=None, theta: float = 0.5, A0: int = 1,
               weight=None, W=None, eta=None, contour=None, time_budget: float | None = None,
               workers=None) -> ScanTable:
    """Rows (T, y, |Phi|, self_error) at a small and a large argument per T.

    w4: y = T^a for a in ``exponents``. w6: y1 = y2 = Upsilon^2 with
    Upsilon = T^a, so that Upsilon = min(|y1|^(1/3)|y2|^(1/6), ...).
    ``weight`` multiplies h (for the weighted h1 = h W V~ variant).
    """
    if transform not in ("w4", "w6"):
        raise ValidationError("transform must be w4 or w6")
    Ts = list(Ts)
    if any(T > 20 for T in Ts):
        raise ValidationError("decay scans are limited to T <= 20")
    exps = exponents or (W4_EXPONENTS if transform == "w4" else W6_EXPONENTS)
    table = ScanTable([])
    start = time.perf_counter()
    for T in Ts:
        if time_budget is not None and time.perf_counter() - start > time_budget:
            table.complete = False
            break
        tf = TestFunctionSpec(float(T), theta, A0)
        grid = build_grid(tf, W, eta, weight)
        regimes = ("small", "large")
        if transform == "w4":
            ys = [float(T) ** a for a in exps]
            res = _phi_w4_many(ys, tf, grid, contour, False, workers)
            for reg, y, r in zip(regimes, ys, res):
                table.rows.append({"T": T, "y": y, "regime": reg, "abs_phi": abs(r.value),
                                   "self_error": r.self_error, "re": r.value.real, "im": r.value.imag})
        else:
            for reg, a in zip(regimes, exps):
                y = float(T) ** (2 * a)
                r = phi_w6(y, y, tf, grid, contour, workers=workers)
                table.rows.append({"T": T, "y": y, "upsilon": float(T) ** a, "regime": reg,
                                   "abs_phi": abs(r.value), "self_error": r.self_error,
                                   "re": r.value.real, "im": r.value.imag})
    return table
