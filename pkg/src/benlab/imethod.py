"""Truncation multiplier m, hyperplane functionals, and modified energies.

Multiplier definitions (beta normalized to 1):

* ``m(xi)``: 1 for |xi| <= N, ``N^{-s}|xi|^s`` for |xi| >= 2N, and a fixed C^2
  monotone log-log quintic on [N, 2N] in between.
* ``M3 = i*(m^2(x1)x1 + m^2(x2)x2 + m^2(x3)x3)`` on {x1+x2+x3 = 0}.
* ``sigma3 = M3 / (h3 - v3)`` with the explicit denominator
  ``-3i*x1*x2*x3*(1 - 2*alpha/(3*max|xi|))``; real and even.
* ``M4 = -(3i/2) * sum over the 6 pair groupings of
  sigma3(xa, xb, xc+xd)*(xc+xd)``; ``sigma4 = M4/(h4 - v4)``.
* ``M5 = -2i * sum over the 10 pair groupings of
  sigma4(xa, xb, xc, xd+xe)*(xd+xe)``.

Symmetrized brackets are plain sums over the distinct groupings (the 3!, 4!,
5! permutations collapse to 3, 6, 10 distinct terms respectively).

Energy ladder.  Under our Fourier conventions the nonlinearity -(u^2)_x feeds
each coefficient slot with -i*xi*(u_hat * u_hat)(xi), and differentiating a
symmetric k-linear functional in time produces the (k+1)-linear term with a
combinatorial weight k / (number of groupings).  The corrected energies that
cancel exactly are

    E2 = ||I u||_{L^2}^2
    E3 = E2 + (2/3) * Lambda3(sigma3)
    E4 = E3 + (2/9) * Lambda4(sigma4)

with the exact fluxes

    d/dt E2 = (2/3)  * Lambda3(M3)
    d/dt E3 = (2/9)  * Lambda4(M4)
    d/dt E4 = (2/45) * Lambda5(M5).

The coefficients are pinned by tests against an algebraic d/dt oracle; their
nominal counterparts (all equal to 1) would leave an uncancelled cubic term.

Discretization conventions that make the ladder exact on the grid:

* Resonant tuples (a vanishing denominator, or a vanishing merged-pair slot
  in a grouping) contribute zero and are counted.
* The merged-pair frequency ``xc + xd`` inside a grouping is subject to the
  same 2/3 truncation as the discrete quadratic term, because the discrete
  dynamics never populates those modes.  The scalar ``sigma3/sigma4/M4/M5``
  evaluators implement the untruncated formulas; the grid functionals
  (``flux4``, ``flux5``, ``correction4``) apply the truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, OffHyperplane, ResonantDenominator
from .evolve import Trajectory
from .grid import RealField, require_same_grid
from .spectral import SymbolParams

HYPERPLANE_TOL = 1e-9
RESONANCE_EPS = 1e-12

# Correction and flux coefficients of the exact cancellation ladder.
CORR3 = 2.0 / 3.0
CORR4 = 2.0 / 9.0
FLUX2_COEF = 2.0 / 3.0
FLUX3_COEF = 2.0 / 9.0
FLUX4_COEF = 2.0 / 45.0

DEFAULT_LAMBDA_BUDGET = 2**28


@dataclass(frozen=True)
class IMultiplier:
    """Truncation symbol m(xi) parametrized by (N, s)."""

    N: float
    s: float

    def __post_init__(self):
        if not self.N >= 1.0:
            raise ValueError("N must be >= 1")
        if not (-0.75 <= self.s <= 0.0):
            raise ValueError("s must lie in [-3/4, 0]")

    def m(self, xi):
        """m(xi); vectorized, even, C^2, nonincreasing in |xi| for s < 0."""
        a = np.abs(np.asarray(xi, dtype=np.float64))
        out = np.ones_like(a)
        outer = a >= 2.0 * self.N
        band = (a > self.N) & ~outer
        out = np.where(outer, (np.maximum(a, 1.0) / self.N) ** self.s, out)
        if np.any(band):
            t = np.log2(np.maximum(a, self.N) / self.N)
            g = t**3 * (6.0 - 8.0 * t + 3.0 * t**2)
            out = np.where(band, 2.0 ** (self.s * g), out)
        return out if out.ndim else float(out)

    def m2(self, xi):
        mm = self.m(xi)
        return mm * mm


def m_eval(im: IMultiplier, xi):
    return im.m(xi)


def apply_I(im: IMultiplier, u: RealField) -> RealField:
    return RealField(u.grid, im.m(u.grid.wavenumbers) * u.coeffs)


# -- elementary symbols ------------------------------------------------------


def v_k(xs) -> complex:
    """i * sum(xi^3)."""
    xs = np.asarray(xs, dtype=np.float64)
    return 1j * float(np.sum(xs**3))


def h_k(xs, alpha_tilde: float) -> complex:
    """i * alpha_tilde * sum(xi*|xi|)."""
    xs = np.asarray(xs, dtype=np.float64)
    return 1j * alpha_tilde * float(np.sum(xs * np.abs(xs)))


def _check_hyperplane(xs):
    xs = np.asarray(xs, dtype=np.float64)
    scale = float(np.max(np.abs(xs))) or 1.0
    if abs(float(np.sum(xs))) > HYPERPLANE_TOL * scale:
        raise OffHyperplane(f"sum(xs) = {float(np.sum(xs)):.3e} != 0")
    return xs


# -- M3 / sigma3 -------------------------------------------------------------


def M3(im: IMultiplier, xs) -> complex:
    """i*(m^2(x1)x1 + m^2(x2)x2 + m^2(x3)x3) on the k=3 hyperplane."""
    xs = _check_hyperplane(xs)
    return 1j * float(np.sum(im.m2(xs) * xs))


def _sigma3_arrays(im, params, x1, x2, x3, counter=None):
    """Vectorized sigma3; resonant entries are zeroed and counted.

    Inputs are broadcastable arrays assumed to lie on x1 + x2 + x3 = 0.
    """
    x1, x2, x3 = np.broadcast_arrays(
        np.asarray(x1, dtype=np.float64),
        np.asarray(x2, dtype=np.float64),
        np.asarray(x3, dtype=np.float64),
    )
    num = im.m2(x1) * x1 + im.m2(x2) * x2 + im.m2(x3) * x3
    amax = np.maximum(np.abs(x1), np.maximum(np.abs(x2), np.abs(x3)))
    safe_amax = np.where(amax > 0, amax, 1.0)
    den = 3.0 * x1 * x2 * x3 * (1.0 - 2.0 * params.alpha / (3.0 * safe_amax))
    resonant = np.abs(den) < RESONANCE_EPS * safe_amax**3
    if counter is not None:
        counter["sigma3_resonant"] = counter.get("sigma3_resonant", 0) + int(
            np.count_nonzero(resonant & (np.abs(num) > 0))
        )
    return np.where(resonant, 0.0, -num / np.where(resonant, 1.0, den))


def sigma3(im: IMultiplier, params: SymbolParams, xs) -> float:
    """M3/(h3 - v3) via the explicit extension formula; real-valued.

    Raises ResonantDenominator on the excluded rays (a zero slot or a
    vanishing Hilbert-correction factor); returns exactly 0 when every
    |xi| <= N.
    """
    xs = _check_hyperplane(xs)
    if float(np.max(np.abs(xs))) <= im.N:
        return 0.0
    x1, x2, x3 = (float(x) for x in xs)
    amax = max(abs(x1), abs(x2), abs(x3))
    den = 3.0 * x1 * x2 * x3 * (1.0 - 2.0 * params.alpha / (3.0 * amax))
    if abs(den) < RESONANCE_EPS * amax**3:
        raise ResonantDenominator(f"sigma3 denominator ~ 0 at {tuple(xs)}")
    num = float(np.sum(im.m2(xs) * xs))
    return -num / den


# -- M4 / sigma4 / M5 ---------------------------------------------------------

_PAIRS4 = [
    (pair, tuple(sorted(set(range(4)) - set(pair))))
    for pair in combinations(range(4), 2)
]

_PAIRS5 = [
    (pair, tuple(sorted(set(range(5)) - set(pair))))
    for pair in combinations(range(5), 2)
]


def _M4_arrays(im, params, xs, counter=None, pair_cut=None):
    """Vectorized M4 over broadcastable 4-tuples on the hyperplane.

    Groupings with a vanishing merged pair contribute zero (the sigma3 pole
    is killed by the zero factor).  ``pair_cut``, when given, additionally
    zeroes groupings whose merged frequency exceeds the grid's dealias
    cutoff, matching the truncated discrete dynamics.
    """
    xs = [np.asarray(x, dtype=np.float64) for x in xs]
    scale = sum(np.abs(x) for x in xs)
    safe = np.where(scale > 0, scale, 1.0)
    total = None
    for pair, (a, b) in _PAIRS4:
        merged = xs[pair[0]] + xs[pair[1]]
        dead = np.abs(merged) <= HYPERPLANE_TOL * safe
        if pair_cut is not None:
            dead = dead | (np.abs(merged) > pair_cut)
        s3 = _sigma3_arrays(
            im, params, xs[a], xs[b], np.where(dead, 1.0, merged), counter
        )
        term = np.where(dead, 0.0, s3 * merged)
        total = term if total is None else total + term
    return -1.5j * total


def M4(im: IMultiplier, params: SymbolParams, xs) -> complex:
    xs = _check_hyperplane(xs)
    return complex(_M4_arrays(im, params, list(xs)))


def _den4(params, xs):
    """h4 - v4 = i*(alpha*sum(x|x|) - sum(x^3))."""
    v = sum(x**3 for x in xs)
    h = params.alpha * sum(x * np.abs(x) for x in xs)
    return 1j * (h - v)


def _sigma4_arrays(im, params, xs, counter=None, pair_cut=None):
    xs = [np.asarray(x, dtype=np.float64) for x in xs]
    den = _den4(params, xs)
    scale = sum(np.abs(x) for x in xs)
    safe = np.where(scale > 0, scale, 1.0)
    resonant = np.abs(den) < RESONANCE_EPS * safe**3
    m4 = _M4_arrays(im, params, xs, counter, pair_cut)
    if counter is not None:
        counter["sigma4_resonant"] = counter.get("sigma4_resonant", 0) + int(
            np.count_nonzero(resonant & (np.abs(m4) > 0))
        )
    return np.where(resonant, 0.0, m4 / np.where(resonant, 1.0, den))


def sigma4(im: IMultiplier, params: SymbolParams, xs) -> complex:
    """M4/(h4 - v4); raises ResonantDenominator on resonant 4-tuples."""
    xs = _check_hyperplane(xs)
    arr = np.asarray(xs, dtype=np.float64)
    den = complex(_den4(params, arr))
    scale = float(np.sum(np.abs(arr))) or 1.0
    if abs(den) < RESONANCE_EPS * scale**3:
        raise ResonantDenominator(f"|h4 - v4| ~ 0 at {tuple(xs)}")
    return complex(_M4_arrays(im, params, list(arr))) / den


def _M5_arrays(im, params, xs, counter=None, pair_cut=None):
    xs = [np.asarray(x, dtype=np.float64) for x in xs]
    scale = sum(np.abs(x) for x in xs)
    safe = np.where(scale > 0, scale, 1.0)
    total = None
    for pair, rest in _PAIRS5:
        merged = xs[pair[0]] + xs[pair[1]]
        dead = np.abs(merged) <= HYPERPLANE_TOL * safe
        if pair_cut is not None:
            dead = dead | (np.abs(merged) > pair_cut)
        s4 = _sigma4_arrays(
            im,
            params,
            [xs[rest[0]], xs[rest[1]], xs[rest[2]], np.where(dead, 0.0, merged)],
            counter,
            pair_cut,
        )
        term = np.where(dead, 0.0, s4 * merged)
        total = term if total is None else total + term
    return -2j * total


def M5(im: IMultiplier, params: SymbolParams, xs) -> complex:
    xs = _check_hyperplane(xs)
    return complex(_M5_arrays(im, params, list(xs)))


# -- generic hyperplane functional ------------------------------------------


def lambda_k(mult, fields, budget: int = DEFAULT_LAMBDA_BUDGET) -> complex:
    """Discrete hyperplane sum ``L * sum_{x1+..+xk=0} mult(x..) prod u_hat``.

    ``mult`` is called with k broadcastable wavenumber arrays.  Direct
    enumeration over retained (dealiased) modes with the last index resolved
    by the zero-sum constraint; cost O(n^(k-1)).
    """
    k = len(fields)
    if k not in (2, 3, 4, 5):
        raise ValueError("k must be in 2..5")
    grid = require_same_grid(*fields)
    act = np.nonzero(grid.dealias_mask)[0]
    n = act.size
    if n ** (k - 1) > budget:
        raise BudgetExceeded(f"{n}^{k - 1} modes exceeds budget {budget}")
    xi = grid.wavenumbers
    K = grid.modes
    ms = act - K
    x = xi[act]
    cs = [f.coeffs[act] for f in fields]

    def resolve(m_sum):
        """Last-slot coefficient at mode -m_sum, zero where not retained."""
        idx = -m_sum + K
        inb = (idx >= 0) & (idx <= 2 * K)
        idx_c = np.where(inb, idx, 0)
        ok = inb & grid.dealias_mask[idx_c]
        return np.where(ok, fields[-1].coeffs[idx_c], 0.0)

    if k == 2:
        # Mode -m of the second field is its reversed coefficient array.
        c1m = fields[1].coeffs[::-1][act]
        return grid.length * complex(np.sum(mult(x, -x) * cs[0] * c1m))

    if k == 3:
        last = resolve(ms[:, None] + ms[None, :])
        x1, x2 = x[:, None], x[None, :]
        val = np.sum(mult(x1, x2, -(x1 + x2)) * cs[0][:, None] * cs[1][None, :] * last)
        return grid.length * complex(val)

    if k == 4:
        total = 0.0 + 0.0j
        for i in range(n):
            last = resolve(ms[i] + ms[:, None] + ms[None, :])
            x2, x3 = x[:, None], x[None, :]
            vals = mult(np.full_like(x2 + x3, x[i]), x2, x3, -(x[i] + x2 + x3))
            total += cs[0][i] * np.sum(vals * cs[1][:, None] * cs[2][None, :] * last)
        return grid.length * total

    total = 0.0 + 0.0j
    for i in range(n):
        for j in range(n):
            last = resolve(ms[i] + ms[j] + ms[:, None] + ms[None, :])
            x3, x4 = x[:, None], x[None, :]
            base = x3 + x4
            vals = mult(
                np.full_like(base, x[i]),
                np.full_like(base, x[j]),
                x3,
                x4,
                -(x[i] + x[j] + base),
            )
            total += (
                cs[0][i]
                * cs[1][j]
                * np.sum(vals * cs[2][:, None] * cs[3][None, :] * last)
            )
    return grid.length * total


# -- energies and fast flux paths (identical fields) -------------------------


def energy2(im: IMultiplier, u: RealField) -> float:
    """E2 = ||I u||^2 = L * sum m^2(xi) |u_hat(xi)|^2."""
    xi = u.grid.wavenumbers
    return float(u.grid.length * np.sum(im.m2(xi) * np.abs(u.coeffs) ** 2))


def _pair_plane(grid, act):
    """Shared (j, l) machinery: last-slot index array and validity mask."""
    K = grid.modes
    ms = act - K
    idx = -(ms[:, None] + ms[None, :]) + K
    inb = (idx >= 0) & (idx <= 2 * K)
    idx_c = np.where(inb, idx, 0)
    ok = inb & grid.dealias_mask[idx_c]
    return idx_c, ok


def correction3(im, params, u, counter=None) -> float:
    """Lambda3(sigma3) on three copies of u; O(n^2)."""
    return _corr3_multi(im, params, u.grid, [u.coeffs], counter)[0]


def _corr3_multi(im, params, grid, coeff_list, counter=None):
    act = np.nonzero(grid.dealias_mask)[0]
    xi = grid.wavenumbers
    idx_c, ok = _pair_plane(grid, act)
    x1, x2 = xi[act][:, None], xi[act][None, :]
    plane = np.where(ok, _sigma3_arrays(im, params, x1, x2, -(x1 + x2), counter), 0.0)
    out = []
    for c in coeff_list:
        ca = c[act]
        last = np.where(ok, c[idx_c], 0.0)
        val = np.einsum("jl,j,l,jl->", plane, ca, ca, last, optimize=True)
        out.append(float(np.real(grid.length * val)))
    return out


def flux3(im, u) -> complex:
    """Lambda3(M3) on three copies of u; O(n^2)."""
    grid = u.grid
    act = np.nonzero(grid.dealias_mask)[0]
    xi = grid.wavenumbers
    idx_c, ok = _pair_plane(grid, act)
    x1, x2 = xi[act][:, None], xi[act][None, :]
    x3 = -(x1 + x2)
    mm = 1j * (im.m2(x1) * x1 + im.m2(x2) * x2 + im.m2(x3) * x3)
    c = u.coeffs[act]
    val = np.sum(
        np.where(ok, mm, 0.0)
        * c[:, None]
        * c[None, :]
        * np.where(ok, u.coeffs[idx_c], 0.0)
    )
    return grid.length * complex(val)


def correction4(
    im, params, u, counter=None, budget: int = DEFAULT_LAMBDA_BUDGET
) -> float:
    """Lambda4(sigma4) on four copies of u, with the truncated merged pair."""
    return _corr4_multi(im, params, u.grid, [u.coeffs], counter, budget)[0]


def _grid_tables(im, grid):
    """Lookup tables over the mode-sum lattice m in [-3c, 3c], c = cutoff.

    Every frequency appearing in the quartic/quintic slices (singles, merged
    pairs, resolved fourth slots) is an integer multiple of 2*pi/L with mode
    index in that range, so m^2 and xi are tabulated once per grid instead of
    recomputed per plane.
    """
    c = grid.dealias_cutoff
    modes = np.arange(-3 * c, 3 * c + 1)
    xi = 2.0 * np.pi * modes / grid.length
    return xi, im.m2(xi), 3 * c


def _sigma3_modes(params, xi1, xi2, xi3, q1, q2, q3, counter=None):
    """sigma3 from pretabulated xi and m^2 values; resonant entries zeroed."""
    num = q1 * xi1 + q2 * xi2 + q3 * xi3
    amax = np.maximum(np.abs(xi1), np.maximum(np.abs(xi2), np.abs(xi3)))
    safe = np.where(amax > 0, amax, 1.0)
    den = 3.0 * xi1 * xi2 * xi3 * (1.0 - 2.0 * params.alpha / (3.0 * safe))
    resonant = np.abs(den) < RESONANCE_EPS * safe**3
    if counter is not None:
        counter["sigma3_resonant"] = counter.get("sigma3_resonant", 0) + int(
            np.count_nonzero(resonant & (np.abs(num) > 0))
        )
    return np.where(resonant, 0.0, -num / np.where(resonant, 1.0, den))


def _sigma4_plane(im, params, grid, tables, m1, m2g, m3g, counter=None):
    """Real sigma4 values over one (m2, m3) plane of integer mode tuples.

    ``m1`` is a scalar mode; ``m2g``/``m3g`` broadcast to the plane; the
    fourth mode is resolved by the zero-sum constraint.  Groupings whose
    merged pair is zero or beyond the dealias cutoff contribute zero.
    """
    xt, qt, off = tables
    cut = grid.dealias_cutoff
    m4g = -(m1 + m2g + m3g)
    ms = [np.broadcast_to(np.asarray(m, dtype=np.int64), np.broadcast_shapes(
        np.shape(m2g), np.shape(m3g))) for m in (m1, m2g, m3g, m4g)]
    xs = [xt[m + off] for m in ms]
    qs = [qt[m + off] for m in ms]
    total = None
    for (c, d), (a, b) in [(p, r) for p, r in _PAIRS4]:
        mpair = ms[c] + ms[d]
        dead = (mpair == 0) | (np.abs(mpair) > cut)
        xp = xt[np.where(dead, 0, mpair) + off]
        s3 = _sigma3_modes(
            params,
            xs[a],
            xs[b],
            np.where(dead, 1.0, xp),
            qs[a],
            qs[b],
            qt[np.where(dead, 0, mpair) + off],
            counter,
        )
        term = np.where(dead, 0.0, s3 * xp)
        total = term if total is None else total + term
    num = -1.5 * total  # M4 = -1.5i * total; carried as the real factor
    v = sum(x**3 for x in xs)
    h = params.alpha * sum(x * np.abs(x) for x in xs)
    den = h - v  # h4 - v4 = i*(h - v); the i's cancel against M4's -1.5i
    scale = sum(np.abs(x) for x in xs)
    safe = np.where(scale > 0, scale, 1.0)
    resonant = np.abs(den) < RESONANCE_EPS * safe**3
    if counter is not None:
        counter["sigma4_resonant"] = counter.get("sigma4_resonant", 0) + int(
            np.count_nonzero(resonant & (np.abs(num) > 0))
        )
    return np.where(resonant, 0.0, num / np.where(resonant, 1.0, den))


def _corr4_multi(
    im, params, grid, coeff_list, counter=None, budget=DEFAULT_LAMBDA_BUDGET
):
    """Lambda4(sigma4) for several coefficient vectors on one grid.

    Slice-by-slice over the first frequency: each sigma4 plane is built once
    and contracted against every state, so the O(n^3) multiplier work is
    shared across the whole trajectory.
    """
    act = np.nonzero(grid.dealias_mask)[0]
    n = act.size
    if n**3 > budget:
        raise BudgetExceeded(f"{n}^3 modes exceeds budget {budget}")
    K = grid.modes
    ms = act - K
    tables = _grid_tables(im, grid)
    C = np.array(coeff_list)
    Ca = C[:, act]
    out = np.zeros(len(coeff_list), dtype=np.complex128)
    mj = ms[:, None]
    ml = ms[None, :]
    for i in range(n):
        m4 = -(ms[i] + mj + ml)
        ok = np.abs(m4) <= grid.dealias_cutoff
        plane = np.where(ok, _sigma4_plane(im, params, grid, tables, ms[i], mj, ml, counter), 0.0)
        idx_c = np.where(ok, m4 + K, 0)
        last = np.where(ok[None, :, :], C[:, idx_c], 0.0)
        out += Ca[:, i] * np.einsum(
            "jl,tj,tl,tjl->t", plane, Ca, Ca, last, optimize=True
        )
    return [float(v) for v in np.real(grid.length * out)]


def _autoconvolution(coeffs, grid):
    """w(m) = sum_{m1+m2=m} c(m1) c(m2) over retained modes, m in [-2K, 2K]."""
    masked = np.where(grid.dealias_mask, coeffs, 0.0)
    return np.convolve(masked, masked)


def flux4(im, params, u, counter=None) -> complex:
    """Lambda4(M4) on four copies of u via the merged-pair convolution.

    On identical fields the six groupings contribute equally, so
    ``Lambda4(M4) = -9i * L * sum_{x1+x2+eta=0} sigma3(x1, x2, eta) * eta *
    u_hat(x1) u_hat(x2) * w(eta)`` with w the truncated autoconvolution;
    O(n^2).
    """
    grid = u.grid
    act = np.nonzero(grid.dealias_mask)[0]
    K = grid.modes
    ms = act - K
    x = grid.wavenumbers[act]
    w = _autoconvolution(u.coeffs, grid)
    m_eta = -(ms[:, None] + ms[None, :])
    x1, x2 = x[:, None], x[None, :]
    eta = -(x1 + x2)
    keep = (np.abs(m_eta) <= grid.dealias_cutoff) & (m_eta != 0)
    s3 = _sigma3_arrays(im, params, x1, x2, np.where(keep, eta, 1.0), counter)
    c = u.coeffs[act]
    val = np.sum(
        np.where(keep, s3 * eta, 0.0)
        * c[:, None]
        * c[None, :]
        * w[np.where(keep, m_eta + 2 * K, 0)]
    )
    return -9j * grid.length * complex(val)


def flux5(
    im, params, u, counter=None, budget: int = DEFAULT_LAMBDA_BUDGET
) -> complex:
    """Lambda5(M5) on five copies of u via the merged-pair convolution.

    On identical fields the ten groupings contribute equally:
    ``Lambda5(M5) = -20i * L * sum_{x1+x2+x3+eta=0} sigma4(x1, x2, x3, eta) *
    eta * u_hat(x1) u_hat(x2) u_hat(x3) * w(eta)``; O(n^3), sliced over the
    first frequency.
    """
    grid = u.grid
    act = np.nonzero(grid.dealias_mask)[0]
    n = act.size
    if n**3 > budget:
        raise BudgetExceeded(f"{n}^3 modes exceeds budget {budget}")
    K = grid.modes
    ms = act - K
    xt, _, off = tables = _grid_tables(im, grid)
    w = _autoconvolution(u.coeffs, grid)
    c = u.coeffs[act]
    total = 0.0 + 0.0j
    mj = ms[:, None]
    ml = ms[None, :]
    for i in range(n):
        m_eta = -(ms[i] + mj + ml)
        keep = (np.abs(m_eta) <= grid.dealias_cutoff) & (m_eta != 0)
        # sigma4 with the zero-sum fourth slot equal to eta: the plane
        # helper resolves slot 4 from the first three, which is exactly eta.
        s4 = _sigma4_plane(im, params, grid, tables, ms[i], mj, ml, counter)
        eta = xt[np.where(keep, m_eta, 0) + off]
        total += c[i] * np.sum(
            np.where(keep, s4 * eta, 0.0)
            * c[:, None]
            * c[None, :]
            * w[np.where(keep, m_eta + 2 * K, 0)]
        )
    return -20j * grid.length * total


def energy3(im, params, u, counter=None) -> float:
    return energy2(im, u) + CORR3 * correction3(im, params, u, counter)


def energy4(
    im, params, u, counter=None, budget: int = DEFAULT_LAMBDA_BUDGET
) -> float:
    return energy3(im, params, u, counter) + CORR4 * correction4(
        im, params, u, counter, budget
    )


def energy_fluxes(
    im, params, u, counter=None, budget: int = DEFAULT_LAMBDA_BUDGET
) -> dict:
    """Exact time derivatives of E2, E3, E4 along the discrete flow."""
    return {
        "ddt_e2": FLUX2_COEF * float(np.real(flux3(im, u))),
        "ddt_e3": FLUX3_COEF * float(np.real(flux4(im, params, u, counter))),
        "ddt_e4": FLUX4_COEF * float(np.real(flux5(im, params, u, counter, budget))),
    }


# -- trajectory-level report --------------------------------------------------


@dataclass
class EnergyReport:
    """Modified energies evaluated on the recorded states of a trajectory."""

    times: list
    e2: list
    e3: list
    e4: list
    N: float
    s: float
    resonant_counts: dict = dc_field(default_factory=dict)
    coefficients: dict = dc_field(
        default_factory=lambda: {"corr3": CORR3, "corr4": CORR4}
    )

    def increments(self, which: str = "e4") -> list:
        vals = getattr(self, which)
        return [b - a for a, b in zip(vals, vals[1:])]

    def max_excursion(self, which: str = "e4") -> float:
        vals = getattr(self, which)
        return max(abs(v - vals[0]) for v in vals)

    def to_dict(self) -> dict:
        return {
            "times": list(self.times),
            "e2": list(self.e2),
            "e3": list(self.e3),
            "e4": list(self.e4),
            "N": self.N,
            "s": self.s,
            "resonant_counts": dict(self.resonant_counts),
            "coefficients": dict(self.coefficients),
        }


def modified_energies(
    traj: Trajectory,
    im: IMultiplier,
    include_quartic: bool = True,
    budget: int = DEFAULT_LAMBDA_BUDGET,
    chunk: int = 16,
) -> EnergyReport:
    """E2/E3/E4 at every recorded time of a trajectory.

    States are processed in chunks so the sigma planes are built once per
    chunk rather than once per state.
    """
    grid = traj.grid
    params = traj.params
    counter = {}
    m2 = im.m2(grid.wavenumbers)
    e2 = [float(grid.length * np.sum(m2 * np.abs(s.coeffs) ** 2)) for s in traj.states]
    c3 = []
    c4 = []
    for lo in range(0, len(traj.states), chunk):
        block = [s.coeffs for s in traj.states[lo : lo + chunk]]
        c3.extend(_corr3_multi(im, params, grid, block, counter))
        if include_quartic:
            c4.extend(_corr4_multi(im, params, grid, block, counter, budget))
    if not include_quartic:
        c4 = [0.0] * len(e2)
    e3 = [a + CORR3 * b for a, b in zip(e2, c3)]
    e4 = [a + CORR4 * b for a, b in zip(e3, c4)]
    return EnergyReport(
        times=list(traj.times),
        e2=e2,
        e3=e3,
        e4=e4,
        N=im.N,
        s=im.s,
        resonant_counts=counter,
    )
