"""Adaptive Gauss-Kronrod quadrature and fixed composite Gauss-Legendre rules.

All integrators here evaluate the integrand on NumPy arrays, so callers pass
vectorized functions.  The adaptive driver is a global-error scheme in the
QUADPACK style: every pending interval gets a G7/K15 estimate, the intervals
whose error exceeds their share of the budget are bisected, and the whole
wave of children is evaluated in one call.
"""

from dataclasses import dataclass

import numpy as np

# G7/K15 nodes on [-1, 1] and the matching weights.  Odd-indexed nodes are
# the embedded Gauss-7 points.
_KRONROD_NODES = np.array([
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
])
_KRONROD_WEIGHTS = np.array([
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
])
_GAUSS_WEIGHTS = np.array([
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
])
_GAUSS_SLICE = slice(1, None, 2)


class QuadratureError(RuntimeError):
    """Raised when the adaptive scheme cannot reach the requested tolerance.

    The achieved error estimate is carried in ``achieved``.
    """

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error {achieved:.3e})")
        self.achieved = achieved


def _gk_panels(f, lo, hi):
    """G7/K15 estimates on a batch of intervals.

    Returns (kronrod, error) arrays, one entry per interval.  The error is
    the QUADPACK rescaled |K15 - G7| estimate.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _KRONROD_NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k15 = half * (fx @ _KRONROD_WEIGHTS)
    g7 = half * (fx[:, _GAUSS_SLICE] @ _GAUSS_WEIGHTS)
    resabs = half * (np.abs(fx) @ _KRONROD_WEIGHTS)
    resasc = half * (np.abs(fx - (k15 / (2.0 * half))[:, None]) @ _KRONROD_WEIGHTS)
    diff = np.abs(k15 - g7)
    err = diff.copy()
    mask = resasc > 0.0
    scaled = np.zeros_like(diff)
    scaled[mask] = resasc[mask] * np.minimum(
        1.0, (200.0 * diff[mask] / resasc[mask]) ** 1.5
    )
    err[mask] = scaled[mask]
    tiny = 50.0 * np.finfo(float).eps * resabs
    err = np.maximum(err, tiny)
    return k15, err


def adaptive_gauss_kronrod(f, a, b, tol=1e-10, rel_tol=0.0, breakpoints=(),
                           max_intervals=4096):
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    ``breakpoints`` seeds the initial subdivision (kinks, atom locations).
    Returns (value, error_estimate); raises QuadratureError when the error
    budget cannot be met within ``max_intervals`` intervals.
    """
    pts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    lo = np.array(pts[:-1], dtype=float)
    hi = np.array(pts[1:], dtype=float)
    vals, errs = _gk_panels(f, lo, hi)
    for _ in range(200):
        total = float(np.sum(vals))
        budget = max(tol, rel_tol * abs(total))
        if float(np.sum(errs)) <= budget:
            return total, float(np.sum(errs))
        # halve every interval within a factor ~3 of the current worst
        bad = errs > max(0.3 * float(errs.max()), 0.0)
        if not np.any(bad):
            bad = errs == errs.max()
        if len(lo) + np.count_nonzero(bad) > max_intervals:
            raise QuadratureError("interval budget exhausted", float(np.sum(errs)))
        mid = 0.5 * (lo[bad] + hi[bad])
        new_lo = np.concatenate([lo[~bad], lo[bad], mid])
        new_hi = np.concatenate([hi[~bad], mid, hi[bad]])
        keep_vals = vals[~bad]
        keep_errs = errs[~bad]
        child_vals, child_errs = _gk_panels(
            f, np.concatenate([lo[bad], mid]), np.concatenate([mid, hi[bad]])
        )
        lo, hi = new_lo, new_hi
        vals = np.concatenate([keep_vals, child_vals])
        errs = np.concatenate([keep_errs, child_errs])
    raise QuadratureError("adaptive refinement stalled", float(np.sum(errs)))


def integrate_tail(f, a, tol=1e-12, max_octaves=400):
    """Integrate ``f`` over [a, infinity) for integrands with fast decay.

    Works through the substitution x = a e^t taken one octave at a time:
    panels [a 2^k, a 2^(k+1)] are integrated adaptively until two consecutive
    panels contribute less than tol/8 each.
    """
    total = 0.0
    err = 0.0
    small = 0
    lo = a
    for _ in range(max_octaves):
        hi = 2.0 * lo
        v, e = adaptive_gauss_kronrod(f, lo, hi, tol=tol / 8.0, max_intervals=512)
        total += v
        err += e
        if abs(v) < tol / 8.0:
            small += 1
            if small >= 2:
                return total, err
        else:
            small = 0
        lo = hi
    raise QuadratureError("tail did not converge", err)


def gauss_legendre_rule(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


_GL_CACHE = {}


def composite_gl_nodes(edges, n=16):
    """Nodes and weights of composite n-point Gauss-Legendre on given edges."""
    key = n
    if key not in _GL_CACHE:
        _GL_CACHE[key] = gauss_legendre_rule(n)
    xi, wi = _GL_CACHE[key]
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    weights = (half[:, None] * wi[None, :]).ravel()
    return nodes, weights


def _theta_edges(r_breaks, panels_per_piece):
    pieces = [0.0] + sorted(2.0 * np.arcsin(np.sqrt(b)) for b in r_breaks
                            if 0.0 < b < 1.0) + [np.pi]
    edges = []
    for left, right in zip(pieces[:-1], pieces[1:]):
        edges.append(np.linspace(left, right, panels_per_piece + 1)[:-1])
    edges.append(np.array([np.pi]))
    return np.concatenate(edges)


def unit_interval_nodes(r_breaks=(), panels_per_piece=4, n=12):
    """Quadrature nodes/weights for integrals over (0, 1) with endpoint care.

    Uses the substitution r = sin^2(theta/2), which flattens inverse
    square-root endpoint behavior; composite Gauss-Legendre in theta.
    Returns (r_nodes, weights) such that sum(w * f(r)) approximates
    the integral of f over (0, 1).
    """
    edges = _theta_edges(r_breaks, panels_per_piece)
    theta, w = composite_gl_nodes(edges, n=n)
    r = np.sin(0.5 * theta) ** 2
    return r, w * 0.5 * np.sin(theta)


def integrate_unit_interval(fvec, r_breaks=(), tol=1e-10, rel_tol=1e-11,
                            start_panels=4, max_doublings=7):
    """Integrate a vectorized integrand over (0, 1) with endpoint substitution.

    Doubles the panel count until two successive composite rules agree to
    ``tol`` absolutely or ``rel_tol`` relatively (large integrands that a
    caller rescales afterwards would otherwise chase roundoff).
    Breakpoints (measure atoms, density breaks, support edges of test
    functions) seed the panel structure.
    """
    panels = start_panels
    r, w = unit_interval_nodes(r_breaks, panels_per_piece=panels)
    prev = float(np.dot(w, fvec(r)))
    for _ in range(max_doublings):
        panels *= 2
        r, w = unit_interval_nodes(r_breaks, panels_per_piece=panels)
        cur = float(np.dot(w, fvec(r)))
        if abs(cur - prev) <= max(tol, rel_tol * abs(cur)):
            return cur
        prev = cur
    raise QuadratureError("unit-interval rule did not converge", abs(cur - prev))


@dataclass(frozen=True)
class HatWeights:
    """Weights w with sum(w * g(nodes)) = integral of g's linear interpolant.

    ``nodes`` is the interpolation grid; the weights integrate the hat-basis
    functions against a fixed weight function.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def apply(self, values):
        return np.asarray(values) @ self.weights


def hat_weights(grid, weight_fn, extra_breaks=(), n_gl=8):
    """Integrate weight_fn(r) against the hat basis of ``grid`` over [0, 1].

    Returns HatWeights whose dot with nodal values of a function equals the
    integral of weight_fn times the piecewise-linear interpolant.
    """
    grid = np.asarray(grid, dtype=float)
    cuts = np.unique(np.concatenate([grid, np.asarray(extra_breaks, dtype=float)]))
    cuts = cuts[(cuts >= grid[0]) & (cuts <= grid[-1])]
    x, w = composite_gl_nodes(cuts, n=n_gl)
    gx = w * np.asarray(weight_fn(x), dtype=float)
    idx = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(grid) - 2)
    width = grid[idx + 1] - grid[idx]
    t = (x - grid[idx]) / width
    out = np.zeros(len(grid))
    np.add.at(out, idx, gx * (1.0 - t))
    np.add.at(out, idx + 1, gx * t)
    return HatWeights(nodes=grid, weights=out)
