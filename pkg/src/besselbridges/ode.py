"""Exact solver for u''(dr) = 2 u m(dr) on [0, 1] with measure coefficient.

The measure is piecewise constant plus atoms, so the solution is propagated
exactly: through a density piece of value c by the 2x2 cosh/sinh propagator
of u'' = 2 c u (linear when c = 0), and across an atom (r, w) by the slope
jump u'(r+) = u'(r-) + 2 w u(r).  The two canonical solutions are

    psi:     psi(0) = 0,  psi'(0+) = 1   (forward sweep)
    psi_hat: psi_hat(1) = 0,  psi_hat'(1-) = -1   (backward sweep)

with psi_1 = psi(1) and the derived kernels C_r = psi_1/(psi psi_hat),
D_r = 1/(psi psi_hat).  Evaluators are exact within each piece; derivative
evaluators return right limits (left limit at r = 1).  When an atom sits on
a density break the density piece is applied first, then the jump.
"""

import math
from dataclasses import dataclass

import numpy as np

from .measures import FiniteMeasure

__all__ = ["OdeSolution", "solve", "solve_phi", "ShootingError"]


class ShootingError(RuntimeError):
    """Boundary-value shooting failed to meet its residual target."""


def _piece_step(u, up, c, dr):
    """Propagate (u, u') exactly through a piece with u'' = 2 c u."""
    if c == 0.0:
        return u + dr * up, up
    w = math.sqrt(2.0 * c)
    ch = math.cosh(w * dr)
    sh = math.sinh(w * dr)
    return ch * u + sh / w * up, w * sh * u + ch * up


def _events(measure: FiniteMeasure):
    """Sorted node array, per-piece density values, per-node atom weights."""
    nodes = np.unique(np.concatenate([
        np.asarray(measure.breaks, dtype=float),
        measure.atom_locations if measure.atoms else np.empty(0),
    ]))
    piece_c = measure.density_at(0.5 * (nodes[:-1] + nodes[1:]))
    jumps = np.zeros(len(nodes))
    for r, w in measure.atoms:
        jumps[np.searchsorted(nodes, r)] += w
    return nodes, piece_c, jumps


@dataclass(frozen=True)
class OdeSolution:
    measure: FiniteMeasure
    nodes: np.ndarray
    piece_c: np.ndarray
    psi_nodes: np.ndarray
    psi_slopes: np.ndarray      # right limits
    psi_hat_nodes: np.ndarray
    psi_hat_slopes: np.ndarray  # right limits
    psi_1: float

    def _eval(self, vals, slopes, r, derivative=False):
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(self.nodes, r, side="right") - 1,
                      0, len(self.nodes) - 2)
        dr = r - self.nodes[idx]
        c = self.piece_c[idx]
        u = vals[idx]
        up = slopes[idx]
        w = np.sqrt(2.0 * np.maximum(c, 0.0))
        pos = c > 0.0
        ch = np.where(pos, np.cosh(w * dr), 1.0)
        sh_over_w = np.where(pos, np.sinh(w * dr) / np.where(pos, w, 1.0), dr)
        if derivative:
            return np.where(pos, w * np.sinh(w * dr), 0.0) * u + ch * up
        return ch * u + sh_over_w * up

    def psi(self, r):
        return self._eval(self.psi_nodes, self.psi_slopes, r)

    def psi_prime(self, r):
        return self._eval(self.psi_nodes, self.psi_slopes, r, derivative=True)

    def psi_hat(self, r):
        return self._eval(self.psi_hat_nodes, self.psi_hat_slopes, r)

    def psi_hat_prime(self, r):
        return self._eval(self.psi_hat_nodes, self.psi_hat_slopes, r, derivative=True)

    def product(self, r):
        """psi(r) * psi_hat(r)."""
        return self.psi(r) * self.psi_hat(r)

    def c(self, r):
        """C_r = psi_1 / (psi psi_hat)."""
        return self.psi_1 / self.product(r)

    def d(self, r):
        """D_r = 1 / (psi psi_hat)."""
        return 1.0 / self.product(r)

    def wronskian(self, r):
        """psi' psi_hat - psi psi_hat' with right-limit derivatives."""
        return (self.psi_prime(r) * self.psi_hat(r)
                - self.psi(r) * self.psi_hat_prime(r))

    @property
    def breakpoints(self) -> tuple:
        return tuple(float(s) for s in self.nodes[1:-1])


def _sweep_forward(nodes, piece_c, jumps, u0, up0):
    """States (value, right-limit slope) at every node, sweeping left to right."""
    n = len(nodes)
    vals = np.empty(n)
    slopes = np.empty(n)
    u, up = u0, up0 + 2.0 * jumps[0] * u0
    vals[0], slopes[0] = u, up
    for i in range(n - 1):
        u, up = _piece_step(u, up, piece_c[i], nodes[i + 1] - nodes[i])
        up += 2.0 * jumps[i + 1] * u
        vals[i + 1], slopes[i + 1] = u, up
    return vals, slopes


def _sweep_backward(nodes, piece_c, jumps, u1, up1_left):
    """States at every node from terminal data (value, left-limit slope at 1).

    Stored slopes are right limits, so the value/slope pair at node i comes
    from integrating backward through piece i and removing the atom jump
    only when continuing past the node.
    """
    n = len(nodes)
    vals = np.empty(n)
    slopes = np.empty(n)
    vals[-1], slopes[-1] = u1, up1_left  # right limit at 1 is unused
    u, up = u1, up1_left
    for i in range(n - 2, -1, -1):
        u, up = _piece_step(u, up, piece_c[i], nodes[i] - nodes[i + 1])
        vals[i], slopes[i] = u, up      # right limit at node i
        up = up - 2.0 * jumps[i] * u    # left limit, feeds the next piece
    return vals, slopes


def solve(measure: FiniteMeasure) -> OdeSolution:
    """Both canonical solutions for the given measure."""
    nodes, piece_c, jumps = _events(measure)
    psi_vals, psi_slopes = _sweep_forward(nodes, piece_c, jumps, 0.0, 1.0)
    hat_vals, hat_slopes = _sweep_backward(nodes, piece_c, jumps, 0.0, -1.0)
    return OdeSolution(
        measure=measure,
        nodes=nodes,
        piece_c=np.asarray(piece_c, dtype=float),
        psi_nodes=psi_vals,
        psi_slopes=psi_slopes,
        psi_hat_nodes=hat_vals,
        psi_hat_slopes=hat_slopes,
        psi_1=float(psi_vals[-1]),
    )


@dataclass(frozen=True)
class PhiSolution:
    nodes: np.ndarray
    piece_c: np.ndarray
    vals: np.ndarray
    slopes: np.ndarray
    phi_1: float

    def _eval(self, r, derivative=False):
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(self.nodes, r, side="right") - 1,
                      0, len(self.nodes) - 2)
        dr = r - self.nodes[idx]
        c = self.piece_c[idx]
        u = self.vals[idx]
        up = self.slopes[idx]
        w = np.sqrt(2.0 * np.maximum(c, 0.0))
        pos = c > 0.0
        ch = np.where(pos, np.cosh(w * dr), 1.0)
        if derivative:
            return np.where(pos, w * np.sinh(w * dr), 0.0) * u + ch * up
        sh_over_w = np.where(pos, np.sinh(w * dr) / np.where(pos, w, 1.0), dr)
        return ch * u + sh_over_w * up

    def phi(self, r):
        return self._eval(r)

    def phi_prime(self, r):
        return self._eval(r, derivative=True)


def solve_phi(measure: FiniteMeasure, residual_tol: float = 1e-12,
              max_bisect: int = 200) -> PhiSolution:
    """Two-point problem phi'' = 2 phi m, phi(0) = 1, phi'(1) = 0.

    Solved by bisection shooting on the initial slope; the terminal slope is
    monotone in the initial slope, and each trial integration is exact, so
    the residual target is reachable whenever the bracket straddles zero.
    """
    nodes, piece_c, jumps = _events(measure)

    def terminal_slope(s):
        _, slopes = _sweep_forward(nodes, piece_c, jumps, 1.0, s)
        return slopes[-1]

    mass = measure.total_mass()
    lo = -2.0 * mass * math.exp(2.0 * mass)
    hi = 0.0
    f_hi = terminal_slope(hi)
    if abs(f_hi) <= residual_tol:
        s = hi
    else:
        f_lo = terminal_slope(lo)
        if f_lo > 0.0:
            raise ShootingError("bracket does not straddle phi'(1) = 0")
        s = lo
        for _ in range(max_bisect):
            s = 0.5 * (lo + hi)
            f_mid = terminal_slope(s)
            if abs(f_mid) <= residual_tol:
                break
            if f_mid > 0.0:
                hi = s
            else:
                lo = s
        else:
            raise ShootingError(
                f"no convergence after {max_bisect} bisections "
                f"(residual {terminal_slope(s):.3e})")
    vals, slopes = _sweep_forward(nodes, piece_c, jumps, 1.0, s)
    return PhiSolution(nodes=nodes, piece_c=np.asarray(piece_c, dtype=float),
                       vals=vals, slopes=slopes, phi_1=float(vals[-1]))
