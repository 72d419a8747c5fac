"""Renormalized pairings with the power-law distribution family mu_alpha.

For alpha > 0, mu_alpha is the measure x^{alpha-1}/Gamma(alpha) dx on
[0, inf).  At nonpositive integers -k it degenerates to the k-th derivative
at zero with sign (-1)^k, and for the remaining negative alpha the pairing
is defined through Taylor remainders:

    <mu_alpha, phi> = integral of T^k_x(phi) x^{alpha-1}/Gamma(alpha) dx,
    -k-1 < alpha < -k,

where T^n_x(phi) = phi(x) - sum_{j<=n} x^j phi^(j)(0)/j!.  The quadrature
splits at x = 1 and extracts a few more Taylor moments analytically, which
keeps the integrand bounded and the evaluation well conditioned for alpha
arbitrarily close to the integer poles (the Gamma(alpha) pole there is
cancelled by a matching 1/(alpha + j) moment).
"""

import math
from typing import Sequence

import numpy as np

from .quadrature import QuadratureError, adaptive_gauss_kronrod, integrate_tail
from .specfun import POLE_GUARD, gamma

__all__ = [
    "ScalarTestFunction",
    "exp_decay",
    "gaussian",
    "poly_gaussian",
    "taylor_remainder",
    "pair_mu",
    "renorm_gamma_integral",
]


class ScalarTestFunction:
    """Test function of the form p(x) exp(-lam x - c2 x^2 / 2) on [0, inf).

    The family is closed under differentiation, so derivatives of every
    order are available analytically; ``max_order`` only declares the order
    guaranteed by the public contract.  ``decays`` reports membership in the
    smooth rapidly-decreasing class (it requires lam > 0 or c2 > 0, or a
    constant polynomial part).
    """

    def __init__(self, poly: Sequence[float], lam: float = 0.0, c2: float = 0.0,
                 max_order: int = 32, name: str = ""):
        self.poly = np.trim_zeros(np.asarray(poly, dtype=float), "b")
        if self.poly.size == 0:
            self.poly = np.zeros(1)
        if lam < 0.0 or c2 < 0.0:
            raise ValueError("exponential rates must be nonnegative")
        self.lam = float(lam)
        self.c2 = float(c2)
        self.max_order = int(max_order)
        self.name = name or f"poly(deg {self.poly.size - 1})*exp(-{lam}x-{c2}x^2/2)"
        self._deriv_polys = [self.poly]

    # -- basic evaluation -------------------------------------------------

    def _expfactor(self, x):
        return np.exp(-self.lam * x - 0.5 * self.c2 * x * x)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.polynomial.polynomial.polyval(x, self.poly) * self._expfactor(x)

    def _poly_for_order(self, k: int) -> np.ndarray:
        while len(self._deriv_polys) <= k:
            p = self._deriv_polys[-1]
            dp = np.polynomial.polynomial.polyder(p) if p.size > 1 else np.zeros(1)
            # (p e)' = (p' - (lam + c2 x) p) e
            q = np.zeros(p.size + 1)
            q[: dp.size] += dp
            q[: p.size] -= self.lam * p
            q[1 : p.size + 1] -= self.c2 * p
            self._deriv_polys.append(np.trim_zeros(q, "b") if np.any(q) else np.zeros(1))
        return self._deriv_polys[k]

    def derivative(self, k: int, x):
        if k < 0:
            raise ValueError("derivative order must be >= 0")
        x = np.asarray(x, dtype=float)
        return np.polynomial.polynomial.polyval(x, self._poly_for_order(k)) * self._expfactor(x)

    def derivative_function(self, k: int = 1) -> "ScalarTestFunction":
        f = ScalarTestFunction(self._poly_for_order(k), self.lam, self.c2,
                               self.max_order, name=f"D^{k}[{self.name}]")
        return f

    @property
    def decays(self) -> bool:
        return self.lam > 0.0 or self.c2 > 0.0 or self.poly.size == 1

    # -- Taylor data -------------------------------------------------------

    def taylor_coefficients(self, n: int) -> np.ndarray:
        """Coefficients c_j of the Maclaurin series up to order n."""
        e = np.zeros(n + 1)
        e[0] = 1.0
        for j in range(n):
            nxt = -self.lam * e[j]
            if j >= 1:
                nxt -= self.c2 * e[j - 1]
            e[j + 1] = nxt / (j + 1)
        out = np.zeros(n + 1)
        for i, p in enumerate(self.poly[: n + 1]):
            if p != 0.0:
                out[i:] += p * e[: n + 1 - i]
        return out

    def taylor_tail(self, n: int, x):
        """sum_{j > n} c_j x^j, the Taylor remainder computed termwise.

        Accurate for |x| <= ~1.5 where the direct difference would cancel.
        """
        x = np.asarray(x, dtype=float)
        extra = max(40, n + 30)
        c = self.taylor_coefficients(n + extra)
        out = np.zeros_like(x)
        xp = x ** (n + 1)
        for j in range(n + 1, n + extra + 1):
            out += c[j] * xp
            xp = xp * x
        return out


def exp_decay(lam: float) -> ScalarTestFunction:
    return ScalarTestFunction([1.0], lam=lam, name=f"exp(-{lam}x)")


def gaussian(c: float) -> ScalarTestFunction:
    return ScalarTestFunction([1.0], c2=c, name=f"exp(-{c}x^2/2)")


def poly_gaussian(poly: Sequence[float], c: float, lam: float = 0.0) -> ScalarTestFunction:
    return ScalarTestFunction(poly, lam=lam, c2=c)


def taylor_remainder(phi, n: int, x: float) -> float:
    """phi(x) minus its order-n Maclaurin polynomial; phi(x) itself if n < 0."""
    if n < 0:
        return float(np.asarray(phi.value(x)))
    x = float(x)
    if isinstance(phi, ScalarTestFunction) and abs(x) <= 1.5:
        return float(np.asarray(phi.taylor_tail(n, x)))
    acc = float(np.asarray(phi.value(x)))
    fact = 1.0
    for j in range(n + 1):
        if j > 0:
            fact *= j
        acc -= x ** j * float(np.asarray(phi.derivative(j, 0.0))) / fact
    return acc


def _mu_integer(k: int, phi) -> float:
    return (-1.0) ** k * float(np.asarray(phi.derivative(k, 0.0)))


def pair_mu(alpha: float, phi, tol: float = 1e-10) -> float:
    """Pairing <mu_alpha, phi> for any real alpha.

    phi must expose value / derivative (ScalarTestFunction works); for the
    quadrature branches it must be rapidly decreasing.
    """
    alpha = float(alpha)
    r = round(alpha)
    if r <= 0 and abs(alpha - r) < POLE_GUARD:
        return _mu_integer(-r, phi)
    if hasattr(phi, "decays") and not phi.decays:
        raise ValueError("pair_mu requires a rapidly decreasing test function")

    n_star = max(0, math.ceil(-alpha)) + 2
    if isinstance(phi, ScalarTestFunction):
        coeffs = phi.taylor_coefficients(n_star)

        def remainder(x):
            return phi.taylor_tail(n_star, x)
    else:
        fact = 1.0
        coeffs = np.zeros(n_star + 1)
        for j in range(n_star + 1):
            if j > 0:
                fact *= j
            coeffs[j] = float(np.asarray(phi.derivative(j, 0.0))) / fact

        def remainder(x):
            acc = np.asarray(phi.value(x), dtype=float).copy()
            for j in range(n_star + 1):
                acc -= coeffs[j] * x ** j
            return acc

    head, err_head = adaptive_gauss_kronrod(
        lambda x: x ** (alpha - 1.0) * remainder(x), 0.0, 1.0, tol=tol / 4.0
    )
    tail, err_tail = integrate_tail(
        lambda x: x ** (alpha - 1.0) * np.asarray(phi.value(x), dtype=float),
        1.0, tol=tol / 4.0,
    )
    moments = sum(coeffs[j] / (alpha + j) for j in range(n_star + 1))
    achieved = err_head + err_tail
    if achieved > 10.0 * tol:
        raise QuadratureError("pair_mu quadrature did not converge", achieved)
    return (head + tail + moments) / gamma(alpha)


def _gaussian_remainder_even(w, n_star: int):
    """T_{2 n*} remainder of exp(-w) as a function of w = C a^2 / 2.

    Uses the series tail for small w (no cancellation) and the direct
    difference once the terms are no longer dominated by roundoff.
    """
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = w <= 2.0
    ws = w[small]
    acc = np.zeros_like(ws)
    term = (-ws) ** (n_star + 1) / math.factorial(n_star + 1)
    for j in range(n_star + 1, n_star + 40):
        acc += term
        term = term * (-ws) / (j + 1)
    out[small] = acc
    wl = w[~small]
    direct = np.exp(-wl)
    # direct difference e^{-w} - sum_{j<=n*} (-w)^j/j!
    psum = np.zeros_like(wl)
    t = np.ones_like(wl)
    for j in range(n_star + 1):
        psum += t
        t = t * (-wl) / (j + 1)
    out[~small] = direct - psum
    return out


def renorm_gamma_integral(x: float, c: float, tol: float = 1e-10) -> float:
    """2^{1-x} * integral of a^{2x-1} T^{2 floor(-x)}_a exp(-C a^2/2) da.

    Defined for x away from the nonpositive integers and C > 0; equals
    Gamma(x) C^{-x}.
    """
    x = float(x)
    c = float(c)
    if c <= 0.0:
        raise ValueError("renorm_gamma_integral requires C > 0")
    r = round(x)
    if r <= 0 and abs(x - r) < POLE_GUARD:
        raise ValueError(f"renorm_gamma_integral pole at x = {x!r}")

    n_star = max(0, math.ceil(-x)) + 2
    alpha2 = 2.0 * x

    def head_integrand(a):
        return a ** (alpha2 - 1.0) * _gaussian_remainder_even(0.5 * c * a * a, n_star)

    def tail_integrand(a):
        return a ** (alpha2 - 1.0) * np.exp(-0.5 * c * a * a)

    split = min(1.0, 2.0 / math.sqrt(c))
    head, err_head = adaptive_gauss_kronrod(head_integrand, 0.0, split, tol=tol / 4.0)
    tail, err_tail = integrate_tail(tail_integrand, split, tol=tol / 4.0)
    moments = 0.0
    g = 1.0  # (-c/2)^j / j!
    for j in range(n_star + 1):
        moments += g * split ** (alpha2 + 2 * j) / (alpha2 + 2 * j)
        g = g * (-0.5 * c) / (j + 1)
    achieved = err_head + err_tail
    if achieved > 10.0 * tol:
        raise QuadratureError("renorm_gamma_integral did not converge", achieved)
    return 2.0 ** (1.0 - x) * (head + tail + moments)
