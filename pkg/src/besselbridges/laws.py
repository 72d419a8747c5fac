"""Closed-form squared-Bessel and Bessel laws on [0, 1].

Transition densities, bridge marginals pinned at 0 on both ends, the
weighted pinned-bridge kernel Sigma, conditional Laplace transforms of
quadratic functionals, and exact expectations of exponential functionals
exp(-<m, X^2>).  All Gamma/power prefactors are assembled in log space so
dimensions near zero and kernels that blow up at the interval ends stay
finite as long as the final value does.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from . import ode
from .measures import FiniteMeasure
from .specfun import bessel_i_scaled, log_gamma

__all__ = [
    "Dimension",
    "ExpFunctional",
    "besq_transition",
    "bessel_transition",
    "besq_bridge_marginal",
    "bridge_marginal",
    "sigma_eval",
    "sigma_terms",
    "conditional_laplace",
    "bridge_expectation",
    "weighted_first_moment",
]


@dataclass(frozen=True)
class Dimension:
    """Bessel dimension delta > 0 with its derived constants."""

    delta: float

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError("dimension must be positive")

    @property
    def nu(self) -> float:
        return 0.5 * self.delta - 1.0

    @property
    def kappa(self) -> float:
        return 0.25 * (self.delta - 3.0) * (self.delta - 1.0)

    @property
    def taylor_k(self) -> int:
        return math.floor(0.5 * (3.0 - self.delta))


class ExpFunctional:
    """Linear combination sum_i gamma_i exp(-<m_i, X^2>).

    One ODE solution per distinct measure is solved at construction and
    shared by every evaluation that needs the C/D kernels.
    """

    def __init__(self, terms: Sequence[Tuple[float, FiniteMeasure]], label: str = ""):
        terms = tuple((float(g), m) for g, m in terms)
        if not terms:
            raise ValueError("an exponential functional needs at least one term")
        if any(not math.isfinite(g) for g, _ in terms):
            raise ValueError("coefficients must be finite")
        self.terms = terms
        self.label = label or f"{len(terms)}-term"
        cache = {}
        sols = []
        for _, m in terms:
            key = m
            if key not in cache:
                cache[key] = ode.solve(m)
            sols.append(cache[key])
        self.solutions = tuple(sols)

    @staticmethod
    def one() -> "ExpFunctional":
        return ExpFunctional([(1.0, FiniteMeasure.zero())], label="one")

    @staticmethod
    def single(measure: FiniteMeasure, label: str = "") -> "ExpFunctional":
        return ExpFunctional([(1.0, measure)], label=label)

    @property
    def measures(self) -> tuple:
        return tuple(m for _, m in self.terms)

    @property
    def breakpoints(self) -> tuple:
        pts = set()
        for sol in self.solutions:
            pts |= set(sol.breakpoints)
        return tuple(sorted(pts))


# -- transition densities ---------------------------------------------------


def besq_transition(delta: float, t: float, x: float, y: float) -> float:
    """Squared-Bessel transition density q^delta_t(x, y), y > 0."""
    if delta <= 0.0 or t <= 0.0 or x < 0.0 or y <= 0.0:
        raise ValueError("need delta > 0, t > 0, x >= 0, y > 0")
    nu = 0.5 * delta - 1.0
    if x == 0.0:
        log_q = (-0.5 * delta * math.log(2.0 * t) - log_gamma(0.5 * delta)
                 + (0.5 * delta - 1.0) * math.log(y) - y / (2.0 * t))
        return math.exp(log_q)
    z = math.sqrt(x * y) / t
    scaled = bessel_i_scaled(nu, z)
    if scaled <= 0.0:
        return 0.0
    log_q = (-math.log(2.0 * t) + 0.5 * nu * (math.log(y) - math.log(x))
             - (math.sqrt(x) - math.sqrt(y)) ** 2 / (2.0 * t) + math.log(scaled))
    return math.exp(log_q)


def bessel_transition(delta: float, t: float, a: float, b: float) -> float:
    """Bessel transition density p^delta_t(a, b) = 2 b q^delta_t(a^2, b^2)."""
    return 2.0 * b * besq_transition(delta, t, a * a, b * b)


# -- bridge marginals at 0-0 -------------------------------------------------


def _power_weighted_exp(z, power, log_norm, rate):
    """exp(log_norm) * z^power * exp(-rate z) with the z = 0 limit handled."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(log_norm + power * np.log(z) - rate * z)
    if power == 0.0:
        out = np.where(z == 0.0, math.exp(log_norm), out)
    elif power > 0.0:
        out = np.where(z == 0.0, 0.0, out)
    else:
        out = np.where(z == 0.0, math.inf, out)
    return out


def besq_bridge_marginal(delta: float, r: float, z) -> np.ndarray:
    """Density of X_r under the squared bridge: Gamma(delta/2, 1/(2r(1-r)))."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    z = np.asarray(z, dtype=float)
    tau = r * (1.0 - r)
    log_norm = -0.5 * delta * math.log(2.0 * tau) - log_gamma(0.5 * delta)
    return _power_weighted_exp(z, 0.5 * delta - 1.0, log_norm, 1.0 / (2.0 * tau))


def bridge_marginal(delta: float, r: float, a) -> np.ndarray:
    """Density of X_r under the Bessel bridge pinned at 0 on both ends."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    a = np.asarray(a, dtype=float)
    tau = r * (1.0 - r)
    log_norm = (-(0.5 * delta - 1.0) * math.log(2.0) - log_gamma(0.5 * delta)
                - 0.5 * delta * math.log(tau))
    return _power_weighted_exp(a * a, 0.5 * (delta - 1.0), log_norm, 1.0 / (2.0 * tau))


# -- pinned-bridge kernel Sigma ----------------------------------------------


def _sigma_prefactor(delta: float) -> float:
    return (1.0 - 0.5 * delta) * math.log(2.0) - log_gamma(0.5 * delta)


def sigma_eval(delta: float, sol_or_phi, r, a) -> np.ndarray:
    """Sigma^delta_r(Phi | a) for Phi = exp(-<m, X^2>) or a combination.

    With a single OdeSolution this is
    2^{1-delta/2}/Gamma(delta/2) * exp(-a^2 C_r / 2) * D_r^{delta/2};
    an ExpFunctional gets the coefficient-weighted sum over its terms.
    The a = 0 value is the analytic prefactor itself, no limit is taken.
    """
    r = np.asarray(r, dtype=float)
    a = np.asarray(a, dtype=float)
    if isinstance(sol_or_phi, ExpFunctional):
        total = 0.0
        for (g, _), sol in zip(sol_or_phi.terms, sol_or_phi.solutions):
            total = total + g * sigma_eval(delta, sol, r, a)
        return total
    sol = sol_or_phi
    log_pref = _sigma_prefactor(delta)
    prod = sol.product(r)
    return np.exp(log_pref + 0.5 * delta * (-np.log(prod))
                  - 0.5 * a * a * sol.psi_1 / prod)


def sigma_terms(delta: float, phi: ExpFunctional, r):
    """Per-term (A_i(r), C_i(r)) with Sigma = sum_i A_i exp(-C_i a^2 / 2)."""
    r = np.asarray(r, dtype=float)
    log_pref = _sigma_prefactor(delta)
    out = []
    for (g, _), sol in zip(phi.terms, phi.solutions):
        prod = sol.product(r)
        amp = g * np.exp(log_pref - 0.5 * delta * np.log(prod))
        out.append((amp, sol.psi_1 / prod))
    return out


def conditional_laplace(delta: float, sol: ode.OdeSolution, r, a) -> np.ndarray:
    """E[exp(-<m, X^2>) | X_r = a] under the Bessel bridge law."""
    r = np.asarray(r, dtype=float)
    a = np.asarray(a, dtype=float)
    tau = r * (1.0 - r)
    prod = sol.product(r)
    return np.exp(-0.5 * a * a * (sol.psi_1 / prod - 1.0 / tau)
                  + 0.5 * delta * np.log(tau / prod))


# -- exact expectations -------------------------------------------------------


def bridge_expectation(delta: float, phi: ExpFunctional) -> float:
    """E[Phi(X)] = sum_i gamma_i psi_1(m_i)^{-delta/2}."""
    return sum(g * sol.psi_1 ** (-0.5 * delta)
               for (g, _), sol in zip(phi.terms, phi.solutions))


def weighted_first_moment(delta: float, sol: ode.OdeSolution, r) -> np.ndarray:
    """E[X_r exp(-<m, X^2>)] in closed form."""
    r = np.asarray(r, dtype=float)
    log_ratio = log_gamma(0.5 * (delta + 1.0)) - log_gamma(0.5 * delta)
    return (math.sqrt(2.0) * math.exp(log_ratio)
            * sol.psi_1 ** (-0.5 * (delta + 1.0)) * np.sqrt(sol.product(r)))
