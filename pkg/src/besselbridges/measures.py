"""Finite Borel measures on [0, 1] (atoms plus piecewise-constant density)
and the C^2 test functions h driving the bridge identities.

Measures are declared in CLI configs as
``{"atoms": [[r, w], ...], "density": {"breaks": [...], "values": [...]}}``
and test functions as ``{"family": "poly" | "bump", "params": [...]}``.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quadrature import adaptive_gauss_kronrod

__all__ = ["FiniteMeasure", "TestFunctionH", "PolyH", "BumpH", "h_from_record"]


@dataclass(frozen=True)
class FiniteMeasure:
    """Nonnegative finite measure: point masses plus a step-function density.

    Atom locations must lie strictly inside (0, 1): endpoint atoms are
    invisible to every downstream formula and are rejected outright.
    """

    atoms: tuple = ()
    breaks: tuple = (0.0, 1.0)
    values: tuple = (0.0,)

    def __post_init__(self):
        atoms = tuple((float(r), float(w)) for r, w in self.atoms)
        breaks = tuple(float(b) for b in self.breaks)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "values", values)
        if len(breaks) < 2 or breaks[0] != 0.0 or breaks[-1] != 1.0:
            raise ValueError("density breaks must run from 0.0 to 1.0")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ValueError("density breaks must be strictly increasing")
        if len(values) != len(breaks) - 1:
            raise ValueError("need one density value per break interval")
        if any(v < 0 for v in values):
            raise ValueError("density values must be nonnegative")
        locs = [r for r, _ in atoms]
        if any(r2 <= r1 for r1, r2 in zip(locs, locs[1:])):
            raise ValueError("atom locations must be strictly increasing")
        if any(not (0.0 < r < 1.0) for r in locs):
            raise ValueError("atoms at the endpoints 0 and 1 are not allowed")
        if any(w < 0 for _, w in atoms):
            raise ValueError("atom weights must be nonnegative")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "FiniteMeasure":
        return FiniteMeasure()

    @staticmethod
    def lebesgue(scale: float = 1.0) -> "FiniteMeasure":
        return FiniteMeasure(values=(float(scale),))

    @staticmethod
    def atom(location: float, weight: float) -> "FiniteMeasure":
        return FiniteMeasure(atoms=((location, weight),))

    @staticmethod
    def indicator(lo: float, hi: float, scale: float = 1.0) -> "FiniteMeasure":
        breaks = sorted({0.0, float(lo), float(hi), 1.0})
        values = tuple(scale if lo <= 0.5 * (b1 + b2) <= hi else 0.0
                       for b1, b2 in zip(breaks[:-1], breaks[1:]))
        return FiniteMeasure(breaks=tuple(breaks), values=values)

    @staticmethod
    def from_record(rec: dict) -> "FiniteMeasure":
        atoms = tuple((r, w) for r, w in rec.get("atoms", []))
        dens = rec.get("density", {"breaks": [0.0, 1.0], "values": [0.0]})
        return FiniteMeasure(atoms=atoms, breaks=tuple(dens["breaks"]),
                             values=tuple(dens["values"]))

    def to_record(self) -> dict:
        return {
            "atoms": [[r, w] for r, w in self.atoms],
            "density": {"breaks": list(self.breaks), "values": list(self.values)},
        }

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "FiniteMeasure") -> "FiniteMeasure":
        merged = {}
        for r, w in self.atoms + other.atoms:
            merged[r] = merged.get(r, 0.0) + w
        atoms = tuple(sorted(merged.items()))
        breaks = tuple(sorted(set(self.breaks) | set(other.breaks)))
        values = []
        for b1, b2 in zip(breaks[:-1], breaks[1:]):
            mid = 0.5 * (b1 + b2)
            values.append(self.density_at(mid) + other.density_at(mid))
        return FiniteMeasure(atoms=atoms, breaks=breaks, values=tuple(values))

    def mirrored(self) -> "FiniteMeasure":
        """Image of the measure under r -> 1 - r."""
        atoms = tuple(sorted((1.0 - r, w) for r, w in self.atoms))
        breaks = tuple(sorted(1.0 - b for b in self.breaks))
        values = tuple(reversed(self.values))
        return FiniteMeasure(atoms=atoms, breaks=breaks, values=values)

    # -- evaluation --------------------------------------------------------

    def density_at(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, r, side="right") - 1,
                      0, len(self.values) - 1)
        return np.asarray(self.values, dtype=float)[idx]

    @property
    def atom_locations(self) -> np.ndarray:
        return np.array([r for r, _ in self.atoms])

    @property
    def atom_weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    @property
    def is_zero(self) -> bool:
        return not self.atoms and all(v == 0.0 for v in self.values)

    def total_mass(self) -> float:
        dens = sum(v * (b2 - b1) for v, b1, b2
                   in zip(self.values, self.breaks[:-1], self.breaks[1:]))
        return dens + sum(w for _, w in self.atoms)

    def integrate(self, f, tol: float = 1e-10) -> float:
        """Integral of a (vectorized) Borel function against the measure."""
        total = 0.0
        if self.atoms:
            locs = self.atom_locations
            total += float(np.dot(self.atom_weights, np.asarray(f(locs), dtype=float)))
        for v, b1, b2 in zip(self.values, self.breaks[:-1], self.breaks[1:]):
            if v != 0.0:
                piece, _ = adaptive_gauss_kronrod(f, b1, b2, tol=tol)
                total += v * piece
        return total

    @property
    def breakpoints(self) -> tuple:
        """Interior points where the measure changes character."""
        pts = set(b for b in self.breaks if 0.0 < b < 1.0)
        pts |= set(r for r, _ in self.atoms)
        return tuple(sorted(pts))


class TestFunctionH:
    """C^2 test function on [0, 1]; subclasses supply value and h''."""

    family = "base"
    breakpoints: tuple = ()

    def value(self, r):
        raise NotImplementedError

    def second_derivative(self, r):
        raise NotImplementedError


class PolyH(TestFunctionH):
    """h(r) = r^2 (1-r)^2 P(r): double zeros at both endpoints.

    params are the coefficients of P in ascending order (default P = 1).
    Evaluated in factored form, so h and h' vanish exactly at 0 and 1.
    """

    family = "poly"

    def __init__(self, params: Sequence[float] = (1.0,)):
        self.params = tuple(float(p) for p in params)
        self._p = np.asarray(self.params, dtype=float)
        self._dp = np.polynomial.polynomial.polyder(self._p) \
            if self._p.size > 1 else np.zeros(1)
        self._d2p = np.polynomial.polynomial.polyder(self._p, 2) \
            if self._p.size > 2 else np.zeros(1)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        w = r * (1.0 - r)
        return w * w * np.polynomial.polynomial.polyval(r, self._p)

    def second_derivative(self, r):
        # h = w^2 P with w = r(1-r), w' = 1-2r, w'' = -2:
        # h'' = 2((w')^2 - 2w) P + 4 w w' P' + w^2 P''
        r = np.asarray(r, dtype=float)
        w = r * (1.0 - r)
        wp = 1.0 - 2.0 * r
        p = np.polynomial.polynomial.polyval(r, self._p)
        dp = np.polynomial.polynomial.polyval(r, self._dp)
        d2p = np.polynomial.polynomial.polyval(r, self._d2p)
        return 2.0 * (wp * wp - 2.0 * w) * p + 4.0 * w * wp * dp + w * w * d2p


class BumpH(TestFunctionH):
    """h(r) = ((r-l)(u-r))^3, normalized to peak 1, supported on [l, u].

    The cubic zeros at the support edges make h a C^2 function on (0, 1)
    with compact support strictly inside the interval.
    """

    family = "bump"

    def __init__(self, params: Sequence[float] = (0.2, 0.8)):
        lo, hi = float(params[0]), float(params[1])
        if not (0.0 < lo < hi < 1.0):
            raise ValueError("bump support must satisfy 0 < l < u < 1")
        self.lo, self.hi = lo, hi
        self.params = (lo, hi)
        self.breakpoints = (lo, hi)
        self._norm = (0.25 * (hi - lo) ** 2) ** 3

    def _inside(self, r):
        return (r >= self.lo) & (r <= self.hi)

    def value(self, r):
        # factored form keeps the triple zeros at the support edges exact
        r = np.asarray(r, dtype=float)
        w = np.where(self._inside(r), (r - self.lo) * (self.hi - r), 0.0)
        return w ** 3 / self._norm

    def second_derivative(self, r):
        # h = w^3 / norm with w'' = -2: h'' = 6 w ((w')^2 - w) / norm
        r = np.asarray(r, dtype=float)
        inside = self._inside(r)
        w = np.where(inside, (r - self.lo) * (self.hi - r), 0.0)
        wp = self.hi + self.lo - 2.0 * r
        return 6.0 * w * (wp * wp - w) / self._norm * inside


def h_from_record(rec: dict) -> TestFunctionH:
    family = rec.get("family")
    params = rec.get("params", None)
    if family == "poly":
        return PolyH(tuple(params) if params else (1.0,))
    if family == "bump":
        return BumpH(tuple(params) if params else (0.2, 0.8))
    raise ValueError(f"unknown test-function family {family!r}")
