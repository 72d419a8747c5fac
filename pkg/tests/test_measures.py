import numpy as np
import pytest

from besselbridges.measures import BumpH, FiniteMeasure, PolyH, h_from_record


class TestFiniteMeasure:
    def test_integrate_examples(self):
        atom = FiniteMeasure.atom(0.5, 1.0)
        assert atom.integrate(lambda r: r) == pytest.approx(0.5)
        leb = FiniteMeasure.lebesgue()
        assert leb.integrate(lambda r: r * r) == pytest.approx(1.0 / 3.0, abs=1e-10)
        mixed = FiniteMeasure.lebesgue(0.5) + FiniteMeasure.atom(0.25, 2.0)
        assert mixed.integrate(lambda r: np.ones_like(r)) == pytest.approx(2.5)

    def test_total_mass(self):
        assert FiniteMeasure.zero().total_mass() == 0.0
        assert FiniteMeasure.lebesgue().total_mass() == pytest.approx(1.0)
        assert FiniteMeasure.atom(0.5, 3.0).total_mass() == pytest.approx(3.0)

    def test_linearity_random_instances(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            w1, w2 = rng.uniform(0.1, 2.0, 2)
            r1, r2 = sorted(rng.uniform(0.05, 0.95, 2))
            if r1 == r2:
                continue
            m1 = FiniteMeasure.atom(r1, w1) + FiniteMeasure.lebesgue(w2)
            m2 = FiniteMeasure.atom(r2, w2)
            f = lambda r: np.cos(3.0 * r) + 1.5
            g = lambda r: r ** 2
            combined = (m1 + m2).integrate(f)
            assert combined == pytest.approx(m1.integrate(f) + m2.integrate(f),
                                             abs=1e-9)
            both = m1.integrate(lambda r: 2.0 * f(r) + 3.0 * g(r))
            assert both == pytest.approx(2.0 * m1.integrate(f)
                                         + 3.0 * m1.integrate(g), abs=1e-9)

    def test_nonnegativity(self):
        m = FiniteMeasure.lebesgue(0.7) + FiniteMeasure.atom(0.3, 0.2)
        assert m.integrate(lambda r: np.abs(np.sin(7 * r))) >= 0.0

    def test_endpoint_atoms_rejected(self):
        with pytest.raises(ValueError):
            FiniteMeasure.atom(0.0, 1.0)
        with pytest.raises(ValueError):
            FiniteMeasure.atom(1.0, 1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            FiniteMeasure(breaks=(0.0, 0.5, 0.5, 1.0), values=(1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            FiniteMeasure(breaks=(0.0, 1.0), values=(-1.0,))
        with pytest.raises(ValueError):
            FiniteMeasure(atoms=((0.5, -1.0),))
        with pytest.raises(ValueError):
            FiniteMeasure(atoms=((0.5, 1.0), (0.5, 2.0)))

    def test_record_round_trip(self):
        m = FiniteMeasure(atoms=((0.25, 2.0),), breaks=(0.0, 0.5, 1.0),
                          values=(0.5, 0.0))
        again = FiniteMeasure.from_record(m.to_record())
        assert again == m

    def test_mirrored(self):
        m = FiniteMeasure(atoms=((0.3, 1.0),), breaks=(0.0, 0.4, 1.0),
                          values=(2.0, 0.0))
        mm = m.mirrored()
        assert mm.atoms == ((0.7, 1.0),)
        assert mm.total_mass() == pytest.approx(m.total_mass())


class TestTestFunctions:
    def test_poly_boundary_zeros(self):
        h = PolyH((1.0, 2.0, -0.7))
        eps = 1e-9
        for r in (0.0, 1.0):
            assert h.value(np.array([r]))[0] == 0.0
        # first derivative vanishes too: h(eps) = O(eps^2) at both ends
        assert abs(h.value(np.array([eps]))[0]) < 10 * eps ** 2
        assert abs(h.value(np.array([1.0 - eps]))[0]) < 10 * eps ** 2

    def test_poly_second_derivative_fd(self):
        h = PolyH((1.0, -0.5, 0.3))
        x = np.array([0.3, 0.6, 0.9])
        step = 1e-5
        fd = (h.value(x + step) - 2 * h.value(x) + h.value(x - step)) / step ** 2
        np.testing.assert_allclose(h.second_derivative(x), fd, atol=1e-4)

    def test_bump_support_and_smoothness(self):
        h = BumpH((0.2, 0.8))
        r = np.array([0.0, 0.1, 0.2, 0.5, 0.8, 0.95])
        vals = h.value(r)
        assert vals[0] == vals[1] == vals[2] == 0.0
        assert vals[3] == pytest.approx(1.0)
        # C^2 at the support edge: second derivative tends to 0 there
        for d in (1e-5, 1e-7):
            edge = h.second_derivative(np.array([0.2 + d]))[0]
            assert abs(edge) < 2e3 * d * 1.5
        assert h.second_derivative(np.array([0.2]))[0] == 0.0

    def test_bump_validation(self):
        with pytest.raises(ValueError):
            BumpH((0.0, 0.5))
        with pytest.raises(ValueError):
            BumpH((0.6, 0.4))

    def test_from_record(self):
        assert h_from_record({"family": "poly", "params": [1.0]}).family == "poly"
        assert h_from_record({"family": "bump", "params": [0.3, 0.7]}).family == "bump"
        with pytest.raises(ValueError):
            h_from_record({"family": "spline", "params": []})
