import math
import warnings

import numpy as np
import pytest

from uscsim import effective as eff
from uscsim.errors import (
    DegenerateManifoldError,
    DomainError,
    NotRepresentableError,
    ResolventSingularError,
    ShapeError,
    ValidityWarning,
)
from uscsim.hilbert import HilbertSpace, Operator, create, destroy, embed, tensor


# ---------------------------------------------------------------------------
# lab-frame builders used as independent oracles


def lab_drive(R, theta):
    """Drive amplitude and detuning that produce a given (R, theta)."""
    return R * math.sin(2.0 * theta), -2.0 * R * math.cos(2.0 * theta)


def lab_two_cavity(d1, d2, dsig, omega, g, cut):
    space = HilbertSpace((2, cut, cut), ["qubit", "m1", "m2"])
    sm = embed(destroy(2), space, 0)
    a1 = embed(destroy(cut), space, 1)
    a2 = embed(destroy(cut), space, 2)
    h = (d1 * (a1.dag() @ a1) + d2 * (a2.dag() @ a2) + dsig * (sm.dag() @ sm)
         + omega * (sm + sm.dag())
         + g * (sm @ (a1.dag() + a2.dag()) + (a1 + a2) @ sm.dag()))
    return space, h


def lab_two_atoms(da, dsig, omega, g, cut):
    space = HilbertSpace((2, 2, cut), ["q1", "q2", "cav"])
    s1 = embed(destroy(2), space, 0)
    s2 = embed(destroy(2), space, 1)
    a = embed(destroy(cut), space, 2)
    h = (da * (a.dag() @ a) + dsig * (s1.dag() @ s1 + s2.dag() @ s2)
         + omega * (s1 + s1.dag() + s2 + s2.dag())
         + g * (a @ (s1.dag() + s2.dag()) + a.dag() @ (s1 + s2)))
    return space, h


def min_crossing_gap(build, x0, halfwidth, e_pair, npts=121):
    """Minimum gap between the two branches nearest e_pair over a sweep."""
    xs = np.linspace(x0 - halfwidth, x0 + halfwidth, npts)
    gaps = np.empty(npts)
    for i, x in enumerate(xs):
        ev = np.linalg.eigvalsh(build(x))
        sel = np.argsort(np.abs(ev - e_pair))[:2]
        gaps[i] = abs(ev[sel[0]] - ev[sel[1]])
    k = int(np.argmin(gaps))
    assert 0 < k < npts - 1, "avoided crossing not bracketed by the sweep"
    return gaps[k], xs[k]


def two_photon_splitting(g, R, theta, f, cut=5):
    res = eff.example_I_two_photon(g, R, theta, f, 0, 0)
    d2 = 2.0 * (1.0 - f) * R
    x0 = 2.0 * f * R + res.delta_resonance
    omega, dsig = lab_drive(R, theta)

    def build(d1):
        return lab_two_cavity(d1, d2, dsig, omega, g, cut)[1].data

    gap, loc = min_crossing_gap(build, x0, 5 * abs(res.g_eff) + 1e-3,
                                e_pair=0.5 * dsig + R)
    return gap, loc, res


def exchange_splitting(g, R, theta, cut=5):
    res = eff.example_III_two_atoms_one_photon(g, R, theta, 0)
    x0 = 4.0 * R + res.delta_resonance
    omega, dsig = lab_drive(R, theta)

    def build(da):
        return lab_two_atoms(da, dsig, omega, g, cut)[1].data

    gap, loc = min_crossing_gap(build, x0, 8 * abs(res.g_eff) + 2e-3,
                                e_pair=dsig + 2.0 * R)
    return gap, loc, res


# ---------------------------------------------------------------------------


class TestDressQubit:
    def test_resonant_drive(self):
        dq = eff.dress_qubit(2.0, 0.0)
        assert dq.theta == pytest.approx(math.pi / 4)
        assert dq.R == pytest.approx(2.0)
        assert dq.xi == pytest.approx(1.0)

    def test_arithmetic_point(self):
        dq = eff.dress_qubit(3.0, 8.0)
        assert dq.R == pytest.approx(5.0)
        assert dq.xi == pytest.approx(1.0 / 3.0)
        assert dq.cos_theta == pytest.approx(1.0 / math.sqrt(10.0))
        assert dq.sin_theta == pytest.approx(3.0 / math.sqrt(10.0))

    def test_invariant_formulas(self):
        for omega, dsig in [(1.0, 0.5), (0.3, -2.0), (2.5, 4.0), (0.01, 1.0)]:
            dq = eff.dress_qubit(omega, dsig)
            assert dq.R == pytest.approx(math.hypot(omega, dsig / 2.0))
            assert dq.cos_theta == pytest.approx(1.0 / math.sqrt(1.0 + dq.xi ** -2))
            assert dq.sin_theta == pytest.approx(1.0 / math.sqrt(1.0 + dq.xi ** 2))

    def test_undriven_limits_are_bare(self):
        # positive detuning: upper dressed state is the bare excited state
        assert eff.dress_qubit(0.0, 4.0).theta == pytest.approx(math.pi / 2)
        # negative detuning: upper dressed state is the bare ground state
        assert eff.dress_qubit(0.0, -4.0).theta == pytest.approx(0.0)

    def test_eigenvectors_diagonalize_driven_qubit(self):
        for omega, dsig in [(1.0, 0.7), (0.4, -1.1), (-0.8, 0.9), (2.0, 0.0)]:
            dq = eff.dress_qubit(omega, dsig)
            h = np.array([[0.0, omega], [omega, dsig]])
            c, s = dq.cos_theta, dq.sin_theta
            plus = np.array([c, s])
            minus = np.array([s, -c])
            e_plus = 0.5 * dsig + dq.R
            e_minus = 0.5 * dsig - dq.R
            assert np.allclose(h @ plus, e_plus * plus, atol=1e-12)
            assert np.allclose(h @ minus, e_minus * minus, atol=1e-12)

    def test_lowering_decomposition(self):
        dq = eff.dress_qubit(1.3, 0.6)
        c, s = dq.cos_theta, dq.sin_theta
        u = np.array([[s, c], [-c, s]])  # columns |->, |+>
        sm = np.array([[0.0, 1.0], [0.0, 0.0]])
        dressed = u.conj().T @ sm @ u
        cm, cp, cz = dq.lowering_coeffs
        sz = np.diag([-1.0, 1.0])
        expect = cm * sm + cp * sm.T + cz * sz
        assert np.max(np.abs(dressed - expect)) < 1e-14
        assert (cm, cp, cz) == pytest.approx((s * s, -c * c, s * c))

    def test_undefined_frame(self):
        with pytest.raises(DomainError):
            eff.dress_qubit(0.0, 0.0)


class TestEliminateSchriefferWolff:
    def test_single_state_shift(self):
        space = HilbertSpace((2,), ["s"])
        v = Operator(space, np.array([[0.0, 0.1], [0.1, 0.0]]))
        h = eff.eliminate_schrieffer_wolff([0.0, 2.0], v, [0])
        assert isinstance(h, np.ndarray)
        assert h.shape == (1, 1)
        assert h[0, 0] == pytest.approx(-0.1 ** 2 / 2.0)

    def test_lambda_system_off_diagonal(self):
        g1, g2, delta = 0.05, 0.08, 1.5
        space = HilbertSpace((3,), ["s"])
        vmat = np.zeros((3, 3))
        vmat[0, 2] = vmat[2, 0] = g1
        vmat[1, 2] = vmat[2, 1] = g2
        h = eff.eliminate_schrieffer_wolff([0.0, 0.0, delta], Operator(space, vmat),
                                           [0, 1])
        assert h.data[0, 1] == pytest.approx(-g1 * g2 / delta, rel=1e-14)
        assert h.is_hermitian()
        # lowest two exact eigenvalues are reproduced to third order
        exact = np.linalg.eigvalsh(np.diag([0.0, 0.0, delta]) + vmat)[:2]
        approx = np.sort(np.linalg.eigvalsh(h.data))
        big2 = (g1 * g1 + g2 * g2) ** 2
        assert np.max(np.abs(exact - approx)) < 2.0 * big2 / delta ** 3

    def test_raman_reduction_matrix_elements(self):
        gs, omega_s, delta_s = 0.11, 0.35, 4.0
        cut = 4
        atom_space = HilbertSpace((3,), ["atom"])
        a0e = np.zeros((3, 3))
        a0e[0, 2] = 1.0
        a1e = np.zeros((3, 3))
        a1e[1, 2] = 1.0
        op0e = Operator(atom_space, a0e)
        op1e = Operator(atom_space, a1e)
        ident = Operator(HilbertSpace((cut,), ["cav"]), np.eye(cut))
        v = (gs * (tensor(op0e.dag(), create(cut))
                   + tensor(op0e, destroy(cut)))
             + 0.5 * omega_s * (tensor(op1e, ident) + tensor(op1e.dag(), ident)))
        space = v.space
        energies = [delta_s if space.occupations(i)[0] == 2 else 0.0
                    for i in range(space.size)]
        slow = [i for i in range(space.size) if space.occupations(i)[0] != 2]
        h = eff.eliminate_schrieffer_wolff(energies, v, slow)
        for n in (1, 2):
            row = slow.index(space.index((1, n)))
            col = slow.index(space.index((0, n - 1)))
            want = -math.sqrt(n) * gs * omega_s / (2.0 * delta_s)
            assert h.data[row, col] == pytest.approx(want, rel=1e-12)

    def test_degenerate_coupled_pair_rejected(self):
        space = HilbertSpace((3,), ["s"])
        vmat = np.zeros((3, 3))
        vmat[0, 1] = vmat[1, 0] = 0.05
        with pytest.raises(DegenerateManifoldError, match="0.*1"):
            eff.eliminate_schrieffer_wolff([0.0, 0.0, 3.0], Operator(space, vmat), [0])

    def test_degenerate_uncoupled_state_ignored(self):
        space = HilbertSpace((3,), ["s"])
        vmat = np.zeros((3, 3))
        vmat[0, 2] = vmat[2, 0] = 0.1
        vmat[1, 2] = vmat[2, 1] = 0.3
        h = eff.eliminate_schrieffer_wolff([0.0, 0.0, 3.0], Operator(space, vmat), [0])
        assert h[0, 0] == pytest.approx(-0.01 / 3.0)

    def test_slow_block_must_vanish(self):
        space = HilbertSpace((3,), ["s"])
        vmat = np.zeros((3, 3))
        vmat[0, 1] = vmat[1, 0] = 0.2
        with pytest.raises(DomainError):
            eff.eliminate_schrieffer_wolff([0.0, 1.0, 2.0], Operator(space, vmat),
                                           [0, 1])

    def test_energy_count_mismatch(self):
        space = HilbertSpace((3,), ["s"])
        with pytest.raises(ShapeError):
            eff.eliminate_schrieffer_wolff([0.0, 1.0], Operator(space, np.zeros((3, 3))),
                                           [0])

    def test_index_set_validation(self):
        space = HilbertSpace((3,), ["s"])
        v = Operator(space, np.zeros((3, 3)))
        with pytest.raises(DomainError):
            eff.eliminate_schrieffer_wolff([0.0, 1.0, 2.0], v, [])
        with pytest.raises(DomainError):
            eff.eliminate_schrieffer_wolff([0.0, 1.0, 2.0], v, [0, 1, 2])
        with pytest.raises(DomainError):
            eff.eliminate_schrieffer_wolff([0.0, 1.0, 2.0], v, [5])


class TestEliminateResolvent:
    def test_decoupled_block_passes_through(self):
        space = HilbertSpace((4,), ["s"])
        mat = np.diag([0.1, -0.2, 3.0, 4.0]).astype(complex)
        mat[0, 1] = mat[1, 0] = 0.05
        p = eff.EliminationProblem(Operator(space, mat), (0, 1), E0=0.0)
        h = eff.eliminate_resolvent(p)
        assert np.allclose(h.data, mat[:2, :2])

    def test_two_level_matches_schrieffer_wolff(self):
        space = HilbertSpace((2,), ["s"])
        mat = np.array([[0.0, 0.07], [0.07, 1.9]])
        p = eff.EliminationProblem(Operator(space, mat), (0,), E0=0.0)
        hr = eff.eliminate_resolvent(p)
        v = Operator(space, np.array([[0.0, 0.07], [0.07, 0.0]]))
        hs = eff.eliminate_schrieffer_wolff([0.0, 1.9], v, [0])
        assert hr[0, 0] == pytest.approx(hs[0, 0], rel=1e-14)

    def test_e0_defaults_to_slow_mean(self):
        space = HilbertSpace((4,), ["s"])
        mat = np.diag([1.0, 3.0, 10.0, 12.0]).astype(complex)
        p = eff.EliminationProblem(Operator(space, mat), (0, 1))
        assert p.E0 == pytest.approx(2.0)
        p2 = eff.EliminationProblem(Operator(space, mat), (0, 1), E0=1.5)
        assert p2.E0 == 1.5

    def test_singular_reference_energy(self):
        space = HilbertSpace((3,), ["s"])
        mat = np.diag([0.0, 2.0, 5.0]).astype(complex)
        mat[0, 1] = mat[1, 0] = 0.01
        p = eff.EliminationProblem(Operator(space, mat), (0,), E0=2.0)
        with pytest.raises(ResolventSingularError):
            eff.eliminate_resolvent(p)

    def test_clustering_warning_carries_ratio(self):
        space = HilbertSpace((3,), ["s"])
        mat = np.diag([0.0, 1.0, 1.5]).astype(complex)
        mat[0, 1] = mat[1, 0] = 0.4
        with pytest.warns(ValidityWarning, match="ratio"):
            eff.EliminationProblem(Operator(space, mat), (0,))

    def test_problem_validation(self):
        space = HilbertSpace((3,), ["s"])
        op = Operator(space, np.diag([0.0, 1.0, 2.0]).astype(complex))
        with pytest.raises(DomainError):
            eff.EliminationProblem(op, ())
        with pytest.raises(DomainError):
            eff.EliminationProblem(op, (0, 1, 2))
        with pytest.raises(DomainError):
            eff.EliminationProblem(op, (7,))

    def test_difference_to_schrieffer_wolff_is_third_order(self):
        rng = np.random.default_rng(7)
        energies = np.array([0.0, 0.0, 5.0, 7.0, 9.0])
        vmat = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        vmat = vmat + vmat.conj().T
        vmat[:2, :2] = 0.0  # slow block empty, fast block keeps its couplings
        space = HilbertSpace((5,), ["s"])
        diffs = []
        lams = (0.01, 0.02, 0.04)
        for lam in lams:
            hs = eff.eliminate_schrieffer_wolff(energies, Operator(space, lam * vmat),
                                                [0, 1])
            p = eff.EliminationProblem(
                Operator(space, np.diag(energies) + lam * vmat), (0, 1))
            hr = eff.eliminate_resolvent(p)
            diffs.append(np.max(np.abs(hs.data - hr.data)))
        slope = np.polyfit(np.log(lams), np.log(diffs), 1)[0]
        assert slope >= 2.9

    def test_outputs_hermitian(self):
        rng = np.random.default_rng(3)
        mat = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        mat = mat + mat.conj().T + np.diag([0.0, 0.1, 8.0, 9.0, 10.0, 11.0]) * 10
        space = HilbertSpace((6,), ["s"])
        h = eff.eliminate_resolvent(eff.EliminationProblem(Operator(space, mat), (0, 1)))
        assert h.is_hermitian()


class TestCouplingManifold:
    def _two_cavity_setup(self, n, m, f=0.35, theta=math.pi / 4, g=0.02, cut=6):
        dq = eff.dress_qubit(*lab_drive(1.0, theta))
        h = eff.h_dressed_two_cavity(dq, g, 2 * f, 2 * (1 - f), (cut, cut))
        space = HilbertSpace((2, cut, cut), ["q", "m1", "m2"])
        return space, h

    def test_two_photon_intermediates(self):
        n = m = 1
        space, h = self._two_cavity_setup(n, m)
        slow = (space.index((1, n, m)), space.index((0, n + 1, m + 1)))
        man = eff.coupling_manifold(h, slow)
        expected = {
            space.index((q, nn, mm))
            for q in (0, 1)
            for nn, mm in [(n + 1, m), (n, m + 1), (n + 2, m + 1),
                           (n + 1, m + 2), (n, m - 1), (n - 1, m)]
        }
        assert set(man) == expected
        assert len(man) == 12

    def test_exchange_intermediates(self):
        n = 1
        dq = eff.dress_qubit(*lab_drive(1.0, math.pi / 4))
        h = eff.h_dressed_two_atoms(dq, 0.02, 4.0, 6)
        space = HilbertSpace((2, 2, 6), ["a1", "a2", "c"])
        slow = (space.index((0, 0, n + 1)), space.index((1, 1, n)))
        man = eff.coupling_manifold(h, slow)
        expected = {
            space.index(occ)
            for occ in [(1, 0, n + 1), (0, 1, n + 1), (1, 1, n + 1),
                        (1, 0, n), (0, 1, n), (0, 0, n),
                        (1, 0, n + 2), (0, 1, n + 2), (0, 0, n + 2),
                        (0, 1, n - 1), (1, 0, n - 1), (1, 1, n - 1)]
        }
        assert set(man) == expected

    def test_edge_occupations_truncate_the_listing(self):
        space, h = self._two_cavity_setup(0, 0)
        slow = (space.index((1, 0, 0)), space.index((0, 1, 1)))
        man = eff.coupling_manifold(h, slow)
        assert len(man) == 8  # nothing below the vacuum

    def test_deeper_walk_is_superset(self):
        space, h = self._two_cavity_setup(1, 1)
        slow = (space.index((1, 1, 1)), space.index((0, 2, 2)))
        one = set(eff.coupling_manifold(h, slow, steps=1))
        two = set(eff.coupling_manifold(h, slow, steps=2))
        assert one < two

    def test_step_validation(self):
        space, h = self._two_cavity_setup(0, 0)
        with pytest.raises(DomainError):
            eff.coupling_manifold(h, (0, 1), steps=0)


class TestDressedModelBuilders:
    def test_two_cavity_matches_lab_frame(self):
        omega, dsig = lab_drive(1.0, 0.7)
        dq = eff.dress_qubit(omega, dsig)
        cut = 4
        hd = eff.h_dressed_two_cavity(dq, 0.1, 0.8, 1.3, (cut, cut))
        _, hlab = lab_two_cavity(0.8, 1.3, dsig, omega, 0.1, cut)
        ev_d = np.linalg.eigvalsh(hd.data)
        ev_l = np.linalg.eigvalsh(hlab.data)
        # identical spectra up to the constant Delta_sigma/2
        assert np.max(np.abs(ev_l - 0.5 * dsig - ev_d)) < 1e-12

    def test_two_atoms_matches_lab_frame(self):
        omega, dsig = lab_drive(1.0, 0.7)
        dq = eff.dress_qubit(omega, dsig)
        cut = 4
        hd = eff.h_dressed_two_atoms(dq, 0.1, 3.7, cut)
        _, hlab = lab_two_atoms(3.7, dsig, omega, 0.1, cut)
        ev_d = np.linalg.eigvalsh(hd.data)
        ev_l = np.linalg.eigvalsh(hlab.data)
        assert np.max(np.abs(ev_l - dsig - ev_d)) < 1e-12


class TestProcessCatalogFormulas:
    def test_two_photon_special_point(self):
        g, r = 0.03, 1.0
        with pytest.warns(ValidityWarning):
            res = eff.example_I_two_photon(g, r, math.pi / 4, 0.5, 0, 0)
        assert res.g_eff.real == pytest.approx(g * g / r, rel=1e-12)

    def test_two_photon_vanishes_without_drive(self):
        res = eff.example_I_two_photon(0.05, 1.0, 0.0, 0.3, 0, 0)
        assert res.g_eff == 0.0

    def test_conversion_vanishes_at_symmetric_fraction(self):
        with warnings.catch_warnings():
            # equal detunings trip the guard band; the rate itself is the point
            warnings.simplefilter("ignore", ValidityWarning)
            res = eff.example_II_frequency_conversion(0.05, 1.0, math.pi / 4,
                                                      0.5, 0, 0)
        assert abs(res.g_eff) < 1e-18
        res2 = eff.example_II_frequency_conversion(0.05, 1.0, math.pi / 2, 0.3, 0, 0)
        assert abs(res2.g_eff) < 1e-18

    def test_exchange_special_point(self):
        g, r = 0.1, 1.0
        res = eff.example_III_two_atoms_one_photon(g, r, math.pi / 4, 0)
        assert res.g_eff.real == pytest.approx(g ** 3 / (6.0 * r * r), rel=1e-12)
        res0 = eff.example_III_two_atoms_one_photon(g, r, 0.0, 0)
        assert res0.g_eff == 0.0

    def test_result_layouts(self):
        res = eff.example_I_two_photon(0.02, 1.0, 0.5, 0.35, 1, 2)
        assert len(res.lamb_shifts) == 1
        assert len(res.dispersive) == 2 and len(res.dispersive[0]) == 1
        assert res.alpha_shift == 0.0
        res3 = eff.example_III_two_atoms_one_photon(0.02, 1.0, 0.5, 1)
        assert len(res3.lamb_shifts) == 2
        assert len(res3.dispersive) == 1 and len(res3.dispersive[0]) == 2
        assert res3.dispersive[0][0] == pytest.approx(2.0 * res3.lamb_shifts[0])
        assert res3.delta_resonance == pytest.approx(8.0 * res3.lamb_shifts[0] * 2)

    def test_fraction_domain(self):
        for f in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(DomainError):
                eff.example_I_two_photon(0.02, 1.0, 0.5, f, 0, 0)
            with pytest.raises(DomainError):
                eff.example_II_frequency_conversion(0.02, 1.0, 0.5, f, 0, 0)

    def test_invalid_rabi_and_occupation(self):
        with pytest.raises(DomainError):
            eff.example_I_two_photon(0.02, -1.0, 0.5, 0.4, 0, 0)
        with pytest.raises(DomainError):
            eff.example_III_two_atoms_one_photon(0.02, 1.0, 0.5, -1)

    def test_guard_band_flags_degenerate_fraction(self):
        # f = 1/2 puts both mode detunings exactly on a competing resonance
        with pytest.warns(ValidityWarning, match="separation"):
            eff.example_I_two_photon(0.05, 1.0, math.pi / 4, 0.5, 0, 0)

    def test_clean_fraction_does_not_warn(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            eff.example_I_two_photon(0.05, 1.0, math.pi / 4, 0.35, 0, 0)
            eff.example_II_frequency_conversion(0.05, 1.0, math.pi / 3, 0.3, 0, 0)
            eff.example_III_two_atoms_one_photon(0.1, 1.0, math.pi / 4, 0)

    def test_delta_equalizes_total_diagonals(self):
        # Once the swept detuning absorbs delta_resonance, the bare energy
        # difference cancels the block diagonal difference identically.
        g, r, th = 0.04, 1.0, 0.6
        for n, m in [(0, 0), (1, 2)]:
            res = eff.example_I_two_photon(g, r, th, 0.35, n, m)
            blk = eff.transition_block(res, eff.two_photon_process(n, m))
            d1 = 2 * 0.35 * r + res.delta_resonance
            d2 = 2 * 0.65 * r
            e_i = d1 * n + d2 * m + r + blk[0, 0].real
            e_f = d1 * (n + 1) + d2 * (m + 1) - r + blk[1, 1].real
            assert abs(e_i - e_f) < 1e-12
        for n in (0, 1):
            res = eff.example_III_two_atoms_one_photon(g, r, th, n)
            blk = eff.transition_block(res, eff.two_atom_exchange_process(n))
            da = 4 * r + res.delta_resonance
            e_i = da * (n + 1) - 2 * r + blk[0, 0].real
            e_f = da * n + 2 * r + blk[1, 1].real
            assert abs(e_i - e_f) < 1e-12


class TestSecondOrderCrossChecks:
    """The closed forms against a direct perturbative reduction."""

    def _sw_block(self, h, space, i_occ, f_occ):
        ii, ff = space.index(i_occ), space.index(f_occ)
        man = eff.coupling_manifold(h, (ii, ff))
        idx = [ii, ff] + list(man)
        sub = h.data[np.ix_(idx, idx)]
        h0 = np.real(np.diag(sub))
        v = Operator(HilbertSpace((len(idx),), ["p"]),
                     sub - np.diag(np.diag(sub)))
        hsw = eff.eliminate_schrieffer_wolff(h0, v, [0, 1])
        return hsw.data, h0[:2]

    def test_two_photon_block_against_direct_reduction(self):
        g, r, th, f, n, m = 0.02, 1.0, math.pi / 4, 0.35, 1, 1
        res = eff.example_I_two_photon(g, r, th, f, n, m)
        dq = eff.dress_qubit(*lab_drive(r, th))
        h = eff.h_dressed_two_cavity(dq, g, 2 * f * r, 2 * (1 - f) * r, (6, 6))
        space = HilbertSpace((2, 6, 6), ["q", "m1", "m2"])
        sw, e0 = self._sw_block(h, space, (1, n, m), (0, n + 1, m + 1))
        blk = eff.transition_block(res, eff.two_photon_process(n, m))
        # rate magnitude is exact at second order
        assert abs(sw[0, 1]) == pytest.approx(abs(blk[0, 1]), rel=1e-12)
        # diagonal difference (what delta_resonance compensates) is exact
        dd_sw = (sw[0, 0] - e0[0]) - (sw[1, 1] - e0[1])
        dd_cl = blk[0, 0] - blk[1, 1]
        assert abs(dd_sw - dd_cl) < 1e-12
        # the two routes differ only by an overall constant, and that constant
        # is the second-order shift carried equally by every dressed level
        s2, c2 = math.sin(th) ** 2, math.cos(th) ** 2
        dets = (2 * f * r, 2 * (1 - f) * r)
        alpha = -0.5 * g * g * (
            s2 * s2 * sum(1.0 / (d - 2 * r) for d in dets)
            + c2 * c2 * sum(1.0 / (d + 2 * r) for d in dets)
            + 2 * s2 * c2 * sum(1.0 / d for d in dets))
        offset = (sw[0, 0] - e0[0]) - blk[0, 0]
        assert offset.real == pytest.approx(alpha, rel=1e-10)

    def test_conversion_block_against_direct_reduction(self):
        g, r, th, f, n, m = 0.02, 1.0, math.pi / 3, 0.3, 1, 1
        res = eff.example_II_frequency_conversion(g, r, th, f, n, m)
        dq = eff.dress_qubit(*lab_drive(r, th))
        h = eff.h_dressed_two_cavity(dq, g, 2 * f * r, 2 * (f - 1) * r, (6, 6))
        space = HilbertSpace((2, 6, 6), ["q", "m1", "m2"])
        sw, e0 = self._sw_block(h, space, (1, n, m + 1), (0, n + 1, m))
        blk = eff.transition_block(res, eff.frequency_conversion_process(n, m))
        assert abs(sw[0, 1]) == pytest.approx(abs(blk[0, 1]), rel=1e-12)
        dd_sw = (sw[0, 0] - e0[0]) - (sw[1, 1] - e0[1])
        assert abs(dd_sw - (blk[0, 0] - blk[1, 1])) < 1e-12

    def test_exchange_diagonals_against_direct_reduction(self):
        # third-order rate is invisible at second order, the shifts are not
        g, r, th, n = 0.02, 1.0, math.pi / 4, 1
        res = eff.example_III_two_atoms_one_photon(g, r, th, n)
        dq = eff.dress_qubit(*lab_drive(r, th))
        h = eff.h_dressed_two_atoms(dq, g, 4 * r, 6)
        space = HilbertSpace((2, 2, 6), ["a1", "a2", "c"])
        sw, e0 = self._sw_block(h, space, (0, 0, n + 1), (1, 1, n))
        blk = eff.transition_block(res, eff.two_atom_exchange_process(n))
        dd_sw = (sw[0, 0] - e0[0]) - (sw[1, 1] - e0[1])
        assert abs(dd_sw - (blk[0, 0] - blk[1, 1])) < 1e-12


class TestResolventReproducesRates:
    def _rate(self, h, space, i_occ, f_occ):
        ii, ff = space.index(i_occ), space.index(f_occ)
        man = eff.coupling_manifold(h, (ii, ff))
        idx = [ii, ff] + list(man)
        sub = Operator(HilbertSpace((len(idx),), ["p"]),
                       h.data[np.ix_(idx, idx)])
        heff = eff.eliminate_resolvent(eff.EliminationProblem(sub, (0, 1)))
        return heff.data[0, 1]

    def test_two_photon_rate(self):
        g, r, th, f, n, m = 0.02, 1.0, math.pi / 4, 0.35, 1, 1
        res = eff.example_I_two_photon(g, r, th, f, n, m)
        dq = eff.dress_qubit(*lab_drive(r, th))
        d1 = 2 * f * r + res.delta_resonance
        h = eff.h_dressed_two_cavity(dq, g, d1, 2 * (1 - f) * r, (6, 6))
        space = HilbertSpace((2, 6, 6), ["q", "m1", "m2"])
        off = self._rate(h, space, (1, n, m), (0, n + 1, m + 1))
        want = abs(res.g_eff) * math.sqrt((n + 1) * (m + 1))
        assert abs(off) == pytest.approx(want, rel=0.02)

    def test_conversion_rate(self):
        g, r, th, f, n, m = 0.02, 1.0, math.pi / 3, 0.3, 1, 1
        res = eff.example_II_frequency_conversion(g, r, th, f, n, m)
        dq = eff.dress_qubit(*lab_drive(r, th))
        d1 = 2 * f * r + res.delta_resonance
        h = eff.h_dressed_two_cavity(dq, g, d1, 2 * (f - 1) * r, (6, 6))
        space = HilbertSpace((2, 6, 6), ["q", "m1", "m2"])
        off = self._rate(h, space, (1, n, m + 1), (0, n + 1, m))
        want = abs(res.g_eff) * math.sqrt((n + 1) * (m + 1))
        assert abs(off) == pytest.approx(want, rel=0.02)

    def test_exchange_rate_third_order(self):
        g, r, th, n = 0.02, 1.0, math.pi / 4, 1
        res = eff.example_III_two_atoms_one_photon(g, r, th, n)
        dq = eff.dress_qubit(*lab_drive(r, th))
        da = 4 * r + res.delta_resonance
        h = eff.h_dressed_two_atoms(dq, g, da, 6)
        space = HilbertSpace((2, 2, 6), ["a1", "a2", "c"])
        off = self._rate(h, space, (0, 0, n + 1), (1, 1, n))
        want = abs(res.g_eff) * math.sqrt(n + 1)
        assert abs(off) == pytest.approx(want, rel=0.02)

    def test_exchange_fourteen_state_splitting(self):
        # sweep the photon detuning through the fine-tuned crossing inside
        # the projected slow-pair-plus-intermediates instance
        g, r, th, n = 0.1, 1.0, math.pi / 4, 1
        res = eff.example_III_two_atoms_one_photon(g, r, th, n)
        dq = eff.dress_qubit(*lab_drive(r, th))
        x0 = 4 * r + res.delta_resonance
        space = HilbertSpace((2, 2, 6), ["a1", "a2", "c"])
        hc = eff.h_dressed_two_atoms(dq, g, x0, 6)
        ii, ff = space.index((0, 0, n + 1)), space.index((1, 1, n))
        man = eff.coupling_manifold(hc, (ii, ff))
        idx = [ii, ff] + list(man)
        assert len(idx) == 14

        geff = abs(res.g_eff)

        def build(da):
            h = eff.h_dressed_two_atoms(dq, g, da, 6)
            return h.data[np.ix_(idx, idx)]

        def pair_energy(da):
            return -2 * r + (n + 1) * da

        xs = np.linspace(x0 - 8 * geff, x0 + 8 * geff, 121)
        gaps = []
        for da in xs:
            ev = np.linalg.eigvalsh(build(da))
            sel = np.argsort(np.abs(ev - pair_energy(da)))[:2]
            gaps.append(abs(ev[sel[0]] - ev[sel[1]]))
        k = int(np.argmin(gaps))
        assert 0 < k < len(xs) - 1
        want = 2.0 * geff * math.sqrt(n + 1)
        assert gaps[k] == pytest.approx(want, rel=0.10)
        assert abs(xs[k] - x0) < 0.10 * abs(res.delta_resonance)


class TestFullModelOracles:
    def test_two_photon_splitting(self):
        gap, loc, res = two_photon_splitting(0.05, 1.0, math.pi / 4, 0.35)
        assert gap == pytest.approx(2.0 * abs(res.g_eff), rel=0.05)
        x0 = 2 * 0.35 + res.delta_resonance
        assert abs(loc - x0) < 0.10 * abs(res.delta_resonance)

    def test_conversion_splitting(self):
        g, r, th, f = 0.05, 1.0, math.pi / 3, 0.3
        res = eff.example_II_frequency_conversion(g, r, th, f, 0, 0)
        omega, dsig = lab_drive(r, th)
        d2 = 2 * (f - 1) * r
        x0 = 2 * f * r + res.delta_resonance

        def build(d1):
            return lab_two_cavity(d1, d2, dsig, omega, g, 5)[1].data

        gap, loc = min_crossing_gap(build, x0, 5 * abs(res.g_eff) + 1e-3,
                                    e_pair=0.5 * dsig + r + d2)
        assert gap == pytest.approx(2.0 * abs(res.g_eff), rel=0.05)
        assert abs(loc - x0) < 0.10 * abs(res.delta_resonance)

    def test_exchange_splitting(self):
        gap, loc, res = exchange_splitting(0.1, 1.0, math.pi / 4)
        assert gap == pytest.approx(2.0 * abs(res.g_eff), rel=0.10)
        x0 = 4.0 + res.delta_resonance
        assert abs(loc - x0) < 0.10 * abs(res.delta_resonance)

    def test_two_photon_scaling_exponent(self):
        gaps = [two_photon_splitting(g, 1.0, math.pi / 4, 0.35)[0]
                for g in (0.02, 0.04)]
        exponent = math.log(gaps[1] / gaps[0]) / math.log(2.0)
        assert 1.9 <= exponent <= 2.1

    def test_exchange_scaling_exponent(self):
        gaps = [exchange_splitting(g, 1.0, math.pi / 4)[0] for g in (0.05, 0.1)]
        exponent = math.log(gaps[1] / gaps[0]) / math.log(2.0)
        assert 2.85 <= exponent <= 3.15


class TestTransitionProcess:
    def test_fock_factors(self):
        assert eff.two_photon_process(0, 0).fock_factor == pytest.approx(1.0)
        assert eff.two_photon_process(1, 2).fock_factor == pytest.approx(
            math.sqrt(2.0 * 3.0))
        assert eff.two_atom_exchange_process(3).fock_factor == pytest.approx(2.0)
        double = eff.TransitionProcess((0,), (2,), (1,), (-1,))
        assert double.fock_factor == pytest.approx(math.sqrt(2.0))

    def test_delta_n(self):
        assert eff.frequency_conversion_process(0, 0).delta_n == (1, -1)

    def test_validation(self):
        with pytest.raises(ShapeError):
            eff.TransitionProcess((0,), (1, 2), (1,), (-1,))
        with pytest.raises(DomainError):
            eff.TransitionProcess((0,), (-1,), (1,), (-1,))
        with pytest.raises(DomainError):
            eff.TransitionProcess((0,), (1,), (2,), (-1,))
        with pytest.raises(DomainError):
            eff.TransitionProcess((), (), (), ())


class TestSecondQuantizedFit:
    def _blocks(self, g=0.05, r=1.0, th=math.pi / 4, f=0.35):
        out = {}
        for n, m in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 2)]:
            res = eff.example_I_two_photon(g, r, th, f, n, m)
            out[(n, m)] = eff.transition_block(res, eff.two_photon_process(n, m))
        return out

    def test_single_block_pins_rate_and_detuning(self):
        blocks = self._blocks()
        res = eff.example_I_two_photon(0.05, 1.0, math.pi / 4, 0.35, 0, 0)
        fit = eff.second_quantized_fit(blocks[(0, 0)], eff.two_photon_process(0, 0))
        assert fit.g_eff == pytest.approx(res.g_eff, abs=1e-10)
        assert fit.delta_resonance == pytest.approx(res.delta_resonance, abs=1e-10)
        reco = eff.transition_block(fit, eff.two_photon_process(0, 0))
        assert np.max(np.abs(reco - blocks[(0, 0)])) < 1e-12

    def test_multi_block_round_trip(self):
        blocks = self._blocks()
        res = eff.example_I_two_photon(0.05, 1.0, math.pi / 4, 0.35, 0, 0)
        fit = eff.second_quantized_fit(
            blocks[(0, 0)], eff.two_photon_process(0, 0),
            extra=[(eff.two_photon_process(1, 0), blocks[(1, 0)]),
                   (eff.two_photon_process(0, 1), blocks[(0, 1)])])
        assert fit.lamb_shifts[0] == pytest.approx(res.lamb_shifts[0], abs=1e-12)
        assert fit.dispersive[0][0] == pytest.approx(res.dispersive[0][0], abs=1e-12)
        assert fit.dispersive[1][0] == pytest.approx(res.dispersive[1][0], abs=1e-12)
        assert abs(fit.alpha_shift) < 1e-12
        for n, m in [(1, 1), (2, 2)]:
            reval = eff.transition_block(fit, eff.two_photon_process(n, m))
            assert np.max(np.abs(reval - blocks[(n, m)])) < 1e-10

    def test_fock_scaling_across_occupations(self):
        blocks = self._blocks()
        rates = []
        for (n, m), blk in blocks.items():
            fit = eff.second_quantized_fit(blk, eff.two_photon_process(n, m))
            rates.append(fit.g_eff)
        assert np.max(np.abs(np.diff(rates))) < 1e-12

    def test_zero_off_diagonal_means_zero_rate(self):
        blk = np.diag([0.4, 0.7]).astype(complex)
        fit = eff.second_quantized_fit(blk, eff.two_photon_process(0, 0))
        assert fit.g_eff == 0.0

    def test_delta_sign_for_photon_absorption(self):
        res = eff.example_III_two_atoms_one_photon(0.1, 1.0, math.pi / 4, 0)
        blk = eff.transition_block(res, eff.two_atom_exchange_process(0))
        fit = eff.second_quantized_fit(blk, eff.two_atom_exchange_process(0))
        assert fit.delta_resonance == pytest.approx(res.delta_resonance, rel=1e-10)

    def test_conversion_delta_matches(self):
        res = eff.example_II_frequency_conversion(0.05, 1.0, math.pi / 3, 0.3, 1, 2)
        proc = eff.frequency_conversion_process(1, 2)
        fit = eff.second_quantized_fit(eff.transition_block(res, proc), proc)
        assert fit.delta_resonance == pytest.approx(res.delta_resonance, rel=1e-10)

    def test_inconsistent_scaling_rejected(self):
        blocks = self._blocks()
        bad = blocks[(1, 0)].copy()
        bad[0, 1] *= 1.5
        bad[1, 0] = np.conj(bad[0, 1])
        with pytest.raises(NotRepresentableError, match="rate"):
            eff.second_quantized_fit(blocks[(0, 0)], eff.two_photon_process(0, 0),
                                     extra=[(eff.two_photon_process(1, 0), bad)])

    def test_non_hermitian_rejected(self):
        blk = np.array([[0.0, 0.1], [0.3, 0.0]], dtype=complex)
        with pytest.raises(NotRepresentableError):
            eff.second_quantized_fit(blk, eff.two_photon_process(0, 0))

    def test_inconsistent_diagonals_rejected(self):
        # a process that changes nothing forces equal diagonals
        proc = eff.TransitionProcess((1,), (1,), (1,), (1,))
        blk = np.array([[0.5, 0.0], [0.0, 0.7]], dtype=complex)
        with pytest.raises(NotRepresentableError, match="inconsistent"):
            eff.second_quantized_fit(blk, proc)

    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            eff.second_quantized_fit(np.zeros((3, 3)), eff.two_photon_process(0, 0))


class TestEffectiveResultValidation:
    def test_non_finite_rate_rejected(self):
        with pytest.raises(DomainError):
            eff.EffectiveResult(g_eff=float("nan"), lamb_shifts=(0.0,),
                                dispersive=((0.0,),), delta_resonance=0.0)

    def test_ragged_dispersive_rejected(self):
        with pytest.raises(ShapeError):
            eff.EffectiveResult(g_eff=0.1, lamb_shifts=(0.0,),
                                dispersive=((0.0,), (0.0, 1.0)),
                                delta_resonance=0.0)

    def test_block_layout_mismatch_rejected(self):
        res = eff.example_I_two_photon(0.02, 1.0, 0.5, 0.35, 0, 0)
        with pytest.raises(ShapeError):
            eff.transition_block(res, eff.two_atom_exchange_process(0))
