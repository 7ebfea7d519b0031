"""Adiabatic elimination engines and a catalog of engineered nonlinear processes.

Two generic reduction routes are provided: a second-order Schrieffer-Wolff
projection with symmetrized energy denominators, and a resolvent elimination
that folds an entire fast manifold into the slow block through a linear solve.
The resolvent route keeps the internal couplings of the fast block, so
higher-order processes (three-wave and beyond) survive the reduction.

On top of the engines sits a closed-form catalog of driven-qubit nonlinear
processes: two-photon emission, frequency conversion, and a two-atom/one-photon
exchange. Each returns the effective rate together with the Lamb and
dispersive shifts and the fine-tuning that places the crossing on resonance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegenerateManifoldError,
    DomainError,
    NotRepresentableError,
    ResolventSingularError,
    ShapeError,
    ValidityWarning,
)
from .hilbert import HilbertSpace, Operator, destroy, embed, identity

__all__ = [
    "DressedQubit",
    "dress_qubit",
    "EliminationProblem",
    "eliminate_schrieffer_wolff",
    "eliminate_resolvent",
    "coupling_manifold",
    "TransitionProcess",
    "two_photon_process",
    "frequency_conversion_process",
    "two_atom_exchange_process",
    "EffectiveResult",
    "transition_block",
    "example_I_two_photon",
    "example_II_frequency_conversion",
    "example_III_two_atoms_one_photon",
    "second_quantized_fit",
    "h_dressed_two_cavity",
    "h_dressed_two_atoms",
]


# ---------------------------------------------------------------------------
# dressed qubit


@dataclass(frozen=True)
class DressedQubit:
    """Eigenframe of a coherently driven two-level system.

    The driven qubit ``Delta_sigma |e><e| + Omega (|g><e| + |e><g|)`` has
    eigenstates ``|+> = cos(theta)|g> + sin(theta)|e>`` and
    ``|-> = sin(theta)|g> - cos(theta)|e>`` split by ``2R``.

    Attributes
    ----------
    Omega : float
        Drive amplitude.
    Delta_sigma : float
        Qubit detuning from the drive.
    theta : float
        Mixing angle, ``tan(theta) = 1/xi``.
    R : float
        Generalized Rabi frequency ``sqrt(Omega**2 + (Delta_sigma/2)**2)``.
    xi : float
        ``Omega / (Delta_sigma/2 + R)``; ``inf`` when the denominator vanishes.
    """

    Omega: float
    Delta_sigma: float
    theta: float
    R: float
    xi: float

    @property
    def cos_theta(self) -> float:
        return math.cos(self.theta)

    @property
    def sin_theta(self) -> float:
        return math.sin(self.theta)

    @property
    def lowering_coeffs(self) -> Tuple[float, float, float]:
        """Coefficients (c_minus, c_plus, c_z) of the bare lowering operator.

        In the dressed basis the bare ``sigma_minus`` decomposes as
        ``c_minus * stilde_minus + c_plus * stilde_plus + c_z * stilde_z`` with
        ``c_minus = sin(theta)**2``, ``c_plus = -cos(theta)**2`` and
        ``c_z = sin(theta) cos(theta)``.
        """
        s, c = self.sin_theta, self.cos_theta
        return (s * s, -c * c, s * c)


def dress_qubit(Omega: float, Delta_sigma: float) -> DressedQubit:
    """Diagonalize a driven two-level system.

    Parameters
    ----------
    Omega, Delta_sigma : float
        Drive amplitude and detuning; they must not both vanish.

    Returns
    -------
    DressedQubit

    Raises
    ------
    DomainError
        If ``Omega == Delta_sigma == 0`` (the frame is undefined).
    """
    if Omega == 0.0 and Delta_sigma == 0.0:
        raise DomainError("dressed frame undefined for Omega = Delta_sigma = 0")
    R = math.hypot(Omega, 0.5 * Delta_sigma)
    # atan2 picks the branch with sin(theta) >= 0 for Omega >= 0, covering the
    # undriven limits Delta_sigma < 0 -> theta = 0 and > 0 -> theta = pi/2.
    theta = 0.5 * (math.pi - math.atan2(2.0 * Omega, Delta_sigma))
    den = 0.5 * Delta_sigma + R
    xi = Omega / den if den != 0.0 else math.inf
    return DressedQubit(Omega=float(Omega), Delta_sigma=float(Delta_sigma),
                        theta=theta, R=R, xi=xi)


# ---------------------------------------------------------------------------
# generic elimination engines


def _wrap_reduced(h_eff: np.ndarray):
    # spaces of dimension one are not representable, hand the matrix back raw
    if h_eff.shape[0] == 1:
        return h_eff
    return Operator(HilbertSpace((h_eff.shape[0],), ["slow"]), h_eff)


def _block_indices(dim: int, slow: Iterable[int]) -> Tuple[np.ndarray, np.ndarray]:
    slow_list = sorted(set(int(i) for i in slow))
    if not slow_list:
        raise DomainError("slow index set is empty")
    if slow_list[0] < 0 or slow_list[-1] >= dim:
        raise DomainError(f"slow index out of range for dimension {dim}")
    if len(slow_list) >= dim:
        raise DomainError("slow index set must be a proper subset of the basis")
    fast = np.setdiff1d(np.arange(dim), slow_list)
    return np.asarray(slow_list), fast


@dataclass(frozen=True)
class EliminationProblem:
    """A Hamiltonian partitioned into a slow subspace and a fast remainder.

    Attributes
    ----------
    H : Operator
        Full (hermitian) Hamiltonian.
    slow_indices : tuple of int
        Basis indices spanning the retained subspace; nonempty proper subset.
    E0 : float, optional
        Reference energy of the slow manifold. Defaults to the mean of the
        slow diagonal entries of ``H``.

    A warning is emitted at construction when the slow and fast spectra are
    not clustered: the minimum slow/fast eigenvalue separation should exceed
    ten times the largest coupling matrix element.
    """

    H: Operator
    slow_indices: Tuple[int, ...]
    E0: Optional[float] = None

    def __post_init__(self):
        mat = self.H.data
        dim = mat.shape[0]
        slow, fast = _block_indices(dim, self.slow_indices)
        object.__setattr__(self, "slow_indices", tuple(int(i) for i in slow))
        if self.E0 is None:
            e0 = float(np.mean(np.real(mat[slow, slow])))
            object.__setattr__(self, "E0", e0)
        else:
            object.__setattr__(self, "E0", float(self.E0))
        coupling = mat[np.ix_(slow, fast)]
        gmax = float(np.max(np.abs(coupling))) if coupling.size else 0.0
        if gmax > 0.0:
            e_a = np.linalg.eigvalsh(mat[np.ix_(slow, slow)])
            e_b = np.linalg.eigvalsh(mat[np.ix_(fast, fast)])
            sep = float(np.min(np.abs(e_a[:, None] - e_b[None, :])))
            if sep <= 10.0 * gmax:
                warnings.warn(
                    "slow/fast manifolds are not well clustered: separation "
                    f"{sep:.3e} vs coupling {gmax:.3e} (ratio {sep / gmax:.2f})",
                    ValidityWarning,
                    stacklevel=2,
                )


def eliminate_schrieffer_wolff(H0_energies: Sequence[float], V: Operator,
                               slow: Iterable[int]) -> Operator:
    """Second-order perturbative reduction onto a slow subspace.

    Given unperturbed energies ``E_i`` and a coupling ``V`` with no matrix
    elements inside the slow block, the projected Hamiltonian is

        (H_eff)_ij = E_i delta_ij
                     + 1/2 sum_a V_ia V_aj [1/(E_i - E_a) + 1/(E_j - E_a)]

    with ``a`` running over the fast states.

    Parameters
    ----------
    H0_energies : sequence of float
        Diagonal energies, one per basis state of ``V.space``.
    V : Operator
        Coupling operator; its slow-slow block must vanish.
    slow : iterable of int
        Indices of the retained states.

    Returns
    -------
    Operator or ndarray
        ``k x k`` effective Hamiltonian on ``HilbertSpace((k,))``, rows ordered
        by ascending slow index. A single retained state comes back as a bare
        1x1 matrix, since spaces of dimension one are not representable.

    Raises
    ------
    DegenerateManifoldError
        If a needed denominator ``E_i - E_a`` vanishes while ``V_ia != 0``.
    DomainError
        If the slow block of ``V`` is not zero, or the index set is invalid.
    """
    energies = np.asarray(H0_energies, dtype=float)
    mat = V.data
    dim = mat.shape[0]
    if energies.shape != (dim,):
        raise ShapeError(
            f"expected {dim} energies for the coupling operator, got {energies.shape}"
        )
    slow_idx, fast_idx = _block_indices(dim, slow)
    scale = float(np.max(np.abs(mat))) if mat.size else 0.0
    v_aa = mat[np.ix_(slow_idx, slow_idx)]
    if scale > 0.0 and float(np.max(np.abs(v_aa))) > 1e-12 * scale:
        raise DomainError("coupling operator has matrix elements inside the slow block")

    v_ab = mat[np.ix_(slow_idx, fast_idx)]
    e_a = energies[slow_idx]
    e_b = energies[fast_idx]
    tol = 1e-12 * max(1.0, float(np.max(np.abs(energies))))
    # inverse denominators 1/(E_i - E_alpha), guarded where the coupling is live
    denom = e_a[:, None] - e_b[None, :]
    live = np.abs(v_ab) > 1e-14 * max(scale, 1e-300)
    bad = live & (np.abs(denom) < tol)
    if np.any(bad):
        i, a = np.argwhere(bad)[0]
        raise DegenerateManifoldError(
            f"slow state {int(slow_idx[i])} is degenerate with fast state "
            f"{int(fast_idx[a])} (E = {e_a[i]:.6g}) but couples to it"
        )
    inv = np.zeros_like(denom)
    ok = np.abs(denom) >= tol
    inv[ok] = 1.0 / denom[ok]

    h_eff = np.diag(e_a).astype(complex)
    h_eff += 0.5 * ((v_ab * inv) @ v_ab.conj().T + v_ab @ (v_ab * inv).conj().T)
    h_eff = 0.5 * (h_eff + h_eff.conj().T)
    return _wrap_reduced(h_eff)


def eliminate_resolvent(p: EliminationProblem) -> Operator:
    """Fold the fast manifold into the slow block through its resolvent.

    Computes ``H_eff = H_AA + H_AB (E0 - H_BB)^{-1} H_BA`` with a linear solve
    (no explicit inverse). Because ``H_BB`` keeps the couplings internal to
    the fast manifold, processes of any order supported by that manifold are
    retained. Returns the reduced Operator, or a bare 1x1 matrix when only
    one state is kept.

    Raises
    ------
    ResolventSingularError
        If ``E0`` is an eigenvalue of the fast block.
    """
    mat = p.H.data
    mat = 0.5 * (mat + mat.conj().T)
    dim = mat.shape[0]
    slow_idx, fast_idx = _block_indices(dim, p.slow_indices)
    h_aa = mat[np.ix_(slow_idx, slow_idx)]
    h_ab = mat[np.ix_(slow_idx, fast_idx)]
    h_bb = mat[np.ix_(fast_idx, fast_idx)]

    e_b = np.linalg.eigvalsh(h_bb)
    scale = max(1.0, float(np.max(np.abs(e_b))) if e_b.size else 0.0)
    if e_b.size and float(np.min(np.abs(e_b - p.E0))) < 1e-12 * scale:
        raise ResolventSingularError(
            f"reference energy {p.E0:.6g} lies in the spectrum of the fast block"
        )

    shifted = p.E0 * np.eye(len(fast_idx)) - h_bb
    x = np.linalg.solve(shifted, h_ab.conj().T)
    h_eff = h_aa + h_ab @ x
    h_eff = 0.5 * (h_eff + h_eff.conj().T)
    return _wrap_reduced(h_eff)


def coupling_manifold(H: Operator, slow_indices: Iterable[int],
                      steps: int = 1) -> Tuple[int, ...]:
    """Enumerate the intermediate states reached from a slow pair.

    Walks the coupling graph of ``H`` (nonzero off-diagonal entries) starting
    from ``slow_indices`` and returns every basis state within ``steps`` hops
    of any slow state, excluding the slow states themselves. With the default
    ``steps=1`` this is the full intermediate manifold of any process of order
    up to three between the slow states: a second-order path visits a common
    neighbor, a third-order path visits one neighbor of each endpoint.
    """
    if steps < 1:
        raise DomainError("steps must be >= 1")
    mat = H.data
    dim = mat.shape[0]
    slow_idx, _ = _block_indices(dim, slow_indices)
    adj = np.abs(mat) > 1e-12 * max(float(np.max(np.abs(mat))), 1e-300)
    np.fill_diagonal(adj, False)
    visited = set(int(i) for i in slow_idx)
    frontier = set(visited)
    for _ in range(steps):
        nxt = set()
        for i in frontier:
            nxt.update(int(j) for j in np.nonzero(adj[i])[0])
        frontier = nxt - visited
        visited |= nxt
        if not frontier:
            break
    return tuple(sorted(visited - set(int(i) for i in slow_idx)))


# ---------------------------------------------------------------------------
# transition processes and effective results


@dataclass(frozen=True)
class TransitionProcess:
    """Occupation data of a two-state transition |i> -> |f>.

    ``n_initial``/``n_final`` hold the photon numbers of each mode and
    ``s_initial``/``s_final`` the dressed-qubit signs (+1 upper, -1 lower)
    of each atom, in the two states.
    """

    n_initial: Tuple[int, ...]
    n_final: Tuple[int, ...]
    s_initial: Tuple[int, ...]
    s_final: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n_initial", tuple(int(n) for n in self.n_initial))
        object.__setattr__(self, "n_final", tuple(int(n) for n in self.n_final))
        object.__setattr__(self, "s_initial", tuple(int(s) for s in self.s_initial))
        object.__setattr__(self, "s_final", tuple(int(s) for s in self.s_final))
        if len(self.n_initial) != len(self.n_final):
            raise ShapeError("mode occupation tuples differ in length")
        if len(self.s_initial) != len(self.s_final):
            raise ShapeError("atom sign tuples differ in length")
        if not self.n_initial and not self.s_initial:
            raise DomainError("process involves no modes and no atoms")
        if any(n < 0 for n in self.n_initial + self.n_final):
            raise DomainError("photon numbers must be nonnegative")
        if any(s not in (-1, 1) for s in self.s_initial + self.s_final):
            raise DomainError("atom signs must be +1 or -1")

    @property
    def delta_n(self) -> Tuple[int, ...]:
        return tuple(nf - ni for ni, nf in zip(self.n_initial, self.n_final))

    @property
    def fock_factor(self) -> float:
        """Bosonic enhancement prod_k sqrt((max(n_k, n'_k))_(|dn_k|)).

        ``(x)_m`` is the falling factorial; each mode contributes the matrix
        element of ``a^m`` or ``a^dag^m`` between its two occupations.
        """
        out = 1.0
        for ni, nf in zip(self.n_initial, self.n_final):
            m = abs(nf - ni)
            if m:
                out *= math.sqrt(math.perm(max(ni, nf), m))
        return out


def two_photon_process(n: int, m: int) -> TransitionProcess:
    """Upper dressed state decays emitting one photon into each mode."""
    return TransitionProcess((n, m), (n + 1, m + 1), (1,), (-1,))


def frequency_conversion_process(n: int, m: int) -> TransitionProcess:
    """Photon moved from mode 2 to mode 1 while the dressed qubit flips."""
    return TransitionProcess((n, m + 1), (n + 1, m), (1,), (-1,))


def two_atom_exchange_process(n: int) -> TransitionProcess:
    """One photon absorbed, both dressed atoms raised."""
    return TransitionProcess((n + 1,), (n,), (-1, -1), (1, 1))


@dataclass(frozen=True)
class EffectiveResult:
    """Coefficients of an engineered transition in second-quantized form.

    Attributes
    ----------
    g_eff : complex
        Rate of the process; the block off-diagonal is ``g_eff`` times the
        bosonic Fock factor.
    lamb_shifts : tuple of float
        Drive-induced energy shift per atom.
    dispersive : tuple of tuple of float
        ``dispersive[k][j]`` couples photon number of mode ``k`` to the
        dressed sign of atom ``j``.
    delta_resonance : float
        Fine-tuning of the swept mode frequency that puts the transition on
        resonance once the shifts are accounted for.
    alpha_shift : float
        Overall constant offset.
    """

    g_eff: complex
    lamb_shifts: Tuple[float, ...]
    dispersive: Tuple[Tuple[float, ...], ...]
    delta_resonance: float
    alpha_shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "g_eff", complex(self.g_eff))
        object.__setattr__(self, "lamb_shifts", tuple(float(x) for x in self.lamb_shifts))
        object.__setattr__(
            self, "dispersive",
            tuple(tuple(float(x) for x in row) for row in self.dispersive),
        )
        if not math.isfinite(abs(self.g_eff)):
            raise DomainError("effective coupling is not finite")
        n_atoms = len(self.lamb_shifts)
        for row in self.dispersive:
            if len(row) != n_atoms:
                raise ShapeError("dispersive table rows must have one entry per atom")


def _diagonal_row(process: TransitionProcess, final: bool) -> np.ndarray:
    """Coefficient row of one diagonal entry in the unknowns (chi, lambda, alpha)."""
    ns = process.n_final if final else process.n_initial
    ss = process.s_final if final else process.s_initial
    k, j = len(ns), len(ss)
    row = np.empty(k * j + j + 1)
    for ki in range(k):
        for ji in range(j):
            row[ki * j + ji] = ns[ki] * ss[ji]
    row[k * j:k * j + j] = ss
    row[-1] = 1.0
    return row


def transition_block(result: EffectiveResult, process: TransitionProcess) -> np.ndarray:
    """Assemble the interaction-induced 2x2 block over {|i>, |f>}.

    Diagonal entries collect the dispersive and Lamb shifts evaluated at the
    process occupations plus the constant offset; the off-diagonal is
    ``g_eff`` times the Fock factor. The bare (free) energies are not
    included.
    """
    k = len(process.n_initial)
    j = len(process.s_initial)
    if len(result.dispersive) != k:
        raise ShapeError(
            f"result has {len(result.dispersive)} dispersive rows, process has {k} modes"
        )
    if len(result.lamb_shifts) != j:
        raise ShapeError(
            f"result has {len(result.lamb_shifts)} Lamb shifts, process has {j} atoms"
        )
    u = np.concatenate([
        np.array([result.dispersive[ki][ji] for ki in range(k) for ji in range(j)]),
        np.asarray(result.lamb_shifts, dtype=float),
        [result.alpha_shift],
    ])
    d_i = float(_diagonal_row(process, final=False) @ u)
    d_f = float(_diagonal_row(process, final=True) @ u)
    off = result.g_eff * process.fock_factor
    return np.array([[d_i, off], [np.conj(off), d_f]], dtype=complex)


# ---------------------------------------------------------------------------
# closed-form process catalog


def _shifts_two_mode(g: float, R: float, theta: float,
                     Delta1: float, Delta2: float) -> Tuple[float, float, float]:
    """Lamb shift and per-mode dispersive shifts of one dressed qubit.

    Second-order sums over the dressed ladders of both modes, with
    denominators ``Delta_i +- 2R``.
    """
    c4 = math.cos(theta) ** 4
    s4 = math.sin(theta) ** 4
    d1p, d1m = Delta1 + 2.0 * R, Delta1 - 2.0 * R
    d2p, d2m = Delta2 + 2.0 * R, Delta2 - 2.0 * R
    lam = 0.5 * g * g * (c4 * (1.0 / d1p + 1.0 / d2p) - s4 * (1.0 / d1m + 1.0 / d2m))
    chi1 = g * g * (c4 / d1p - s4 / d1m)
    chi2 = g * g * (c4 / d2p - s4 / d2m)
    return lam, chi1, chi2


def _guard_two_mode(g_eff: float, R: float, Delta1: float, Delta2: float) -> None:
    # the derivation assumes Delta_1 != Delta_2 and both away from +-R, +-2R
    special = (R, -R, 2.0 * R, -2.0 * R)
    dmin = min(abs(d - v) for d in (Delta1, Delta2) for v in special)
    dmin = min(dmin, abs(Delta1 - Delta2))
    if dmin < 10.0 * abs(g_eff):
        warnings.warn(
            "mode detunings approach a competing resonance: separation "
            f"{dmin:.3e} < 10 |g_eff| = {10.0 * abs(g_eff):.3e}; the "
            "effective two-level description is unreliable here",
            ValidityWarning,
            stacklevel=3,
        )


def _check_common(R: float, theta: float, n: int, m: int = 0) -> None:
    if R <= 0.0:
        raise DomainError("Rabi frequency R must be positive")
    if n < 0 or m < 0:
        raise DomainError("photon numbers must be nonnegative")
    del theta  # any real mixing angle is allowed


def example_I_two_photon(g: float, R: float, theta: float, f: float,
                         n: int, m: int) -> EffectiveResult:
    """Two-photon emission of a driven qubit into two detuned modes.

    With mode detunings ``Delta_1 = 2 f R`` and ``Delta_2 = 2 (1-f) R`` the
    upper dressed state converts into the lower one while each mode gains one
    photon. The rate is ``g**2 cos(theta) sin(theta)**3 / (R f (1-f))`` and
    the resonance is restored by shifting ``Delta_1`` by ``delta_resonance``.

    Raises
    ------
    DomainError
        If ``f`` is not strictly inside (0, 1).
    """
    if not 0.0 < f < 1.0:
        raise DomainError(f"splitting fraction f must lie in (0, 1), got {f}")
    _check_common(R, theta, n, m)
    d1 = 2.0 * f * R
    d2 = 2.0 * (1.0 - f) * R
    lam, chi1, chi2 = _shifts_two_mode(g, R, theta, d1, d2)
    g_eff = g * g * math.cos(theta) * math.sin(theta) ** 3 / (R * f * (1.0 - f))
    delta = 2.0 * lam + chi1 * (2 * n + 1) + chi2 * (2 * m + 1)
    _guard_two_mode(g_eff, R, d1, d2)
    return EffectiveResult(g_eff=g_eff, lamb_shifts=(lam,),
                           dispersive=((chi1,), (chi2,)),
                           delta_resonance=delta)


def example_II_frequency_conversion(g: float, R: float, theta: float, f: float,
                                    n: int, m: int) -> EffectiveResult:
    """Frequency conversion between two modes mediated by a driven qubit.

    Mode detunings ``Delta_1 = 2 f R`` and ``Delta_2 = 2 (f-1) R``; a photon
    hops from mode 2 to mode 1 as the dressed qubit drops. At ``theta = pi/4``
    the rate is proportional to ``2f - 1`` and vanishes at ``f = 1/2``.

    Raises
    ------
    DomainError
        If ``f`` is not strictly inside (0, 1).
    """
    if not 0.0 < f < 1.0:
        raise DomainError(f"splitting fraction f must lie in (0, 1), got {f}")
    _check_common(R, theta, n, m)
    d1 = 2.0 * f * R
    d2 = 2.0 * (f - 1.0) * R
    lam, chi1, chi2 = _shifts_two_mode(g, R, theta, d1, d2)
    c, s = math.cos(theta), math.sin(theta)
    g_eff = g * g * ((f - 1.0) * c ** 3 * s + f * c * s ** 3) / (R * f * (f - 1.0))
    delta = 2.0 * lam + chi1 * (2 * n + 1) + chi2 * (2 * m + 1)
    _guard_two_mode(g_eff, R, d1, d2)
    return EffectiveResult(g_eff=g_eff, lamb_shifts=(lam,),
                           dispersive=((chi1,), (chi2,)),
                           delta_resonance=delta)


def example_III_two_atoms_one_photon(g: float, R: float, theta: float,
                                     n: int) -> EffectiveResult:
    """Joint excitation of two driven atoms by a single photon.

    Both dressed qubits are raised while one photon at ``Delta_a ~ 4R`` is
    absorbed; a third-order process with rate
    ``(g**3 / 3R**2) (cos^3 sin^3 + 3 cos sin^5)``. The two atoms share one
    Lamb shift and one dispersive coefficient ``chi = 2 lambda``.
    """
    _check_common(R, theta, n)
    c, s = math.cos(theta), math.sin(theta)
    da = 4.0 * R
    lam = 0.5 * g * g * ((2.0 * R - da) * c ** 4 + (2.0 * R + da) * s ** 4) \
        / (4.0 * R * R - da * da)
    chi = 2.0 * lam
    g_eff = (g ** 3 / (3.0 * R * R)) * (c ** 3 * s ** 3 + 3.0 * c * s ** 5)
    delta = 4.0 * (n + 1) * chi
    if 2.0 * R < 10.0 * abs(g_eff):
        warnings.warn(
            "photon detuning 4R sits too close to a competing resonance for "
            "the third-order rate to dominate",
            ValidityWarning,
            stacklevel=2,
        )
    return EffectiveResult(g_eff=g_eff, lamb_shifts=(lam, lam),
                           dispersive=((chi, chi),),
                           delta_resonance=delta)


# ---------------------------------------------------------------------------
# block fitting


def second_quantized_fit(H_eff_block, process: TransitionProcess,
                         extra=()) -> EffectiveResult:
    """Extract second-quantized coefficients from an effective 2x2 block.

    The block over {|i>, |f>} is matched to the ansatz whose diagonal entries
    are ``sum_kj chi_kj n_k s_j + sum_j lambda_j s_j + alpha`` and whose
    off-diagonal is ``g_eff`` times the bosonic Fock factor of ``process``.
    The diagonal system is solved by least squares; a single block generally
    underdetermines the individual shifts (the minimum-norm solution is
    returned), but ``g_eff`` and ``delta_resonance`` are always pinned by the
    data. Supplying further ``(process, block)`` pairs in ``extra`` closes the
    system so the shifts themselves become unique.

    Raises
    ------
    NotRepresentableError
        If the block is not hermitian, the diagonal system is inconsistent
        beyond 1e-8, or an extra block's off-diagonal violates the shared
        Fock-factor scaling.
    """
    block = np.asarray(H_eff_block, dtype=complex)
    if block.shape != (2, 2):
        raise ShapeError(f"expected a 2x2 block, got shape {block.shape}")
    scale = max(1.0, float(np.max(np.abs(block))))
    if abs(block[1, 0] - np.conj(block[0, 1])) > 1e-8 * scale:
        raise NotRepresentableError("block is not hermitian")
    if max(abs(block[0, 0].imag), abs(block[1, 1].imag)) > 1e-8 * scale:
        raise NotRepresentableError("diagonal entries must be real")

    pairs = [(process, block)]
    for proc_x, block_x in extra:
        bx = np.asarray(block_x, dtype=complex)
        if bx.shape != (2, 2):
            raise ShapeError(f"expected 2x2 extra blocks, got shape {bx.shape}")
        if (len(proc_x.n_initial) != len(process.n_initial)
                or len(proc_x.s_initial) != len(process.s_initial)):
            raise ShapeError("extra process has a different mode/atom layout")
        pairs.append((proc_x, bx))

    g_eff = block[0, 1] / process.fock_factor
    rows, rhs = [], []
    for proc_x, bx in pairs:
        ratio = bx[0, 1] / proc_x.fock_factor
        if abs(ratio - g_eff) > 1e-8 * max(1.0, abs(g_eff)):
            raise NotRepresentableError(
                "off-diagonal entries do not share a single rate: "
                f"{ratio:.6g} vs {g_eff:.6g} after Fock-factor removal"
            )
        rows.append(_diagonal_row(proc_x, final=False))
        rows.append(_diagonal_row(proc_x, final=True))
        rhs.append(bx[0, 0].real)
        rhs.append(bx[1, 1].real)
    a = np.vstack(rows)
    b = np.asarray(rhs)
    u, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = float(np.max(np.abs(a @ u - b))) if b.size else 0.0
    if resid > 1e-8 * max(1.0, float(np.max(np.abs(b)))):
        raise NotRepresentableError(
            f"diagonal entries are inconsistent with the ansatz (residual {resid:.3e})"
        )

    k = len(process.n_initial)
    j = len(process.s_initial)
    chis = tuple(tuple(float(u[ki * j + ji]) for ji in range(j)) for ki in range(k))
    lambdas = tuple(float(x) for x in u[k * j:k * j + j])
    alpha = float(u[-1])

    d_i, d_f = block[0, 0].real, block[1, 1].real
    delta = d_f - d_i
    for ni, nf in zip(process.n_initial, process.n_final):
        if ni != nf:
            delta = (d_f - d_i) / (ni - nf)
            break
    return EffectiveResult(g_eff=g_eff, lamb_shifts=lambdas, dispersive=chis,
                           delta_resonance=float(delta), alpha_shift=alpha)


# ---------------------------------------------------------------------------
# dressed-frame model builders


def _dressed_qubit_ops(dq: DressedQubit):
    """(stilde_z, bare sigma_minus in the dressed basis) on a 2-dim site."""
    sm = destroy(2)
    sz = 2.0 * (sm.dag() @ sm) - Operator(sm.space, np.eye(2))
    cm, cp, cz = dq.lowering_coeffs
    lower = cm * sm + cp * sm.dag() + cz * sz
    return sz, lower


def h_dressed_two_cavity(dq: DressedQubit, g: float, Delta1: float,
                         Delta2: float, cutoffs: Tuple[int, int]) -> Operator:
    """Driven qubit coupled to two modes, written in the dressed basis.

    Site order (qubit, mode 1, mode 2); qubit index 0 is the lower dressed
    state. Equals the lab-frame model up to the constant ``Delta_sigma/2``.
    """
    space = HilbertSpace((2, int(cutoffs[0]), int(cutoffs[1])),
                         ["qubit", "mode1", "mode2"])
    sz, lower = _dressed_qubit_ops(dq)
    sz = embed(sz, space, 0)
    low = embed(lower, space, 0)
    a1 = embed(destroy(int(cutoffs[0])), space, 1)
    a2 = embed(destroy(int(cutoffs[1])), space, 2)
    h = (Delta1 * (a1.dag() @ a1) + Delta2 * (a2.dag() @ a2) + dq.R * sz
         + g * (low @ (a1.dag() + a2.dag()) + (a1 + a2) @ low.dag()))
    return h


def h_dressed_two_atoms(dq: DressedQubit, g: float, Delta_a: float,
                        cutoff: int) -> Operator:
    """Two identically driven qubits sharing one mode, dressed basis.

    Site order (atom 1, atom 2, mode). Equals the lab-frame model up to the
    constant ``Delta_sigma``.
    """
    space = HilbertSpace((2, 2, int(cutoff)), ["atom1", "atom2", "mode"])
    sz, lower = _dressed_qubit_ops(dq)
    a = embed(destroy(int(cutoff)), space, 2)
    h = Delta_a * (a.dag() @ a)
    for site in (0, 1):
        szs = embed(sz, space, site)
        low = embed(lower, space, site)
        h = h + dq.R * szs + g * (a @ low.dag() + low @ a.dag())
    return h
