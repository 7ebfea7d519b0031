"""Builders for the named physical models.

Each builder compiles a parameter record into an :class:`~uscsim.hilbert.Operator`
on an explicit truncated space.  Conventions: hbar = 1, all frequencies angular,
qubit basis ordered (ground, excited) so that sigma_z = diag(-1, +1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv

from .errors import (
    BistabilityError,
    DomainError,
    InstabilityError,
    InvalidDimensionError,
    NotBracketedError,
    ValidityWarning,
)
from .hilbert import (
    HilbertSpace,
    Operator,
    QState,
    destroy,
    embed,
    identity,
    number,
    operator_function,
    sigma_minus,
    sigma_plus,
    sigma_x,
    sigma_y,
    sigma_z,
    tensor,
)

import warnings

__all__ = [
    "OptomechParams",
    "DoubleCavityParams",
    "JcParams",
    "DpaParams",
    "GaugeChoice",
    "HopfieldParams",
    "CollectiveParams",
    "LinearizedOptomech",
    "DoubleCavityModel",
    "DpaFrame",
    "CollectiveCoupling",
    "h_optomech",
    "linearize_optomech",
    "h_linearized_full",
    "h_double_cavity",
    "modulated_coupling_gM",
    "polariton_energies",
    "triresonance_detuning",
    "h_rabi",
    "h_jc",
    "h_dicke",
    "h_tavis_cummings",
    "h_dpa",
    "collective_map",
]


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class OptomechParams:
    """Single-cavity optomechanical system.

    Parameters
    ----------
    g0 : float
        Single-photon radiation-pressure coupling.
    omega_m : float
        Mechanical frequency, must be positive.
    omega_cav : float
        Cavity frequency.
    kappa, gamma_m : float
        Cavity and mechanical energy decay rates.
    n_th : float
        Thermal phonon occupation of the mechanical bath.
    drive_amp : complex
        Drive amplitude; the drive is treated in its rotating frame.
    drive_detuning : float
        Cavity-drive detuning omega_cav - omega_d.
    """

    g0: float
    omega_m: float
    omega_cav: float = 0.0
    kappa: float = 0.0
    gamma_m: float = 0.0
    n_th: float = 0.0
    drive_amp: complex = 0.0 + 0.0j
    drive_detuning: float = 0.0

    def __post_init__(self):
        if self.omega_m <= 0:
            raise DomainError("omega_m must be positive")
        if self.kappa < 0 or self.gamma_m < 0:
            raise DomainError("decay rates must be nonnegative")
        if self.n_th < 0:
            raise DomainError("n_th must be nonnegative")


@dataclass(frozen=True)
class DoubleCavityParams:
    """Two tunnel-coupled cavities, optionally with a modulated link.

    J is the intercavity hopping; zeta, omega_0 and n0 describe a sinusoidal
    modulation J(t) = zeta*omega_0*cos(omega_0*t) resonant near the 2*n0-th
    harmonic; delta is the residual modulation detuning.
    """

    J: float
    zeta: float = 0.0
    omega_0: float = 0.0
    n0: int = 1
    delta: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n0, (int, np.integer)) or self.n0 < 1:
            raise DomainError("n0 must be an integer >= 1")


@dataclass(frozen=True)
class JcParams:
    """Qubit-cavity pair: frequencies, coupling, and decay rates."""

    omega_cav: float
    omega_q: float
    g: float
    kappa: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kappa < 0 or self.gamma < 0:
            raise DomainError("decay rates must be nonnegative")

    @property
    def cooperativity(self) -> float:
        """g^2/(kappa*gamma); infinite when either rate vanishes."""
        if self.kappa == 0 or self.gamma == 0:
            return math.inf
        return self.g**2 / (self.kappa * self.gamma)


@dataclass(frozen=True)
class DpaParams:
    """Degenerate parametric amplifier: detuning, pump amplitude and phase."""

    Omega_2ph: float
    Delta_2ph: float
    theta_2ph: float = 0.0

    def __post_init__(self):
        if self.Omega_2ph < 0:
            raise DomainError("Omega_2ph must be nonnegative")

    @property
    def stable(self) -> bool:
        return self.Delta_2ph > self.Omega_2ph


class GaugeChoice(enum.Enum):
    SimpleRabi = "simple_rabi"
    Dipole = "dipole"
    CoulombNaive = "coulomb_naive"
    CoulombCorrected = "coulomb_corrected"


_HOPFIELD_GAUGES = ("bare", "dipole", "coulomb")


@dataclass(frozen=True)
class HopfieldParams:
    """Two coupled bosonic modes with an optional diamagnetic term.

    G_prime is the diamagnetic amplitude; it is not derived internally because
    its value depends on the chosen gauge and matter model.
    """

    omega_a: float
    omega_b: float
    G: float
    G_prime: float = 0.0
    gauge: str = "bare"

    def __post_init__(self):
        if self.omega_a <= 0 or self.omega_b <= 0:
            raise DomainError("mode frequencies must be positive")
        if self.gauge not in _HOPFIELD_GAUGES:
            raise DomainError(f"gauge must be one of {_HOPFIELD_GAUGES}")


@dataclass(frozen=True)
class CollectiveParams:
    """Ensemble of N two-level emitters coupled to one mode."""

    N: int
    g: float
    per_atom_g: tuple = None

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise DomainError("N must be an integer >= 1")
        if self.per_atom_g is not None:
            gj = tuple(float(x) for x in self.per_atom_g)
            if len(gj) != self.N:
                raise DomainError("per_atom_g must have length N")
            object.__setattr__(self, "per_atom_g", gj)


# ---------------------------------------------------------------------------
# result records


@dataclass(frozen=True)
class LinearizedOptomech:
    alpha: complex
    beta: complex
    g_c: float
    theta: float
    Delta_prime: float
    n_bar_c: float
    H_lin: Operator


@dataclass(frozen=True)
class DoubleCavityModel:
    H_full: Operator
    H_DC: Operator
    dressed_states: dict


@dataclass(frozen=True)
class DpaFrame:
    H: Operator
    r: float
    omega_sq: float
    stable: bool


@dataclass(frozen=True)
class CollectiveCoupling:
    g_col: float
    C_col: float
    hp_valid_excitation: float


# ---------------------------------------------------------------------------
# optomechanics


def h_optomech(p: OptomechParams, n_cav: int, n_mech: int) -> Operator:
    """Radiation-pressure Hamiltonian on an (n_cav, n_mech) Fock space.

    H = omega_cav a†a + omega_m b†b - g0 a†a (b + b†).
    """
    if n_cav < 2 or n_mech < 2:
        raise InvalidDimensionError("cutoffs must be at least 2")
    space = HilbertSpace([n_cav, n_mech], labels=["cavity", "mech"])
    a = embed(destroy(n_cav), space, 0)
    b = embed(destroy(n_mech), space, 1)
    n_a = a.dag() @ a
    return (
        p.omega_cav * n_a
        + p.omega_m * (b.dag() @ b)
        - p.g0 * (n_a @ (b + b.dag()))
    )


_FP_MAX_ITER = 1000
_FP_RTOL = 1e-13


def linearize_optomech(p: OptomechParams, cutoffs=(8, 8)) -> LinearizedOptomech:
    """Classical fixed point of the driven system and the linearized coupling.

    Solves alpha = -i E / (i Delta' + kappa/2), beta = i g0 |alpha|^2 /
    (i omega_m + gamma_m/2) with Delta' = Delta - g0 (beta + beta*)
    self-consistently by damped fixed-point iteration seeded at beta = 0.
    Returns the fluctuation coupling H_lin = -g_c (e^{-i theta} da +
    e^{i theta} da†)(db + db†) with g_c = g0 sqrt(|alpha|^2) and
    theta = arg(alpha), on a Fock space with the given cutoffs.

    Raises
    ------
    BistabilityError
        If the iteration has not settled after 1000 steps; for a strong red
        or blue detuned drive this signals multiple classical branches.
    """
    denom_m = 1j * p.omega_m + 0.5 * p.gamma_m

    def cavity_amp(beta):
        Delta_p = p.drive_detuning - 2.0 * p.g0 * beta.real
        denom_c = 1j * Delta_p + 0.5 * p.kappa
        if abs(denom_c) < 1e-300:
            raise DomainError("undamped resonant cavity: i*Delta' + kappa/2 = 0")
        return -1j * p.drive_amp / denom_c, Delta_p

    beta = 0.0 + 0.0j
    for _ in range(_FP_MAX_ITER):
        alpha, Delta_p = cavity_amp(beta)
        beta_new = 1j * p.g0 * abs(alpha) ** 2 / denom_m
        if abs(beta_new - beta) <= _FP_RTOL * (1.0 + abs(beta_new)):
            beta = beta_new
            break
        beta = 0.5 * beta + 0.5 * beta_new
    else:
        raise BistabilityError(
            "fixed-point iteration did not converge; the classical response "
            "is likely multivalued at this drive"
        )

    alpha, Delta_p = cavity_amp(beta)
    n_bar = abs(alpha) ** 2
    g_c = p.g0 * math.sqrt(n_bar)
    theta = float(np.angle(alpha)) if alpha != 0 else 0.0

    n_c, n_m = cutoffs
    space = HilbertSpace([n_c, n_m], labels=["cavity", "mech"])
    da = embed(destroy(n_c), space, 0)
    db = embed(destroy(n_m), space, 1)
    quad = np.exp(-1j * theta) * da + np.exp(1j * theta) * da.dag()
    H_lin = -g_c * (quad @ (db + db.dag()))
    return LinearizedOptomech(
        alpha=complex(alpha),
        beta=complex(beta),
        g_c=g_c,
        theta=theta,
        Delta_prime=float(Delta_p),
        n_bar_c=n_bar,
        H_lin=H_lin,
    )


def h_linearized_full(p: OptomechParams, cutoffs=(8, 8)) -> Operator:
    """Quadratic fluctuation Hamiltonian Delta' da†da + omega_m db†db + H_lin."""
    lin = linearize_optomech(p, cutoffs)
    n_c, n_m = cutoffs
    space = lin.H_lin.space
    da = embed(destroy(n_c), space, 0)
    db = embed(destroy(n_m), space, 1)
    return lin.Delta_prime * (da.dag() @ da) + p.omega_m * (db.dag() @ db) + lin.H_lin


# ---------------------------------------------------------------------------
# double cavity


def h_double_cavity(
    p: DoubleCavityParams,
    g0: float,
    omega_cav: float,
    omega_m: float,
    cutoffs=(4, 4, 4),
) -> DoubleCavityModel:
    """Two coupled cavities with radiation pressure on the first one.

    Returns the lab-frame Hamiltonian H_full on modes (a, c, b), the
    rotating-wave model H_DC in the normal-mode frame (a+, a-, b), and the
    lowest photon-phonon dressed states of H_DC.  The normal modes
    a± = (a ± c)/sqrt(2) sit at omega_cav ± J; the retained interaction
    (g0/2)(a+† a- b + h.c.) is the pairing that conserves energy when the
    normal-mode splitting matches the mechanical frequency, 2J = omega_m.
    """
    n_a, n_c, n_m = cutoffs
    if min(cutoffs) < 3:
        raise InvalidDimensionError(
            "cutoffs of at least 3 per mode are needed for the two-excitation "
            "dressed states"
        )
    if abs(omega_m - 2.0 * p.J) > 0.2 * abs(g0):
        warnings.warn(
            "normal-mode splitting 2J is detuned from omega_m by more than "
            "0.2*g0; the rotating-wave model is not resonant",
            ValidityWarning,
            stacklevel=2,
        )

    bare = HilbertSpace([n_a, n_c, n_m], labels=["cav_a", "cav_c", "mech"])
    a = embed(destroy(n_a), bare, 0)
    c = embed(destroy(n_c), bare, 1)
    b = embed(destroy(n_m), bare, 2)
    n_ph_a = a.dag() @ a
    H_full = (
        omega_cav * (n_ph_a + c.dag() @ c)
        + p.J * (a @ c.dag() + a.dag() @ c)
        + omega_m * (b.dag() @ b)
        - g0 * (n_ph_a @ (b + b.dag()))
    )

    normal = HilbertSpace([n_a, n_c, n_m], labels=["mode_plus", "mode_minus", "mech"])
    ap = embed(destroy(n_a), normal, 0)
    am = embed(destroy(n_c), normal, 1)
    bn = embed(destroy(n_m), normal, 2)
    H_DC = (
        (omega_cav + p.J) * (ap.dag() @ ap)
        + (omega_cav - p.J) * (am.dag() @ am)
        + omega_m * (bn.dag() @ bn)
        + 0.5 * g0 * (ap.dag() @ am @ bn + am.dag() @ ap @ bn.dag())
    )

    def ket(occ, coeffs):
        vec = np.zeros(normal.size, dtype=complex)
        for o, w in zip(occ, coeffs):
            vec[normal.index(o)] = w
        return QState(normal, vec / np.linalg.norm(vec))

    s2, s3, s6 = math.sqrt(2.0), math.sqrt(3.0), math.sqrt(6.0)
    dressed = {
        "0": ket([(0, 0, 0)], [1.0]),
        "1+": ket([(1, 0, 0), (0, 1, 1)], [1.0, 1.0]),
        "1-": ket([(1, 0, 0), (0, 1, 1)], [1.0, -1.0]),
        "2+": ket([(2, 0, 0), (1, 1, 1), (0, 2, 2)], [1.0, s3, s2]),
        "2-": ket([(2, 0, 0), (1, 1, 1), (0, 2, 2)], [1.0, -s3, s2]),
        "20": ket([(2, 0, 0), (0, 2, 2)], [s2, -1.0]),
    }
    return DoubleCavityModel(H_full=H_full, H_DC=H_DC, dressed_states=dressed)


def modulated_coupling_gM(p: DoubleCavityParams, g0: float) -> float:
    """Effective coupling (g0/2) J_{2 n0}(2 zeta) of the modulated link."""
    return 0.5 * g0 * float(jv(2 * p.n0, 2.0 * p.zeta))


# ---------------------------------------------------------------------------
# polaritons of the linearized model


def polariton_energies(Delta: float, omega_m: float, g_c: float):
    """Normal-mode energies (E_plus, E_minus) of the quadratic model.

    E±^2 = (Delta^2 + omega_m^2 ± W)/2 with
    W = sqrt((Delta^2 - omega_m^2)^2 + 16 Delta g_c^2 omega_m).

    Raises
    ------
    InstabilityError
        When W is complex or E-^2 < 0 (parametric instability of the
        lower branch, g_c^2 > Delta*omega_m/4).
    """
    if omega_m <= 0:
        raise DomainError("omega_m must be positive")
    S = Delta**2 + omega_m**2
    inner = (Delta**2 - omega_m**2) ** 2 + 16.0 * Delta * g_c**2 * omega_m
    if inner < 0:
        raise InstabilityError("complex normal-mode frequencies: radicand < 0")
    W = math.sqrt(inner)
    e_minus_sq = 0.5 * (S - W)
    if e_minus_sq < 0:
        raise InstabilityError(
            "lower polariton unstable: g_c^2 exceeds Delta*omega_m/4"
        )
    return math.sqrt(0.5 * (S + W)), math.sqrt(e_minus_sq)


def triresonance_detuning(omega_m: float, g_c: float) -> float:
    """Detuning Delta > omega_m at which E_plus = 2 E_minus.

    Solves 25 W^2 = 9 (Delta^2 + omega_m^2)^2 on (omega_m, 2 omega_m]; the
    root approaches 2 omega_m as g_c -> 0.
    """
    if omega_m <= 0:
        raise DomainError("omega_m must be positive")

    def mismatch(Delta):
        S = Delta**2 + omega_m**2
        inner = (Delta**2 - omega_m**2) ** 2 + 16.0 * Delta * g_c**2 * omega_m
        return 25.0 * inner - 9.0 * S**2

    lo = omega_m * (1.0 + 1e-9)
    hi = 2.0 * omega_m
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo == 0.0:
        return lo
    if f_lo * f_hi > 0:
        raise NotBracketedError(
            "no triresonance point in (omega_m, 2*omega_m]; coupling too strong"
        )
    root = brentq(mismatch, lo, hi, xtol=1e-15 * omega_m, rtol=8.9e-16)
    # confirm both branches are real at the root
    polariton_energies(root, omega_m, g_c)
    return float(root)


# ---------------------------------------------------------------------------
# qubit-cavity models


def _qubit_cavity_space(cutoff: int, n_qubits: int = 1) -> HilbertSpace:
    dims = [cutoff] + [2] * n_qubits
    labels = ["cavity"] + [f"qubit{j}" for j in range(n_qubits)]
    if n_qubits == 1:
        labels[1] = "qubit"
    return HilbertSpace(dims, labels=labels)


def h_rabi(
    p: JcParams,
    gauge: GaugeChoice = GaugeChoice.SimpleRabi,
    cutoff: int = 20,
    diamagnetic_D: float = None,
) -> Operator:
    """Qubit-cavity Hamiltonian without the rotating-wave approximation.

    Gauge variants share p.g as the dipole-gauge coupling strength:

    - SimpleRabi:  g (a + a†) sigma_x, related to Dipole by a -> ia.
    - Dipole:      i g (a† - a) sigma_x.
    - CoulombNaive: g_cg (a + a†) sigma_y + D (a + a†)^2 with
      g_cg = g omega_q/omega_cav; the two-level truncation makes this form
      quantitatively wrong once g is a sizable fraction of omega_cav.  D
      defaults to g_cg^2/omega_q and can be overridden.
    - CoulombCorrected: omega_q/2 [sigma_z cos(2 eta (a+a†)) +
      sigma_y sin(2 eta (a+a†))] with eta = g/omega_cav, shifted by
      -g^2/omega_cav so its spectrum coincides with the Dipole one.
    """
    if cutoff < 4:
        raise InvalidDimensionError("cutoff must be at least 4")
    space = _qubit_cavity_space(cutoff)
    a = embed(destroy(cutoff), space, 0)
    sz = embed(sigma_z(), space, 1)
    H0 = p.omega_cav * (a.dag() @ a)

    if gauge is GaugeChoice.SimpleRabi:
        sx = embed(sigma_x(), space, 1)
        return H0 + 0.5 * p.omega_q * sz + p.g * ((a + a.dag()) @ sx)
    if gauge is GaugeChoice.Dipole:
        sx = embed(sigma_x(), space, 1)
        return H0 + 0.5 * p.omega_q * sz + 1j * p.g * ((a.dag() - a) @ sx)
    if gauge is GaugeChoice.CoulombNaive:
        if p.omega_cav == 0:
            raise DomainError("omega_cav must be nonzero for the Coulomb forms")
        g_cg = p.g * p.omega_q / p.omega_cav
        if diamagnetic_D is None:
            if p.omega_q == 0:
                raise DomainError("default D = g_cg^2/omega_q needs omega_q != 0")
            diamagnetic_D = g_cg**2 / p.omega_q
        sy = embed(sigma_y(), space, 1)
        x = a + a.dag()
        return (
            H0
            + 0.5 * p.omega_q * sz
            + g_cg * (x @ sy)
            + diamagnetic_D * (x @ x)
        )
    if gauge is GaugeChoice.CoulombCorrected:
        if p.omega_cav == 0:
            raise DomainError("omega_cav must be nonzero for the Coulomb forms")
        eta = p.g / p.omega_cav
        a1 = destroy(cutoff)
        arg = 2.0 * eta * (a1 + a1.dag())
        cos_m = operator_function(arg, np.cos)
        sin_m = operator_function(arg, np.sin)
        H_at = 0.5 * p.omega_q * (tensor(cos_m, sigma_z()) + tensor(sin_m, sigma_y()))
        return H0 + H_at - (p.g**2 / p.omega_cav) * identity(space)
    raise DomainError(f"unknown gauge {gauge!r}")


def h_jc(p: JcParams, cutoff: int = 20) -> Operator:
    """Jaynes-Cummings Hamiltonian omega_cav a†a + omega_q/2 sigma_z + g(a sigma+ + a† sigma-)."""
    space = _qubit_cavity_space(cutoff)
    a = embed(destroy(cutoff), space, 0)
    sz = embed(sigma_z(), space, 1)
    sp = embed(sigma_plus(), space, 1)
    sm = embed(sigma_minus(), space, 1)
    return (
        p.omega_cav * (a.dag() @ a)
        + 0.5 * p.omega_q * sz
        + p.g * (a @ sp + a.dag() @ sm)
    )


def h_dicke(
    omega_cav: float,
    omega_q: float,
    g: float,
    N: int,
    cutoff: int = 12,
    gauge: str = "bare",
) -> Operator:
    """N-qubit Rabi model, optionally with the dipole-gauge diamagnetic term.

    bare:   omega_cav a†a + sum_j omega_q/2 sigma_z^j + sum_j g (a+a†) sigma_x^j
    dipole: omega_cav a†a + omega_q S_z + 2 i g (a† - a) S_x + 4 eta g S_x^2
            with eta = g/omega_cav and S_{x,z} = (1/2) sum_j sigma_{x,z}^j.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if gauge not in ("bare", "dipole"):
        raise DomainError("gauge must be 'bare' or 'dipole'")
    space = _qubit_cavity_space(cutoff, N)
    a = embed(destroy(cutoff), space, 0)
    Sz = 0.5 * sum(embed(sigma_z(), space, 1 + j) for j in range(N))
    Sx = 0.5 * sum(embed(sigma_x(), space, 1 + j) for j in range(N))
    H0 = omega_cav * (a.dag() @ a) + omega_q * Sz
    if gauge == "bare":
        return H0 + 2.0 * g * ((a + a.dag()) @ Sx)
    if omega_cav == 0:
        raise DomainError("omega_cav must be nonzero for the dipole gauge")
    eta = g / omega_cav
    return H0 + 2j * g * ((a.dag() - a) @ Sx) + 4.0 * eta * g * (Sx @ Sx)


def h_tavis_cummings(
    omega_cav: float, omega_q: float, g: float, N: int, cutoff: int = 12
) -> Operator:
    """N-qubit Jaynes-Cummings model with a shared cavity mode."""
    if N < 1:
        raise DomainError("N must be >= 1")
    space = _qubit_cavity_space(cutoff, N)
    a = embed(destroy(cutoff), space, 0)
    H = omega_cav * (a.dag() @ a)
    for j in range(N):
        H = H + 0.5 * omega_q * embed(sigma_z(), space, 1 + j)
        H = H + g * (
            a @ embed(sigma_plus(), space, 1 + j)
            + a.dag() @ embed(sigma_minus(), space, 1 + j)
        )
    return H


# ---------------------------------------------------------------------------
# parametric amplifier


def h_dpa(p: DpaParams, cutoff: int = 40) -> DpaFrame:
    """Detuned parametric amplifier and its squeezed normal frame.

    H = Delta a†a + (Omega/2)(e^{-i theta} a^2 + e^{i theta} a†^2).  For
    Delta > Omega the Bogoliubov parameters are r = (1/4) ln[(Delta+Omega)/
    (Delta-Omega)] and omega_sq = sqrt(Delta^2 - Omega^2); outside that
    region the frame does not exist and r, omega_sq are NaN with
    stable = False.
    """
    space = HilbertSpace([cutoff], labels=["cavity"])
    a = Operator(space, destroy(cutoff).matrix)
    ph = np.exp(1j * p.theta_2ph)
    H = p.Delta_2ph * (a.dag() @ a) + 0.5 * p.Omega_2ph * (
        (1.0 / ph) * (a @ a) + ph * (a.dag() @ a.dag())
    )
    if p.stable:
        r = 0.25 * math.log((p.Delta_2ph + p.Omega_2ph) / (p.Delta_2ph - p.Omega_2ph))
        omega_sq = math.sqrt(p.Delta_2ph**2 - p.Omega_2ph**2)
        return DpaFrame(H=H, r=r, omega_sq=omega_sq, stable=True)
    return DpaFrame(H=H, r=math.nan, omega_sq=math.nan, stable=False)


# ---------------------------------------------------------------------------
# collective coupling


def collective_map(p: CollectiveParams, C_single: float = 1.0) -> CollectiveCoupling:
    """Collective coupling and cooperativity of an N-emitter ensemble.

    g_col = sqrt(sum_j g_j^2) (= sqrt(N) g for identical emitters),
    C_col = N * C_single, and the advisory excitation bound 0.1*N below
    which the bosonic approximation of the collective lowering operator
    is accurate.
    """
    if p.per_atom_g is not None:
        g_col = math.sqrt(sum(gj**2 for gj in p.per_atom_g))
    else:
        g_col = math.sqrt(p.N) * p.g
    return CollectiveCoupling(
        g_col=g_col,
        C_col=p.N * C_single,
        hp_valid_excitation=0.1 * p.N,
    )
