"""Drive protocols that make a weakly coupled system behave ultrastrongly.

Every constructor in this module answers the same three questions about one
published scheme: what Hamiltonian the hardware actually runs (the full
driven model, as a time-dependent builder when the drive does not rotate
away), what effective model the scheme is meant to realize, and how states
map between the two pictures.  The effective couplings are exposed next to
the operators so parameter regimes can be scanned without building matrices.

Frames are explicit descriptor objects; a simulation in one picture can
always be carried into the other and compared at the state level.
"""

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm

from .effective import (
    DressedQubit,
    _dressed_qubit_ops,
    dress_qubit,
    example_III_two_atoms_one_photon,
    h_dressed_two_atoms,
)
from .errors import (
    DomainError,
    FrameMismatchError,
    ShapeError,
    TruncationError,
    ValidityWarning,
)
from .hilbert import (
    HilbertSpace,
    Operator,
    QState,
    destroy,
    embed,
    operator_function,
    sigma_minus,
    sigma_plus,
    sigma_x,
    sigma_z,
)
from .models import JcParams, _qubit_cavity_space, h_dicke, h_rabi, h_tavis_cummings

__all__ = [
    "RamanParams",
    "RamanEffective",
    "raman_effective",
    "raman_full_model",
    "symmetric_raman_params",
    "TwoToneParams",
    "TwoToneFrame",
    "TwoToneScheme",
    "EchoStep",
    "two_tone_scheme",
    "SidebandOrder",
    "IonDriveParams",
    "IonBichromatic",
    "ion_bichromatic",
    "ion_lab_hamiltonian",
    "ION_DEMO_G_EFF",
    "ProcessResonance",
    "SingleDriveDressed",
    "single_drive_dressed",
    "TrotterOrder",
    "TrotterPlan",
    "TrotterResult",
    "digital_trotter",
    "dicke_trotter",
    "ThreeWaveParams",
    "ThreeWaveRecord",
    "three_wave_hopfield",
    "three_wave_lab_hamiltonian",
    "CrossKerrRecord",
    "cross_kerr_optomech",
    "cross_kerr_full",
    "parity_chain_propagate",
    "RealizationKind",
    "RealizationMap",
    "realization_maps",
]

# Advisory margin used for every "much larger than" validity condition.
_ADVISORY_FACTOR = 10.0


# ---------------------------------------------------------------------------
# cavity-Raman scheme


@dataclass(frozen=True)
class RamanParams:
    """Two Raman pairs driving a lambda-type atom inside a cavity.

    The s pair (drive ``Omega_s``, cavity leg ``g_s``, detuning ``Delta_s``)
    connects |0> and |1> while adding a photon; the r pair (``Omega_r``,
    ``g_r``, ``Delta_r``) connects them while removing one.  ``delta_c`` and
    ``Delta_1`` are the residual two-photon detunings of the cavity and of
    the |0>-|1> splitting; ``N`` atoms couple collectively.
    """

    g_s: float
    g_r: float
    Omega_s: float
    Omega_r: float
    Delta_s: float
    Delta_r: float
    delta_c: float = 0.0
    Delta_1: float = 0.0
    N: int = 1

    def __post_init__(self):
        if self.Delta_s == 0.0 or self.Delta_r == 0.0:
            raise DomainError("excited-state detunings must be nonzero")
        if self.N < 1:
            raise DomainError("atom count must be at least 1")
        small = max(
            abs(self.delta_c), abs(self.Delta_1),
            abs(self.Omega_s), abs(self.Omega_r),
            abs(self.g_s), abs(self.g_r),
        )
        if min(abs(self.Delta_s), abs(self.Delta_r)) < _ADVISORY_FACTOR * small:
            warnings.warn(
                "excited-state detunings are not large compared with the "
                "drives and couplings; adiabatic elimination is inaccurate",
                ValidityWarning,
            )

    @property
    def lambda_s(self) -> float:
        """Counter-rotating channel rate (atom raised while a photon is added)."""
        return -self.g_s * self.Omega_s / (2.0 * self.Delta_s)

    @property
    def lambda_r(self) -> float:
        """Rotating (exchange) channel rate."""
        return -self.g_r * self.Omega_r / (2.0 * self.Delta_r)

    @property
    def chi(self) -> float:
        """Photon-number-dependent splitting of the effective qubit."""
        return self.g_r**2 / self.Delta_r - self.g_s**2 / self.Delta_s

    @property
    def Delta_c(self) -> float:
        """Effective cavity detuning including the per-atom Stark pull."""
        return self.delta_c - 0.5 * self.N * (
            self.g_r**2 / self.Delta_r + self.g_s**2 / self.Delta_s
        )

    @property
    def Delta_0(self) -> float:
        """Effective qubit splitting including the differential drive shift."""
        return self.Delta_1 + 0.25 * (
            self.Omega_s**2 / self.Delta_s - self.Omega_r**2 / self.Delta_r
        )


@dataclass(frozen=True)
class RamanEffective:
    """Effective models after eliminating the two excited levels.

    ``H_eff_full`` keeps the two channel rates distinct; ``H_dicke`` is the
    anisotropy-free form that is only exact when ``symmetric`` is true.
    ``couplings`` is (lambda_s, lambda_r, Delta_c, Delta_0, chi).
    """

    H_eff_full: Operator
    H_dicke: Operator
    couplings: Tuple[float, float, float, float, float]
    space: HilbertSpace
    symmetric: bool


def raman_effective(p: RamanParams, cutoff: int = 12) -> RamanEffective:
    """Effective two-level model of the doubly driven Raman system.

    The rotating channel a†S- + a S+ carries ``lambda_r`` and the
    counter-rotating channel a†S+ + a S- carries ``lambda_s``; the rates are
    made equal (and chi removed) by matching g^2/Delta and g*Omega/Delta
    between the two pairs, which is what `symmetric_raman_params` does.
    """
    space = _qubit_cavity_space(cutoff, p.N)
    a = embed(destroy(cutoff), space, 0)
    n_op = a.dag() @ a
    Sz = 0.5 * sum(embed(sigma_z(), space, 1 + j) for j in range(p.N))
    Sm = sum(embed(sigma_minus(), space, 1 + j) for j in range(p.N))
    Sp = sum(embed(sigma_plus(), space, 1 + j) for j in range(p.N))

    lam_s, lam_r = p.lambda_s, p.lambda_r
    H = (
        p.Delta_c * n_op
        + p.Delta_0 * Sz
        + p.chi * (n_op @ Sz)
        + lam_r * (a.dag() @ Sm + a @ Sp)
        + lam_s * (a.dag() @ Sp + a @ Sm)
    )
    H_dicke = (
        p.Delta_c * n_op
        + p.Delta_0 * Sz
        + lam_s * ((a + a.dag()) @ (Sm + Sp))
    )
    lam_scale = max(abs(lam_s), abs(lam_r), 1e-300)
    chi_scale = max(abs(p.g_r**2 / p.Delta_r) + abs(p.g_s**2 / p.Delta_s), 1e-300)
    symmetric = (
        abs(lam_s - lam_r) <= 1e-10 * lam_scale
        and abs(p.chi) <= 1e-10 * chi_scale
    )
    return RamanEffective(
        H_eff_full=H,
        H_dicke=H_dicke,
        couplings=(lam_s, lam_r, p.Delta_c, p.Delta_0, p.chi),
        space=space,
        symmetric=symmetric,
    )


def symmetric_raman_params(
    g_s: float,
    Omega_s: float,
    Delta_s: float,
    Delta_r: float,
    delta_c: float = 0.0,
    Delta_1: float = 0.0,
    N: int = 1,
) -> RamanParams:
    """Raman parameters with the r pair scaled so chi=0 and lambda_s=lambda_r.

    Both conditions reduce to g_r = g_s sqrt(Delta_r/Delta_s) and
    Omega_r = Omega_s sqrt(Delta_r/Delta_s), so the two excited-state
    detunings must share a sign.
    """
    ratio = Delta_r / Delta_s
    if ratio <= 0.0:
        raise DomainError(
            "symmetric configuration needs detunings of the same sign"
        )
    scale = math.sqrt(ratio)
    return RamanParams(
        g_s=g_s, g_r=g_s * scale,
        Omega_s=Omega_s, Omega_r=Omega_s * scale,
        Delta_s=Delta_s, Delta_r=Delta_r,
        delta_c=delta_c, Delta_1=Delta_1, N=N,
    )


def raman_full_model(p: RamanParams, cutoff: int = 12) -> Operator:
    """Four-level rotating-frame model before adiabatic elimination.

    Atom levels are ordered (|0>, |1>, |s>, |r>), cavity first.  The s pair
    drives 0<->s and converts s->1 by emitting a photon; the r pair drives
    1<->r and converts r->0.  Single atom only: the collective model is the
    tensor power and is not materialized here.
    """
    if p.N != 1:
        raise DomainError("the four-level model is built for a single atom")
    space = HilbertSpace((cutoff, 4), labels=("cavity", "atom"))
    a = embed(destroy(cutoff), space, 0)
    atom = HilbertSpace((4,), labels=("atom",))

    def lvl(i, j):
        m = np.zeros((4, 4), dtype=complex)
        m[i, j] = 1.0
        return embed(Operator(atom, m), space, 1)

    return (
        p.delta_c * (a.dag() @ a)
        + p.Delta_1 * lvl(1, 1)
        + p.Delta_s * lvl(2, 2)
        + p.Delta_r * lvl(3, 3)
        + 0.5 * p.Omega_s * (lvl(0, 2) + lvl(2, 0))
        + 0.5 * p.Omega_r * (lvl(1, 3) + lvl(3, 1))
        + p.g_s * (a.dag() @ lvl(1, 2) + a @ lvl(2, 1))
        + p.g_r * (a.dag() @ lvl(0, 3) + a @ lvl(3, 0))
    )


# ---------------------------------------------------------------------------
# two-tone transmon scheme


@dataclass(frozen=True)
class TwoToneParams:
    """Two transverse tones on a JC qubit; tone 2 beats at twice tone 1's rate.

    The matching condition omega_2 - omega_1 = 2 Omega_1 is structural, not
    advisory: without it the second tone does not become static in the
    Omega_1 sigma_x interaction picture and no effective model exists.
    """

    Omega_1: float
    Omega_2: float
    omega_1: float
    omega_2: float
    base: JcParams

    def __post_init__(self):
        if self.Omega_1 <= 0.0:
            raise DomainError("the first tone must have positive amplitude")
        beat = self.omega_2 - self.omega_1
        if abs(beat - 2.0 * self.Omega_1) > 1e-9 * max(1.0, abs(2.0 * self.Omega_1)):
            raise FrameMismatchError(
                f"tone splitting {beat!r} must equal twice the first-tone "
                f"amplitude {2.0 * self.Omega_1!r}"
            )
        floor = _ADVISORY_FACTOR * max(
            self.base.g / 4.0, abs(self.base.omega_q - self.omega_1)
        )
        if self.Omega_1 < floor:
            warnings.warn(
                "first tone is not strong enough to dominate g/4 and the "
                "qubit-drive detuning; the dressed-frame average is inaccurate",
                ValidityWarning,
            )


@dataclass(frozen=True)
class EchoStep:
    """One step of the frame-unwinding recipe (a description, not a pulse)."""

    name: str
    description: str
    sx_angle: float = 0.0


@dataclass(frozen=True)
class TwoToneFrame:
    """Composition of the omega_1 rotation and the Omega_1 sigma_x picture.

    States of the effective model relate to the first-drive rotating frame by
    psi_rot(t) = exp(-i Omega_1 sigma_x t) psi_eff(t); `to_rotating` applies
    that map and `from_rotating` undoes it.
    """

    omega_1: float
    Omega_1: float
    space: HilbertSpace

    def _sx_rotation(self, angle: float) -> np.ndarray:
        site = self.space.labels.index("qubit")
        u2 = math.cos(angle) * np.eye(2) - 1j * math.sin(angle) * sigma_x().data
        return embed(Operator(HilbertSpace((2,)), u2), self.space, site).data

    def to_rotating(self, psi: QState, t: float) -> QState:
        if psi.space != self.space:
            raise ShapeError("state lives on a different space than the frame")
        u = self._sx_rotation(self.Omega_1 * t)
        return QState(self.space, u @ psi.data, atol=1e-8)

    def from_rotating(self, psi: QState, t: float) -> QState:
        if psi.space != self.space:
            raise ShapeError("state lives on a different space than the frame")
        u = self._sx_rotation(-self.Omega_1 * t)
        return QState(self.space, u @ psi.data, atol=1e-8)

    def unwind_protocol(self, t: float) -> Tuple[EchoStep, ...]:
        """Echo-style recipe that freezes the frame at time t for readout.

        Returned steps are structured descriptions for an experiment
        schedule; nothing in here integrates pulses.
        """
        return (
            EchoStep("halt_tones", "switch both transverse tones off"),
            EchoStep(
                "park_qubit",
                "detune the qubit far from the cavity so the residual "
                "exchange coupling idles",
            ),
            EchoStep(
                "invert_rotation",
                "apply exp(+i * sx_angle * sigma_x) to cancel the "
                "accumulated first-tone rotation",
                sx_angle=self.Omega_1 * t,
            ),
        )


@dataclass(frozen=True)
class TwoToneScheme:
    """Lab builder, effective Rabi model and the frame linking them.

    ``effective_params`` is (cavity freq, qubit freq, coupling) of the
    realized Rabi model: (omega_cav - omega_1, Omega_2, g/2).
    """

    H_lab_frame: Callable[[float], Operator]
    H_eff: Operator
    frame: TwoToneFrame
    effective_params: Tuple[float, float, float]


def two_tone_scheme(p: TwoToneParams, cutoff: int = 12) -> TwoToneScheme:
    """Rabi model from a JC system under two transverse tones.

    The lab builder lives in the frame rotating at omega_1 (fast co-rotating
    terms already averaged), so the only remaining time dependence is the
    tone-2 beat at omega_2 - omega_1.  The effective model holds in the
    additional Omega_1 sigma_x picture:

        H_eff = (omega_cav - omega_1) a†a - (Omega_2/2) sigma_z
                + (g/2)(a + a†) sigma_x
    """
    b = p.base
    space = _qubit_cavity_space(cutoff)
    a = embed(destroy(cutoff), space, 0)
    sz = embed(sigma_z(), space, 1)
    sx = embed(sigma_x(), space, 1)
    sp = embed(sigma_plus(), space, 1)
    sm = embed(sigma_minus(), space, 1)

    H_static = (
        (b.omega_cav - p.omega_1) * (a.dag() @ a)
        + 0.5 * (b.omega_q - p.omega_1) * sz
        + b.g * (a @ sp + a.dag() @ sm)
        + p.Omega_1 * sx
    )
    beat = p.omega_2 - p.omega_1

    def H_lab(t: float) -> Operator:
        ph = complex(np.exp(1j * beat * t))
        return H_static + p.Omega_2 * (ph * sm + ph.conjugate() * sp)

    H_eff = (
        (b.omega_cav - p.omega_1) * (a.dag() @ a)
        - 0.5 * p.Omega_2 * sz
        + 0.5 * b.g * ((a + a.dag()) @ sx)
    )
    frame = TwoToneFrame(omega_1=p.omega_1, Omega_1=p.Omega_1, space=space)
    return TwoToneScheme(
        H_lab_frame=H_lab,
        H_eff=H_eff,
        frame=frame,
        effective_params=(b.omega_cav - p.omega_1, p.Omega_2, b.g / 2.0),
    )


# ---------------------------------------------------------------------------
# trapped-ion bichromatic scheme


class SidebandOrder(enum.Enum):
    first_sideband = "first_sideband"
    second_sideband = "second_sideband"


# Demonstration operating point quoted for the bichromatic ion experiment:
# eta = 0.1 and Omega = 2pi x 250 kHz were held fixed, and the effective
# coupling was quoted as g_eff = 2pi x 12.5 MHz even though eta*Omega/2
# works out to 2pi x 12.5 kHz.  The quoted unit is preserved here rather
# than silently corrected; compare against IonDriveParams arithmetic before
# trusting it.
ION_DEMO_G_EFF = 2.0 * math.pi * 12.5e6


@dataclass(frozen=True)
class IonDriveParams:
    """Bichromatic drive near the first or second motional sidebands.

    ``delta_r`` and ``delta_b`` are the detunings of the red and blue tones
    from their sideband; the Lamb-Dicke factor ``eta`` scales the sideband
    rates.  Beyond eta*sqrt(n) ~ 0.3 the linearized (or quadratic) sideband
    expansion degrades; `lamb_dicke_ok` checks that margin for a given
    occupation.
    """

    eta: float
    Omega: float
    delta_r: float
    delta_b: float
    omega_mot: float
    omega_q: float
    order: SidebandOrder = SidebandOrder.first_sideband

    def __post_init__(self):
        if not isinstance(self.order, SidebandOrder):
            object.__setattr__(self, "order", SidebandOrder(self.order))
        if self.eta < 0.0:
            raise DomainError("Lamb-Dicke parameter must be nonnegative")
        if self.omega_mot <= 0.0:
            raise DomainError("motional frequency must be positive")
        if self.eta >= 0.3:
            warnings.warn(
                "Lamb-Dicke parameter is large even at zero occupation",
                ValidityWarning,
            )
        if _ADVISORY_FACTOR * max(
            abs(self.delta_r), abs(self.delta_b), abs(self.Omega)
        ) > self.omega_mot:
            warnings.warn(
                "sideband detunings or drive strength are not small compared "
                "with the motional frequency; off-resonant terms intrude",
                ValidityWarning,
            )

    def lamb_dicke_ok(self, n_mean: float) -> bool:
        return self.eta * math.sqrt(max(n_mean, 0.0)) < 0.3


@dataclass(frozen=True)
class IonBichromatic:
    """Static effective model in the frame set by the sideband detunings."""

    H_eff: Operator
    omega_eff_mode: float
    omega_eff_qubit: float
    g_eff: float
    order: SidebandOrder
    space: HilbertSpace

    @property
    def params(self) -> Tuple[float, float, float]:
        return (self.omega_eff_mode, self.omega_eff_qubit, self.g_eff)


def ion_bichromatic(p: IonDriveParams, cutoff: int = 12) -> IonBichromatic:
    """Effective Rabi (or two-photon Rabi) model of the bichromatic ion.

    The quoted effective parameters are, for the first sidebands,
    omega_eff_mode = (delta_b - delta_r)/2, omega_eff_qubit =
    (delta_r + delta_b)/2 and g_eff = eta*Omega/2 with the coupling form
    i(sigma+ - sigma-)(a + a†); for the second sidebands the mode frequency
    divides by 4 instead of 2 and the coupling is
    -(eta^2 Omega/4) sigma_x (a^2 + a†^2).

    Sign convention: with the drives tuned above their sidebands by
    delta_{r,b}, the exact static generator in the co-moving frame is

        H_eff = -omega_eff_mode a†a - (omega_eff_qubit/2) sigma_z + coupling,

    i.e. the quoted frequencies enter with a minus sign.  Populations cannot
    distinguish the two signs (the frame transformations are diagonal and
    the flipped model is the complex conjugate up to a qubit rotation),
    which is why the positive form is usually quoted, but amplitude-level
    comparisons can, so the builder keeps the exact signs.  The frame
    relation is e^{i H0 t} psi_lab(t) = e^{-i G t} psi_eff(t) with
    G = omega_eff_mode a†a + (omega_eff_qubit/2) sigma_z and
    H0 = omega_mot a†a + (omega_q/2) sigma_z.
    """
    space = HilbertSpace((cutoff, 2), labels=("motion", "qubit"))
    a = embed(destroy(cutoff), space, 0)
    sz = embed(sigma_z(), space, 1)
    qubit_eff = 0.5 * (p.delta_r + p.delta_b)
    if p.order is SidebandOrder.first_sideband:
        mode_eff = 0.5 * (p.delta_b - p.delta_r)
        g_eff = 0.5 * p.eta * p.Omega
        sp = embed(sigma_plus(), space, 1)
        sm = embed(sigma_minus(), space, 1)
        coupling = (1j * g_eff) * ((sp - sm) @ (a + a.dag()))
    else:
        mode_eff = 0.25 * (p.delta_b - p.delta_r)
        g_eff = -0.25 * p.eta**2 * p.Omega
        sx = embed(sigma_x(), space, 1)
        coupling = g_eff * (sx @ (a @ a + a.dag() @ a.dag()))
    H = -mode_eff * (a.dag() @ a) - 0.5 * qubit_eff * sz + coupling
    return IonBichromatic(
        H_eff=H,
        omega_eff_mode=mode_eff,
        omega_eff_qubit=qubit_eff,
        g_eff=g_eff,
        order=p.order,
        space=space,
    )


def ion_lab_hamiltonian(p: IonDriveParams, cutoff: int = 12) -> Callable[[float], Operator]:
    """Full lab-frame ion model with both tones, no sideband expansion.

    H(t) = omega_mot a†a + (omega_q/2) sigma_z
           + sum_n Omega sigma_x cos(eta (a + a†) - omega_n t)

    with the tone frequencies omega_{r,b} = omega_q -/+ s*omega_mot + delta
    for sideband order s in {1, 2}.  The position-dependent cosine is kept
    exactly; only the integrator approximates anything.
    """
    space = HilbertSpace((cutoff, 2), labels=("motion", "qubit"))
    a = embed(destroy(cutoff), space, 0)
    sz = embed(sigma_z(), space, 1)
    sx = embed(sigma_x(), space, 1)
    a1 = destroy(cutoff)
    x_arg = p.eta * (a1 + a1.dag())
    cos_x = embed(operator_function(x_arg, np.cos), space, 0) @ sx
    sin_x = embed(operator_function(x_arg, np.sin), space, 0) @ sx
    s_order = 1 if p.order is SidebandOrder.first_sideband else 2
    w_r = p.omega_q - s_order * p.omega_mot + p.delta_r
    w_b = p.omega_q + s_order * p.omega_mot + p.delta_b
    H0 = p.omega_mot * (a.dag() @ a) + 0.5 * p.omega_q * sz

    def H(t: float) -> Operator:
        out = H0
        for w in (w_r, w_b):
            # cos(X - w t) = cos X cos(w t) + sin X sin(w t)
            out = out + p.Omega * (
                math.cos(w * t) * cos_x + math.sin(w * t) * sin_x
            )
        return out

    return H


# ---------------------------------------------------------------------------
# single-drive dressed-atom scheme


@dataclass(frozen=True)
class ProcessResonance:
    """One process the dressed coupling enables, with its resonance location.

    ``delta_a`` is the cavity detuning that puts the process on resonance,
    ``g_eff`` its rate and ``order`` the perturbative order of that rate.
    """

    name: str
    delta_a: float
    g_eff: float
    order: int


@dataclass(frozen=True)
class SingleDriveDressed:
    """Dressed-frame model of one or two driven atoms in a detuned cavity.

    ``channel_weights`` are the (sin^2, cos^2, sin*cos) weights of the
    rotating, counter-rotating and parity-breaking coupling channels;
    ``closest`` is the catalog entry nearest the requested cavity detuning.
    """

    H_dressed: Operator
    dressed: DressedQubit
    resonances: Tuple[ProcessResonance, ...]
    closest: ProcessResonance
    channel_weights: Tuple[float, float, float]


def single_drive_dressed(
    p: JcParams,
    Omega: float,
    Delta_a: float,
    Delta_sigma: float,
    n_atoms: int = 1,
    cutoff: int = 12,
) -> SingleDriveDressed:
    """JC physics rewritten in the basis of the driven atom.

    A single transverse drive of amplitude ``Omega`` on an atom detuned by
    ``Delta_sigma`` turns the plain exchange coupling into three channels
    weighted by the mixing angle,

        g (sin^2 stilde- - cos^2 stilde+ + sin cos stilde_z) a† + h.c.,

    so counter-rotating and parity-breaking processes become available at
    first order and two-atom processes at third order.  Only g (and the
    decay rates) are read from ``p``; the detunings are explicit because the
    scheme lives in the drive rotating frame.
    """
    if n_atoms not in (1, 2):
        raise DomainError("the resonance catalog covers one or two atoms")
    dq = dress_qubit(Omega, Delta_sigma)
    c, s = dq.cos_theta, dq.sin_theta
    g = p.g
    if n_atoms == 1:
        space = HilbertSpace((2, cutoff), labels=("qubit", "mode"))
        sz1, lower = _dressed_qubit_ops(dq)
        a = embed(destroy(cutoff), space, 1)
        low = embed(lower, space, 0)
        H = (
            Delta_a * (a.dag() @ a)
            + dq.R * embed(sz1, space, 0)
            + g * (low @ a.dag() + a @ low.dag())
        )
    else:
        H = h_dressed_two_atoms(dq, g, Delta_a, cutoff)

    procs = [
        ProcessResonance("jc_exchange", 2.0 * dq.R, g * s * s, 1),
        ProcessResonance("anti_jc_exchange", -2.0 * dq.R, g * c * c, 1),
        ProcessResonance("parity_drive", 0.0, g * s * c, 1),
    ]
    if n_atoms == 2:
        res = example_III_two_atoms_one_photon(g, dq.R, dq.theta, 0)
        procs.append(
            ProcessResonance(
                "two_atom_excitation",
                4.0 * dq.R + res.delta_resonance,
                res.g_eff.real,
                3,
            )
        )
    closest = min(procs, key=lambda pr: abs(Delta_a - pr.delta_a))
    return SingleDriveDressed(
        H_dressed=H,
        dressed=dq,
        resonances=tuple(procs),
        closest=closest,
        channel_weights=(s * s, c * c, s * c),
    )


# ---------------------------------------------------------------------------
# digital Trotter simulation


class TrotterOrder(enum.Enum):
    first = "first"
    symmetric = "symmetric"


@dataclass(frozen=True)
class TrotterPlan:
    """Decomposition of a target Rabi model into JC and flipped-JC steps.

    The target qubit frequency is realized as the difference of the two
    frame qubit frequencies, so omega_q1 - omega_q2 = omega_Rq is structural.
    """

    omega_Rc: float
    omega_Rq: float
    g_R: float
    omega_q1: float
    omega_q2: float
    steps: int
    order: TrotterOrder = TrotterOrder.first

    def __post_init__(self):
        if not isinstance(self.order, TrotterOrder):
            object.__setattr__(self, "order", TrotterOrder(self.order))
        if self.steps < 1:
            raise DomainError("step count must be at least 1")
        diff = self.omega_q1 - self.omega_q2
        if abs(diff - self.omega_Rq) > 1e-9 * max(1.0, abs(self.omega_Rq)):
            raise FrameMismatchError(
                f"frame qubit frequencies differ by {diff!r}, target needs "
                f"{self.omega_Rq!r}"
            )


@dataclass(frozen=True)
class TrotterResult:
    """Digital and target propagators plus their max-norm distance.

    ``omega_RF`` is the rotating-frame frequency a hardware JC system must
    use so its detuned Hamiltonian equals the H1 step.
    """

    U_digital: Operator
    U_target: Operator
    trotter_error: float
    omega_RF: float
    steps: int
    order: TrotterOrder


def _trotter_unitary(H1: Operator, H2: Operator, t: float, s: int,
                     order: TrotterOrder) -> np.ndarray:
    tau = t / s
    m1 = H1.to_dense().data
    m2 = H2.to_dense().data
    if order is TrotterOrder.first:
        step = expm(-1j * tau * m2) @ expm(-1j * tau * m1)
    else:
        half = expm(-0.5j * tau * m1)
        step = half @ expm(-1j * tau * m2) @ half
    return np.linalg.matrix_power(step, s)


def _check_plan_coupling(plan: TrotterPlan, base: JcParams):
    if abs(base.g - plan.g_R) > 1e-12 * max(1.0, abs(plan.g_R)):
        warnings.warn(
            "frame changes cannot rescale the exchange coupling; the plan's "
            "g_R differs from the hardware g",
            ValidityWarning,
        )


def digital_trotter(plan: TrotterPlan, base: JcParams, t: float,
                    cutoff: int = 12) -> TrotterResult:
    """Rabi dynamics stitched from JC and bit-flipped JC intervals.

    Step Hamiltonians in the simulation frame:

        H1 = (omega_Rc/2) a†a + (omega_q1/2) sigma_z + g_R (a sigma+ + a† sigma-)
        H2 = (omega_Rc/2) a†a - (omega_q2/2) sigma_z + g_R (a sigma- + a† sigma+)

    H1 + H2 is exactly the Rabi model (omega_Rc, omega_Rq, g_R).  H1 is a JC
    system viewed at the rotating-frame frequency omega_RF = omega_cav -
    omega_Rc/2; H2 is the same system conjugated by a pi sigma_x flip with
    the qubit retuned.  The symmetric order runs H1 for a quarter of each
    step, H2 for half, H1 for a quarter.
    """
    _check_plan_coupling(plan, base)
    space = _qubit_cavity_space(cutoff)
    a = embed(destroy(cutoff), space, 0)
    sz = embed(sigma_z(), space, 1)
    sp = embed(sigma_plus(), space, 1)
    sm = embed(sigma_minus(), space, 1)
    n_op = a.dag() @ a
    H1 = 0.5 * plan.omega_Rc * n_op + 0.5 * plan.omega_q1 * sz \
        + plan.g_R * (a @ sp + a.dag() @ sm)
    H2 = 0.5 * plan.omega_Rc * n_op - 0.5 * plan.omega_q2 * sz \
        + plan.g_R * (a @ sm + a.dag() @ sp)
    target = h_rabi(JcParams(plan.omega_Rc, plan.omega_Rq, plan.g_R), cutoff=cutoff)
    u_dig = _trotter_unitary(H1, H2, t, plan.steps, plan.order)
    u_tgt = expm(-1j * t * target.to_dense().data)
    err = float(np.max(np.abs(u_dig - u_tgt)))
    return TrotterResult(
        U_digital=Operator(space, u_dig),
        U_target=Operator(space, u_tgt),
        trotter_error=err,
        omega_RF=base.omega_cav - 0.5 * plan.omega_Rc,
        steps=plan.steps,
        order=plan.order,
    )


def dicke_trotter(plan: TrotterPlan, base: JcParams, n_atoms: int, t: float,
                  cutoff: int = 8) -> TrotterResult:
    """Digital Dicke dynamics: the flips act on all qubits in parallel.

    The step pair is Tavis-Cummings and its collectively bit-flipped
    partner; their sum is the N-qubit Rabi model without a diamagnetic
    term.  N=1 reproduces `digital_trotter` exactly.
    """
    if n_atoms < 1:
        raise DomainError("atom count must be at least 1")
    _check_plan_coupling(plan, base)
    space = _qubit_cavity_space(cutoff, n_atoms)
    a = embed(destroy(cutoff), space, 0)
    n_op = a.dag() @ a
    H1 = h_tavis_cummings(0.5 * plan.omega_Rc, plan.omega_q1, plan.g_R,
                          n_atoms, cutoff)
    H2 = 0.5 * plan.omega_Rc * n_op
    for j in range(n_atoms):
        H2 = H2 - 0.5 * plan.omega_q2 * embed(sigma_z(), space, 1 + j)
        H2 = H2 + plan.g_R * (
            a @ embed(sigma_minus(), space, 1 + j)
            + a.dag() @ embed(sigma_plus(), space, 1 + j)
        )
    target = h_dicke(plan.omega_Rc, plan.omega_Rq, plan.g_R, n_atoms,
                     cutoff, gauge="bare")
    u_dig = _trotter_unitary(H1, H2, t, plan.steps, plan.order)
    u_tgt = expm(-1j * t * target.to_dense().data)
    err = float(np.max(np.abs(u_dig - u_tgt)))
    return TrotterResult(
        U_digital=Operator(space, u_dig),
        U_target=Operator(space, u_tgt),
        trotter_error=err,
        omega_RF=base.omega_cav - 0.5 * plan.omega_Rc,
        steps=plan.steps,
        order=plan.order,
    )


# ---------------------------------------------------------------------------
# three-wave-mixing Hopfield scheme


@dataclass(frozen=True)
class ThreeWaveParams:
    """Two modes mixed by stiff pumps at their sum and difference frequencies.

    ``c_B`` pumps at omega_a + omega_b + 2*delta and sets the two-mode
    squeezing rate; ``c_R`` pumps at omega_a - omega_b and sets the exchange
    rate.  The effective model lives in frames rotating at omega_a + delta
    and omega_b + delta.
    """

    omega_a: float
    omega_b: float
    chi: float
    c_B: float
    c_R: float
    delta: float

    def __post_init__(self):
        if self.omega_a <= 0.0 or self.omega_b <= 0.0:
            raise DomainError("mode frequencies must be positive")
        scale = min(self.omega_a, self.omega_b, abs(self.omega_a - self.omega_b))
        if _ADVISORY_FACTOR * abs(self.delta) > scale:
            warnings.warn(
                "detuning is not small compared with the mode frequencies "
                "and their difference; the rotating-wave step is inaccurate",
                ValidityWarning,
            )
        if max(abs(self.chi * self.c_B), abs(self.chi * self.c_R)) > abs(self.delta):
            warnings.warn(
                "pump-induced rates exceed the detuning; the stiff-pump "
                "frame mixes strongly",
                ValidityWarning,
            )


@dataclass(frozen=True)
class ThreeWaveRecord:
    """Effective two-mode model with its normal-mode stability data.

    ``normal_freqs`` are the Bogoliubov frequencies of the symmetric and
    antisymmetric mode combinations; an entry is NaN (and ``stable`` False)
    when that mode has turned parametrically unstable, in which case no
    normalizable ground state exists.
    """

    H_eff: Operator
    G_B: float
    G_R: float
    stable: bool
    normal_freqs: Tuple[float, float]


def three_wave_hopfield(p: ThreeWaveParams, cutoff: int = 10) -> ThreeWaveRecord:
    """Hopfield-type model from three-wave mixing with two stiff pumps.

        H_eff = -delta a†a - delta b†b + G_B (a†b† + ab) + G_R (a†b + ab†)

    with G_B = chi*c_B and G_R = chi*c_R.  Equal rates G_B = G_R = G give the
    gauge-free Hopfield form with tunable G/|delta|.  In the (a +/- b)
    normal-mode split the two Bogoliubov frequencies are
    sqrt((delta -/+ G_R)^2 - G_B^2); the spectrum is bounded below only while
    both are real, which for equal rates means |G| < |delta|/2.
    """
    space = HilbertSpace((cutoff, cutoff), labels=("mode_a", "mode_b"))
    a = embed(destroy(cutoff), space, 0)
    b = embed(destroy(cutoff), space, 1)
    G_B = p.chi * p.c_B
    G_R = p.chi * p.c_R
    H = (
        -p.delta * (a.dag() @ a + b.dag() @ b)
        + G_B * (a.dag() @ b.dag() + a @ b)
        + G_R * (a.dag() @ b + a @ b.dag())
    )
    freqs = []
    stable = True
    for sign in (-1.0, +1.0):
        val = (p.delta + sign * G_R) ** 2 - G_B**2
        if val >= 0.0:
            freqs.append(math.sqrt(val))
        else:
            freqs.append(math.nan)
            stable = False
    if not stable:
        warnings.warn(
            "a normal mode is parametrically unstable; the effective model "
            "has no ground state at these pump rates",
            ValidityWarning,
        )
    return ThreeWaveRecord(
        H_eff=H, G_B=G_B, G_R=G_R, stable=stable,
        normal_freqs=(freqs[0], freqs[1]),
    )


def three_wave_lab_hamiltonian(p: ThreeWaveParams, cutoff: int = 10):
    """Time-dependent lab model behind ``three_wave_hopfield``.

        H(t) = omega_a a†a + omega_b b†b + chi f(t) (a + a†)(b + b†)
        f(t) = 2 c_B cos((omega_a + omega_b + 2 delta) t)
             + 2 c_R cos((omega_a - omega_b) t)

    The effective frame rotates at omega_a + delta and omega_b + delta, so a
    lab state maps onto the effective one through
    exp(+i[(omega_a + delta) a†a + (omega_b + delta) b†b] t) up to terms that
    oscillate at the pump frequencies.
    """
    space = HilbertSpace((cutoff, cutoff), labels=("mode_a", "mode_b"))
    a = embed(destroy(cutoff), space, 0)
    b = embed(destroy(cutoff), space, 1)
    h0 = p.omega_a * (a.dag() @ a) + p.omega_b * (b.dag() @ b)
    xx = (a + a.dag()) @ (b + b.dag())
    w_blue = p.omega_a + p.omega_b + 2.0 * p.delta
    w_red = p.omega_a - p.omega_b

    def h_lab(t: float) -> Operator:
        f = 2.0 * p.c_B * math.cos(w_blue * t) + 2.0 * p.c_R * math.cos(w_red * t)
        return h0 + (p.chi * f) * xx

    return h_lab


# ---------------------------------------------------------------------------
# cross-Kerr simulated optomechanics


@dataclass(frozen=True)
class CrossKerrRecord:
    """Simulated optomechanical model in the displaced mechanical frame.

    ``stark_shift`` is the chi*beta_b^2 frequency pull of the Kerr mode that
    the displaced frame absorbs per photon (a global phase for definite
    photon number); ``H_residual`` is the cross-Kerr term the simulation
    neglects, kept separate for error studies.
    """

    H_sim: Operator
    g_om_eff: float
    ratio: float
    stark_shift: float
    H_residual: Operator


def cross_kerr_optomech(chi: float, beta_b: float, Delta_b: float,
                        cutoffs: Tuple[int, int] = (4, 12)) -> CrossKerrRecord:
    """Optomechanics simulated by a driven cross-Kerr pair.

    Displacing the driven mode by beta_b turns chi a†a b†b into the
    radiation-pressure form

        H_sim = Delta_b db†db - beta_b chi a†a (db + db†)

    so g_om_eff = beta_b*chi and the simulated coupling ratio is
    beta_b*chi/Delta_b: the ultrastrong regime is reached by pumping harder,
    not by changing the chip.
    """
    na_cut, nb_cut = int(cutoffs[0]), int(cutoffs[1])
    space = HilbertSpace((na_cut, nb_cut), labels=("kerr_mode", "mech"))
    a = embed(destroy(na_cut), space, 0)
    b = embed(destroy(nb_cut), space, 1)
    n_a = a.dag() @ a
    H_sim = Delta_b * (b.dag() @ b) - (beta_b * chi) * (n_a @ (b + b.dag()))
    H_res = chi * (n_a @ (b.dag() @ b))
    g_om = beta_b * chi
    if Delta_b != 0.0:
        ratio = g_om / Delta_b
    else:
        ratio = math.inf if g_om != 0.0 else 0.0
    return CrossKerrRecord(
        H_sim=H_sim,
        g_om_eff=g_om,
        ratio=ratio,
        stark_shift=chi * beta_b**2,
        H_residual=H_res,
    )


def cross_kerr_full(chi: float, beta_b: float, Delta_b: float,
                    cutoffs: Tuple[int, int] = (4, 60)) -> Operator:
    """Undisplaced cross-Kerr model with the drive that sustains beta_b.

    H = Delta_b b†b + chi a†a b†b + beta_b Delta_b (b + b†); its coherent
    fixed point sits at -beta_b, so evolving from the displaced vacuum and
    displacing back by +beta_b lands in the frame of `cross_kerr_optomech`.
    """
    na_cut, nb_cut = int(cutoffs[0]), int(cutoffs[1])
    space = HilbertSpace((na_cut, nb_cut), labels=("kerr_mode", "mech"))
    a = embed(destroy(na_cut), space, 0)
    b = embed(destroy(nb_cut), space, 1)
    return (
        Delta_b * (b.dag() @ b)
        + chi * ((a.dag() @ a) @ (b.dag() @ b))
        + (beta_b * Delta_b) * (b + b.dag())
    )


# ---------------------------------------------------------------------------
# parity-chain waveguide mapping


def parity_chain_propagate(
    omega_cav: float,
    omega_q: float,
    g: float,
    chain: str,
    cutoff: int,
    psi0,
    t: float,
) -> np.ndarray:
    """Evolve one parity chain of the Rabi model as a tight-binding wire.

    The Rabi model splits into two uncoupled semi-infinite chains labelled by
    parity; site n of a chain holds the amplitude on |g,n> (even n) and
    |e,n> (odd n) for chain "c", and the opposite assignment for chain "f".
    Site energies are n*omega_cav -/+ (-1)^n omega_q/2 for "c"/"f" and the
    hopping is kappa_n = g sqrt(n+1).

    Cross-chain amplitudes are zero by construction; the full model is the
    direct sum of the two chains.  Raises a truncation error if more than
    1e-6 population sits within three sites of the open end, before or after
    the evolution.
    """
    if chain not in ("c", "f"):
        raise DomainError(f"chain must be 'c' or 'f', got {chain!r}")
    if cutoff < 4:
        raise DomainError("chain needs at least 4 sites")
    psi = np.asarray(psi0, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] != cutoff:
        raise ShapeError(
            f"initial coefficients have shape {psi.shape}, expected ({cutoff},)"
        )
    nrm = float(np.linalg.norm(psi))
    if abs(nrm - 1.0) > 1e-8:
        raise DomainError(f"initial coefficients have norm {nrm!r}, expected 1")

    sgn = -1.0 if chain == "c" else 1.0
    sites = np.arange(cutoff)
    diag = sites * omega_cav + sgn * ((-1.0) ** sites) * (0.5 * omega_q)
    hop = g * np.sqrt(np.arange(1.0, cutoff))

    def _boundary(vec, label):
        pop = float(np.sum(np.abs(vec[-3:]) ** 2))
        if pop > 1e-6:
            raise TruncationError(
                f"{label} population {pop:.3e} within 3 sites of the chain "
                f"end; raise the cutoff"
            )

    _boundary(psi, "initial")
    w, v = eigh_tridiagonal(diag, hop)
    psi_t = v @ (np.exp(-1j * w * t) * (v.T @ psi))
    _boundary(psi_t, "evolved")
    return psi_t


# ---------------------------------------------------------------------------
# physical-platform parameter maps


class RealizationKind(enum.Enum):
    cold_atoms = "cold_atoms"
    quantum_dot = "quantum_dot"


_COLD_ATOM_KEYS = frozenset({"mass", "omega_0", "lattice_depth", "k_0"})
_DOT_KEYS = frozenset(
    {"omega_mode", "mode_volume", "g_cc", "g_cd", "qubit_splitting"}
)


@dataclass(frozen=True)
class RealizationMap:
    """Effective Rabi parameters of a physical platform.

    ``balanced`` only applies to the quantum dot: true when the residual
    static bias has been tuned away so the coupling is purely transverse.
    """

    kind: RealizationKind
    omega_cav_eff: float
    omega_q_eff: float
    g_eff: float
    balanced: Optional[bool] = None

    @property
    def ratio(self) -> float:
        return self.g_eff / self.omega_cav_eff


def realization_maps(kind, inputs: Mapping) -> RealizationMap:
    """Map platform inputs onto (cavity freq, qubit freq, coupling).

    cold_atoms keys: mass, omega_0, lattice_depth, k_0 [, hbar]
        omega_cav = omega_0, omega_q = lattice_depth/(2 hbar),
        g = 2 k_0 sqrt(hbar omega_0 / (2 mass)).
    quantum_dot keys: omega_mode, mode_volume, g_cc, g_cd, qubit_splitting
        [, residual_bias, hbar]
        g = (1/2) sqrt(omega_mode / (2 hbar mode_volume g_cc)) (g_cd - g_cc);
        the 1/2 comes from the coupling entering through sigma_x/2.  The
        residual bias is reported through the `balanced` flag, not added to
        the model.
    """
    if not isinstance(kind, RealizationKind):
        try:
            kind = RealizationKind(kind)
        except ValueError:
            raise DomainError(f"unknown realization kind {kind!r}") from None
    vals = dict(inputs)
    hbar = float(vals.pop("hbar", 1.0))
    if hbar <= 0.0:
        raise DomainError("hbar must be positive")

    if kind is RealizationKind.cold_atoms:
        required = _COLD_ATOM_KEYS
        extra = set(vals) - required
    else:
        required = _DOT_KEYS
        extra = set(vals) - required - {"residual_bias"}
    missing = required - set(vals)
    if missing or extra:
        raise DomainError(
            f"inputs for {kind.value} need keys {sorted(required)}; "
            f"missing {sorted(missing)}, unknown {sorted(extra)}"
        )

    if kind is RealizationKind.cold_atoms:
        m = float(vals["mass"])
        w0 = float(vals["omega_0"])
        depth = float(vals["lattice_depth"])
        k0 = float(vals["k_0"])
        if m <= 0.0 or w0 <= 0.0 or k0 <= 0.0 or depth < 0.0:
            raise DomainError("physical inputs must be positive")
        return RealizationMap(
            kind=kind,
            omega_cav_eff=w0,
            omega_q_eff=depth / (2.0 * hbar),
            g_eff=2.0 * k0 * math.sqrt(hbar * w0 / (2.0 * m)),
        )

    wk = float(vals["omega_mode"])
    vol = float(vals["mode_volume"])
    g_cc = float(vals["g_cc"])
    g_cd = float(vals["g_cd"])
    split = float(vals["qubit_splitting"])
    bias = float(vals.get("residual_bias", 0.0))
    if wk <= 0.0 or vol <= 0.0 or g_cc <= 0.0 or split < 0.0:
        raise DomainError("physical inputs must be positive")
    g = 0.5 * math.sqrt(wk / (2.0 * hbar * vol * g_cc)) * (g_cd - g_cc)
    return RealizationMap(
        kind=kind,
        omega_cav_eff=wk,
        omega_q_eff=split,
        g_eff=g,
        balanced=(bias == 0.0),
    )
