"""Coupling amplification through squeezing.

A detuned two-photon pump defines a Bogoliubov frame in which couplings grow
exponentially with the squeeze amplitude.  This module provides the frame
change itself, the enhanced coupling constants and their asymptotics, the
master equation seen from the squeezed frame (including the correlated-noise
channels and their cancellation by a squeezed input field), and three gate
level protocols: cross-Kerr amplification by squeeze-echo sandwiches,
displacement amplification, and Trotterized Hamiltonian amplification.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .dynamics import Channel, LindbladModel
from .errors import (
    AmplificationDomainError,
    DomainError,
    InstabilityError,
    ValidityWarning,
)
from .hilbert import (
    HilbertSpace,
    Operator,
    destroy,
    embed,
    squeeze_op,
)
from .models import DpaParams

__all__ = [
    "SqueezeFrame",
    "SqueezedBathParams",
    "SqueezedBathCoeffs",
    "KerrAmpParams",
    "KerrAmplification",
    "DispersiveParams",
    "DispersiveShift",
    "EnhancedCoupling",
    "SqueezedOptomech",
    "DisplacementAmplification",
    "TrotterAmplification",
    "bogoliubov",
    "enhanced_couplings",
    "squeezed_bath_coeffs",
    "squeezed_master_equation",
    "h_squeezed_optomech",
    "kerr_amplification",
    "kerr_protocol_window",
    "displacement_amplification",
    "trotterized_hamiltonian_amplification",
    "dispersive_shift",
]


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class SqueezeFrame:
    """Bogoliubov frame with amplitude r >= 0 and two-photon phase theta."""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise DomainError("squeeze amplitude r must be nonnegative")

    @property
    def xi(self) -> complex:
        return self.r * np.exp(1j * self.theta)

    @classmethod
    def from_dpa(cls, p: DpaParams) -> "SqueezeFrame":
        """Frame that diagonalizes a detuned two-photon pump.

        Requires the stable regime (detuning above pump amplitude); the
        frame amplitude is r = (1/4) ln[(Delta + Omega)/(Delta - Omega)].
        """
        if not p.stable:
            raise InstabilityError(
                "two-photon pump at or beyond threshold has no stable "
                "Bogoliubov frame"
            )
        r = 0.25 * np.log(
            (p.Delta_2ph + p.Omega_2ph) / (p.Delta_2ph - p.Omega_2ph)
        )
        return cls(r=float(r), theta=p.theta_2ph)


@dataclass(frozen=True)
class SqueezedBathParams:
    """Input field of the cavity: squeeze amplitude, phase, and decay rate."""

    r_e: float
    theta_e: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.r_e < 0:
            raise DomainError("bath squeeze amplitude r_e must be nonnegative")
        if self.kappa < 0:
            raise DomainError("decay rate kappa must be nonnegative")


@dataclass(frozen=True)
class SqueezedBathCoeffs:
    """Effective thermal occupation N and correlation M in the squeezed frame."""

    N: float
    M: complex


@dataclass(frozen=True)
class KerrAmpParams:
    """Squeeze-echo amplification of a controlled-phase interaction.

    The bare gate angle g must sit in (0, pi/2).  The echo squeeze theta2
    and the amplified angle g_gamma follow from g and theta1; the protocol
    is exact when the control mode is two-level.
    """

    g: float
    theta1: float
    two_mode: bool = False
    theta2: float = 0.0  # derived
    g_gamma: float = 0.0  # derived

    def __post_init__(self):
        if not (0.0 < self.g < 0.5 * np.pi):
            raise AmplificationDomainError(
                "gate angle g must lie strictly between 0 and pi/2"
            )
        arg = -np.cos(self.g) * np.tanh(2.0 * self.theta1)
        if not np.isfinite(arg) or abs(arg) >= 1.0:
            raise AmplificationDomainError(
                "echo squeeze parameter left the domain of arctanh"
            )
        object.__setattr__(self, "theta2", float(np.arctanh(arg)))
        object.__setattr__(
            self,
            "g_gamma",
            float(np.arctan(np.tan(self.g) * np.cosh(2.0 * self.theta1))),
        )

    @property
    def kappa_amp(self) -> float:
        """Amplification factor 2 g_gamma / g (>= 2)."""
        return 2.0 * self.g_gamma / self.g


@dataclass(frozen=True)
class KerrAmplification:
    theta2: float
    g_gamma: float
    kappa_amp: float
    circuit: tuple


@dataclass(frozen=True)
class DispersiveParams:
    """Qubit coupled to a squeezed mode: g, qubit detuning, mode frequency,
    frame amplitude, and optionally a transmon anharmonicity."""

    g: float
    Delta_q: float
    omega_sq: float
    r: float
    chi_anh: Optional[float] = None

    def __post_init__(self):
        if self.r < 0:
            raise DomainError("squeeze amplitude r must be nonnegative")


@dataclass(frozen=True)
class DispersiveShift:
    chi: float
    chi_trans: Optional[float]


@dataclass(frozen=True)
class EnhancedCoupling:
    kind: str
    bare: float
    value: float
    asymptotic: float


@dataclass(frozen=True)
class SqueezedOptomech:
    """Radiation-pressure model in the frame of its two-photon pump.

    absorbed_shift is the coefficient of the static mechanical displacement
    (b + b#) dropped from H; it can be restored when comparing against the
    directly transformed laboratory Hamiltonian.
    """

    H: Operator
    frame: SqueezeFrame
    omega_sq: float
    g_om: float
    g_2ph: float
    form: str
    rwa_valid: bool
    absorbed_shift: float


@dataclass(frozen=True)
class DisplacementAmplification:
    alpha_in: complex
    alpha_out: complex
    gain: float
    mode: str
    circuit: tuple


@dataclass(frozen=True)
class TrotterAmplification:
    U_protocol: Operator
    U_target: Operator
    error: float
    n_steps: int
    gain: float


# ---------------------------------------------------------------------------
# frame change


def bogoliubov(op_index: int, frame: SqueezeFrame, H: Operator) -> Operator:
    """Conjugate H into the squeezed frame of one mode.

    The returned operator is U H U# with U the squeeze of amplitude -xi on
    the selected factor, so the mode operator transforms as
    a -> a cosh r - a# e^{i theta} sinh r.  Spectra are preserved exactly at
    any cutoff; low matrix elements converge once the cutoff accommodates
    the squeezing spread.
    """
    space = H.space
    if not 0 <= op_index < space.n_sites:
        raise DomainError(f"mode index {op_index} out of range")
    dim = space.dims[op_index]
    U = embed(squeeze_op(dim, -frame.xi), space, op_index)
    return U @ H @ U.dag()


_COUPLING_KINDS = ("optomech", "atom_rw", "atom_cr", "cooperativity")


def enhanced_couplings(bare: float, frame: SqueezeFrame, kind: str) -> EnhancedCoupling:
    """Coupling constant seen from the squeezed frame.

    kinds: "optomech" (radiation pressure, grows as cosh 2r), "atom_rw" and
    "atom_cr" (rotating and counter-rotating parts of a linear coupling,
    cosh r and -sinh r), "cooperativity" (quadratic, cosh^2 r).  The
    asymptotic field holds the large-r exponential form.
    """
    r = frame.r
    if kind == "optomech":
        value = bare * np.cosh(2.0 * r)
        asym = 0.5 * bare * np.exp(2.0 * r)
    elif kind == "atom_rw":
        value = bare * np.cosh(r)
        asym = 0.5 * bare * np.exp(r)
    elif kind == "atom_cr":
        value = -bare * np.sinh(r)
        asym = -0.5 * bare * np.exp(r)
    elif kind == "cooperativity":
        value = bare * np.cosh(r) ** 2
        asym = 0.25 * bare * np.exp(2.0 * r)
    else:
        raise DomainError(f"unknown coupling kind {kind!r}; pick from {_COUPLING_KINDS}")
    return EnhancedCoupling(kind=kind, bare=float(bare), value=float(value), asymptotic=float(asym))


# ---------------------------------------------------------------------------
# open-system description in the squeezed frame


def squeezed_bath_coeffs(frame: SqueezeFrame, bath: SqueezedBathParams) -> SqueezedBathCoeffs:
    """Occupation N and correlation M of the input noise in the frame.

    Both vanish together exactly when the input squeezing matches the frame
    (r_e = r) with opposite phase (theta_e - theta an odd multiple of pi).
    """
    r, th = frame.r, frame.theta
    re_, d = bath.r_e, bath.theta_e - frame.theta
    N = (
        np.cosh(r) ** 2 * np.sinh(re_) ** 2
        + np.sinh(r) ** 2 * np.cosh(re_) ** 2
        + 0.5 * np.sinh(2.0 * r) * np.sinh(2.0 * re_) * np.cos(d)
    )
    M = (
        np.exp(-1j * th)
        * (np.sinh(r) * np.cosh(re_) + np.exp(-1j * d) * np.cosh(r) * np.sinh(re_))
        * (np.cosh(r) * np.cosh(re_) + np.exp(1j * d) * np.sinh(re_) * np.sinh(r))
    )
    return SqueezedBathCoeffs(N=float(N), M=complex(M))


def squeezed_master_equation(
    frame: SqueezeFrame,
    bath: SqueezedBathParams,
    H_sq: Operator,
    extra_collapse: tuple = (),
    site: int = 0,
) -> LindbladModel:
    """Lindblad model for a mode whose bath is seen from the squeezed frame.

    Channels: decay at kappa(N+1), heating at kappa N, and a pair of
    two-photon correlation channels with weights -kappa M and -kappa M*.
    Channels with negligible weight are dropped.  extra_collapse entries
    (Channel records on the same space) are appended unchanged.
    """
    space = H_sq.space
    if not 0 <= site < space.n_sites:
        raise DomainError(f"mode index {site} out of range")
    coeffs = squeezed_bath_coeffs(frame, bath)
    kappa = bath.kappa
    a = embed(destroy(space.dims[site]), space, site)
    floor = 1e-15 * max(kappa, 1.0)
    channels = []
    if kappa * (coeffs.N + 1.0) > floor:
        channels.append(Channel(a, kappa * (coeffs.N + 1.0)))
    if kappa * coeffs.N > floor:
        channels.append(Channel(a.dag(), kappa * coeffs.N))
    if kappa * abs(coeffs.M) > floor:
        channels.append(Channel(a, -kappa * coeffs.M, primed=True))
        channels.append(Channel(a.dag(), -kappa * np.conj(coeffs.M), primed=True))
    channels.extend(extra_collapse)
    return LindbladModel(H=H_sq, channels=tuple(channels))


def h_squeezed_optomech(
    g0: float,
    omega_m: float,
    pump: DpaParams,
    cutoffs=(12, 6),
    form: str = "full",
) -> SqueezedOptomech:
    """Radiation-pressure Hamiltonian in the frame of its two-photon pump.

    form "full" keeps the enhanced number coupling g0 cosh 2r and the
    two-photon coupling g0 sinh 2r; "rwa" drops the fast two-photon terms
    (valid when the frame frequency dominates both the mechanical frequency
    and g_2ph); "hyper_raman" keeps instead the resonant two-photon
    sideband at omega_m ~ 2 omega_sq.  The static mechanical displacement
    -g0 sinh^2 r (b + b#) is absorbed and reported as absorbed_shift.
    """
    if omega_m <= 0:
        raise DomainError("omega_m must be positive")
    frame = SqueezeFrame.from_dpa(pump)
    r, th = frame.r, frame.theta
    omega_sq = float(np.sqrt(pump.Delta_2ph**2 - pump.Omega_2ph**2))
    g_om = g0 * np.cosh(2.0 * r)
    g_2ph = g0 * np.sinh(2.0 * r)

    space = HilbertSpace(cutoffs, ["cavity", "mech"])
    a = embed(destroy(space.dims[0]), space, 0)
    b = embed(destroy(space.dims[1]), space, 1)
    n_a = a.dag() @ a
    n_b = b.dag() @ b
    xb = b + b.dag()
    ph = np.exp(1j * th)
    two_ph = np.conj(ph) * (a @ a) + ph * (a.dag() @ a.dag())

    H0 = omega_sq * n_a + omega_m * n_b
    if form == "full":
        H = H0 - g_om * (n_a @ xb) + 0.5 * g_2ph * (two_ph @ xb)
    elif form == "rwa":
        H = H0 - g_om * (n_a @ xb)
    elif form == "hyper_raman":
        if abs(omega_m - 2.0 * omega_sq) > 0.1 * omega_m:
            warnings.warn(
                "hyper-Raman sideband assumes omega_m close to 2 omega_sq",
                ValidityWarning,
            )
        H = H0 + 0.5 * g_2ph * (
            np.conj(ph) * (a @ a @ b.dag()) + ph * (a.dag() @ a.dag() @ b)
        )
    else:
        raise DomainError(f"unknown form {form!r}")

    rwa_valid = omega_sq >= 10.0 * max(omega_m, abs(g_2ph))
    return SqueezedOptomech(
        H=H,
        frame=frame,
        omega_sq=omega_sq,
        g_om=float(g_om),
        g_2ph=float(g_2ph),
        form=form,
        rwa_valid=bool(rwa_valid),
        absorbed_shift=float(-g0 * np.sinh(r) ** 2),
    )


# ---------------------------------------------------------------------------
# Kerr amplification


def kerr_amplification(p: KerrAmpParams) -> KerrAmplification:
    """Derived angles and gate list of the squeeze-echo protocol.

    Gates are listed in the order they act on the state.
    "controlled_phase" with angle g is exp[i(g/2)(2 n_a n_t - n_t)] on the
    control a and one target t; "corrective_phase" carries (c0, c1) for
    exp[-i(c0 (n_a - 1/2) + c1 n_t)] where n_t sums over all target modes.
    With the correction applied the composite equals
    exp[2 i g_gamma n_a n_t] exactly for a two-level control.
    """
    g, g_gamma = p.g, p.g_gamma
    if p.two_mode:
        circuit = (
            ("squeeze_bc", p.theta1),
            ("controlled_phase_b", g),
            ("controlled_phase_c", g),
            ("squeeze_bc", p.theta2),
            ("controlled_phase_b", g),
            ("controlled_phase_c", g),
            ("squeeze_bc", p.theta1),
            ("corrective_phase", (2.0 * (g_gamma - g), -g_gamma)),
        )
    else:
        circuit = (
            ("squeeze_b", p.theta1),
            ("controlled_phase", g),
            ("squeeze_b", p.theta2),
            ("controlled_phase", g),
            ("squeeze_b", p.theta1),
            ("corrective_phase", (g_gamma - g, -g_gamma)),
        )
    return KerrAmplification(
        theta2=p.theta2,
        g_gamma=p.g_gamma,
        kappa_amp=p.kappa_amp,
        circuit=circuit,
    )


def _apply_diag_phase(space: HilbertSpace, block: np.ndarray, phase_fn) -> np.ndarray:
    occ = (space.occupations(i) for i in range(space.size))
    diag = np.exp(1j * np.array([phase_fn(o) for o in occ]))
    return diag[:, None] * block


def kerr_protocol_window(p: KerrAmpParams, window: int = 12, w_dim: int = None):
    """Composite protocol unitary on a low-occupation window.

    Applies the corrected gate sequence to the basis columns with target
    occupations <= window (control two-level) inside a working space large
    enough for the intermediate squeezing spread, then restricts the rows
    to the same window.  Returns (block, occupations) where block[i, j] =
    <occ_i|P' U|occ_j>.
    """
    if window < 1:
        raise DomainError("window must be at least 1")
    spread = np.exp(2.0 * max(abs(p.theta1), abs(p.theta1 + p.theta2)))
    if w_dim is None:
        w_dim = max(64, int(np.ceil(2.0 * (window + 8) * spread)))
    if w_dim <= window:
        raise DomainError("working dimension must exceed the window")

    g, th1, th2, gg = p.g, p.theta1, p.theta2, p.g_gamma
    if p.two_mode:
        space = HilbertSpace([2, w_dim, w_dim], ["control", "b", "c"])
        b = sp.csr_matrix(embed(destroy(w_dim), space, 1).matrix)
        c = sp.csr_matrix(embed(destroy(w_dim), space, 2).matrix)
        pair = b @ c
        gen = lambda th: -th * (pair - pair.conj().T)
        targets = lambda o: o[1] + o[2]
        window_occ = [
            space.occupations(i)
            for i in range(space.size)
            if space.occupations(i)[1] <= window and space.occupations(i)[2] <= window
        ]
        beta0 = 2.0 * (gg - g)
    else:
        space = HilbertSpace([2, w_dim], ["control", "b"])
        bmat = sp.csr_matrix(embed(destroy(w_dim), space, 1).matrix)
        b2 = bmat @ bmat
        gen = lambda th: 0.5 * th * (b2 - b2.conj().T)
        targets = lambda o: o[1]
        window_occ = [
            space.occupations(i)
            for i in range(space.size)
            if space.occupations(i)[1] <= window
        ]
        beta0 = gg - g

    cols = np.zeros((space.size, len(window_occ)), dtype=complex)
    for j, occ in enumerate(window_occ):
        cols[space.index(occ), j] = 1.0

    ctrl_phase = lambda o: (g / 2.0) * (2.0 * o[0] - 1.0) * targets(o)
    block = expm_multiply(gen(th1), cols)
    block = _apply_diag_phase(space, block, ctrl_phase)
    block = expm_multiply(gen(th2), block)
    block = _apply_diag_phase(space, block, ctrl_phase)
    block = expm_multiply(gen(th1), block)
    block = _apply_diag_phase(
        space, block, lambda o: -(beta0 * (o[0] - 0.5) - gg * targets(o))
    )
    rows = [space.index(occ) for occ in window_occ]
    return block[rows, :], tuple(window_occ)


# ---------------------------------------------------------------------------
# displacement and Hamiltonian amplification


def displacement_amplification(
    alpha: complex, r: float, mode: str = "phase_insensitive", theta: float = 0.0
) -> DisplacementAmplification:
    """Amplified displacement in a squeezed frame.

    "phase_sensitive": single squeezed frame, gain cosh r + cos-phase sinh r
    (up to e^r when the displacement phase matches the squeeze axis theta).
    "phase_insensitive": two half displacements conjugated by opposite
    squeezes compose to a displacement of cosh r alpha for every phase of
    alpha; the argument of alpha is preserved exactly.
    """
    if r < 0:
        raise DomainError("squeeze amplitude r must be nonnegative")
    alpha = complex(alpha)
    if mode == "phase_sensitive":
        if alpha == 0:
            raise DomainError("phase-sensitive gain is undefined at alpha = 0")
        out = (
            np.cosh(r)
            + np.exp(1j * (theta - 2.0 * np.angle(alpha))) * np.sinh(r)
        ) * alpha
        circuit = (("squeezed_displace", (alpha, r, theta)),)
    elif mode == "phase_insensitive":
        out = np.cosh(r) * alpha
        # gates in application order; each is S#(s) D(alpha/2) S(s)
        circuit = (
            ("conjugated_displace", (0.5 * alpha, +r)),
            ("conjugated_displace", (0.5 * alpha, -r)),
        )
    else:
        raise DomainError(f"unknown mode {mode!r}")
    gain = abs(out) / abs(alpha) if alpha != 0 else float(np.cosh(r))
    return DisplacementAmplification(
        alpha_in=alpha,
        alpha_out=complex(out),
        gain=float(gain),
        mode=mode,
        circuit=circuit,
    )


def trotterized_hamiltonian_amplification(
    H_int: Operator, r: float, n_steps: int, t: float, site: int = 0
) -> TrotterAmplification:
    """Amplify exp(-i H t) to exp(-i cosh(r) H t) by alternating frames.

    Each step runs half the bare propagator inside the +r frame and half
    inside the -r frame; the counter-rotating parts cancel to first order
    in the step, leaving the coupling scaled by cosh r.
    """
    if n_steps < 1:
        raise DomainError("n_steps must be at least 1")
    space = H_int.space
    if not 0 <= site < space.n_sites:
        raise DomainError(f"mode index {site} out of range")
    dim = space.dims[site]
    Sp = embed(squeeze_op(dim, r), space, site)
    Sm = embed(squeeze_op(dim, -r), space, site)
    tau = t / n_steps
    U0 = expm(-0.5j * tau * H_int.data)
    half_p = Sp.dag().data @ U0 @ Sp.data
    half_m = Sm.dag().data @ U0 @ Sm.data
    step = half_m @ half_p
    U_protocol = np.linalg.matrix_power(step, n_steps)
    U_target = expm(-1j * np.cosh(r) * t * H_int.data)
    error = float(np.max(np.abs(U_protocol - U_target)))
    return TrotterAmplification(
        U_protocol=Operator(space, U_protocol),
        U_target=Operator(space, U_target),
        error=error,
        n_steps=n_steps,
        gain=float(np.cosh(r)),
    )


# ---------------------------------------------------------------------------
# dispersive readout


def dispersive_shift(p: DispersiveParams) -> DispersiveShift:
    """Qubit dispersive shift against a squeezed mode.

    chi = 2 g^2 cosh^2 r / (Delta_q - omega_sq)
        + 2 g^2 sinh^2 r / (Delta_q + omega_sq);
    with an anharmonicity each term is scaled by
    chi_anh / (chi_anh + Delta_q -/+ omega_sq).  Warns when either
    denominator comes within 10 g of a pole.
    """
    d1 = p.Delta_q - p.omega_sq
    d2 = p.Delta_q + p.omega_sq
    if d1 == 0.0 or d2 == 0.0:
        raise DomainError("dispersive expansion is singular at Delta_q = -/+ omega_sq")
    if min(abs(d1), abs(d2)) < 10.0 * abs(p.g):
        warnings.warn(
            "dispersive expansion close to a pole: |Delta_q -/+ omega_sq| < 10 g",
            ValidityWarning,
        )
    g2 = p.g**2
    t1 = 2.0 * g2 * np.cosh(p.r) ** 2 / d1
    t2 = 2.0 * g2 * np.sinh(p.r) ** 2 / d2
    chi = t1 + t2
    if p.chi_anh is None:
        chi_trans = None
    else:
        e1 = p.chi_anh + d1
        e2 = p.chi_anh + d2
        if e1 == 0.0 or e2 == 0.0:
            raise DomainError("anharmonic correction is singular")
        chi_trans = float(t1 * p.chi_anh / e1 + t2 * p.chi_anh / e2)
    return DispersiveShift(chi=float(chi), chi_trans=chi_trans)
