"""Time evolution, steady states, eigen-sweeps, and state comparison.

Unitary propagation uses dense scaling-and-squaring exponentials up to the
dense size limit and a Lanczos (Krylov) stepper above it.  Lindblad evolution
integrates the vectorized generator for small spaces and the right-hand side
directly for large ones; both paths symmetrize and validate the state at
every output point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import linear_sum_assignment
from scipy.sparse.linalg import expm_multiply, splu

from .errors import (
    DomainError,
    NonuniqueSteadyStateError,
    NotBracketedError,
    PositivityViolationError,
    ShapeError,
    StiffnessError,
)
from .hilbert import DENSE_LIMIT, HilbertSpace, Operator, QState

__all__ = [
    "Channel",
    "LindbladModel",
    "TimeGrid",
    "SweepSpec",
    "ResultTable",
    "AvoidedCrossing",
    "liouvillian",
    "evolve_unitary",
    "evolve_lindblad",
    "steady_state",
    "eigen_sweep",
    "avoided_crossing",
    "fidelity",
]

# Hilbert-space dimension below which Lindblad evolution uses the
# vectorized-generator (superoperator) path
_SUPEROP_LIMIT = 64
# output density matrices are validated against this tolerance budget
_EVOLVED_ATOL = 1e-8
_KRYLOV_DIM = 30


@dataclass(frozen=True)
class Channel:
    """One dissipator.

    Standard channels contribute weight*(o rho o† - {o†o, rho}/2) and need a
    nonnegative real weight.  Primed (two-photon correlation) channels
    contribute weight*(o rho o - {o o, rho}/2) with an arbitrary complex
    weight; they are only meaningful combined with their conjugate partner.
    """

    op: Operator
    weight: complex
    primed: bool = False

    def __post_init__(self):
        w = complex(self.weight)
        if not self.primed:
            if abs(w.imag) > 1e-14 * (1.0 + abs(w.real)) or w.real < 0:
                raise DomainError("standard channel weights must be real and >= 0")
            object.__setattr__(self, "weight", float(w.real))
        else:
            object.__setattr__(self, "weight", w)


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus dissipation channels on a shared space.

    H may be an Operator or a callable t -> Operator for driven problems;
    time-dependent models always integrate on the right-hand-side path.
    """

    H: object
    channels: tuple = ()

    def __post_init__(self):
        chs = tuple(self.channels)
        object.__setattr__(self, "channels", chs)
        space = self.space
        for ch in chs:
            if not isinstance(ch, Channel):
                raise ShapeError("channels must be Channel records")
            if ch.op.space != space:
                raise ShapeError("channel operator lives on a different space")

    @property
    def time_dependent(self) -> bool:
        return callable(self.H)

    @property
    def space(self) -> HilbertSpace:
        H = self.H(0.0) if callable(self.H) else self.H
        return H.space

    def h_at(self, t: float) -> Operator:
        return self.H(t) if callable(self.H) else self.H


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    n_points: int
    tol: float = 1e-10

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise DomainError("t1 must exceed t0")
        if self.n_points < 2:
            raise DomainError("n_points must be at least 2")
        if self.tol <= 0:
            raise DomainError("tolerance must be positive")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.n_points)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    observables: tuple = ()

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise DomainError("sweep needs at least one value")
        object.__setattr__(self, "values", vals)


@dataclass
class ResultTable:
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows])


@dataclass(frozen=True)
class AvoidedCrossing:
    location: float
    min_gap: float


# ---------------------------------------------------------------------------
# generator assembly


def _sparse(op: Operator) -> sp.csr_matrix:
    return op.matrix if op.is_sparse else sp.csr_matrix(op.matrix)


def liouvillian(m: LindbladModel, t: float = 0.0) -> sp.csr_matrix:
    """Matrix of rho-dot acting on column-stacked density matrices."""
    H = _sparse(m.h_at(t))
    d = H.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for ch in m.channels:
        o = _sparse(ch.op)
        if ch.primed:
            oo = o @ o
            L = L + ch.weight * (
                sp.kron(o.T, o)
                - 0.5 * sp.kron(eye, oo)
                - 0.5 * sp.kron(oo.T, eye)
            )
        else:
            odo = o.conj().T @ o
            L = L + ch.weight * (
                sp.kron(o.conj(), o)
                - 0.5 * sp.kron(eye, odo)
                - 0.5 * sp.kron(odo.T, eye)
            )
    return L.tocsr()


# ---------------------------------------------------------------------------
# unitary evolution


def _lanczos_expm_step(Hmat, v: np.ndarray, dt: float, tol: float) -> np.ndarray:
    """exp(-i dt H) v for Hermitian H via a fixed-size Lanczos space.

    The trailing recurrence weight estimates the truncation error; steps
    that fail the tolerance are split recursively.
    """
    n = v.shape[0]
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return v.copy()
    m = min(_KRYLOV_DIM, n)
    V = np.empty((m, n), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[0] = v / nrm
    w = Hmat @ V[0]
    alpha[0] = np.vdot(V[0], w).real
    w = w - alpha[0] * V[0]
    k = m
    for j in range(1, m):
        b = np.linalg.norm(w)
        beta[j - 1] = b
        if b < 1e-14:
            k = j
            break
        V[j] = w / b
        w = Hmat @ V[j]
        alpha[j] = np.vdot(V[j], w).real
        w = w - alpha[j] * V[j] - b * V[j - 1]

    T = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
    lam, U = np.linalg.eigh(T)
    small = U @ (np.exp(-1j * dt * lam) * U[0].conj())
    if k == m and m < n:
        # residual of the Lanczos relation scaled by the last coefficient
        err = np.linalg.norm(w) * abs(small[-1]) * abs(dt)
        if err > tol:
            half = _lanczos_expm_step(Hmat, v, 0.5 * dt, 0.5 * tol)
            return _lanczos_expm_step(Hmat, half, 0.5 * dt, 0.5 * tol)
    return (V[:k].T @ small) * nrm


def evolve_unitary(H, psi0: QState, grid: TimeGrid) -> list:
    """Schrodinger evolution of a ket over the grid times.

    H is an Operator for autonomous problems or a callable t -> Operator.
    Autonomous evolution applies a precomputed step propagator below the
    dense size limit and a Krylov stepper above it; driven problems run an
    adaptive Runge-Kutta integration.
    """
    if not psi0.is_ket:
        raise ShapeError("evolve_unitary expects a ket")
    times = grid.times
    space = psi0.space

    if not callable(H):
        if H.space != space:
            raise ShapeError("state and Hamiltonian spaces differ")
        dt = times[1] - times[0]
        psi = psi0.data.astype(complex)
        out = [psi0]
        if space.size <= DENSE_LIMIT:
            U = expm(-1j * dt * H.to_dense().matrix)
            for _ in times[1:]:
                psi = U @ psi
                out.append(QState(space, psi, atol=_EVOLVED_ATOL))
        else:
            Hmat = H.matrix
            for _ in times[1:]:
                psi = _lanczos_expm_step(Hmat, psi, dt, grid.tol)
                out.append(QState(space, psi, atol=_EVOLVED_ATOL))
        return out

    H0 = H(times[0])
    if H0.space != space:
        raise ShapeError("state and Hamiltonian spaces differ")

    def rhs(t, y):
        return -1j * (H(t).matrix @ y)

    sol = solve_ivp(
        rhs,
        (times[0], times[-1]),
        psi0.data.astype(complex),
        t_eval=times,
        method="DOP853",
        rtol=grid.tol,
        atol=grid.tol * 1e-2,
    )
    if not sol.success:
        raise StiffnessError(f"integrator failed: {sol.message}")
    return [QState(space, sol.y[:, i], atol=_EVOLVED_ATOL) for i in range(len(times))]


# ---------------------------------------------------------------------------
# Lindblad evolution


def _validated_dm(space, rho, t):
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-6:
        raise StiffnessError(
            f"trace drifted to {tr:.9f} at t={t:g}; tighten the grid tolerance"
        )
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -1e-6:
        raise PositivityViolationError(
            f"density matrix eigenvalue {lo:.2e} at t={t:g}; "
            "the integration is too coarse"
        )
    # trace and positivity were just gated above, so the constructor check
    # only needs to stay out of the way
    return QState(space, rho, atol=1e-6)


def evolve_lindblad(m: LindbladModel, rho0: QState, grid: TimeGrid) -> list:
    """Master-equation evolution returning density matrices on the grid."""
    if rho0.is_ket:
        rho0 = rho0.dm()
    space = rho0.space
    if m.space != space:
        raise ShapeError("state and model spaces differ")
    times = grid.times
    d = space.size

    if d < _SUPEROP_LIMIT and not m.time_dependent:
        L = liouvillian(m)
        vec = rho0.data.reshape(-1, order="F").astype(complex)
        traj = expm_multiply(
            L, vec, start=0.0, stop=times[-1] - times[0],
            num=len(times), endpoint=True,
        )
        out = [rho0]
        for i, t in enumerate(times[1:], start=1):
            rho = traj[i].reshape((d, d), order="F")
            out.append(_validated_dm(space, rho, t))
        return out

    # right-hand-side path: keep everything as dense arrays so the per-step
    # products stay ndarray-typed
    Hs = None if m.time_dependent else m.h_at(0.0).to_dense().matrix
    chans = []
    for ch in m.channels:
        o = ch.op.to_dense().matrix
        if ch.primed:
            chans.append((complex(ch.weight), o, o, o @ o))
        else:
            od = o.conj().T
            chans.append((float(ch.weight.real), o, od, od @ o))

    def rhs(t, y):
        rho = y.reshape((d, d))
        Hm = Hs if Hs is not None else m.h_at(t).to_dense().matrix
        out = -1j * (Hm @ rho - rho @ Hm)
        for w, o, right, anti in chans:
            out = out + w * (o @ rho @ right - 0.5 * (anti @ rho + rho @ anti))
        return out.reshape(-1)

    sol = solve_ivp(
        rhs,
        (times[0], times[-1]),
        rho0.data.astype(complex).reshape(-1),
        t_eval=times,
        method="DOP853",
        rtol=grid.tol,
        atol=grid.tol * 1e-2,
    )
    if not sol.success:
        raise StiffnessError(f"integrator failed: {sol.message}")
    out = [rho0]
    for i, t in enumerate(times[1:], start=1):
        rho = sol.y[:, i].reshape((d, d))
        out.append(_validated_dm(space, rho, t))
    return out


# ---------------------------------------------------------------------------
# steady state

_DENSE_NULLSPACE_DIM = 20


def steady_state(m: LindbladModel) -> QState:
    """Unique density matrix annihilated by the generator.

    Small problems take a dense SVD nullspace; larger ones solve the
    trace-normalized sparse linear system and then verify uniqueness with a
    two-eigenvalue shift-invert probe around zero.
    """
    if m.time_dependent:
        raise DomainError("steady state needs an autonomous model")
    space = m.space
    d = space.size
    L = liouvillian(m)

    if d <= _DENSE_NULLSPACE_DIM:
        dense = L.toarray()
        _, s, vh = np.linalg.svd(dense)
        scale = max(s[0], 1.0)
        null_count = int(np.sum(s < 1e-12 * scale))
        if null_count == 0:
            null_count = 1  # smallest singular direction
        if null_count > 1:
            raise NonuniqueSteadyStateError(
                f"{null_count}-dimensional nullspace; steady state not unique"
            )
        vec = vh[-1].conj()
    else:
        # Replacing one row of the generator with the trace functional gives
        # a matrix whose nullspace is exactly the traceless steady
        # directions (the generator's left null vector is the trace, so the
        # dropped row is implied by the others).  Singularity of this matrix
        # is therefore equivalent to a nonunique steady state, and near-
        # singularity shows up in a condition probe on its LU factors.
        n2 = d * d
        trace_row = np.zeros(n2, dtype=complex)
        trace_row[:: d + 1] = 1.0
        A = L.tolil()
        A[0, :] = trace_row
        A = A.tocsc()
        rhs = np.zeros(n2, dtype=complex)
        rhs[0] = 1.0
        try:
            lu = splu(A)
        except RuntimeError as exc:
            raise NonuniqueSteadyStateError(
                "trace-normalized generator is singular; the steady state "
                "is not unique"
            ) from exc
        rng = np.random.default_rng(7)
        w = rng.standard_normal(n2) + 1j * rng.standard_normal(n2)
        z = lu.solve(w / np.linalg.norm(w))
        scale = max(np.max(np.abs(L.data)) if L.nnz else 1.0, 1.0)
        if np.linalg.norm(z) * scale > 1e12:
            raise NonuniqueSteadyStateError(
                "trace-normalized generator is numerically singular; the "
                "steady state is not unique"
            )
        vec = lu.solve(rhs)
        for _ in range(3):  # iterative refinement against the LU factors
            r = A @ vec - rhs
            if np.max(np.abs(r)) < 1e-14:
                break
            vec = vec - lu.solve(r)

    rho = vec.reshape((d, d), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-12:
        raise NonuniqueSteadyStateError("nullspace vector is traceless")
    rho = rho / tr
    resid = np.max(np.abs(L @ rho.reshape(-1, order="F")))
    if resid > 1e-8:
        raise NonuniqueSteadyStateError(
            f"steady-state residual {resid:.2e}; generator is near-singular "
            "beyond the steady direction"
        )
    return QState(space, rho, atol=_EVOLVED_ATOL)


# ---------------------------------------------------------------------------
# spectra along a parameter sweep


def eigen_sweep(spec: SweepSpec, builder, k: int = 8) -> ResultTable:
    """Lowest-k eigenvalues along the sweep with eigenvector-continuity labels.

    builder(value) must return the Hamiltonian Operator at that sweep point.
    Levels keep their identity across points by maximal-overlap assignment;
    the worst assignment overlap is reported in meta["min_overlap"].
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    rows = []
    prev_vecs = None
    prev_evs = None
    min_overlap = 1.0
    for value in spec.values:
        H = builder(value)
        mat = H.to_dense().matrix
        ev, vec = np.linalg.eigh(mat)
        if k > len(ev):
            raise DomainError("k exceeds the space dimension")
        if prev_vecs is None:
            sel = np.arange(k)
        else:
            overlap = np.abs(prev_vecs.conj().T @ vec) ** 2
            de = np.abs(prev_evs[:, None] - ev[None, :])
            scale = 1.0 + np.max(np.abs(ev))
            # overlap decides; the energy term only breaks degenerate ties
            cost = -overlap + 1e-7 * de / scale
            row_ind, col_ind = linear_sum_assignment(cost)
            sel = np.empty(k, dtype=int)
            for r, c in zip(row_ind, col_ind):
                sel[r] = c
                min_overlap = min(min_overlap, overlap[r, c])
        prev_vecs = vec[:, sel]
        prev_evs = ev[sel]
        rows.append((value, *[float(ev[j]) for j in sel]))
    columns = (spec.parameter, *[f"E{j}" for j in range(k)])
    return ResultTable(columns=columns, rows=rows, meta={"min_overlap": float(min_overlap)})


def avoided_crossing(table: ResultTable, pair=(0, 1)) -> AvoidedCrossing:
    """Location and size of the minimum gap between two tracked levels.

    Refines the tabulated minimum with a parabola through its neighbors;
    the minimum must be interior to the sweep.
    """
    i, j = pair
    x = table.column(table.columns[0]).astype(float)
    gap = np.abs(table.column(f"E{i}") - table.column(f"E{j}"))
    idx = int(np.argmin(gap))
    if idx == 0 or idx == len(gap) - 1:
        raise NotBracketedError("gap minimum sits on the sweep boundary")
    x0, x1, x2 = x[idx - 1], x[idx], x[idx + 1]
    g0, g1, g2 = gap[idx - 1], gap[idx], gap[idx + 1]
    # parabola through three points; fall back to the grid point when flat
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (g1 - g0) + x1 * (g0 - g2) + x0 * (g2 - g1)) / denom
    b = (x2**2 * (g0 - g1) + x1**2 * (g2 - g0) + x0**2 * (g1 - g2)) / denom
    if a <= 0:
        return AvoidedCrossing(location=float(x1), min_gap=float(g1))
    xv = -b / (2.0 * a)
    c = g1 - a * x1**2 - b * x1
    gv = a * xv**2 + b * xv + c
    return AvoidedCrossing(location=float(xv), min_gap=float(max(gv, 0.0)))


# ---------------------------------------------------------------------------
# state comparison


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    ev, vec = np.linalg.eigh(rho)
    ev = np.clip(ev, 0.0, None)
    return (vec * np.sqrt(ev)) @ vec.conj().T


def fidelity(x: QState, y: QState) -> float:
    """Uhlmann fidelity; reduces to |<x|y>|^2 for kets."""
    if x.space != y.space:
        raise ShapeError("states live on different spaces")
    if x.is_ket and y.is_ket:
        return float(np.abs(np.vdot(x.data, y.data)) ** 2)
    rho = x.dm().data if x.is_ket else x.data
    sig = y.dm().data if y.is_ket else y.data
    s = _sqrtm_psd(rho)
    inner = _sqrtm_psd(s @ sig @ s)
    val = np.trace(inner).real ** 2
    return float(min(max(val, 0.0), 1.0))
