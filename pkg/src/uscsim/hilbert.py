"""Truncated Fock/spin spaces, operators and states on tensor products.

Conventions used across the package:

* hbar = 1; every frequency is angular.
* Fock bases are |0>, |1>, ..., |dim - 1>.
* Qubits are two-dimensional with basis order (|g>, |e>) and
  sigma_z = diag(-1, +1), so that sigma_z |e> = +|e>.
* Operators are stored dense up to DENSE_LIMIT total dimension and switch to
  scipy.sparse (CSR) above it.
"""

from __future__ import annotations

import math
import numbers
import warnings
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import (
    DomainError,
    InvalidDimensionError,
    ShapeError,
    TruncationWarning,
)

#: Total dimension above which operators are stored sparse.
DENSE_LIMIT = 512

# tolerances for state validation (see QState)
_KET_NORM_ATOL = 1e-10
_TRACE_ATOL = 1e-10
_HERM_ATOL = 1e-10
_POSITIVITY_FLOOR = -1e-6


class HilbertSpace:
    """A tensor product of truncated subsystems.

    Parameters
    ----------
    dims : sequence of int
        Dimension of each tensor factor, in order. Each must be >= 2.
    labels : sequence of str, optional
        One label per factor ("cav", "mech", "qubit", ...). Defaults to
        "s0", "s1", ...
    """

    __slots__ = ("dims", "labels")

    def __init__(self, dims: Sequence[int], labels: Optional[Sequence[str]] = None):
        dims = tuple(int(d) for d in dims)
        if len(dims) == 0:
            raise InvalidDimensionError("a Hilbert space needs at least one factor")
        for d in dims:
            if d < 2:
                raise InvalidDimensionError(
                    f"every subsystem dimension must be >= 2, got {d}"
                )
        if labels is None:
            labels = tuple(f"s{i}" for i in range(len(dims)))
        else:
            labels = tuple(str(s) for s in labels)
            if len(labels) != len(dims):
                raise ShapeError(
                    f"{len(dims)} factors but {len(labels)} labels supplied"
                )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("HilbertSpace is immutable")

    @property
    def size(self) -> int:
        """Total dimension (product of factor dimensions)."""
        return int(np.prod(self.dims))

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    def index(self, occupations: Sequence[int]) -> int:
        """Flat basis index of the product state with the given occupations."""
        occ = tuple(int(n) for n in occupations)
        if len(occ) != len(self.dims):
            raise ShapeError(f"expected {len(self.dims)} occupations, got {len(occ)}")
        for n, d in zip(occ, self.dims):
            if not 0 <= n < d:
                raise DomainError(f"occupation {n} out of range for dimension {d}")
        return int(np.ravel_multi_index(occ, self.dims))

    def occupations(self, index: int) -> tuple:
        """Inverse of `index`."""
        if not 0 <= index < self.size:
            raise DomainError(f"basis index {index} out of range")
        return tuple(int(x) for x in np.unravel_index(index, self.dims))

    def basis_ket(self, occupations: Sequence[int]) -> "QState":
        """Product basis state |n_0, n_1, ...> as a ket."""
        vec = np.zeros(self.size, dtype=complex)
        vec[self.index(occupations)] = 1.0
        return QState(self, vec)

    def __eq__(self, other):
        return isinstance(other, HilbertSpace) and self.dims == other.dims

    def __hash__(self):
        return hash(self.dims)

    def __repr__(self):
        inner = ", ".join(f"{s}:{d}" for s, d in zip(self.labels, self.dims))
        return f"HilbertSpace({inner})"


def _as_matrix(data):
    """Coerce to a square complex matrix, dense ndarray or CSR."""
    if scipy.sparse.issparse(data):
        m = data.tocsr().astype(complex)
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"operator matrix must be square, got {m.shape}")
        return m
    m = np.asarray(data, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"operator matrix must be square, got {m.shape}")
    return m


class Operator:
    """A linear operator on a HilbertSpace.

    Thin wrapper around a dense ndarray or sparse CSR matrix carrying the
    space it acts on. Arithmetic (+, -, scalar *, @) requires matching spaces.

    Parameters
    ----------
    space : HilbertSpace
    data : (N, N) array_like or sparse matrix
        N must equal ``space.size``.
    """

    __slots__ = ("space", "_m")

    def __init__(self, space: HilbertSpace, data):
        m = _as_matrix(data)
        if m.shape[0] != space.size:
            raise ShapeError(
                f"matrix dimension {m.shape[0]} does not match space size {space.size}"
            )
        self.space = space
        self._m = m

    # -- storage ---------------------------------------------------------

    @property
    def is_sparse(self) -> bool:
        return scipy.sparse.issparse(self._m)

    @property
    def data(self) -> np.ndarray:
        """Dense ndarray copy of the matrix."""
        if self.is_sparse:
            return self._m.toarray()
        return self._m

    @property
    def matrix(self):
        """The underlying matrix in whatever storage it has (no copy)."""
        return self._m

    def to_sparse(self) -> "Operator":
        if self.is_sparse:
            return self
        return Operator(self.space, scipy.sparse.csr_matrix(self._m))

    def to_dense(self) -> "Operator":
        if self.is_sparse:
            return Operator(self.space, self._m.toarray())
        return self

    # -- algebra ----------------------------------------------------------

    def dag(self) -> "Operator":
        return Operator(self.space, self._m.conj().T)

    def _check_space(self, other: "Operator"):
        if self.space != other.space:
            raise ShapeError(f"space mismatch: {self.space} vs {other.space}")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check_space(other)
            return Operator(self.space, self._m + other._m)
        return NotImplemented

    def __radd__(self, other):
        # lets builtin sum() fold operator lists
        if other == 0:
            return self
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check_space(other)
            return Operator(self.space, self._m - other._m)
        return NotImplemented

    def __neg__(self):
        return Operator(self.space, -self._m)

    def __mul__(self, scalar):
        if isinstance(scalar, numbers.Number):
            return Operator(self.space, self._m * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, numbers.Number):
            return Operator(self.space, self._m / scalar)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check_space(other)
            return Operator(self.space, self._m @ other._m)
        if isinstance(other, np.ndarray):
            return self._m @ other
        return NotImplemented

    # -- queries ----------------------------------------------------------

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        m = self._m
        if self.is_sparse:
            diff = (m - m.conj().T)
            dev = abs(diff).max() if diff.nnz else 0.0
            scale = abs(m).max() if m.nnz else 1.0
        else:
            dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            scale = np.max(np.abs(m)) if m.size else 1.0
        return dev <= tol * max(1.0, scale)

    def norm_max(self) -> float:
        """Largest absolute matrix element."""
        if self.is_sparse:
            return float(abs(self._m).max()) if self._m.nnz else 0.0
        return float(np.max(np.abs(self._m)))

    def expect(self, state: "QState") -> complex:
        return state.expect(self)

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"Operator({self.space!r}, {kind} {self._m.shape[0]}x{self._m.shape[1]})"


class QState:
    """A normalized ket or density matrix on a HilbertSpace.

    Invariants are checked at construction: kets must have unit norm within
    `atol` (default 1e-10); density matrices must be Hermitian, unit trace and
    positive semidefinite down to a -1e-6 eigenvalue floor. Integrators pass a
    looser atol for their outputs (norm drift is budgeted, not hidden).
    """

    __slots__ = ("space", "kind", "_v")

    def __init__(self, space: HilbertSpace, data, kind: str = None,
                 atol: float = None):
        arr = np.asarray(data, dtype=complex)
        if kind is None:
            kind = "ket" if arr.ndim == 1 else "density"
        if kind == "ket":
            if arr.ndim != 1 or arr.shape[0] != space.size:
                raise ShapeError(
                    f"ket length {arr.shape} does not match space size {space.size}"
                )
            nrm = float(np.linalg.norm(arr))
            tol = _KET_NORM_ATOL if atol is None else atol
            if abs(nrm - 1.0) > tol:
                raise DomainError(f"ket norm {nrm!r} deviates from 1 beyond {tol}")
        elif kind == "density":
            if arr.ndim != 2 or arr.shape != (space.size, space.size):
                raise ShapeError(
                    f"density shape {arr.shape} does not match space size {space.size}"
                )
            tol = _TRACE_ATOL if atol is None else atol
            tr = complex(np.trace(arr))
            if abs(tr - 1.0) > tol:
                raise DomainError(f"density trace {tr!r} deviates from 1 beyond {tol}")
            herm_dev = np.max(np.abs(arr - arr.conj().T))
            if herm_dev > max(_HERM_ATOL, tol):
                raise DomainError(f"density not Hermitian (deviation {herm_dev:.2e})")
            w = np.linalg.eigvalsh((arr + arr.conj().T) / 2)
            if w.min() < _POSITIVITY_FLOOR:
                raise DomainError(
                    f"density has negative eigenvalue {w.min():.2e} below floor"
                )
        else:
            raise DomainError(f"unknown state kind {kind!r}")
        self.space = space
        self.kind = kind
        self._v = arr

    @property
    def data(self) -> np.ndarray:
        return self._v

    @property
    def is_ket(self) -> bool:
        return self.kind == "ket"

    def dm(self) -> "QState":
        """This state as a density matrix."""
        if self.kind == "density":
            return self
        rho = np.outer(self._v, self._v.conj())
        return QState(self.space, rho, kind="density", atol=1e-8)

    def norm(self) -> float:
        if self.is_ket:
            return float(np.linalg.norm(self._v))
        return float(abs(np.trace(self._v)))

    def expect(self, op: Operator) -> complex:
        if op.space != self.space:
            raise ShapeError("operator and state live on different spaces")
        if self.is_ket:
            return complex(np.vdot(self._v, op.matrix @ self._v))
        m = op.matrix
        if scipy.sparse.issparse(m):
            return complex((m @ self._v).diagonal().sum())
        return complex(np.trace(m @ self._v))

    def overlap(self, other: "QState") -> complex:
        """<self|other> for kets."""
        if not (self.is_ket and other.is_ket):
            raise DomainError("overlap is defined between kets; use dynamics.fidelity")
        if self.space != other.space:
            raise ShapeError("states live on different spaces")
        return complex(np.vdot(self._v, other._v))

    def __repr__(self):
        return f"QState({self.space!r}, kind={self.kind!r})"


# ---------------------------------------------------------------------------
# elementary operators
# ---------------------------------------------------------------------------


def _maybe_sparse(mat: np.ndarray, dim: int):
    if dim > DENSE_LIMIT:
        return scipy.sparse.csr_matrix(mat)
    return mat


def destroy(dim: int) -> Operator:
    """Bosonic annihilation operator on a Fock space truncated at `dim`.

    <n-1| a |n> = sqrt(n).
    """
    if dim < 2:
        raise InvalidDimensionError(f"Fock cutoff must be >= 2, got {dim}")
    if dim > DENSE_LIMIT:
        offsets = np.sqrt(np.arange(1.0, dim))
        m = scipy.sparse.diags(offsets.astype(complex), 1, format="csr")
    else:
        m = np.diag(np.sqrt(np.arange(1.0, dim)).astype(complex), 1)
    return Operator(HilbertSpace([dim]), m)


def create(dim: int) -> Operator:
    return destroy(dim).dag()


def number(dim: int) -> Operator:
    if dim < 2:
        raise InvalidDimensionError(f"Fock cutoff must be >= 2, got {dim}")
    if dim > DENSE_LIMIT:
        m = scipy.sparse.diags(np.arange(dim, dtype=complex), 0, format="csr")
    else:
        m = np.diag(np.arange(dim, dtype=complex))
    return Operator(HilbertSpace([dim]), m)


def identity(space) -> Operator:
    """Identity on a HilbertSpace (or on a bare dimension)."""
    if isinstance(space, numbers.Integral):
        space = HilbertSpace([int(space)])
    n = space.size
    if n > DENSE_LIMIT:
        return Operator(space, scipy.sparse.identity(n, dtype=complex, format="csr"))
    return Operator(space, np.eye(n, dtype=complex))


_QUBIT = HilbertSpace([2], labels=["qubit"])


def sigma_minus() -> Operator:
    """|g><e| in the (|g>, |e>) basis."""
    return Operator(_QUBIT, np.array([[0, 1], [0, 0]], dtype=complex))


def sigma_plus() -> Operator:
    return Operator(_QUBIT, np.array([[0, 0], [1, 0]], dtype=complex))


def sigma_x() -> Operator:
    return Operator(_QUBIT, np.array([[0, 1], [1, 0]], dtype=complex))


def sigma_y() -> Operator:
    return Operator(_QUBIT, np.array([[0, 1j], [-1j, 0]], dtype=complex))


def sigma_z() -> Operator:
    """diag(-1, +1): sigma_z |e> = +|e>."""
    return Operator(_QUBIT, np.diag([-1.0, 1.0]).astype(complex))


def embed(op: Operator, space: HilbertSpace, site: int) -> Operator:
    """Embed a single-factor operator at `site` of a composite space.

    Parameters
    ----------
    op : Operator
        Operator on a single-factor space whose dimension matches
        ``space.dims[site]``.
    space : HilbertSpace
        Target composite space.
    site : int
        Factor index the operator acts on.

    Returns
    -------
    Operator on `space` equal to I x ... x op x ... x I.
    """
    if not 0 <= site < space.n_sites:
        raise ShapeError(f"site {site} out of range for {space!r}")
    if op.space.n_sites != 1 or op.space.dims[0] != space.dims[site]:
        raise ShapeError(
            f"operator dimension {op.space.dims} does not match factor "
            f"{space.dims[site]} at site {site}"
        )
    left = int(np.prod(space.dims[:site], dtype=np.int64)) if site else 1
    right = (
        int(np.prod(space.dims[site + 1:], dtype=np.int64))
        if site + 1 < space.n_sites
        else 1
    )
    use_sparse = op.is_sparse or space.size > DENSE_LIMIT
    if use_sparse:
        core = op.matrix if op.is_sparse else scipy.sparse.csr_matrix(op.matrix)
        m = core
        if left > 1:
            m = scipy.sparse.kron(scipy.sparse.identity(left, dtype=complex), m)
        if right > 1:
            m = scipy.sparse.kron(m, scipy.sparse.identity(right, dtype=complex))
        return Operator(space, m.tocsr())
    m = op.data
    if left > 1:
        m = np.kron(np.eye(left, dtype=complex), m)
    if right > 1:
        m = np.kron(m, np.eye(right, dtype=complex))
    return Operator(space, m)


def tensor(*ops: Operator) -> Operator:
    """Kronecker product of operators; the result space concatenates factors."""
    if not ops:
        raise ShapeError("tensor() needs at least one operator")
    dims, labels = [], []
    for op in ops:
        dims.extend(op.space.dims)
        labels.extend(op.space.labels)
    # de-duplicate labels if factories reused defaults
    if len(set(labels)) != len(labels):
        labels = [f"s{i}" for i in range(len(dims))]
    space = HilbertSpace(dims, labels)
    any_sparse = any(op.is_sparse for op in ops) or space.size > DENSE_LIMIT
    if any_sparse:
        m = ops[0].matrix
        if not scipy.sparse.issparse(m):
            m = scipy.sparse.csr_matrix(m)
        for op in ops[1:]:
            m = scipy.sparse.kron(m, op.matrix)
        return Operator(space, m.tocsr())
    m = ops[0].data
    for op in ops[1:]:
        m = np.kron(m, op.data)
    return Operator(space, m)


def _expm_operator(space: HilbertSpace, generator) -> Operator:
    """exp(generator) with dense/sparse dispatch."""
    if scipy.sparse.issparse(generator):
        if space.size <= DENSE_LIMIT:
            return Operator(space, scipy.linalg.expm(generator.toarray()))
        return Operator(space, scipy.sparse.linalg.expm(generator.tocsc()).tocsr())
    return Operator(space, scipy.linalg.expm(generator))


def displace(dim: int, alpha: complex) -> Operator:
    """Displacement operator D(alpha) = exp(alpha a^dag - alpha* a).

    Warns when |alpha|^2 > dim/4: the displaced vacuum's mean occupation is
    then within a factor ~4 of the cutoff and truncation is no longer benign.
    """
    alpha = complex(alpha)
    if abs(alpha) ** 2 > dim / 4:
        warnings.warn(
            f"displacement |alpha|^2 = {abs(alpha)**2:.3g} close to cutoff {dim}",
            TruncationWarning,
            stacklevel=2,
        )
    a = destroy(dim)
    gen = alpha * a.dag().matrix - np.conj(alpha) * a.matrix
    return _expm_operator(a.space, gen)


def squeeze_op(dim: int, xi: complex) -> Operator:
    """Squeeze operator S(xi) = exp[(xi* a^2 - xi a^dag^2) / 2].

    With xi = r e^{i theta}: S a S^dag = a cosh r + a^dag e^{i theta} sinh r.
    Warns when 4 e^{2|xi|} > dim (squeezed-vacuum support near the cutoff).
    """
    xi = complex(xi)
    r = abs(xi)
    if 4.0 * math.exp(2.0 * r) > dim:
        warnings.warn(
            f"squeezing r = {r:.3g} needs dim >> {4.0 * math.exp(2.0 * r):.0f}, "
            f"got {dim}",
            TruncationWarning,
            stacklevel=2,
        )
    a = destroy(dim)
    a2 = a.matrix @ a.matrix
    gen = (np.conj(xi) * a2 - xi * a2.conj().T) / 2.0
    return _expm_operator(a.space, gen)


def operator_function(op: Operator, f: Callable[[np.ndarray], np.ndarray]) -> Operator:
    """Apply a scalar function to a Hermitian operator spectrally.

    f is applied to the eigenvalue vector; the result is V f(L) V^dag.

    Raises
    ------
    DomainError
        If `op` is not Hermitian within 1e-10 (relative).
    """
    if not op.is_hermitian(tol=1e-10):
        raise DomainError("operator_function requires a Hermitian operator")
    m = op.data  # densify: spectral decomposition is dense anyway
    w, v = np.linalg.eigh(m)
    fw = np.asarray(f(w), dtype=complex)
    if fw.shape != w.shape:
        raise ShapeError("f must map the eigenvalue vector elementwise")
    return Operator(op.space, (v * fw) @ v.conj().T)


def coherent_ket(dim: int, alpha: complex) -> QState:
    """Coherent state |alpha> built by displacing the vacuum."""
    d = displace(dim, alpha)
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    vec = d.matrix @ vac
    # renormalize truncation loss only if it is within the warning regime
    return QState(d.space, vec / np.linalg.norm(vec))
