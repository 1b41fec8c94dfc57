"""Truncated Fock-space operator algebra.

The composite space is ordered ``ion1 (x) [ion2] (x) motion``. Each internal
space uses the basis ``|S> = 0``, ``|D> = 1``, so that ``sigma_z`` is
``diag(-1, +1)`` and ``sigma_plus = |D><S|``. A flat state index therefore
reads ``s * fock_dim + n`` with ``s`` the internal index (``SS=0, SD=1, DS=2,
DD=3`` for two ions) and ``n`` the phonon number.

All operators are dense ``complex128`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .errors import InvalidDimensionError, InvalidParameterError, LayoutMismatchError

S, D = 0, 1
INTERNAL_LABELS = {1: ("S", "D"), 2: ("SS", "SD", "DS", "DD")}

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpaceLayout:
    """Shape of the composite Hilbert space.

    Parameters
    ----------
    n_ions : int
        Number of two-level ions, 1 or 2.
    fock_dim : int
        Motional truncation (number of Fock levels kept), at least 2.
    """

    n_ions: int = 2
    fock_dim: int = 20

    def __post_init__(self):
        if self.n_ions not in (1, 2):
            raise InvalidDimensionError(f"n_ions must be 1 or 2, got {self.n_ions}")
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise InvalidDimensionError(f"fock_dim must be an integer >= 2, got {self.fock_dim}")

    @property
    def n_internal(self) -> int:
        return 2**self.n_ions

    @property
    def dim(self) -> int:
        return self.n_internal * self.fock_dim

    @property
    def slot_dims(self) -> tuple[int, ...]:
        return (2,) * self.n_ions + (self.fock_dim,)

    @property
    def motion_slot(self) -> int:
        return self.n_ions

    def slot_index(self, slot) -> int:
        """Resolve ``slot`` given as an index or as ``"ion1"``, ``"ion2"``, ``"motion"``."""
        if isinstance(slot, str):
            names = {f"ion{q + 1}": q for q in range(self.n_ions)}
            names["motion"] = self.motion_slot
            if slot not in names:
                raise LayoutMismatchError(f"unknown slot {slot!r} for {self.n_ions} ion(s)")
            return names[slot]
        if not 0 <= slot <= self.motion_slot:
            raise LayoutMismatchError(f"slot {slot} out of range for {self.n_ions} ion(s)")
        return int(slot)


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of the arguments, left to right."""
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def ladder_ops(fock_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated annihilation and creation operators.

    Returns
    -------
    a, a_dag : ndarray
        ``a[n-1, n] = sqrt(n)``; ``a_dag`` is its adjoint, so
        ``a_dag |fock_dim - 1> = 0``.
    """
    if int(fock_dim) != fock_dim or fock_dim < 2:
        raise InvalidDimensionError(f"fock_dim must be an integer >= 2, got {fock_dim}")
    a = np.diag(np.sqrt(np.arange(1, fock_dim, dtype=float)), 1).astype(complex)
    return a, a.conj().T.copy()


def number_op(fock_dim: int) -> np.ndarray:
    return np.diag(np.arange(fock_dim, dtype=float)).astype(complex)


def sigma_phi(phi: float) -> np.ndarray:
    """``exp(i phi) sigma_plus + exp(-i phi) sigma_minus``."""
    return np.exp(1j * phi) * SIGMA_PLUS + np.exp(-1j * phi) * SIGMA_MINUS


class InternalOps(NamedTuple):
    sigma_plus: np.ndarray
    sigma_z: np.ndarray
    sigma_phi: Callable[[float], np.ndarray]


def internal_ops() -> InternalOps:
    """Single-ion operators ``(sigma_plus, sigma_z, sigma_phi)``."""
    return InternalOps(SIGMA_PLUS.copy(), SIGMA_Z.copy(), sigma_phi)


def embed(op: np.ndarray, slot, layout: SpaceLayout) -> np.ndarray:
    """Place a local operator on one slot, identity elsewhere."""
    k = layout.slot_index(slot)
    op = np.asarray(op, dtype=complex)
    local = layout.slot_dims[k]
    if op.shape != (local, local):
        raise InvalidDimensionError(f"operator shape {op.shape} does not fit slot {k} of size {local}")
    factors = [np.eye(d, dtype=complex) for d in layout.slot_dims]
    factors[k] = op
    return kron(*factors)


def internal_embed(op: np.ndarray, layout: SpaceLayout) -> np.ndarray:
    """Extend an operator on the internal space by the motional identity."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (layout.n_internal, layout.n_internal):
        raise InvalidDimensionError(f"internal operator must be {layout.n_internal}x{layout.n_internal}")
    return np.kron(op, np.eye(layout.fock_dim))


def collective_sz(n_ions: int = 2) -> np.ndarray:
    """``S^z = sum_q sigma_z^(q)`` on the internal space."""
    return sum(kron(*[SIGMA_Z if p == q else I2 for p in range(n_ions)]) for q in range(n_ions))


def displacement(alpha: complex, fock_dim: int) -> np.ndarray:
    """``exp(alpha a_dag - conj(alpha) a)`` on the truncated space.

    Accurate only while ``|alpha|**2`` is well below ``fock_dim``.
    """
    a, ad = ladder_ops(fock_dim)
    return expm(alpha * ad - np.conj(alpha) * a)


def thermal_state(n_bar: float, fock_dim: int) -> np.ndarray:
    """Diagonal thermal density matrix renormalized over the truncation."""
    if n_bar < 0 or not np.isfinite(n_bar):
        raise InvalidParameterError(f"n_bar must be non-negative, got {n_bar}")
    if fock_dim < 2:
        raise InvalidDimensionError(f"fock_dim must be >= 2, got {fock_dim}")
    if n_bar == 0:
        p = np.zeros(fock_dim)
        p[0] = 1.0
    else:
        p = (n_bar / (1.0 + n_bar)) ** np.arange(fock_dim)
        p /= p.sum()
    return np.diag(p).astype(complex)


def fock_state(n: int, fock_dim: int) -> np.ndarray:
    v = np.zeros(fock_dim, dtype=complex)
    v[n] = 1.0
    return v


def internal_index(label: str | int, n_ions: int = 2) -> int:
    """Index of a computational state such as ``"DD"`` or ``"S"``."""
    if isinstance(label, (int, np.integer)):
        if not 0 <= label < 2**n_ions:
            raise InvalidParameterError(f"internal index {label} out of range")
        return int(label)
    labels = INTERNAL_LABELS[n_ions]
    if label not in labels:
        raise InvalidParameterError(f"unknown internal state {label!r}; expected one of {labels}")
    return labels.index(label)


def basis_state(label: str | int, layout: SpaceLayout, n: int = 0) -> np.ndarray:
    """Product state ``|label> (x) |n>``."""
    s = internal_index(label, layout.n_ions)
    if not 0 <= n < layout.fock_dim:
        raise InvalidDimensionError(f"phonon number {n} outside truncation {layout.fock_dim}")
    v = np.zeros(layout.dim, dtype=complex)
    v[s * layout.fock_dim + n] = 1.0
    return v


def as_state(vec, tol: float = 1e-10) -> np.ndarray:
    """Validate a state vector, returning it as a complex array."""
    v = np.asarray(vec, dtype=complex)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise InvalidParameterError(f"state norm {norm:.3e} differs from 1")
    return v


def phase_distance(U: np.ndarray, V: np.ndarray) -> float:
    """``min_theta || U - exp(i theta) V ||_2`` (spectral norm)."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    overlap = np.trace(V.conj().T @ U)
    theta0 = np.angle(overlap) if abs(overlap) > 0 else 0.0

    def f(th):
        return np.linalg.norm(U - np.exp(1j * th) * V, 2)

    best = f(theta0)
    res = minimize_scalar(f, bounds=(theta0 - 0.5, theta0 + 0.5), method="bounded",
                          options={"xatol": 1e-12})
    return float(min(best, res.fun))
