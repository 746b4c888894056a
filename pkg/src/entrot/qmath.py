"""Small dense linear algebra for few-qubit state vectors.

Everything here works on plain numpy arrays plus a tiny immutable
:class:`StateVector` wrapper that tracks qubit labels.  Registers are
limited to four qubits (dimension 16), which is all the protocol ever
needs.  The qubit listed first is the most significant bit of the
amplitude index, matching the usual ``kron`` convention.

All operations are pure: they return new values and never mutate their
inputs.  Randomness never enters this module; sampling decisions are
made by callers who pass an explicit uniform deviate where needed.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "I2",
    "SX",
    "SZ",
    "StateVector",
    "apply_gate",
    "expectation",
    "fidelity",
    "haar_state",
    "hermitian_eig2",
    "kron",
    "measure_qubit",
    "project_out",
    "psd_sqrt2",
]

MAX_DIM = 16

#: Tolerance below which a matrix is accepted as Hermitian.
HERMITIAN_TOL = 1e-12

#: Eigenvalues in [-CLAMP_TOL, 0) are treated as exact zeros by psd_sqrt2.
CLAMP_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two square operators, left factor most significant.

    Both operand dimensions must be powers of two and the product must not
    exceed ``MAX_DIM``; anything larger is a bug in the caller.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    for m in (a, b):
        if m.ndim != 2 or m.shape[0] != m.shape[1] or not _is_pow2(m.shape[0]):
            raise ValueError(f"kron operand has invalid shape {m.shape}")
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise ValueError(
            f"kron result dimension {a.shape[0] * b.shape[0]} exceeds {MAX_DIM}"
        )
    return np.kron(a, b)


def hermitian_eig2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a 2x2 Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvector columns ``v``.  Raises ``ValueError`` when the input is not
    Hermitian within ``HERMITIAN_TOL``.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian within 1e-12")
    w, v = np.linalg.eigh(m)
    return w, v


def psd_sqrt2(m: np.ndarray) -> np.ndarray:
    """Unique positive-semidefinite square root of a 2x2 Hermitian PSD matrix.

    Eigenvalues in ``[-CLAMP_TOL, 0)`` are clamped to zero (they arise from
    round-off when the matrix sits on the positivity boundary); anything
    more negative raises ``ValueError``.
    """
    w, v = hermitian_eig2(m)
    if w[0] < -CLAMP_TOL:
        raise ValueError(f"matrix is not PSD: smallest eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


class StateVector:
    """Immutable pure state on a labelled qubit register.

    Parameters
    ----------
    qubits:
        Label for every qubit, most significant first.  Labels must be
        unique; the register may hold at most four qubits.
    amps:
        Complex amplitudes of length ``2**len(qubits)``.  No normalization
        is imposed here because intermediate Kraus updates legitimately
        produce sub-normalized vectors; use :meth:`normalized` when a unit
        vector is required.
    """

    __slots__ = ("qubits", "amps")

    def __init__(self, qubits: Sequence[str], amps: Iterable[complex]):
        qubits = tuple(qubits)
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubit labels in {qubits}")
        amps = np.array(list(amps) if not isinstance(amps, np.ndarray) else amps,
                        dtype=complex).reshape(-1)
        if amps.size != 2 ** len(qubits) or amps.size > MAX_DIM or not qubits:
            raise ValueError(
                f"amplitude count {amps.size} does not fit register {qubits}"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("non-finite amplitude")
        amps.flags.writeable = False
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "amps", amps)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("StateVector is immutable")

    @classmethod
    def basis(cls, qubits: Sequence[str], bits: str) -> "StateVector":
        """Computational basis state, e.g. ``basis(("A", "B"), "01")``."""
        qubits = tuple(qubits)
        if len(bits) != len(qubits) or any(b not in "01" for b in bits):
            raise ValueError(f"bit string {bits!r} does not match {qubits}")
        amps = np.zeros(2 ** len(qubits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(qubits, amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < 1e-300:
            raise ValueError("cannot normalize a zero state")
        return StateVector(self.qubits, self.amps / n)

    def tensor(self, other: "StateVector") -> "StateVector":
        """Product state; ``self`` supplies the most significant qubits."""
        if set(self.qubits) & set(other.qubits):
            raise ValueError("tensor operands share qubit labels")
        return StateVector(self.qubits + other.qubits,
                           np.kron(self.amps, other.amps))

    def permuted(self, order: Sequence[str]) -> "StateVector":
        """Same state with the register relabelled into ``order``."""
        order = tuple(order)
        if sorted(order) != sorted(self.qubits):
            raise ValueError(f"{order} is not a permutation of {self.qubits}")
        n = len(self.qubits)
        src = [self.qubits.index(q) for q in order]
        amps = self.amps.reshape((2,) * n).transpose(src).reshape(-1)
        return StateVector(order, amps)

    def _axis(self, qubit: str) -> int:
        try:
            return self.qubits.index(qubit)
        except ValueError:
            raise ValueError(f"no qubit {qubit!r} in register {self.qubits}") from None

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"StateVector(qubits={self.qubits}, amps={np.array2string(self.amps, precision=5)})"


def apply_gate(state: StateVector, gate: np.ndarray,
               targets: Sequence[str]) -> StateVector:
    """Apply an operator to the named target qubits.

    ``gate`` must be square with dimension ``2**len(targets)``; its first
    tensor factor acts on ``targets[0]``.  The gate is not required to be
    unitary (Kraus updates use this too), so the output norm equals the
    input norm only for unitary gates.
    """
    targets = tuple(targets)
    gate = np.asarray(gate, dtype=complex)
    k = len(targets)
    if gate.shape != (2 ** k, 2 ** k):
        raise ValueError(f"gate shape {gate.shape} does not act on {k} qubit(s)")
    axes = [state._axis(q) for q in targets]
    n = len(state.qubits)
    psi = state.amps.reshape((2,) * n)
    g = gate.reshape((2,) * (2 * k))
    out = np.tensordot(g, psi, axes=(tuple(range(k, 2 * k)), axes))
    out = np.moveaxis(out, tuple(range(k)), axes)
    return StateVector(state.qubits, out.reshape(-1))


def fidelity(u: StateVector, v: StateVector) -> float:
    """Squared overlap ``|<u|v>|**2``; insensitive to global phase.

    Both states must be normalized and live on the same set of qubits
    (``v`` is permuted to match ``u`` if the orders differ).
    """
    if set(u.qubits) != set(v.qubits):
        raise ValueError(f"registers differ: {u.qubits} vs {v.qubits}")
    if abs(u.norm() - 1.0) > 1e-9 or abs(v.norm() - 1.0) > 1e-9:
        raise ValueError("fidelity requires normalized states")
    if v.qubits != u.qubits:
        v = v.permuted(u.qubits)
    return float(abs(np.vdot(u.amps, v.amps)) ** 2)


def _contract(state: StateVector, qubit: str, vector: np.ndarray) -> np.ndarray:
    """Amplitudes of ``<vector|_qubit psi>`` on the remaining qubits."""
    ax = state._axis(qubit)
    n = len(state.qubits)
    psi = np.moveaxis(state.amps.reshape((2,) * n), ax, 0)
    return np.tensordot(np.conj(vector), psi, axes=(0, 0)).reshape(-1)


def project_out(state: StateVector, qubit: str, vector: np.ndarray) -> StateVector:
    """Project ``qubit`` onto the single-qubit state ``vector`` and drop it.

    Returns the normalized conditional state of the remaining qubits.
    Raises when the projection has (numerically) zero weight.
    """
    rest = tuple(q for q in state.qubits if q != qubit)
    if not rest:
        raise ValueError("cannot remove the last qubit of a register")
    reduced = _contract(state, qubit, np.asarray(vector, dtype=complex))
    return StateVector(rest, reduced).normalized()


def measure_qubit(state: StateVector, qubit: str,
                  basis: Sequence[np.ndarray], u: float) -> tuple[int, StateVector]:
    """Projectively measure one qubit in a two-element orthonormal basis.

    The Born weights are computed from the state; the caller supplies a
    uniform deviate ``u`` in [0, 1) and the outcome is 0 when
    ``u < p0 / (p0 + p1)``.  Returns ``(outcome, post)`` where ``post`` is
    the normalized state of the remaining qubits (the measured qubit is
    removed from the register).
    """
    if not 0.0 <= u < 1.0:
        raise ValueError(f"uniform deviate {u} outside [0, 1)")
    v0 = np.asarray(basis[0], dtype=complex)
    v1 = np.asarray(basis[1], dtype=complex)
    r0 = _contract(state, qubit, v0)
    r1 = _contract(state, qubit, v1)
    p0 = float(np.vdot(r0, r0).real)
    p1 = float(np.vdot(r1, r1).real)
    if p0 + p1 < 1e-300:
        raise ValueError("state has no weight in the measurement basis")
    outcome = 0 if u < p0 / (p0 + p1) else 1
    rest = tuple(q for q in state.qubits if q != qubit)
    reduced = r0 if outcome == 0 else r1
    return outcome, StateVector(rest, reduced).normalized()


def expectation(state: StateVector, op: np.ndarray, qubit: str) -> float:
    """Real expectation value of a Hermitian single-qubit operator."""
    ax = state._axis(qubit)
    n = len(state.qubits)
    psi = np.moveaxis(state.amps.reshape((2,) * n), ax, -1).reshape(-1, 2)
    op = np.asarray(op, dtype=complex)
    return float(np.einsum("ij,jk,ik->", psi.conj(), op, psi).real)


def haar_state(qubits: Sequence[str], normals: np.ndarray) -> StateVector:
    """Build a Haar-random state from 2*dim standard normal deviates.

    ``normals`` supplies the real parts first, then the imaginary parts.
    Deterministic given the deviates, which keeps sampling reproducible.
    """
    qubits = tuple(qubits)
    d = 2 ** len(qubits)
    z = np.asarray(normals, dtype=float)
    if z.size != 2 * d:
        raise ValueError(f"need {2 * d} deviates, got {z.size}")
    return StateVector(qubits, z[:d] + 1j * z[d:]).normalized()
