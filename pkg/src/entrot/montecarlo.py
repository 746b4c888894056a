"""Batched Monte Carlo estimation of protocol statistics.

Runs many independent protocol attempts in vectorized form and reports
success rates, fidelities and entanglement spending.  The engine
reproduces the single-run sampling rules exactly - same uniform-deviate
thresholds, same branch-folding guard, same draw layout - so a batch
trial and :func:`~entrot.protocol.run_once` given the same deviates pick
the same branches.  All randomness derives from one 64-bit seed through
counter-based streams, making every summary bit-for-bit reproducible.

Draw layout per trial (columns of the decision matrix):

==  =========================================
0   Alice's x-basis outcome
1   POVM branch
2   failure b outcome
3   recovery x-basis outcome (deterministic mode)
4   recovery POVM branch (deterministic mode)
==  =========================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entanglement import resource_entropy
from .povm import (HALF_PI, PovmWeights, ProtocolParams, build_povm, optimum,
                   povm_vectors)
from .protocol import BRANCH_MIN_PROB, controlled_rotation, wrap_angle
from .qmath import StateVector, psd_sqrt2

__all__ = ["SummaryStats", "monte_carlo"]

#: Trials are processed in blocks of this size to bound memory.
_CHUNK = 1 << 16

#: Stream tags mixed into the Philox key (high 64 bits).  Tag 0 is never
#: used here: it is the plain single-run keying, and reusing it would
#: make batch trials overlap with individually seeded runs.
_DECISION_CHANNEL = 1
_INPUT_CHANNEL = 2

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

#: Sign pattern of ``sz x sz`` on the data register (A, B).
_D4 = np.array([1.0, -1.0, -1.0, 1.0])

#: Register layout used by the engine, mirroring the single-run order
#: (a, A, B, b): basis index 8a + 4A + 2B + b.
_A0B0 = [0, 2, 4, 6]     # a = 0, b = 0 block, one column per (A, B)
_A1B1 = [9, 11, 13, 15]  # a = 1, b = 1 block
_B_ODD = [1, 3, 5, 7]    # b = 1 within the 8-dim (A, B, b) register
_BB_PHASE = [3, 7]       # B = 1 and b = 1: flipped by Bob's controlled phase


def _channel_rng(seed: int, channel: int) -> np.random.Generator:
    """Counter-based generator for one purpose-specific stream."""
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed!r}")
    return np.random.Generator(np.random.Philox(key=int(seed) + (channel << 64)))


def _haar_block(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` Haar-random two-qubit states as normalized rows."""
    z = rng.standard_normal((n, 8))
    phi = z[:, :4] + 1j * z[:, 4:]
    return phi / np.linalg.norm(phi, axis=1, keepdims=True)


@dataclass(eq=False)
class _SuccessArm:
    """One rank-one POVM outcome: its element, Kraus and leftover b state."""

    element: np.ndarray
    kraus: np.ndarray
    b_state: np.ndarray


@dataclass(eq=False)
class _Kernel:
    """Everything the vectorized engine precomputes for one parameter point."""

    cos_half: float
    sin_half: float
    arm1: _SuccessArm
    arm2: _SuccessArm
    kraus3: np.ndarray
    target_diag: np.ndarray                    # goal gate is diagonal
    theta_remaining: tuple[float, float]       # per failure b outcome
    recovery: tuple["_Kernel | None", "_Kernel | None"]


def _make_kernel(params: ProtocolParams, weights: PovmWeights,
                 with_recovery: bool) -> _Kernel:
    povm = build_povm(params, weights)
    if not povm.positive:
        raise ValueError(
            f"weights ({weights.x}, {weights.y}) give a non-positive POVM "
            f"(min eigenvalue {povm.min_eig_e3:.3e})")
    v1, v2 = povm_vectors(params)
    arm1 = _SuccessArm(povm.e1, psd_sqrt2(povm.e1), v1 / np.linalg.norm(v1))
    arm2 = _SuccessArm(povm.e2, psd_sqrt2(povm.e2), v2 / np.linalg.norm(v2))
    kraus3 = psd_sqrt2(povm.e3)
    r = kraus3.real
    c, s = params.cos_half_alpha, params.sin_half_alpha
    theta_rem = []
    recovery: list[_Kernel | None] = []
    for j in (0, 1):
        theta_f = wrap_angle(2.0 * math.atan2(r[j, 1] * s, r[j, 0] * c))
        rem = wrap_angle(params.theta - theta_f)
        theta_rem.append(rem)
        if with_recovery and rem != 0.0:
            recovery.append(_make_kernel(ProtocolParams(rem, HALF_PI),
                                         PovmWeights(0.5, 0.5),
                                         with_recovery=False))
        else:
            recovery.append(None)
    return _Kernel(cos_half=c, sin_half=s, arm1=arm1, arm2=arm2,
                   kraus3=kraus3,
                   target_diag=controlled_rotation(params.theta).diagonal(),
                   theta_remaining=(theta_rem[0], theta_rem[1]),
                   recovery=(recovery[0], recovery[1]))


def _front_end(kernel: _Kernel, inputs: np.ndarray,
               u_x: np.ndarray) -> np.ndarray:
    """Steps 1-3 for a block: returns the (n, 4, 2) register over
    ((A, B), b), rows normalized, ready for the POVM."""
    n = inputs.shape[0]
    reg = np.zeros((n, 16), dtype=complex)
    reg[:, _A0B0] = kernel.cos_half * inputs
    reg[:, _A1B1] = 1j * kernel.sin_half * inputs
    reg[:, 12:16] *= -1.0                             # controlled phase (a, A)
    plus = (reg[:, :8] + reg[:, 8:]) * _INV_SQRT2     # <+|_a and <-|_a
    minus = (reg[:, :8] - reg[:, 8:]) * _INV_SQRT2
    p_plus = np.einsum("ni,ni->n", plus.conj(), plus).real
    p_minus = np.einsum("ni,ni->n", minus.conj(), minus).real
    take_plus = u_x < p_plus / (p_plus + p_minus)
    reg8 = np.where(take_plus[:, None], plus, minus)
    reg8 /= np.sqrt(np.where(take_plus, p_plus, p_minus))[:, None]
    reg8[np.ix_(~take_plus, _B_ODD)] *= -1.0          # Bob's sz after a "-1"
    reg8[:, _BB_PHASE] *= -1.0                        # controlled phase (b, B)
    return reg8.reshape(n, 4, 2)


def _pick_branches(p1: np.ndarray, p2: np.ndarray,
                   u: np.ndarray) -> np.ndarray:
    """Vectorized branch selection with the same folding guard as the
    single-run path: a failure element below ``BRANCH_MIN_PROB`` is never
    sampled; its round-off tail goes to the heavier success branch."""
    p3 = 1.0 - p1 - p2
    branch = np.full(p1.shape, 3, dtype=np.int64)
    branch[u < p1 + p2] = 2
    branch[u < p1] = 1
    tail = (branch == 3) & (p3 < BRANCH_MIN_PROB)
    branch[tail & (p2 >= BRANCH_MIN_PROB)] = 2
    branch[tail & (p2 < BRANCH_MIN_PROB)] = 1
    return branch


def _success_states(kernel: _Kernel, reg: np.ndarray, branch: np.ndarray,
                    out: np.ndarray) -> None:
    """Fill ``out`` rows for branches 1 and 2 with the corrected final
    (A, B) states."""
    for k, arm in ((1, kernel.arm1), (2, kernel.arm2)):
        sel = branch == k
        if not sel.any():
            continue
        red = (reg[sel] @ arm.kraus.T) @ arm.b_state
        red /= np.linalg.norm(red, axis=1, keepdims=True)
        if k == 2:
            red = red * _D4                 # both parties' sz corrections
        out[sel] = red


def _simulate_chunk(kernel: _Kernel, inputs: np.ndarray, draws: np.ndarray,
                    deterministic: bool
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One block of trials.

    Returns ``(branch, fidelity, bell_pairs)`` per trial.  Fidelity is
    against the target gate applied to the input; it is NaN for a
    branch-3 trial left unrecovered (non-deterministic mode).
    """
    n = inputs.shape[0]
    reg = _front_end(kernel, inputs, draws[:, 0])
    p1 = np.einsum("nij,jk,nik->n", reg.conj(), kernel.arm1.element, reg).real
    p2 = np.einsum("nij,jk,nik->n", reg.conj(), kernel.arm2.element, reg).real
    branch = _pick_branches(p1, p2, draws[:, 1])

    final = np.zeros((n, 4), dtype=complex)
    bell = np.zeros(n, dtype=np.int64)
    counted = np.ones(n, dtype=bool)
    _success_states(kernel, reg, branch, final)

    sel3 = branch == 3
    if sel3.any():
        m3 = reg[sel3] @ kernel.kraus3.T
        m3 /= np.linalg.norm(m3.reshape(-1, 8), axis=1).reshape(-1, 1, 1)
        pb0 = np.einsum("ni,ni->n", m3[:, :, 0].conj(), m3[:, :, 0]).real
        pb1 = np.einsum("ni,ni->n", m3[:, :, 1].conj(), m3[:, :, 1]).real
        j = np.where(draws[sel3, 2] < pb0 / (pb0 + pb1), 0, 1)
        cond = m3[np.arange(m3.shape[0]), :, j]
        cond /= np.linalg.norm(cond, axis=1, keepdims=True)
        if deterministic:
            idx3 = np.flatnonzero(sel3)
            for outcome in (0, 1):
                grp = j == outcome
                if not grp.any():
                    continue
                rows = idx3[grp]
                rec = kernel.recovery[outcome]
                if rec is None:               # nothing left to rotate
                    final[rows] = cond[grp]
                    continue
                final[rows] = _recover_block(rec, cond[grp],
                                             draws[rows, 3], draws[rows, 4])
                bell[rows] = 1
        else:
            counted[sel3] = False
            final[sel3] = cond                # residual-rotated data state

    fid = np.full(n, np.nan)
    target = inputs * kernel.target_diag
    overlap = np.einsum("ni,ni->n", target[counted].conj(), final[counted])
    fid[counted] = np.abs(overlap) ** 2
    return branch, fid, bell


def _recover_block(kernel: _Kernel, states: np.ndarray, u_x: np.ndarray,
                   u_povm: np.ndarray) -> np.ndarray:
    """Complete the missing rotation on a Bell pair, where the POVM is
    projective and both branches succeed."""
    reg = _front_end(kernel, states, u_x)
    p1 = np.einsum("nij,jk,nik->n", reg.conj(), kernel.arm1.element, reg).real
    p2 = np.einsum("nij,jk,nik->n", reg.conj(), kernel.arm2.element, reg).real
    branch = _pick_branches(p1, p2, u_povm)
    if (branch == 3).any():
        raise RuntimeError("recovery POVM produced a failure branch at a "
                           "maximally entangled resource")
    out = np.zeros_like(states)
    _success_states(kernel, reg, branch, out)
    return out


@dataclass(frozen=True)
class SummaryStats:
    """Aggregates over a batch of protocol attempts.

    ``mean_fidelity`` is against the target gate and averages the trials
    that finish with it applied: the success branches, plus recovered
    failures in deterministic mode (where it covers every trial).  It is
    None when no trial finished.  ``empirical_p`` counts branches 1-2
    over all trials; ``z_score`` compares it with ``analytic_p = x + y``
    under the binomial standard error.  ``mean_ebits`` is the resource
    entropy plus Bell pairs spent per trial.
    """

    params: ProtocolParams
    weights: PovmWeights
    trials: int
    seed: int
    deterministic: bool
    branch_counts: tuple[int, int, int]
    success_count: int
    empirical_p: float
    analytic_p: float
    z_score: float
    mean_fidelity: float | None
    mean_bell_pairs: float
    mean_ebits: float


def monte_carlo(params: ProtocolParams, trials: int, seed: int,
                weights: PovmWeights | None = None,
                input_state: StateVector | None = None,
                deterministic: bool = False) -> SummaryStats:
    """Estimate protocol statistics over ``trials`` independent attempts.

    ``weights`` defaults to the optimal POVM for ``params``.  With
    ``input_state=None`` every trial gets a fresh Haar-random data state;
    otherwise the given state (on qubits ``A``, ``B``) is reused.  The
    decision deviates and the random inputs come from two disjoint
    streams derived from ``seed``, so results are reproducible and
    independent of chunking.
    """
    if not isinstance(trials, (int, np.integer)) or isinstance(trials, bool):
        raise TypeError(f"trials must be an integer, got {type(trials).__name__}")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials!r}")
    if weights is None:
        weights = optimum(params).weights
    kernel = _make_kernel(params, weights, with_recovery=deterministic)

    fixed = None
    if input_state is not None:
        if set(input_state.qubits) != {"A", "B"}:
            raise ValueError(
                f"input must live on qubits A and B, got {input_state.qubits}")
        if abs(input_state.norm() - 1.0) > 1e-9:
            raise ValueError("input state must be normalized")
        fixed = input_state.permuted(("A", "B")).amps

    dec_rng = _channel_rng(seed, _DECISION_CHANNEL)
    in_rng = _channel_rng(seed, _INPUT_CHANNEL)

    counts = np.zeros(3, dtype=np.int64)
    fid_sum = 0.0
    fid_n = 0
    bell_sum = 0
    done = 0
    while done < trials:
        n = min(_CHUNK, trials - done)
        draws = dec_rng.random((n, 5))
        if fixed is None:
            inputs = _haar_block(in_rng, n)
        else:
            inputs = np.broadcast_to(fixed, (n, 4))
        branch, fid, bell = _simulate_chunk(kernel, inputs, draws,
                                            deterministic)
        counts += np.bincount(branch, minlength=4)[1:4]
        have = ~np.isnan(fid)
        fid_sum += float(fid[have].sum())
        fid_n += int(have.sum())
        bell_sum += int(bell.sum())
        done += n

    success = int(counts[0] + counts[1])
    empirical_p = success / trials
    analytic_p = weights.x + weights.y
    se = math.sqrt(analytic_p * (1.0 - analytic_p) / trials)
    if se == 0.0:
        z = 0.0 if empirical_p == analytic_p else math.copysign(
            math.inf, empirical_p - analytic_p)
    else:
        z = (empirical_p - analytic_p) / se
    mean_bell = bell_sum / trials
    return SummaryStats(
        params=params, weights=weights, trials=int(trials), seed=int(seed),
        deterministic=deterministic,
        branch_counts=(int(counts[0]), int(counts[1]), int(counts[2])),
        success_count=success, empirical_p=empirical_p,
        analytic_p=analytic_p, z_score=z,
        mean_fidelity=(fid_sum / fid_n) if fid_n else None,
        mean_bell_pairs=mean_bell,
        mean_ebits=resource_entropy(params.alpha) + mean_bell)
