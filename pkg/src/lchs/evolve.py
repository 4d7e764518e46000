"""Weighted-unitary propagation and the direct-integration oracle.

The unitary factor for abscissa k is U(k, T), the time-ordered evolution
generated by k L(t) + H(t). A solve applies sum_j c_j U(k_j, T) u0 for the
terms of a SamplingPlan, unwinds any spectral shift by exp(c T), and compares
against the oracle solution of du/dt = -A(t) u.

Time ordering is discretized by the midpoint rule: n equal steps, each
applying exp(-i dt (k L + H)) with the pair evaluated at the step midpoint.
For constant schedules the factors commute and the product collapses to a
single exponential, which is evaluated exactly (one eigendecomposition), so
the result is independent of n_steps to roundoff.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionError,
    PreconditionError,
    PropagationError,
    RangeError,
)
from .kernels import KernelSpec, kernel_f
from .linalg import (
    HermitianPair,
    TimeSchedule,
    matrix_exponential,
    spectral_norm_estimate,
)
from .sampling import SamplingPlan, gauss_legendre

# chunk size (in matrix entries) for batched eigendecompositions
_BATCH_ENTRY_BUDGET = 4_000_000

ORACLE_TOL = 1e-10
ORACLE_STEP_CAP = 1 << 20


@dataclass(frozen=True)
class ProblemInstance:
    """A concrete finite problem: schedule of (L, H) pairs, initial vector,
    and the spectral-shift record needed to unwind the solution.

    `shift` is the scalar already added to every L in the schedule and
    `lambda0` the certified post-shift lower bound. The positivity gate
    lambda0 > 0 is enforced where the unitary-combination identity is used
    (lchs_apply, solve, residual_lemma_check), not at construction, so that
    bare propagation remains available for any Hermitian pair.
    """

    schedule: TimeSchedule
    dim: int
    u0: np.ndarray
    label: str = ""
    shift: float = 0.0
    lambda0: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        u0 = np.asarray(self.u0, dtype=complex)
        object.__setattr__(self, "u0", u0)
        if u0.shape != (self.dim,):
            raise DimensionError(f"u0 shape {u0.shape} != (dim,) = ({self.dim},)")
        if not np.linalg.norm(u0) > 0:
            raise RangeError("u0 must be nonzero")
        if self.schedule.dim != self.dim:
            raise DimensionError("schedule dimension != problem dimension")

    @staticmethod
    def from_pair(pair: HermitianPair, u0, T: float = 1.0, label: str = "") -> "ProblemInstance":
        u0 = np.asarray(u0, dtype=complex)
        return ProblemInstance(
            schedule=TimeSchedule.constant(pair, T),
            dim=pair.dim,
            u0=u0,
            label=label,
            shift=pair.shift,
            lambda0=pair.lambda0,
        )

    def require_gate(self) -> None:
        if not self.lambda0 > 0:
            raise PreconditionError(
                f"positivity gate violated: lambda0 = {self.lambda0:.3e} <= 0 "
                f"for instance {self.label!r}"
            )


@dataclass
class SolveReport:
    """Outcome of one solve: estimate, oracle, errors, sizes, timings."""

    u_lchs: np.ndarray
    u_oracle: np.ndarray
    rel_error: float
    abs_error: float
    plan_size: int
    propagator_steps: int
    wall_times: dict
    shift_unwound: bool
    norm_ratio: float  # ||u0|| / ||u_lchs||, the amplification diagnostic

    def to_dict(self) -> dict:
        def interleave(v):
            out = np.empty(2 * len(v))
            out[0::2] = v.real
            out[1::2] = v.imag
            return [float(x) for x in out]

        return {
            "u_lchs": interleave(self.u_lchs),
            "u_oracle": interleave(self.u_oracle),
            "rel_error": self.rel_error,
            "abs_error": self.abs_error,
            "plan_size": self.plan_size,
            "propagator_steps": self.propagator_steps,
            "shift_unwound": self.shift_unwound,
            "norm_ratio": self.norm_ratio,
        }


def _apply_batch_constant(pair: HermitianPair, ks: np.ndarray, T: float, u0: np.ndarray) -> np.ndarray:
    """exp(-i (k L + H) T) u0 for every k in ks, via stacked eigendecompositions."""
    dim = pair.dim
    if dim == 1:
        phases = np.exp(-1j * (ks * pair.L[0, 0].real + pair.H[0, 0].real) * T)
        return (phases * u0[0])[:, None]
    chunk = max(1, _BATCH_ENTRY_BUDGET // (dim * dim))
    out = np.empty((len(ks), dim), dtype=complex)
    for start in range(0, len(ks), chunk):
        kc = ks[start : start + chunk]
        G = kc[:, None, None] * pair.L[None, :, :] + pair.H[None, :, :]
        w, V = np.linalg.eigh(G)
        amp = np.einsum("nji,j->ni", V.conj(), u0)
        amp *= np.exp(-1j * w * T)
        out[start : start + chunk] = np.einsum("nij,nj->ni", V, amp)
    return out


def _apply_batch_stepped(
    schedule: TimeSchedule, ks: np.ndarray, T: float, n_steps: int, u0: np.ndarray
) -> np.ndarray:
    """Midpoint-rule time-ordered product for every k in ks.

    The pair at each step midpoint is shared across abscissae, so each step
    is one batched eigendecomposition over the k axis.
    """
    dim = schedule.dim
    dt = T / n_steps
    vecs = np.broadcast_to(u0, (len(ks), dim)).copy()
    chunk = max(1, _BATCH_ENTRY_BUDGET // (dim * dim))
    for j in range(n_steps):
        t_mid = (j + 0.5) * dt
        try:
            pair = schedule.pair_at(t_mid)
        except Exception as exc:
            raise PropagationError(
                f"schedule evaluation failed at t = {t_mid}", t=t_mid
            ) from exc
        for start in range(0, len(ks), chunk):
            kc = ks[start : start + chunk]
            G = kc[:, None, None] * pair.L[None, :, :] + pair.H[None, :, :]
            w, V = np.linalg.eigh(G)
            amp = np.einsum("nji,nj->ni", V.conj(), vecs[start : start + chunk])
            amp *= np.exp(-1j * w * dt)
            vecs[start : start + chunk] = np.einsum("nij,nj->ni", V, amp)
    return vecs


def propagate_unitary(p: ProblemInstance, k: float, T: float, n_steps: int = 1) -> np.ndarray:
    """U(k, T) u0: the time-ordered unitary for generator k L(t) + H(t).

    Midpoint-rule discretization with n_steps factors; exact (independent of
    n_steps) for constant schedules.
    """
    if n_steps < 1:
        raise RangeError(f"n_steps must be >= 1, got {n_steps}")
    if not np.isfinite(k):
        raise RangeError(f"k must be finite, got {k}")
    if T == 0.0:
        return p.u0.copy()
    ks = np.array([float(k)])
    if p.schedule.kind == "constant":
        return _apply_batch_constant(p.schedule.pairs[0], ks, T, p.u0)[0]
    return _apply_batch_stepped(p.schedule, ks, T, n_steps, p.u0)[0]


def _kahan_weighted_sum(vectors: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """sum_j coeffs[j] * vectors[j] in ascending index order with compensated
    summation, for bit-stable reductions."""
    s = np.zeros(vectors.shape[1], dtype=complex)
    comp = np.zeros_like(s)
    for j in range(vectors.shape[0]):
        term = coeffs[j] * vectors[j] - comp
        tmp = s + term
        comp = (tmp - s) - term
        s = tmp
    return s


def lchs_apply(
    p: ProblemInstance, plan: SamplingPlan, T: float, n_steps: int = 1
) -> np.ndarray:
    """Evaluate sum_j c_j U(k_j, T) u0 and unwind the spectral shift.

    Terms are reduced in ascending plan order with compensated summation. If
    the instance records a shift c > 0 the result is multiplied by exp(c T).
    """
    plan.validate()
    p.require_gate()
    if T == 0.0:
        total = complex(_kahan_weighted_sum(np.ones((plan.size, 1), dtype=complex), plan.c)[0])
        return total * p.u0
    try:
        if p.schedule.kind == "constant":
            vecs = _apply_batch_constant(p.schedule.pairs[0], plan.k, T, p.u0)
        else:
            vecs = _apply_batch_stepped(p.schedule, plan.k, T, n_steps, p.u0)
    except PropagationError:
        raise
    except Exception as exc:
        raise PropagationError(f"propagation failed: {exc}") from exc
    out = _kahan_weighted_sum(vecs, plan.c)
    if p.shift > 0:
        out = out * np.exp(p.shift * T)
    return out


def _oracle_matrix(p: ProblemInstance, t: float) -> np.ndarray:
    """Original (unshifted) generator A(t) = (L(t) - shift I) + i H(t)."""
    pair = p.schedule.pair_at(t)
    return pair.L - p.shift * np.eye(p.dim) + 1j * pair.H


def _rk4(A_of, t0: float, t1: float, u: np.ndarray, n: int) -> np.ndarray:
    dt = (t1 - t0) / n
    for j in range(n):
        t = t0 + j * dt
        A1 = A_of(t)
        A2 = A_of(t + 0.5 * dt)
        A4 = A_of(t + dt)
        k1 = -(A1 @ u)
        k2 = -(A2 @ (u + 0.5 * dt * k1))
        k3 = -(A2 @ (u + 0.5 * dt * k2))
        k4 = -(A4 @ (u + dt * k3))
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return u


def _oracle_stepping(p: ProblemInstance, T: float) -> np.ndarray:
    """Classical fourth-order stepping with step doubling to ORACLE_TOL.

    For piecewise schedules the steps are aligned with the breakpoints, and
    each span uses its own constant generator (evaluated at the span
    midpoint), so the stage evaluations never straddle a discontinuity.
    """
    if p.schedule.kind == "piecewise":
        bp = np.asarray(p.schedule.breakpoints, dtype=float)
        bp = np.clip(bp, 0.0, T)
        edges = np.unique(np.concatenate([bp, [0.0, T]]))
    else:
        edges = np.array([0.0, T])
    spans = [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]

    def run(n_per_span: int) -> np.ndarray:
        u = p.u0.copy()
        for a, b in spans:
            if p.schedule.kind == "piecewise":
                A_span = _oracle_matrix(p, 0.5 * (a + b))
                u = _rk4(lambda t: A_span, a, b, u, n_per_span)
            else:
                u = _rk4(lambda t: _oracle_matrix(p, t), a, b, u, n_per_span)
        return u

    n = 8
    prev = run(n)
    while True:
        n *= 2
        cur = run(n)
        delta = np.linalg.norm(cur - prev) / max(np.linalg.norm(cur), 1e-300)
        if delta <= ORACLE_TOL:
            return cur
        if n * len(spans) > ORACLE_STEP_CAP:
            raise ConvergenceError(
                f"oracle stepping hit the cap at {n} steps/span", last_delta=delta
            )
        prev = cur


def oracle_solve(p: ProblemInstance, T: float) -> np.ndarray:
    """Ground-truth solution of du/dt = -A(t) u at time T.

    Constant schedules use the matrix exponential of the original (unshifted)
    generator; time-dependent ones use fourth-order stepping with doubling.
    """
    if T == 0.0:
        return p.u0.copy()
    if p.schedule.kind == "constant":
        A = _oracle_matrix(p, 0.0)
        return matrix_exponential(-A * T) @ p.u0
    return _oracle_stepping(p, T)


def residual_lemma_check(
    p: ProblemInstance,
    kernel: KernelSpec,
    T: float,
    K: float,
    M: int,
    Q: int,
    n_steps: int = 1,
) -> float:
    """Norm of the f-weighted unitary sum, which tends to zero as the window
    and rule are refined.

    Note the weight here is the kernel f itself, not g = f/(1 - ik); the sum
    realizes the principal value by symmetric truncation to [-K, K]. Requires
    the positivity gate lambda0 > 0.
    """
    p.require_gate()
    if T <= 0:
        raise RangeError(f"T must be positive for the residual check, got {T}")
    x, w = gauss_legendre(Q)
    h = K / M
    left = h * np.arange(-M, M)
    ks = (left[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    wts = np.broadcast_to(0.5 * h * w, (2 * M, Q)).ravel()
    fvals = np.asarray(kernel_f(kernel, ks), dtype=complex)
    if p.schedule.kind == "constant":
        vecs = _apply_batch_constant(p.schedule.pairs[0], ks, T, p.u0)
    else:
        vecs = _apply_batch_stepped(p.schedule, ks, T, n_steps, p.u0)
    total = _kahan_weighted_sum(vecs, wts * fvals)
    return float(np.linalg.norm(total))


def _auto_steps_initial(p: ProblemInstance, plan: SamplingPlan, T: float) -> int:
    """Step-count heuristic: phase error grows with |k_max| ||L|| T."""
    k_max = float(np.max(np.abs(plan.k))) if plan.size else 0.0
    normL = spectral_norm_estimate(p.schedule.pair_at(0.0).L)
    return max(1, int(np.ceil(1.0 + k_max * normL * T)))


def solve(
    p: ProblemInstance,
    plan: SamplingPlan,
    T: float,
    n_steps: int | None = None,
    step_tol: float | None = None,
) -> SolveReport:
    """Run the weighted-unitary estimate against the oracle and report.

    When n_steps is not given it is auto-chosen: starting from a
    norm-weighted heuristic (or 1 for constant schedules, where stepping is
    exact), the count is doubled until the estimate moves by at most
    step_tol relative (default: a third of the plan's accuracy target).
    """
    p.require_gate()
    if step_tol is None:
        step_tol = plan.meta.get("eps", 1e-6) / 3.0
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    if T == 0.0 or p.schedule.kind == "constant":
        n = 1
        u_lchs = lchs_apply(p, plan, T, n)
        timings["lchs_s"] = time.perf_counter() - t0
    else:
        n = n_steps if n_steps is not None else _auto_steps_initial(p, plan, T)
        u_lchs = lchs_apply(p, plan, T, n)
        if n_steps is None:
            for _ in range(16):
                u_next = lchs_apply(p, plan, T, 2 * n)
                n *= 2
                delta = np.linalg.norm(u_next - u_lchs) / max(
                    np.linalg.norm(u_next), 1e-300
                )
                u_lchs = u_next
                if delta <= step_tol:
                    break
        timings["lchs_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    u_oracle = oracle_solve(p, T)
    timings["oracle_s"] = time.perf_counter() - t0

    diff = np.linalg.norm(u_lchs - u_oracle)
    nrm = np.linalg.norm(u_oracle)
    nlchs = np.linalg.norm(u_lchs)
    return SolveReport(
        u_lchs=u_lchs,
        u_oracle=u_oracle,
        rel_error=float(diff / nrm) if nrm > 0 else float("inf"),
        abs_error=float(diff),
        plan_size=plan.size,
        propagator_steps=n,
        wall_times=timings,
        shift_unwound=p.shift > 0,
        norm_ratio=float(np.linalg.norm(p.u0) / nlchs) if nlchs > 0 else float("inf"),
    )
