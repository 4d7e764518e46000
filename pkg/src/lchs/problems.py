"""Builders for the application domains.

Each builder assembles a finite generator A, splits it into Hermitian parts,
certifies (and if necessary shifts) the spectral lower bound, and packages
the result as a ProblemInstance ready for the weighted-unitary solver.

Sign conventions worth keeping straight:

* The solver's canonical form is du/dt = -A u on column vectors. Queueing
  models evolve a row-vector distribution, d pi/dt = pi Q, so the builders
  hand the solver A = -Q^T. Relative to splitting Q itself this flips the
  sign of the Hermitian part and keeps the anti-Hermitian part.
* The absorbing-potential Hamiltonian contributes L = -(1/hbar) V_I, so an
  absorbing layer (V_I <= 0) yields L >= 0 before shifting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BuildError, DimensionError, HermiticityError, RangeError
from .evolve import ProblemInstance
from .linalg import (
    HermitianPair,
    TimeSchedule,
    hermitian_split,
    min_hermitian_eigenvalue,
)

DEFAULT_LAMBDA0 = 0.1


def _hermitian_norm(M: np.ndarray) -> float:
    """Spectral norm of a Hermitian matrix (max |eigenvalue|)."""
    w = np.linalg.eigvalsh(M)
    return float(max(abs(w[0]), abs(w[-1])))


def _finalize(
    pairs: list[HermitianPair],
    breakpoints,
    u0: np.ndarray,
    label: str,
    lambda0_target: float,
    meta: dict,
) -> ProblemInstance:
    """Shift a (possibly piecewise) family of pairs to the target bound and
    wrap everything as a ProblemInstance."""
    lam_min = min(p.lambda0 for p in pairs)
    c = max(0.0, lambda0_target - lam_min)
    if c > 0.0:
        # one uniform shift across the whole schedule, recertified per pair
        shifted = []
        for p in pairs:
            L_new = p.L + c * np.eye(p.dim)
            shifted.append(
                HermitianPair(
                    L=L_new, H=p.H, shift=p.shift + c,
                    lambda0=min_hermitian_eigenvalue(L_new),
                )
            )
        pairs = shifted
    if len(pairs) == 1:
        schedule = TimeSchedule.constant(pairs[0], math.inf)
    else:
        schedule = TimeSchedule.piecewise(breakpoints, pairs)
    meta = dict(meta)
    meta["normL"] = max(_hermitian_norm(p.L) for p in pairs)
    meta["normH"] = max(_hermitian_norm(p.H) for p in pairs)
    return ProblemInstance(
        schedule=schedule,
        dim=pairs[0].dim,
        u0=u0,
        label=label,
        shift=c,
        lambda0=min(p.lambda0 for p in pairs),
        meta=meta,
    )


# ---------------------------------------------------------------------------
# parabolic PDE in one dimension, homogeneous Dirichlet on [0, 1]
# ---------------------------------------------------------------------------

@dataclass
class ParabolicCoefficients:
    """Coefficients of -(a u')' + b u' + c u on [0, 1] with u = 0 at the ends.

    a, b, c are callables (x, t) -> float; a must stay strictly positive on
    the staggered grid (ellipticity).
    """

    a: object
    b: object
    c: object
    N_grid: int

    def __post_init__(self):
        if self.N_grid < 3:
            raise RangeError(f"N_grid must be >= 3, got {self.N_grid}")


def _parabolic_pair(pc: ParabolicCoefficients, t: float) -> HermitianPair:
    N = pc.N_grid - 2  # interior points
    h = 1.0 / (pc.N_grid - 1)
    nodes = h * np.arange(1, pc.N_grid - 1)
    mids = h * (np.arange(0, pc.N_grid - 1) + 0.5)  # staggered points x +- h/2
    am = np.array([pc.a(x, t) for x in mids])
    bad = np.nonzero(~(am > 0.0))[0]
    if len(bad):
        raise BuildError(
            f"ellipticity violated: a({mids[bad[0]]:.6g}, {t:.6g}) = {am[bad[0]]:.6g} <= 0"
        )
    cv = np.array([pc.c(x, t) for x in nodes])
    bv = np.array([pc.b(x, t) for x in nodes])

    L = np.zeros((N, N), dtype=complex)
    # flux-form second difference: a evaluated at the midpoints shared by
    # neighboring rows, which makes L exactly symmetric
    diag = (am[:-1] + am[1:]) / h**2 + cv
    np.fill_diagonal(L, diag)
    for r in range(N - 1):
        L[r, r + 1] = -am[r + 1] / h**2
        L[r + 1, r] = -am[r + 1] / h**2

    H = np.zeros((N, N), dtype=complex)
    # symmetrized first difference: exactly Hermitian by construction
    for r in range(N - 1):
        coupling = (bv[r] + bv[r + 1]) / (4.0 * h)
        H[r, r + 1] = -1j * coupling
        H[r + 1, r] = 1j * coupling

    return HermitianPair(L=L, H=H, shift=0.0, lambda0=min_hermitian_eigenvalue(L))


def build_parabolic_1d(
    pc: ParabolicCoefficients,
    T: float = 1.0,
    time_slices: int = 1,
    lambda0_target: float = DEFAULT_LAMBDA0,
    u0=None,
) -> ProblemInstance:
    """Discretize the parabolic operator on the interior grid.

    Time-dependent coefficients are handled by a piecewise-constant schedule
    over `time_slices` intervals of [0, T], sampling the coefficients at the
    interval midpoints.
    """
    h = 1.0 / (pc.N_grid - 1)
    nodes = h * np.arange(1, pc.N_grid - 1)
    if u0 is None:
        u0 = np.sin(np.pi * nodes).astype(complex)
    if time_slices == 1:
        pairs = [_parabolic_pair(pc, 0.0)]
        breakpoints = None
    else:
        breakpoints = np.linspace(0.0, T, time_slices + 1)
        mids = 0.5 * (breakpoints[:-1] + breakpoints[1:])
        pairs = [_parabolic_pair(pc, t) for t in mids]
    return _finalize(
        pairs, breakpoints, np.asarray(u0, dtype=complex),
        label=f"parabolic1d(N_grid={pc.N_grid})",
        lambda0_target=lambda0_target,
        meta={"builder": "parabolic1d", "h": h, "grid": nodes},
    )


# ---------------------------------------------------------------------------
# queueing models (birth-death chains), truncated state space
# ---------------------------------------------------------------------------

@dataclass
class QueueParams:
    """Arrival/service rates and truncation for an M/M/c queue."""

    lambda_rate: float
    mu_rate: float
    servers: int = 1
    n_trunc: int = 16

    def __post_init__(self):
        if not (self.lambda_rate > 0 and math.isfinite(self.lambda_rate)):
            raise RangeError(f"lambda_rate must be positive, got {self.lambda_rate}")
        if not (self.mu_rate > 0 and math.isfinite(self.mu_rate)):
            raise RangeError(f"mu_rate must be positive, got {self.mu_rate}")
        if self.servers < 1:
            raise RangeError(f"servers must be >= 1, got {self.servers}")
        if self.n_trunc < 2:
            raise RangeError(f"n_trunc must be >= 2, got {self.n_trunc}")


def queue_generator(qp: QueueParams) -> np.ndarray:
    """Truncated transition-rate matrix Q (rows = states, last row absorbing
    in the sense that the off-grid arrival column is simply cut)."""
    n = qp.n_trunc
    lam, mu = qp.lambda_rate, qp.mu_rate
    Q = np.zeros((n, n))
    for j in range(n):
        service = min(j + 1, qp.servers) * mu
        Q[j, j] = -(lam + service)
        if j + 1 < n:
            Q[j, j + 1] = lam
        if j >= 1:
            Q[j, j - 1] = service
    return Q


def _queue_instance(qp: QueueParams, label: str, lambda0_target: float, u0) -> ProblemInstance:
    Q = queue_generator(qp)
    A = -Q.T  # row-vector dynamics d pi/dt = pi Q, column form du/dt = -A u
    pair = hermitian_split(A)
    if u0 is None:
        u0 = np.zeros(qp.n_trunc, dtype=complex)
        u0[qp.n_trunc // 2] = 1.0
    row_sums = Q.sum(axis=1)
    inst = _finalize(
        [pair], None, np.asarray(u0, dtype=complex),
        label=label, lambda0_target=lambda0_target,
        meta={
            "builder": label.split("(")[0],
            "row_sums": row_sums,
            "mass_leak_rate": float(np.abs(row_sums).sum()),
        },
    )
    return inst


def build_mm1(
    qp: QueueParams, lambda0_target: float = DEFAULT_LAMBDA0, u0=None
) -> ProblemInstance:
    """Single-server queue, truncated to n_trunc states."""
    if qp.servers != 1:
        raise BuildError(f"build_mm1 requires servers = 1, got {qp.servers}")
    label = f"mm1(lam={qp.lambda_rate:g},mu={qp.mu_rate:g},n={qp.n_trunc})"
    return _queue_instance(qp, label, lambda0_target, u0)


def build_mmc(
    qp: QueueParams, lambda0_target: float = DEFAULT_LAMBDA0, u0=None
) -> ProblemInstance:
    """Multi-server queue with level-dependent service min(n, c) * mu."""
    label = (
        f"mmc(lam={qp.lambda_rate:g},mu={qp.mu_rate:g},"
        f"c={qp.servers},n={qp.n_trunc})"
    )
    return _queue_instance(qp, label, lambda0_target, u0)


# ---------------------------------------------------------------------------
# Schroedinger equation with a complex absorbing potential
# ---------------------------------------------------------------------------

@dataclass
class CapPotentials:
    """Real potential V_R(x, t), absorbing potential V_I(x) <= 0 with compact
    support, Planck-like scale hbar, and a uniform Dirichlet grid."""

    V_R: object
    V_I: object
    hbar: float
    N_grid: int
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.hbar <= 0:
            raise RangeError(f"hbar must be positive, got {self.hbar}")
        if self.N_grid < 3:
            raise RangeError(f"N_grid must be >= 3, got {self.N_grid}")
        if not self.domain[1] > self.domain[0]:
            raise RangeError(f"empty domain {self.domain}")


def gaussian_packet(x: np.ndarray, x0: float, sigma: float, p0: float, hbar: float) -> np.ndarray:
    """Normalized Gaussian wave packet with mean position x0 and momentum p0."""
    psi = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2) + 1j * p0 * x / hbar)
    return psi / np.linalg.norm(psi)


def build_cap_schrodinger(
    cp: CapPotentials,
    T: float = 1.0,
    time_slices: int = 1,
    lambda0_target: float = DEFAULT_LAMBDA0,
    u0=None,
    packet: dict | None = None,
) -> ProblemInstance:
    """Kinetic term plus real potential in H; absorbing layer in L.

    L = -(1/hbar) diag(V_I) is diagonal and positive semidefinite (it vanishes
    off the layer), so the mandatory shift to lambda0_target applies.
    """
    x_lo, x_hi = cp.domain
    h = (x_hi - x_lo) / (cp.N_grid - 1)
    nodes = x_lo + h * np.arange(1, cp.N_grid - 1)
    N = len(nodes)

    vi = np.array([cp.V_I(x) for x in nodes], dtype=float)
    bad = np.nonzero(vi > 0.0)[0]
    if len(bad):
        raise BuildError(
            f"V_I({nodes[bad[0]]:.6g}) = {vi[bad[0]]:.6g} > 0 would amplify, not absorb"
        )
    L = np.diag(-vi / cp.hbar).astype(complex)

    kin = np.zeros((N, N), dtype=complex)
    np.fill_diagonal(kin, 2.0)
    for r in range(N - 1):
        kin[r, r + 1] = -1.0
        kin[r + 1, r] = -1.0
    kin *= cp.hbar / (2.0 * h**2)  # = -(hbar/2) * discrete Laplacian

    def pair_at(t: float) -> HermitianPair:
        vr = np.array([cp.V_R(x, t) for x in nodes], dtype=float)
        H = kin + np.diag(vr / cp.hbar)
        return HermitianPair(L=L, H=H, shift=0.0, lambda0=float(np.min(-vi / cp.hbar)))

    if u0 is None:
        pk = dict(packet or {})
        x0 = pk.get("x0", x_lo + 0.35 * (x_hi - x_lo))
        sigma = pk.get("sigma", 0.05 * (x_hi - x_lo))
        p0 = pk.get("p0", 0.0)
        u0 = gaussian_packet(nodes, x0, sigma, p0, cp.hbar)

    if time_slices == 1:
        pairs = [pair_at(0.0)]
        breakpoints = None
    else:
        breakpoints = np.linspace(0.0, T, time_slices + 1)
        mids = 0.5 * (breakpoints[:-1] + breakpoints[1:])
        pairs = [pair_at(t) for t in mids]
    return _finalize(
        pairs, breakpoints, np.asarray(u0, dtype=complex),
        label=f"cap(N_grid={cp.N_grid},hbar={cp.hbar:g})",
        lambda0_target=lambda0_target,
        meta={"builder": "cap", "h": h, "grid": nodes},
    )


# ---------------------------------------------------------------------------
# Lindblad master equation, vectorized superoperator
# ---------------------------------------------------------------------------

@dataclass
class LindbladSpec:
    """System Hamiltonian and jump operators of a GKSL generator."""

    H_sys: np.ndarray
    jump_ops: list = field(default_factory=list)

    def __post_init__(self):
        H = np.asarray(self.H_sys, dtype=complex)
        if np.max(np.abs(H - H.conj().T)) > 1e-12:
            raise HermiticityError("H_sys must be Hermitian to 1e-12")
        object.__setattr__(self, "H_sys", H)


def vec_density(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec_density(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((n, n), order="F")


def lindblad_superoperator(ls: LindbladSpec) -> np.ndarray:
    """Matrix S with d vec(rho)/dt = S vec(rho), using vec(X rho Y) =
    (Y^T kron X) vec(rho)."""
    H = ls.H_sys
    n = H.shape[0]
    eye = np.eye(n)
    S = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for Lj in ls.jump_ops:
        Lj = np.asarray(Lj, dtype=complex)
        if Lj.shape != (n, n):
            raise DimensionError(f"jump operator shape {Lj.shape} != ({n}, {n})")
        LdL = Lj.conj().T @ Lj
        S += np.kron(Lj.conj(), Lj)
        S -= 0.5 * (np.kron(eye, LdL) + np.kron(LdL.T, eye))
    return S


def build_lindblad(
    ls: LindbladSpec, rho0=None, lambda0_target: float = DEFAULT_LAMBDA0
) -> ProblemInstance:
    """Vectorize the GKSL generator and split at the matrix level.

    The Hermitian part of -S has a zero mode at the steady state, so the
    shift to lambda0_target is always active for dissipative specs.
    """
    n = ls.H_sys.shape[0]
    S = lindblad_superoperator(ls)
    pair = hermitian_split(-S)
    if rho0 is None:
        rho0 = np.eye(n) / n
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (n, n):
        raise DimensionError(f"rho0 shape {rho0.shape} != ({n}, {n})")
    return _finalize(
        [pair], None, vec_density(rho0),
        label=f"lindblad(n={n},jumps={len(ls.jump_ops)})",
        lambda0_target=lambda0_target,
        meta={"builder": "lindblad", "n": n},
    )


def amplitude_damping_spec(gamma: float = 1.0) -> LindbladSpec:
    """Two-level system, H = 0, single jump sqrt(gamma) |0><1|."""
    if gamma <= 0:
        raise BuildError(f"gamma must be positive, got {gamma}")
    sm = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|
    return LindbladSpec(H_sys=np.zeros((2, 2), dtype=complex), jump_ops=[np.sqrt(gamma) * sm])


# ---------------------------------------------------------------------------
# decaying Hamiltonian evolution (uniform damping gamma)
# ---------------------------------------------------------------------------

def build_blackhole(H, gamma: float, u0=None) -> ProblemInstance:
    """Generator A = gamma I + i H: unitary dynamics under H with a uniform
    decay rate gamma. The spectral bound is gamma itself; no shift."""
    if not gamma > 0:
        raise BuildError(f"gamma must be positive, got {gamma}")
    H = np.asarray(H, dtype=complex)
    if np.max(np.abs(H - H.conj().T)) > 1e-12:
        raise HermiticityError("H must be Hermitian to 1e-12")
    n = H.shape[0]
    A = gamma * np.eye(n) + 1j * H
    pair = hermitian_split(A)
    if u0 is None:
        u0 = np.ones(n, dtype=complex) / np.sqrt(n)
    schedule = TimeSchedule.constant(pair, math.inf)
    return ProblemInstance(
        schedule=schedule,
        dim=n,
        u0=np.asarray(u0, dtype=complex),
        label=f"blackhole(n={n},gamma={gamma:g})",
        shift=0.0,
        lambda0=pair.lambda0,
        meta={
            "builder": "blackhole",
            "normL": float(gamma),
            "normH": _hermitian_norm(pair.H),
        },
    )


# ---------------------------------------------------------------------------
# named coefficient presets (the CLI supplies functions by name, not code)
# ---------------------------------------------------------------------------

def preset_callable(spec) -> object:
    """Turn a preset description into a coefficient callable (x, t) -> float.

    Accepted forms: a bare number (constant), or a dict with kind one of
    "constant" {value}, "polynomial" {coeffs, low->high in x}, or
    "gaussian" {amplitude, center, width}.
    """
    if isinstance(spec, (int, float)):
        value = float(spec)
        return lambda x, t: value
    kind = spec.get("kind")
    if kind == "constant":
        value = float(spec["value"])
        return lambda x, t: value
    if kind == "polynomial":
        coeffs = [float(c) for c in spec["coeffs"]]
        return lambda x, t: float(np.polynomial.polynomial.polyval(x, coeffs))
    if kind == "gaussian":
        amp = float(spec["amplitude"])
        center = float(spec["center"])
        width = float(spec["width"])
        return lambda x, t: amp * math.exp(-((x - center) ** 2) / (2.0 * width**2))
    raise BuildError(f"unknown coefficient preset kind {kind!r}")


def absorbing_layer(depth: float, x_lo: float, x_hi: float) -> object:
    """Smooth absorbing layer V_I(x) = -depth * sin^2(pi (x-x_lo)/(x_hi-x_lo))
    supported on [x_lo, x_hi]."""
    if depth <= 0:
        raise BuildError(f"layer depth must be positive, got {depth}")

    def v(x: float) -> float:
        if x_lo < x < x_hi:
            return -depth * math.sin(math.pi * (x - x_lo) / (x_hi - x_lo)) ** 2
        return 0.0

    return v


# canonical demonstration instances, one per builder
def default_instances() -> dict:
    heat = ParabolicCoefficients(
        a=lambda x, t: 1.0, b=lambda x, t: 0.0, c=lambda x, t: 0.0, N_grid=17
    )
    cap = CapPotentials(
        V_R=lambda x, t: 0.0,
        V_I=absorbing_layer(5.0, 0.7, 0.9),
        hbar=1.0,
        N_grid=65,
    )
    rho0 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)  # excited state
    return {
        "parabolic1d": build_parabolic_1d(heat),
        "mm1": build_mm1(QueueParams(1.0, 2.0, 1, 16)),
        "mmc": build_mmc(QueueParams(1.0, 1.0, 2, 16)),
        "cap": build_cap_schrodinger(cap),
        "lindblad": build_lindblad(amplitude_damping_spec(1.0), rho0=rho0),
        "blackhole": build_blackhole(np.diag([1.0, -1.0]), 0.5),
    }
