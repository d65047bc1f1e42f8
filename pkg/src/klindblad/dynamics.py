"""Per-sector Lindblad dynamics.

Superoperators act on column-stacked matrices: vec stacks columns, so the
map rho -> A @ rho @ B has matrix ``kron(B.T, A)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import ExponentialError, InvariantViolation, NonHermitianError
from .model import (
    SECTORS,
    DirectionSector,
    ModelParams,
    assemble_full_operator,
    average_blocks,
    build_hamiltonian_block,
    build_initial_state,
    build_momentum_block,
    extract_block,
    state_diagnostics,
)

log = logging.getLogger(__name__)

X_LEAKAGE_TOL = 1e-10
PURITY_STEP_TOL = 1e-10


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    n = math.isqrt(v.shape[-1])
    return np.asarray(v).reshape(v.shape[:-1] + (n, n), order="F")


def sandwich(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> A @ rho @ B."""
    return np.kron(np.asarray(B).T, np.asarray(A))


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray
    sector: DirectionSector | None = None

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho))


def _require_hermitian(M: np.ndarray, name: str, tol: float = 1e-12) -> None:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonHermitianError(f"{name} must be square, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))))
    defect = float(np.max(np.abs(M - M.conj().T)))
    if defect > tol * scale:
        raise NonHermitianError(f"{name} is not Hermitian (max |M - M^H| = {defect:.3e})")


def build_liouvillian(H, P, ell_L: float, sector=None) -> Liouvillian:
    """Generator of d rho/dt = -i[H, rho] - (ell_L/2)(P^2 rho + rho P^2 - 2 P rho P)."""
    _require_hermitian(H, "H")
    _require_hermitian(P, "P")
    if ell_L < 0:
        raise ValueError(f"ell_L must be >= 0, got {ell_L}")
    H = np.asarray(H, dtype=complex)
    P = np.asarray(P, dtype=complex)
    eye = np.eye(H.shape[0])
    P2 = P @ P
    L = -1j * (sandwich(H, eye) - sandwich(eye, H))
    L = L - 0.5 * ell_L * (sandwich(P2, eye) + sandwich(eye, P2) - 2.0 * sandwich(P, P))
    if sector is not None:
        sector = DirectionSector(*sector)
    return Liouvillian(L, sector)


def sector_liouvillians(params: ModelParams) -> list[Liouvillian]:
    return [
        build_liouvillian(
            build_hamiltonian_block(params, s), build_momentum_block(params, s), params.ell_L, s
        )
        for s in SECTORS
    ]


def step_rk4(state: np.ndarray, generator: Liouvillian, h: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of d vec(rho)/dt = L vec(rho)."""
    if not h > 0:
        raise ValueError(f"step must be > 0, got {h}")
    L = generator.matrix
    v = vec(state)
    k1 = L @ v
    k2 = L @ (v + 0.5 * h * k1)
    k3 = L @ (v + 0.5 * h * k2)
    k4 = L @ (v + h * k3)
    return unvec(v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def _hermitize(rho: np.ndarray) -> np.ndarray:
    herm = 0.5 * (rho + rho.conj().T)
    dev = float(np.max(np.abs(rho - herm)))
    if dev > 0:
        log.debug("symmetrized evolved state, hermiticity deviation %.3e", dev)
    return herm


def evolve_exact(generator: Liouvillian, rho0: np.ndarray, t: float) -> np.ndarray:
    """rho(t) = unvec(expm(L t) vec(rho0)), made Hermitian by symmetrization."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return np.array(rho0, dtype=complex)
    return _hermitize(unvec(_propagator(generator.matrix, t) @ vec(rho0)))


def _propagator(L: np.ndarray, t: float) -> np.ndarray:
    U = scipy.linalg.expm(L * t)
    if not np.all(np.isfinite(U)):
        norm = float(np.linalg.norm(L, 1))
        raise ExponentialError(
            f"expm(L t) is not finite for t={t} (||L||_1={norm:.3e}, ||L t||_1={norm * t:.3e})"
        )
    return U


@dataclass(frozen=True)
class Trajectory:
    """Sampled per-sector and sector-averaged states.

    ``block_states`` has shape (n_samples, 4, 4, 4) indexed by time, sector
    (in ``SECTORS`` order), row, column.
    """

    times: np.ndarray
    block_states: np.ndarray
    averaged: np.ndarray
    params: ModelParams
    method: str
    step: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.times, self.block_states, self.averaged):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.times)


def _grid(t_max: float, h: float, sample_every: int) -> tuple[int, np.ndarray]:
    if not t_max > 0:
        raise ValueError(f"t_max must be > 0, got {t_max}")
    if not h > 0:
        raise ValueError(f"step must be > 0, got {h}")
    if int(sample_every) != sample_every or sample_every < 1:
        raise ValueError(f"sample_every must be a positive integer, got {sample_every}")
    n_steps = round(t_max / h)
    if n_steps < 1 or abs(n_steps * h - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError(f"t_max={t_max} is not an integer multiple of step={h}")
    sample_steps = np.arange(0, n_steps + 1, int(sample_every))
    return n_steps, sample_steps


def _check_samples(times, blocks, averaged, strict=True, x_tol=X_LEAKAGE_TOL):
    worst = {"trace_dev": 0.0, "hermiticity": 0.0, "min_eig": math.inf, "x_leakage": 0.0}
    for k, t in enumerate(times):
        states = [(SECTORS[j], blocks[k, j]) for j in range(len(SECTORS))]
        states.append((None, averaged[k]))
        for sector, rho in states:
            d = state_diagnostics(rho)
            problems = d.violations()
            if not d.x_leakage < x_tol:
                problems.append(f"X-shape leakage {d.x_leakage:.3e} >= {x_tol:g}")
            if problems and strict:
                where = "averaged state" if sector is None else f"sector {tuple(sector)}"
                raise InvariantViolation(
                    f"t={t:g}, {where}: " + "; ".join(problems), time=float(t), sector=sector
                )
            worst["trace_dev"] = max(worst["trace_dev"], d.trace_dev)
            worst["hermiticity"] = max(worst["hermiticity"], d.hermiticity)
            worst["min_eig"] = min(worst["min_eig"], d.min_eig)
            worst["x_leakage"] = max(worst["x_leakage"], d.x_leakage)
    return worst


def evolve_trajectory(
    params: ModelParams,
    t_max: float = 20.0,
    h: float = 1e-3,
    sample_every: int = 100,
    method: str = "rk4",
    check: bool = True,
) -> Trajectory:
    """Evolve all four sectors from the common initial state.

    ``method="rk4"`` integrates with fixed step ``h``; ``method="exact"``
    evaluates the matrix exponential directly at each sample time of the same
    grid. Worst-case sample diagnostics are always stored; with ``check`` set,
    a sample breaking a density-matrix invariant or per-step purity growth
    beyond 1e-10 raises :class:`InvariantViolation`.
    """
    n_steps, sample_steps = _grid(t_max, h, sample_every)
    times = sample_steps * h
    gens = sector_liouvillians(params)
    rho0 = build_initial_state(params.theta)
    n_sec = len(SECTORS)
    blocks = np.empty((len(times), n_sec, 4, 4), dtype=complex)
    max_purity_increase = 0.0

    if method == "rk4":
        Ls = np.stack([g.matrix for g in gens])
        v = np.tile(vec(rho0), (n_sec, 1))
        purity = np.sum(np.abs(v) ** 2, axis=1)
        sample_set = {int(s): k for k, s in enumerate(sample_steps)}
        blocks[0] = unvec(v)

        def apply(x):
            return np.matmul(Ls, x[..., None])[..., 0]

        for n in range(1, n_steps + 1):
            k1 = apply(v)
            k2 = apply(v + 0.5 * h * k1)
            k3 = apply(v + 0.5 * h * k2)
            k4 = apply(v + h * k3)
            v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            new_purity = np.sum(np.abs(v) ** 2, axis=1)
            rise = new_purity - purity
            worst = int(np.argmax(rise))
            max_purity_increase = max(max_purity_increase, float(rise[worst]))
            if check and rise[worst] > PURITY_STEP_TOL:
                raise InvariantViolation(
                    f"t={n * h:g}, sector {tuple(SECTORS[worst])}: purity increased by "
                    f"{rise[worst]:.3e} in one step",
                    time=n * h,
                    sector=SECTORS[worst],
                )
            purity = new_purity
            if n in sample_set:
                blocks[sample_set[n]] = unvec(v)
    elif method == "exact":
        for k, t in enumerate(times):
            for j, g in enumerate(gens):
                blocks[k, j] = evolve_exact(g, rho0, float(t))
    else:
        raise ValueError(f"method must be 'rk4' or 'exact', got {method!r}")

    averaged = np.stack([average_blocks(b) for b in blocks])
    diagnostics = {"max_purity_increase": max_purity_increase}
    diagnostics.update(_check_samples(times, blocks, averaged, strict=check))
    return Trajectory(times, blocks, averaged, params, method, h, diagnostics)


def full_space_liouvillian(params: ModelParams) -> Liouvillian:
    """256x256 generator on the full 16-dimensional space."""
    H = assemble_full_operator(params, "hamiltonian")
    P = assemble_full_operator(params, "momentum")
    return build_liouvillian(H, P, params.ell_L)


def evolve_full_space(params: ModelParams, times) -> np.ndarray:
    """Per-sector blocks obtained by evolving the 16x16 sector mixture.

    Returns an array shaped like ``Trajectory.block_states``. Used as an
    oracle for the block-diagonal decomposition; ``times`` must be
    non-decreasing and the state is propagated between consecutive times.
    """
    gen = full_space_liouvillian(params)
    rho0 = build_initial_state(params.theta)
    full0 = scipy.linalg.block_diag(*([0.25 * rho0] * len(SECTORS)))
    out = np.empty((len(times), len(SECTORS), 4, 4), dtype=complex)
    propagators = {}
    v, t_prev = vec(full0), 0.0
    for k, t in enumerate(times):
        dt = float(t) - t_prev
        if dt < 0:
            raise ValueError("times must be non-decreasing")
        if dt > 0:
            key = round(dt, 12)
            if key not in propagators:
                propagators[key] = _propagator(gen.matrix, dt)
            v = propagators[key] @ v
        t_prev = float(t)
        full = _hermitize(unvec(v))
        for j in range(len(SECTORS)):
            out[k, j] = 4.0 * extract_block(full, j)
    return out


@dataclass(frozen=True)
class SteadyState:
    state: np.ndarray
    kernel_dim: int
    oscillating_modes: int
    method: str
    residual: float


def _null_space(M: np.ndarray, rtol: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(M)
    cutoff = rtol * max(1.0, s[0])
    return vh[s <= cutoff].conj().T


def steady_state_projection(
    generator: Liouvillian,
    rho0: np.ndarray,
    rtol: float = 1e-9,
    fallback_time: float = 200.0,
) -> SteadyState:
    """t -> infinity limit of rho0 under ``generator``.

    Uses the spectral projector onto the kernel built from right and left
    null spaces, N (M^H N)^-1 M^H. If that matrix is ill-conditioned the zero
    eigenvalue is defective; the state is then evolved to ``fallback_time``
    and the residual ||L vec(rho)|| is reported.
    """
    L = generator.matrix
    evals = np.linalg.eigvals(L)
    scale = max(1.0, float(np.max(np.abs(evals))))
    oscillating = int(
        np.sum((np.abs(evals.real) <= rtol * scale) & (np.abs(evals.imag) > rtol * scale))
    )
    if oscillating:
        log.warning("%d undamped oscillating modes; the limit is a time average", oscillating)

    right = _null_space(L, rtol)
    left = _null_space(L.conj().T, rtol)
    kernel_dim = right.shape[1]
    overlap = left.conj().T @ right
    method = "spectral"
    if kernel_dim == 0 or left.shape[1] != kernel_dim or np.linalg.cond(overlap) > 1e10:
        log.warning("kernel projector is ill-conditioned; evolving to t=%g", fallback_time)
        state = evolve_exact(generator, rho0, fallback_time)
        method = "long-time"
    else:
        projector = right @ np.linalg.solve(overlap, left.conj().T)
        state = _hermitize(unvec(projector @ vec(rho0)))
    residual = float(np.linalg.norm(L @ vec(state)))
    return SteadyState(state, kernel_dim, oscillating, method, residual)


def steady_state_blocks(params: ModelParams) -> list[SteadyState]:
    rho0 = build_initial_state(params.theta)
    return [steady_state_projection(g, rho0) for g in sector_liouvillians(params)]
