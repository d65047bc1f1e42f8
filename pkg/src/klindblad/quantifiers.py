"""Correlation measures for two-qubit states.

Entropies are in bits. Subsystem A is the first tensor slot and B the
second, so ``partial_trace_B`` returns the state of A. Discord is computed
by measuring B unless ``measured="A"`` is passed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import NotXStateError, PositivityError
from .model import POSITIVITY_TOL, X_MASK, state_diagnostics

WEIGHT_TOL = 1e-12
X_TOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
_YY = np.kron(SIGMA_Y, SIGMA_Y)


def _spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of a density matrix with round-off negatives clamped to 0."""
    rho = np.asarray(rho)
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals[0] < -POSITIVITY_TOL:
        raise PositivityError(f"eigenvalue {evals[0]:.3e} below -{POSITIVITY_TOL:g}")
    return np.clip(evals, 0.0, None)


def _shannon_bits(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -Tr rho log2 rho, with 0 log 0 = 0."""
    return _shannon_bits(_spectrum(rho))


def _as_tensor(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    return rho.reshape(2, 2, 2, 2)  # indices: a, b, a', b'


def partial_trace_B(rho: np.ndarray) -> np.ndarray:
    """State of A: [[r11 + r22, r13 + r24], [r31 + r42, r33 + r44]]."""
    return np.einsum("abcb->ac", _as_tensor(rho))


def partial_trace_A(rho: np.ndarray) -> np.ndarray:
    """State of B: [[r11 + r33, r12 + r34], [r21 + r43, r22 + r44]]."""
    return np.einsum("abad->bd", _as_tensor(rho))


def swap_particles(rho: np.ndarray) -> np.ndarray:
    """Exchange the roles of A and B (basis labels |01> <-> |10>)."""
    perm = [0, 2, 1, 3]
    return np.asarray(rho)[np.ix_(perm, perm)]


def off_x_weight(rho: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(rho)[~X_MASK])))


def _require_x(rho: np.ndarray) -> None:
    w = off_x_weight(rho)
    if w > X_TOL:
        raise NotXStateError(f"matrix is not X-shaped (max off-X entry {w:.3e})")


def concurrence_x(rho: np.ndarray) -> float:
    """Concurrence of an X-shaped state from its six distinct entries."""
    _require_x(rho)
    r = np.asarray(rho)
    d = np.clip(np.diag(r).real, 0.0, None)
    c = 2.0 * max(
        abs(r[1, 2]) - math.sqrt(d[0] * d[3]),
        abs(r[0, 3]) - math.sqrt(d[1] * d[2]),
        0.0,
    )
    return min(c, 1.0)


def concurrence_wootters(rho: np.ndarray) -> float:
    """Wootters concurrence for an arbitrary two-qubit state.

    The lambdas (square roots of the eigenvalues of rho YY rho* YY) are taken
    as singular values of sqrt(rho) YY sqrt(rho)*, which avoids square roots
    of round-off-sized eigenvalues.
    """
    r = np.asarray(rho, dtype=complex)
    p, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    root = (v * np.sqrt(np.clip(p, 0.0, None))) @ v.conj().T
    lam = np.linalg.svd(root @ _YY @ root.conj(), compute_uv=False)
    return float(min(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]), 1.0))


def l1_coherence(rho: np.ndarray) -> float:
    """Sum of moduli of all off-diagonal entries."""
    a = np.abs(np.asarray(rho))
    return float(a.sum() - np.trace(a))


def purity(rho: np.ndarray) -> float:
    r = np.asarray(rho)
    return float(np.real(np.trace(r @ r)))


def mutual_information(rho: np.ndarray) -> float:
    return (
        von_neumann_entropy(partial_trace_B(rho))
        + von_neumann_entropy(partial_trace_A(rho))
        - von_neumann_entropy(rho)
    )


@dataclass(frozen=True)
class MeasurementBasis:
    """Rank-one projective measurement along the Bloch direction (alpha, beta).

    |m0> = cos(alpha/2)|0> + e^{i beta} sin(alpha/2)|1>, |m1> orthogonal.
    """

    alpha: float = 0.0
    beta: float = 0.0

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        c, s = math.cos(self.alpha / 2), math.sin(self.alpha / 2)
        phase = complex(math.cos(self.beta), math.sin(self.beta))
        m0 = np.array([c, phase * s])
        m1 = np.array([-phase.conjugate() * s, c])
        return np.outer(m0, m0.conj()), np.outer(m1, m1.conj())


COMPUTATIONAL = MeasurementBasis(0.0, 0.0)


def _conditional_states(rho: np.ndarray, projector: np.ndarray, measured: str) -> np.ndarray:
    """Unnormalized state of the unmeasured party after outcome ``projector``."""
    t = _as_tensor(rho)
    if measured == "B":
        return np.einsum("abcd,db->ac", t, projector)
    if measured == "A":
        return np.einsum("abcd,ca->bd", t, projector)
    raise ValueError(f"measured must be 'A' or 'B', got {measured!r}")


def measured_conditional_entropy(
    rho: np.ndarray, basis: MeasurementBasis = COMPUTATIONAL, measured: str = "B"
) -> float:
    """Sum_i p_i S(rho_i) for the unmeasured party after a projective measurement."""
    total = 0.0
    for proj in basis.projectors():
        sigma = _conditional_states(rho, proj, measured)
        p = float(np.trace(sigma).real)
        if p < WEIGHT_TOL:
            continue
        total += p * von_neumann_entropy(sigma / p)
    return total


def _measured_marginal(rho: np.ndarray, measured: str) -> np.ndarray:
    return partial_trace_A(rho) if measured == "B" else partial_trace_B(rho)


def discord_at_basis(
    rho: np.ndarray, basis: MeasurementBasis = COMPUTATIONAL, measured: str = "B"
) -> float:
    """I - J for one measurement: S(rho_meas) - S(rho) + sum_i p_i S(rho_i)."""
    return (
        von_neumann_entropy(_measured_marginal(rho, measured))
        - von_neumann_entropy(rho)
        + measured_conditional_entropy(rho, basis, measured)
    )


def _qubit_entropy_bits(trace, det):
    """Entropy (bits) of 2x2 PSD matrices normalized to unit trace, vectorized."""
    disc = np.sqrt(np.clip(trace**2 - 4.0 * det, 0.0, None))
    out = np.zeros_like(trace)
    for lam in (0.5 * (trace + disc), 0.5 * (trace - disc)):
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(trace > WEIGHT_TOL, lam / trace, 0.0)
            out -= np.where(x > 0, x * np.log2(np.where(x > 0, x, 1.0)), 0.0)
    return out


def _conditional_entropy_grid(rho, alpha, beta, measured):
    """measured_conditional_entropy over arrays of Bloch angles."""
    t = _as_tensor(np.asarray(rho, dtype=complex))
    c, s = np.cos(alpha / 2), np.sin(alpha / 2)
    ph = np.exp(1j * beta)
    kets = (np.stack([c + 0j, ph * s], -1), np.stack([-np.conj(ph) * s, c + 0j], -1))
    total = np.zeros(np.broadcast(alpha, beta).shape)
    for m in kets:
        proj = m[..., :, None] * m[..., None, :].conj()
        if measured == "B":
            sig = np.einsum("abcd,...db->...ac", t, proj)
        else:
            sig = np.einsum("abcd,...ca->...bd", t, proj)
        tr = (sig[..., 0, 0] + sig[..., 1, 1]).real
        det = (sig[..., 0, 0] * sig[..., 1, 1] - sig[..., 0, 1] * sig[..., 1, 0]).real
        total = total + np.where(tr > WEIGHT_TOL, tr, 0.0) * _qubit_entropy_bits(tr, det)
    return total


def optimal_measurement(
    rho: np.ndarray,
    measured: str = "B",
    n_alpha: int = 33,
    n_beta: int = 65,
    resolution: float = 1e-6,
) -> tuple[MeasurementBasis, float]:
    """Measurement minimizing the conditional entropy, and that minimum.

    Deterministic: a fixed (alpha, beta) grid, then coordinate descent from
    the best grid point with step halving down to ``resolution``.
    """
    alphas = np.linspace(0.0, math.pi, n_alpha)
    betas = np.linspace(0.0, 2 * math.pi, n_beta, endpoint=False)
    A, B = np.meshgrid(alphas, betas, indexing="ij")
    values = _conditional_entropy_grid(rho, A, B, measured)
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    best = [float(alphas[i]), float(betas[j])]
    best_val = float(values[i, j])

    def f(a, b):
        return float(_conditional_entropy_grid(rho, np.array(a), np.array(b), measured))

    step = [alphas[1] - alphas[0], betas[1] - betas[0]]
    while max(step) >= resolution:
        improved = False
        for axis in (0, 1):
            for sign in (1.0, -1.0):
                trial = list(best)
                trial[axis] += sign * step[axis]
                if axis == 0:
                    trial[0] = min(max(trial[0], 0.0), math.pi)
                else:
                    trial[1] %= 2 * math.pi
                val = f(*trial)
                if val < best_val - 1e-15:
                    best, best_val, improved = trial, val, True
                    break
        if not improved:
            step = [0.5 * s for s in step]
    return MeasurementBasis(*best), best_val


def discord_minimized(rho: np.ndarray, measured: str = "B") -> float:
    """Discord minimized over all rank-one projective measurements."""
    _, cond = optimal_measurement(rho, measured)
    cond = min(cond, measured_conditional_entropy(rho, COMPUTATIONAL, measured))
    value = von_neumann_entropy(_measured_marginal(rho, measured)) - von_neumann_entropy(rho) + cond
    return max(value, 0.0)


def _plogp(x: float) -> float:
    return x * math.log(x) if x > 0 else 0.0


def _xlog_ratio(x: float, total: float) -> float:
    return x * math.log(x / total) if x > 0 and total > 0 else 0.0


def discord_closed_form(rho: np.ndarray) -> float:
    """Discord of an X-state for a computational-basis measurement on B.

    Natural logarithms with an overall 1/(2 ln 2), i.e. the result is in bits.
    """
    _require_x(rho)
    r = np.asarray(rho)
    r11, r22, r33, r44 = np.clip(np.diag(r).real, 0.0, None)
    c14, c23 = abs(r[0, 3]), abs(r[1, 2])
    p0, p1 = r11 + r33, r22 + r44  # outcomes of measuring B

    total = 0.0
    # measured marginal and conditional entropies
    total -= 2.0 * (_xlog_ratio(r11, p0) + _xlog_ratio(r33, p0))
    total -= 2.0 * _plogp(p0)
    total -= 2.0 * (_xlog_ratio(r22, p1) + _xlog_ratio(r44, p1))
    total -= 2.0 * _plogp(p1)
    # joint entropy from the eigenvalues of the two X sub-blocks
    for x, y, c in ((r22, r33, c23), (r11, r44, c14)):
        root = math.sqrt((x - y) ** 2 + 4.0 * c * c)
        for lam2 in (x + y - root, x + y + root):
            total += lam2 * math.log(lam2 / 2.0) if lam2 > 0 else 0.0
    return total / (2.0 * math.log(2.0))


def classical_correlation(rho: np.ndarray) -> float:
    return mutual_information(rho) - discord_minimized(rho)


def lqfi_matrix(rho: np.ndarray) -> np.ndarray:
    """Real symmetric 3x3 matrix whose top eigenvalue sets the LQFI.

    M_lk = sum_{i,j} 2 p_i p_j / (p_i + p_j) <i|s_l x 1|j><j|s_k x 1|i>,
    summed over all eigenpairs with p_i + p_j above the weight guard.
    """
    rho = np.asarray(rho, dtype=complex)
    _spectrum(rho)
    p, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    denom = p[:, None] + p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(denom > WEIGHT_TOL, 2.0 * np.outer(p, p) / denom, 0.0)
    local = [vecs.conj().T @ np.kron(s, np.eye(2)) @ vecs for s in PAULIS]
    M = np.empty((3, 3))
    for l in range(3):
        for k in range(3):
            M[l, k] = np.sum(weight * local[l] * local[k].T).real
    return 0.5 * (M + M.T)


def lqfi(rho: np.ndarray) -> float:
    """Local quantum Fisher information, 1 - lambda_max(M), clamped to [0, 1]."""
    raw = 1.0 - float(np.linalg.eigvalsh(lqfi_matrix(rho))[-1])
    if raw < -POSITIVITY_TOL:
        raise PositivityError(f"LQFI {raw:.3e} is negative beyond tolerance")
    return min(max(raw, 0.0), 1.0)


QUANTIFIER_NAMES = (
    "concurrence",
    "l1_coherence",
    "discord",
    "lqfi",
    "purity",
    "entropy",
    "trace_dev",
    "min_eig",
)
# available on request; not part of the default column set
EXTRA_QUANTIFIERS = ("discord_computational",)


def _concurrence(rho):
    return concurrence_x(rho) if off_x_weight(rho) <= X_TOL else concurrence_wootters(rho)


def _discord_computational(rho):
    if off_x_weight(rho) <= X_TOL:
        return discord_closed_form(rho)
    return discord_at_basis(rho, COMPUTATIONAL)


_EVALUATORS = {
    "concurrence": _concurrence,
    "l1_coherence": l1_coherence,
    "discord": discord_minimized,
    "lqfi": lqfi,
    "purity": purity,
    "entropy": von_neumann_entropy,
    "trace_dev": lambda rho: state_diagnostics(rho).trace_dev,
    "min_eig": lambda rho: state_diagnostics(rho).min_eig,
    "discord_computational": _discord_computational,
}


def evaluate(rho: np.ndarray, names=QUANTIFIER_NAMES) -> dict:
    """Selected quantifiers of one state, in the order given."""
    unknown = [n for n in names if n not in _EVALUATORS]
    if unknown:
        raise KeyError(f"unknown quantifiers: {unknown}")
    out = {n: float(_EVALUATORS[n](rho)) for n in names}
    bad = [k for k, v in out.items() if not math.isfinite(v)]
    if bad:
        raise ArithmeticError(f"non-finite quantifiers: {bad}")
    return out


@dataclass(frozen=True)
class QuantifierRecord:
    t: float
    concurrence: float
    l1_coherence: float
    discord: float
    lqfi: float
    purity: float
    entropy: float
    trace_dev: float
    min_eig: float

    def as_dict(self) -> dict:
        return asdict(self)


def quantify(rho: np.ndarray, t: float = 0.0) -> QuantifierRecord:
    """Every default quantifier of one state.

    Concurrence uses the X-state formula when the state is X-shaped and the
    Wootters construction otherwise.
    """
    return QuantifierRecord(t=float(t), **evaluate(rho))
