"""Two-particle, two-level model with momentum-direction sectors.

Each particle has levels with energies (eps - omega)/2 and (eps + omega)/2
and moves in one of two directions. The 16-dimensional problem splits into
four 4x4 blocks, one per direction sector (a, b). All 4x4 matrices use the
basis ordering |00>, |01>, |10>, |11> with |0> the ground level and the
first label belonging to particle A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .exceptions import ParameterDomainError

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-8

# X-shaped entries: diagonal plus anti-diagonal
X_MASK = np.eye(4, dtype=bool) | np.fliplr(np.eye(4, dtype=bool))


class DirectionSector(NamedTuple):
    """Signs (a, b) of the momentum directions of particles A and B."""

    a: int
    b: int


# fixed enumeration order; trajectory output depends on it
SECTORS: tuple[DirectionSector, ...] = (
    DirectionSector(1, 1),
    DirectionSector(-1, 1),
    DirectionSector(1, -1),
    DirectionSector(-1, -1),
)


@dataclass(frozen=True)
class ModelParams:
    """Physical and deformation parameters in natural units.

    ``ell_H`` scales the deformed interaction term of the Hamiltonian and
    ``ell_L`` the dissipator; a single deformation scale is the special case
    ``ell_H == ell_L``.
    """

    epsilon: float = 1.0
    omega: float = 0.5
    mass: float = 1.0
    ell_H: float = 1.0
    ell_L: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ParameterDomainError(f"{f.name} must be finite, got {value!r}")
        if not self.omega > 0:
            raise ParameterDomainError(f"omega must be > 0, got {self.omega}")
        if not self.epsilon > self.omega:
            raise ParameterDomainError(
                f"epsilon must exceed omega (epsilon={self.epsilon}, omega={self.omega})"
            )
        if not self.mass > 0:
            raise ParameterDomainError(f"mass must be > 0, got {self.mass}")
        if self.ell_H < 0 or self.ell_L < 0:
            raise ParameterDomainError(
                f"deformation scales must be >= 0 (ell_H={self.ell_H}, ell_L={self.ell_L})"
            )
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ParameterDomainError(f"theta must lie in [0, pi/2], got {self.theta}")


def _as_sector(sector) -> DirectionSector:
    sector = DirectionSector(*sector)
    if sector.a not in (-1, 1) or sector.b not in (-1, 1):
        raise ParameterDomainError(f"sector signs must be +1 or -1, got {tuple(sector)}")
    return sector


def momentum_moduli(params: ModelParams, sector) -> tuple[float, float]:
    """Return (A, B) = (sqrt(m(eps + a omega)), sqrt(m(eps + b omega)))."""
    a, b = _as_sector(sector)
    A = math.sqrt(params.mass * (params.epsilon + a * params.omega))
    B = math.sqrt(params.mass * (params.epsilon + b * params.omega))
    return A, B


def single_particle_momentum(params: ModelParams) -> np.ndarray:
    """The 2x2 momentum-modulus operator diag(sqrt(m(eps+omega)), sqrt(m(eps-omega)))."""
    return np.diag(
        [
            math.sqrt(params.mass * (params.epsilon + params.omega)),
            math.sqrt(params.mass * (params.epsilon - params.omega)),
        ]
    )


def build_hamiltonian_block(params: ModelParams, sector) -> np.ndarray:
    """Deformed Hamiltonian of one direction sector.

    The diagonal is eps + (a+b) omega / 2; the deformed composition of
    energies adds ell_H m sqrt((eps + a omega)(eps + b omega)) on the
    anti-diagonal.
    """
    a, b = _as_sector(sector)
    diag = params.epsilon + 0.5 * (a + b) * params.omega
    coupling = (
        params.ell_H
        * params.mass
        * math.sqrt((params.epsilon + a * params.omega) * (params.epsilon + b * params.omega))
    )
    H = diag * np.eye(4)
    H[0, 3] = H[3, 0] = H[1, 2] = H[2, 1] = coupling
    return H


def build_momentum_block(params: ModelParams, sector) -> np.ndarray:
    """Total momentum operator of one direction sector (the jump operator)."""
    A, B = momentum_moduli(params, sector)
    P = np.zeros((4, 4))
    # A flips particle B's level, B flips particle A's level
    P[0, 1] = P[1, 0] = P[2, 3] = P[3, 2] = A
    P[0, 2] = P[2, 0] = P[1, 3] = P[3, 1] = B
    return P


def build_initial_state(theta: float) -> np.ndarray:
    """Projector onto sin(theta)|01> + cos(theta)|10>."""
    if not 0.0 <= theta <= math.pi / 2:
        raise ParameterDomainError(f"theta must lie in [0, pi/2], got {theta}")
    psi = np.zeros(4, dtype=complex)
    psi[1] = math.sin(theta)
    psi[2] = math.cos(theta)
    return np.outer(psi, psi.conj())


def average_blocks(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Equal-weight average of the four sector states."""
    blocks = np.asarray(blocks)
    if blocks.shape != (len(SECTORS), 4, 4):
        raise ValueError(f"expected 4 blocks of shape 4x4, got {blocks.shape}")
    return 0.25 * (blocks[0] + blocks[1] + blocks[2] + blocks[3])


def assemble_full_operator(params: ModelParams, kind: str = "hamiltonian") -> np.ndarray:
    """Block-diagonal 16x16 operator in the fixed sector order."""
    builders = {"hamiltonian": build_hamiltonian_block, "momentum": build_momentum_block}
    try:
        build = builders[kind]
    except KeyError:
        raise ValueError(f"kind must be one of {sorted(builders)}, got {kind!r}") from None
    return scipy.linalg.block_diag(*(build(params, s) for s in SECTORS))


def extract_block(full: np.ndarray, index: int) -> np.ndarray:
    """The 4x4 diagonal block ``index`` of a 16x16 block-diagonal matrix."""
    sl = slice(4 * index, 4 * index + 4)
    return full[sl, sl]


@dataclass(frozen=True)
class StateDiagnostics:
    trace_dev: float
    hermiticity: float
    min_eig: float
    x_leakage: float

    def violations(
        self,
        trace_tol: float = TRACE_TOL,
        herm_tol: float = HERMITICITY_TOL,
        pos_tol: float = POSITIVITY_TOL,
    ) -> list[str]:
        out = []
        if not self.trace_dev < trace_tol:
            out.append(f"trace deviation {self.trace_dev:.3e} >= {trace_tol:g}")
        if not self.hermiticity < herm_tol:
            out.append(f"hermiticity defect {self.hermiticity:.3e} >= {herm_tol:g}")
        if not self.min_eig >= -pos_tol:
            out.append(f"min eigenvalue {self.min_eig:.3e} < -{pos_tol:g}")
        return out


def state_diagnostics(rho: np.ndarray) -> StateDiagnostics:
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    sym = 0.5 * (rho + rho.conj().T)
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    leak = float(np.max(np.abs(rho[~X_MASK]))) if rho.shape == (4, 4) else 0.0
    return StateDiagnostics(
        trace_dev=float(abs(np.trace(rho) - 1.0)),
        hermiticity=herm,
        min_eig=min_eig,
        x_leakage=leak,
    )


def is_density_matrix(rho: np.ndarray) -> bool:
    return not state_diagnostics(rho).violations()
