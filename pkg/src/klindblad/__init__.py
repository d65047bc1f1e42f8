"""Open-system dynamics of two particles with deformed energy composition."""

__version__ = "0.1.0"

from .dynamics import (
    Liouvillian,
    SteadyState,
    Trajectory,
    build_liouvillian,
    evolve_exact,
    evolve_full_space,
    evolve_trajectory,
    steady_state_blocks,
    steady_state_projection,
    step_rk4,
)
from .model import (
    SECTORS,
    DirectionSector,
    ModelParams,
    assemble_full_operator,
    average_blocks,
    build_hamiltonian_block,
    build_initial_state,
    build_momentum_block,
)
from .physical import (
    PhysicalInputs,
    decoherence_time,
    entanglement_time_natural,
    entanglement_time_physical,
)
from .quantifiers import (
    MeasurementBasis,
    QuantifierRecord,
    concurrence_wootters,
    concurrence_x,
    discord_at_basis,
    discord_closed_form,
    discord_minimized,
    l1_coherence,
    lqfi,
    mutual_information,
    quantify,
    von_neumann_entropy,
)

__all__ = [
    "__version__",
    "Liouvillian",
    "SteadyState",
    "Trajectory",
    "build_liouvillian",
    "evolve_exact",
    "evolve_full_space",
    "evolve_trajectory",
    "steady_state_blocks",
    "steady_state_projection",
    "step_rk4",
    "SECTORS",
    "DirectionSector",
    "ModelParams",
    "assemble_full_operator",
    "average_blocks",
    "build_hamiltonian_block",
    "build_initial_state",
    "build_momentum_block",
    "PhysicalInputs",
    "decoherence_time",
    "entanglement_time_natural",
    "entanglement_time_physical",
    "MeasurementBasis",
    "QuantifierRecord",
    "concurrence_wootters",
    "concurrence_x",
    "discord_at_basis",
    "discord_closed_form",
    "discord_minimized",
    "l1_coherence",
    "lqfi",
    "mutual_information",
    "quantify",
    "von_neumann_entropy",
]
