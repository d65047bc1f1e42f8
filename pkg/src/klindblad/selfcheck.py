"""Fast invariant and oracle checks behind ``klindblad selfcheck``."""

from __future__ import annotations

import math

import numpy as np

from .dynamics import evolve_full_space, evolve_trajectory
from .model import ModelParams, build_initial_state
from .quantifiers import (
    COMPUTATIONAL,
    concurrence_wootters,
    concurrence_x,
    discord_at_basis,
    discord_closed_form,
    discord_minimized,
    lqfi,
)


def random_x_state(rng: np.random.Generator) -> np.ndarray:
    """Random X-shaped density matrix: PSD 2x2 blocks on {|00>,|11>} and {|01>,|10>}."""
    rho = np.zeros((4, 4), dtype=complex)
    weight = rng.uniform()
    for idx, w in (((0, 3), weight), ((1, 2), 1.0 - weight)):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        block = g @ g.conj().T
        block *= w / np.trace(block).real
        rho[np.ix_(idx, idx)] = block
    return rho


def run_checks(t_max: float = 5.0) -> list[tuple[str, bool, str]]:
    """Run every check; returns (name, passed, detail) triples in a fixed order."""
    results = []
    params = ModelParams(theta=math.pi / 12)

    rk4 = evolve_trajectory(params, t_max=t_max)
    d = rk4.diagnostics
    ok = (
        d["trace_dev"] < 1e-9
        and d["hermiticity"] < 1e-10
        and d["min_eig"] > -1e-8
        and d["x_leakage"] < 1e-10
        and d["max_purity_increase"] <= 1e-10
    )
    results.append(("state invariants", ok, ", ".join(f"{k}={v:.3g}" for k, v in d.items())))

    exact = evolve_trajectory(params, t_max=t_max, method="exact")
    gap = float(np.max(np.abs(rk4.block_states - exact.block_states)))
    results.append(("rk4 vs exact exponential", gap < 1e-6, f"max entry gap {gap:.3e}"))

    full = evolve_full_space(params, exact.times)
    gap = float(np.max(np.abs(full - exact.block_states)))
    results.append(("per-block vs 16x16 evolution", gap < 1e-9, f"max entry gap {gap:.3e}"))

    rng = np.random.default_rng(2024)
    states = [random_x_state(rng) for _ in range(200)]
    gap = max(abs(discord_closed_form(r) - discord_at_basis(r, COMPUTATIONAL)) for r in states)
    results.append(("discord closed form vs computational basis", gap < 1e-10, f"max gap {gap:.3e}"))

    excess = max(discord_minimized(r) - discord_closed_form(r) for r in rk4.averaged)
    results.append(
        ("minimized discord <= closed form", excess <= 1e-9, f"max excess {excess:.3e}")
    )

    gap = max(abs(concurrence_wootters(r) - concurrence_x(r)) for r in states)
    results.append(("Wootters vs X-state concurrence", gap < 1e-9, f"max gap {gap:.3e}"))

    values = {
        "bell": lqfi(build_initial_state(math.pi / 4)),
        "mixed": lqfi(np.eye(4) / 4),
        "classical": lqfi(np.diag([0.3, 0.7, 0.0, 0.0])),
    }
    ok = abs(values["bell"] - 1) < 1e-9 and values["mixed"] < 1e-9 and values["classical"] < 1e-8
    results.append(("LQFI reference states", ok, ", ".join(f"{k}={v:.3g}" for k, v in values.items())))
    return results
