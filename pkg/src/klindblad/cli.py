"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 invariant violation,
3 I/O error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import __version__
from .dynamics import evolve_trajectory, steady_state_blocks
from .exceptions import InvariantViolation, ParameterDomainError
from .model import SECTORS, ModelParams, average_blocks
from .physical import (
    REPORTED_ION_T_ENT_S,
    PhysicalInputs,
    decoherence_time,
    entanglement_time_natural,
    entanglement_time_physical,
)
from .quantifiers import EXTRA_QUANTIFIERS, QUANTIFIER_NAMES, evaluate

log = logging.getLogger("klindblad")

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_IO = 0, 1, 2, 3
CSV_FORMAT_VERSION = 1
JSON_FORMAT_VERSION = 1
SWEEPABLE = ("theta", "ell_H", "ell_L", "omega", "epsilon", "mass")

JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["config", "samples", "diagnostics"],
    "additionalProperties": False,
    "properties": {
        "config": {"type": "object"},
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t"],
                "properties": {"t": {"type": "number"}},
                "additionalProperties": {"type": "number"},
            },
        },
        "diagnostics": {"type": "object", "required": ["format_version"]},
    },
}


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """Shortest round-trip text capped at 12 significant digits."""
    return format(float(x), ".12g")


def _round12(x: float) -> float:
    return float(fmt(x))


_PI_EXPR = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_number(text: str) -> float:
    """Parse a float, also accepting multiples of pi such as ``pi/12`` or ``2pi/3``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text)
    if not m:
        raise ConfigError(f"cannot parse number {text!r}")
    coef = m.group(1)
    coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    den = float(m.group(2)) if m.group(2) else 1.0
    return coef * math.pi / den


@dataclass(frozen=True)
class RunConfig:
    epsilon: float = 1.0
    omega: float = 0.5
    mass: float = 1.0
    ell_H: float = 1.0
    ell_L: float = 1.0
    theta: float = 0.0
    t_max: float = 20.0
    step: float = 1e-3
    sample_every: int = 100
    outputs: tuple = QUANTIFIER_NAMES
    format: str = "csv"
    method: str = "rk4"

    def __post_init__(self):
        known = QUANTIFIER_NAMES + EXTRA_QUANTIFIERS
        unknown = [n for n in self.outputs if n not in known]
        if unknown:
            raise ConfigError(f"outputs: unknown quantifier(s) {unknown}; known: {list(known)}")
        if not self.outputs:
            raise ConfigError("outputs: at least one quantifier is required")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: must be csv or json, got {self.format!r}")
        if self.method not in ("rk4", "exact"):
            raise ConfigError(f"method: must be rk4 or exact, got {self.method!r}")
        if not (self.step > 0 and self.t_max > 0):
            raise ConfigError("t_max and step must be positive")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ConfigError(f"sample_every: must be a positive integer, got {self.sample_every}")
        n = round(self.t_max / self.step)
        if abs(n * self.step - self.t_max) > 1e-9 * max(1.0, self.t_max):
            raise ConfigError(f"step: {self.step} does not divide t_max={self.t_max}")
        if n % int(self.sample_every):
            raise ConfigError(
                f"sample_every: {self.sample_every} does not divide the {n} steps up to t_max"
            )
        self.params()

    def params(self) -> ModelParams:
        try:
            return ModelParams(
                epsilon=self.epsilon,
                omega=self.omega,
                mass=self.mass,
                ell_H=self.ell_H,
                ell_L=self.ell_L,
                theta=self.theta,
            )
        except ParameterDomainError as exc:
            raise ConfigError(str(exc)) from None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["outputs"] = list(self.outputs)
        return {k: (_round12(v) if isinstance(v, float) else v) for k, v in d.items()}


# config-file key -> RunConfig field
_CONFIG_KEYS = {
    "epsilon": "epsilon",
    "omega": "omega",
    "mass": "mass",
    "ell_h": "ell_H",
    "ell_l": "ell_L",
    "theta": "theta",
    "t_max": "t_max",
    "step": "step",
    "sample_every": "sample_every",
    "outputs": "outputs",
    "format": "format",
    "method": "method",
}


def _coerce(field_name: str, raw: str):
    if field_name == "outputs":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if field_name in ("format", "method"):
        return raw.strip()
    if field_name == "sample_every":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"sample_every: expected an integer, got {raw!r}") from None
    return parse_number(raw)


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Unknown keys are errors."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, raw = (s.strip() for s in line.split("=", 1))
            norm = key.lower().replace("-", "_")
            if norm not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[_CONFIG_KEYS[norm]] = _coerce(_CONFIG_KEYS[norm], raw)
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return values


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--epsilon", type=str)
    g.add_argument("--omega", type=str)
    g.add_argument("--mass", type=str)
    g.add_argument("--ell-h", dest="ell_H", type=str)
    g.add_argument("--ell-l", dest="ell_L", type=str)
    g.add_argument("--theta", type=str, help="radians; accepts forms like pi/4")
    g.add_argument("--config", help="flat key=value file; flags override it")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    _add_model_flags(p)
    g = p.add_argument_group("run")
    g.add_argument("--t-max", dest="t_max", type=str)
    g.add_argument("--step", type=str)
    g.add_argument("--sample-every", dest="sample_every", type=str)
    g.add_argument("--method", choices=("rk4", "exact"))
    g.add_argument("--outputs", type=str, help="comma-separated quantifier names")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--out", help="output file (default: stdout)")


def build_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for f in fields(RunConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            values[f.name] = _coerce(f.name, raw) if isinstance(raw, str) else raw
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _max_workers() -> int | None:
    raw = os.environ.get("KLINDBLAD_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"KLINDBLAD_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"KLINDBLAD_THREADS must be a positive integer, got {raw!r}")
    return n


def run_samples(config: RunConfig) -> tuple[list[dict], dict]:
    """Evolve and quantify; returns (rows, diagnostics)."""
    traj = evolve_trajectory(
        config.params(), config.t_max, config.step, int(config.sample_every), config.method
    )
    rows = []
    for t, rho in zip(traj.times, traj.averaged):
        row = {"t": float(t)}
        row.update(evaluate(rho, config.outputs))
        rows.append(row)
    diagnostics = {k: _round12(v) for k, v in traj.diagnostics.items()}
    diagnostics["samples"] = len(rows)
    return rows, diagnostics


def _csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    buf.write(f"# klindblad-csv v{CSV_FORMAT_VERSION}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(row[c]) for c in columns) + "\n")
    return buf.getvalue()


def _json_text(config: dict, rows: list[dict], diagnostics: dict) -> str:
    doc = {
        "config": config,
        "samples": [{k: _round12(v) for k, v in row.items()} for row in rows],
        "diagnostics": {"format_version": JSON_FORMAT_VERSION, **diagnostics},
    }
    return json.dumps(doc, indent=1) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_simulate(args) -> int:
    config = build_config(args)
    rows, diagnostics = run_samples(config)
    columns = ["t", *config.outputs]
    if config.format == "csv":
        text = _csv_text(rows, columns)
    else:
        text = _json_text(config.as_dict(), rows, diagnostics)
    _emit(text, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = build_config(args)
    name = {"ell_h": "ell_H", "ell_l": "ell_L"}.get(args.sweep.lower(), args.sweep)
    if name not in SWEEPABLE:
        raise ConfigError(f"--sweep: must be one of {list(SWEEPABLE)}, got {args.sweep!r}")
    values = [parse_number(v) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values: empty value list")
    configs = []
    for v in values:
        try:
            configs.append(replace(config, **{name: v}))
        except ConfigError as exc:
            raise ConfigError(f"--values: {name}={v}: {exc}") from None

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        results = list(pool.map(run_samples, configs))

    rows, diagnostics = [], {}
    for v, (point_rows, diag) in zip(values, results):
        rows.extend({name: v, **r} for r in point_rows)
        diagnostics[fmt(v)] = diag
    columns = [name, "t", *config.outputs]
    if config.format == "csv":
        text = _csv_text(rows, columns)
    else:
        cfg = config.as_dict()
        cfg.pop(name)
        cfg["sweep"] = {"name": name, "values": [_round12(v) for v in values]}
        text = _json_text(cfg, rows, {"points": diagnostics})
    _emit(text, args.out)
    return EXIT_OK


def _matrix_lines(rho: np.ndarray) -> list[str]:
    lines = []
    for row in rho:
        cells = []
        for z in row:
            cells.append(f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}j")
        lines.append("  " + " ".join(cells))
    return lines


def cmd_steady(args) -> int:
    config = build_config(args)
    params = config.params()
    blocks = steady_state_blocks(params)
    rho = average_blocks([b.state for b in blocks])
    quant = evaluate(rho, config.outputs)
    sectors = [
        {
            "sector": [s.a, s.b],
            "kernel_dim": b.kernel_dim,
            "oscillating_modes": b.oscillating_modes,
            "method": b.method,
            "residual": _round12(b.residual),
        }
        for s, b in zip(SECTORS, blocks)
    ]
    if config.format == "json":
        doc = {
            "config": config.as_dict(),
            "state": {
                "real": [[_round12(x) for x in row] for row in rho.real],
                "imag": [[_round12(x) for x in row] for row in rho.imag],
            },
            "quantifiers": {k: _round12(v) for k, v in quant.items()},
            "sectors": sectors,
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        lines = ["steady averaged state:", *_matrix_lines(rho), "quantifiers:"]
        lines += [f"  {k} = {fmt(v)}" for k, v in quant.items()]
        lines.append("sectors:")
        for s in sectors:
            a, b = s["sector"]
            lines.append(
                f"  ({a:+d},{b:+d}) kernel_dim={s['kernel_dim']} "
                f"oscillating_modes={s['oscillating_modes']} method={s['method']} "
                f"residual={fmt(s['residual'])}"
            )
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    values = read_config_file(args.config) if args.config else {}
    for key in ("epsilon", "omega", "mass", "ell_H", "ell_L"):
        if getattr(args, key) is not None:
            values[key] = parse_number(getattr(args, key))
    values.pop("theta", None)
    model_kw = {k: v for k, v in values.items() if k in ("epsilon", "omega", "mass", "ell_H", "ell_L")}
    try:
        params = ModelParams(**model_kw)
        inputs = PhysicalInputs(
            mass_eV=parse_number(args.mass_ev),
            epsilon_eV=parse_number(args.epsilon_ev),
            EQG_eV=parse_number(args.eqg_ev),
            hbar_eVs=parse_number(args.hbar),
            particle_count=int(args.particles),
        )
    except (ParameterDomainError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if args.scale_n < 1:
        raise ConfigError("--scale-n must be a positive integer")
    momentum = (
        parse_number(args.momentum_ev)
        if args.momentum_ev is not None
        else math.sqrt(2.0 * inputs.mass_eV * inputs.epsilon_eV)
    )

    t_std = entanglement_time_natural(params, "std")
    t_var = entanglement_time_natural(params, "variance")
    t_phys = entanglement_time_physical(inputs)
    scaled = replace(inputs, particle_count=inputs.particle_count * args.scale_n)
    t_scaled = entanglement_time_physical(scaled)
    tau_d = decoherence_time(inputs, momentum)
    ratio = REPORTED_ION_T_ENT_S / t_phys

    lines = [
        f"T_ent natural (mean of std devs, squared) = {fmt(t_std)}",
        f"T_ent natural (mean of variances)         = {fmt(t_var)}",
        f"T_ent physical computed [s]               = {fmt(t_phys)}",
        f"T_ent physical quoted for ion example [s] = {fmt(REPORTED_ION_T_ENT_S)}",
        f"quoted / computed                         = {fmt(ratio)}"
        + ("  (DISCREPANCY: quoted value is not reproduced by the formula)"
           if abs(ratio - 1.0) > 0.05 else ""),
        f"{f'T_ent physical x{args.scale_n} particles [s]':<42}= {fmt(t_scaled)}"
        f" ({fmt(t_scaled / 3600.0)} h)",
        f"tau_D decoherence estimate [s]            = {fmt(tau_d)} (p = {fmt(momentum)} eV)",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_checks

    results = run_checks()
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klindblad",
        description="Two-particle Lindblad dynamics with deformed energy composition.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve and write quantifiers per sampled time")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="simulate over a list of values of one parameter")
    _add_run_flags(p)
    p.add_argument("--sweep", required=True, help=f"one of {', '.join(SWEEPABLE)}")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("steady", help="t -> infinity state by spectral projection")
    _add_run_flags(p)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("estimate", help="entanglement and decoherence time scales")
    _add_model_flags(p)
    p.add_argument("--mass-ev", default="3.7e10", help="m c^2 in eV")
    p.add_argument("--epsilon-ev", default="1.0", help="transition energy in eV")
    p.add_argument("--eqg-ev", default="1.2e28", help="quantum-gravity scale in eV")
    p.add_argument("--hbar", default="6.6e-16", help="hbar in eV s")
    p.add_argument("--particles", type=int, default=1)
    p.add_argument("--scale-n", type=int, default=100, help="particle count for the scaled value")
    p.add_argument("--momentum-ev", default=None, help="p c in eV (default sqrt(2 m eps))")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("selfcheck", help="run the invariant and oracle checks")
    p.add_argument("--out")
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, ParameterDomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
