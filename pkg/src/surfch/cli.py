"""Command line front end: experiment runs, convergence studies, checks.

Subcommands
-----------
run        integrate one configuration and write trace.csv plus VTK snapshots
eoc        refinement study against a finer reference solution, written as CSV
verify     re-check the library's structural properties suite by suite
mesh-info  print mesh statistics for a configuration without running it

Configuration grammar
---------------------
Configurations are flat ``key = value`` lines; ``#`` starts a comment and
blank lines are ignored.  Keys are dotted section paths:

    surface.kind      = expanding_torus   # stationary_sphere | expanding_sphere
                                          # | expanding_torus | shrinking_torus
    mesh.type         = torus             # torus | icosphere
    mesh.n_theta      = 64                # torus only: nodes around the ring
    mesh.n_phi        = 47                # torus only: nodes around the tube
    mesh.level        = 4                 # icosphere only: refinement level
    scheme.epsilon    = 0.1
    scheme.theta      = 0.4
    scheme.tau        = 5e-5
    scheme.t_end      = 0.6
    initial.preset    = torus_wave        # torus_wave | half_x
                                          # | constant | expression
    initial.constant  = 0.3               # required for preset = constant
    initial.expression = 0.5*x            # required for preset = expression;
                                          # variables x, y, z and numpy math
    output.snapshot_every = 1000          # 0 = initial and final snapshot only
    output.dir        = out               # overridden by --output
    newton.tol        = 1e-9
    newton.max_iters  = 30
    newton.max_halvings = 20
    newton.feasibility_margin = 1e-9
    solver.delta_schedule = 1e-2,1e-3,1e-4   # "none" disables the fallback
    seed              = 0

The surface families carry no free shape parameters: spheres have unit
initial radius and tori the fixed ring/tube radii 0.75 and 0.25.

File formats
------------
trace.csv has the pinned header ``step,time,mass,energy,max_abs_u,min_gap,
newton_iters,mesh_is_acute,min_div_v``, one row per accepted step (the
initial record only when no steps run), floats with 17 significant digits,
'.' decimal separator, LF line endings.  Snapshots ``snap_<step>.vtk`` are
legacy ASCII VTK, DATASET UNSTRUCTURED_GRID, CELL_TYPES 5, POINT_DATA with
SCALARS u and w; the 17-digit formatting makes round-trips exact.  Reruns
with identical configuration produce byte-identical traces.

Exit status: 0 success, 2 configuration or admissibility error, 3 step
failure (partial outputs are kept), 4 property-suite failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import math
import pathlib
import sys

import numpy as np

from . import (assembly, diagnostics, geometry, meshing, operators, potential,
               solver, verify)

TRACE_HEADER = ("step,time,mass,energy,max_abs_u,min_gap,"
                "newton_iters,mesh_is_acute,min_div_v")

# per-level time step for convergence studies, adjusted to divide t_end
EOC_TAU_FACTOR = 0.2


class ConfigError(ValueError):
    """Malformed configuration or inadmissible experiment setup."""


# ---------------------------------------------------------------------------
# configuration


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    surface_kind: str
    mesh_type: str
    level: int | None
    n_theta: int | None
    n_phi: int | None
    epsilon: float
    theta: float
    tau: float
    t_end: float
    initial_preset: str
    initial_constant: float | None
    initial_expression: str | None
    snapshot_every: int
    output_dir: str | None
    newton_tol: float
    newton_max_iters: int
    newton_max_halvings: int
    feasibility_margin: float
    delta_schedule: tuple[float, ...]
    seed: int


_REQUIRED_KEYS = ("surface.kind", "mesh.type", "scheme.epsilon",
                  "scheme.theta", "scheme.tau", "scheme.t_end",
                  "initial.preset")

_OPTIONAL_DEFAULTS = {
    "mesh.level": None,
    "mesh.n_theta": None,
    "mesh.n_phi": None,
    "initial.constant": None,
    "initial.expression": None,
    "output.snapshot_every": "0",
    "output.dir": None,
    "newton.tol": "1e-9",
    "newton.max_iters": "30",
    "newton.max_halvings": "20",
    "newton.feasibility_margin": "1e-9",
    "solver.delta_schedule": "1e-2,1e-3,1e-4",
    "seed": "0",
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a flat mapping."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in mapping:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        mapping[key] = value
    return mapping


def _parse(kind, key: str, value: str):
    try:
        return kind(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_DEFAULTS)
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    missing = sorted(set(_REQUIRED_KEYS) - set(mapping))
    if missing:
        raise ConfigError(f"missing configuration keys: {', '.join(missing)}")
    full = dict(_OPTIONAL_DEFAULTS)
    full.update(mapping)

    kind = full["surface.kind"]
    if kind not in geometry.KINDS:
        raise ConfigError(f"surface.kind: unknown kind {kind!r}")
    mesh_type = full["mesh.type"]
    if mesh_type not in ("icosphere", "torus"):
        raise ConfigError(f"mesh.type must be icosphere or torus, got {mesh_type!r}")
    if mesh_type == "icosphere" and full["mesh.level"] is None:
        raise ConfigError("mesh.level is required for mesh.type = icosphere")
    if mesh_type == "torus" and (full["mesh.n_theta"] is None
                                 or full["mesh.n_phi"] is None):
        raise ConfigError("mesh.n_theta and mesh.n_phi are required for "
                          "mesh.type = torus")

    preset = full["initial.preset"]
    if preset not in ("torus_wave", "half_x", "constant", "expression"):
        raise ConfigError(f"initial.preset: unknown preset {preset!r}")
    if preset == "constant" and full["initial.constant"] is None:
        raise ConfigError("initial.constant is required for preset = constant")
    if preset == "expression" and full["initial.expression"] is None:
        raise ConfigError("initial.expression is required for preset = expression")

    if full["solver.delta_schedule"] == "none":
        schedule: tuple[float, ...] = ()
    else:
        schedule = tuple(
            _parse(float, "solver.delta_schedule", part)
            for part in full["solver.delta_schedule"].split(",") if part.strip()
        )

    def opt(kind, key):
        return None if full[key] is None else _parse(kind, key, full[key])

    return ExperimentConfig(
        surface_kind=kind,
        mesh_type=mesh_type,
        level=opt(int, "mesh.level"),
        n_theta=opt(int, "mesh.n_theta"),
        n_phi=opt(int, "mesh.n_phi"),
        epsilon=_parse(float, "scheme.epsilon", full["scheme.epsilon"]),
        theta=_parse(float, "scheme.theta", full["scheme.theta"]),
        tau=_parse(float, "scheme.tau", full["scheme.tau"]),
        t_end=_parse(float, "scheme.t_end", full["scheme.t_end"]),
        initial_preset=preset,
        initial_constant=opt(float, "initial.constant"),
        initial_expression=full["initial.expression"],
        snapshot_every=_parse(int, "output.snapshot_every",
                              full["output.snapshot_every"]),
        output_dir=full["output.dir"],
        newton_tol=_parse(float, "newton.tol", full["newton.tol"]),
        newton_max_iters=_parse(int, "newton.max_iters", full["newton.max_iters"]),
        newton_max_halvings=_parse(int, "newton.max_halvings",
                                   full["newton.max_halvings"]),
        feasibility_margin=_parse(float, "newton.feasibility_margin",
                                  full["newton.feasibility_margin"]),
        delta_schedule=schedule,
        seed=_parse(int, "seed", full["seed"]),
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        text = pathlib.Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return config_from_mapping(parse_config_text(text))


# presets encode the reference experiments; reduced variants shrink the mesh
# and enlarge the step for desk-scale runs of the same setups
PRESETS: dict[str, dict[str, str]] = {
    "expanding_torus_full": {
        "surface.kind": "expanding_torus",
        "mesh.type": "torus", "mesh.n_theta": "64", "mesh.n_phi": "47",
        "scheme.epsilon": "0.1", "scheme.theta": "0.4",
        "scheme.tau": "5e-5", "scheme.t_end": "0.6",
        "initial.preset": "torus_wave",
        "output.snapshot_every": "1000",
    },
    "shrinking_torus_full": {
        "surface.kind": "shrinking_torus",
        "mesh.type": "torus", "mesh.n_theta": "64", "mesh.n_phi": "47",
        "scheme.epsilon": "0.1", "scheme.theta": "0.4",
        "scheme.tau": "5e-5", "scheme.t_end": "0.6",
        "initial.preset": "torus_wave",
        "output.snapshot_every": "1000",
    },
    "expanding_sphere_full": {
        "surface.kind": "expanding_sphere",
        "mesh.type": "icosphere", "mesh.level": "5",
        "scheme.epsilon": "0.1", "scheme.theta": "0.5",
        "scheme.tau": "1e-5", "scheme.t_end": "0.1",
        "initial.preset": "half_x",
        "output.snapshot_every": "2000",
    },
    "expanding_torus_reduced": {
        "surface.kind": "expanding_torus",
        "mesh.type": "torus", "mesh.n_theta": "30", "mesh.n_phi": "25",
        "scheme.epsilon": "0.1", "scheme.theta": "0.4",
        "scheme.tau": "5e-4", "scheme.t_end": "0.6",
        "initial.preset": "torus_wave",
        "output.snapshot_every": "200",
    },
    "shrinking_torus_reduced": {
        "surface.kind": "shrinking_torus",
        "mesh.type": "torus", "mesh.n_theta": "30", "mesh.n_phi": "25",
        "scheme.epsilon": "0.1", "scheme.theta": "0.4",
        "scheme.tau": "5e-4", "scheme.t_end": "0.6",
        "initial.preset": "torus_wave",
        "output.snapshot_every": "200",
    },
    "stationary_sphere_smoke": {
        "surface.kind": "stationary_sphere",
        "mesh.type": "icosphere", "mesh.level": "2",
        "scheme.epsilon": "0.5", "scheme.theta": "0.4",
        "scheme.tau": "0.01", "scheme.t_end": "0.05",
        "initial.preset": "expression",
        "initial.expression": "0.4*x",
        "output.snapshot_every": "2",
    },
}


def load_preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r} (expected one of: {known})")
    return config_from_mapping(dict(PRESETS[name]))


# ---------------------------------------------------------------------------
# experiment construction

_EXPRESSION_NAMES = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
    "pi": np.pi, "e": np.e,
}


def _expression_field(expression: str):
    try:
        code = compile(expression, "<initial.expression>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"initial.expression: {exc}") from exc

    def field(x, y, z):
        names = dict(_EXPRESSION_NAMES, x=x, y=y, z=z)
        try:
            out = eval(code, {"__builtins__": {}}, names)
        except Exception as exc:
            raise ConfigError(f"initial.expression failed to evaluate: {exc}")
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x))

    return field


def initial_field(config: ExperimentConfig):
    """Nodal initial data callback (x, y, z) -> values."""
    if config.initial_preset == "torus_wave":
        return lambda x, y, z: 0.9 * x * np.cos(0.5 * np.pi * y)
    if config.initial_preset == "half_x":
        return lambda x, y, z: 0.5 * x
    if config.initial_preset == "constant":
        c = config.initial_constant
        return lambda x, y, z: np.full_like(np.asarray(x, dtype=float), c)
    return _expression_field(config.initial_expression)


def build_family(config: ExperimentConfig) -> geometry.SurfaceFamily:
    return geometry.family_from_kind(config.surface_kind)


def build_mesh(config: ExperimentConfig,
               family: geometry.SurfaceFamily) -> meshing.SurfaceMesh:
    try:
        if config.mesh_type == "icosphere":
            if not family.is_sphere:
                raise ConfigError("icosphere meshes require a sphere family")
            return meshing.make_icosphere(config.level, family)
        if family.is_sphere:
            raise ConfigError("torus meshes require a torus family")
        return meshing.make_torus_mesh(config.n_theta, config.n_phi, family)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_scheme(config: ExperimentConfig, tau: float | None = None,
                 t_end: float | None = None) -> solver.SchemeParams:
    try:
        return solver.SchemeParams(
            potential=potential.PotentialParams(
                theta=config.theta, epsilon=config.epsilon),
            tau=config.tau if tau is None else tau,
            t_end=config.t_end if t_end is None else t_end,
            newton_tol=config.newton_tol,
            newton_max_iters=config.newton_max_iters,
            damping_max_halvings=config.newton_max_halvings,
            feasibility_margin=config.feasibility_margin,
            delta_schedule=config.delta_schedule,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# file emitters


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def trace_row(record: diagnostics.DiagnosticsRecord) -> str:
    return ",".join((
        str(record.step), _fmt(record.time), _fmt(record.mass),
        _fmt(record.energy), _fmt(record.max_abs_u), _fmt(record.min_gap),
        str(record.newton_iters), str(int(record.mesh_is_acute)),
        _fmt(record.min_div_v),
    ))


def write_vtk(path, mesh: meshing.SurfaceMesh,
              point_data: dict[str, np.ndarray]) -> None:
    """Write a legacy ASCII VTK snapshot (triangles, nodal scalars)."""
    lines = [
        "# vtk DataFile Version 3.0",
        f"surface snapshot at t={_fmt(mesh.time)}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.vertex_count} double",
    ]
    lines.extend(" ".join(_fmt(c) for c in row) for row in mesh.vertices)
    m = len(mesh.triangles)
    lines.append(f"CELLS {m} {4 * m}")
    lines.extend(f"3 {i} {j} {k}" for i, j, k in mesh.triangles)
    lines.append(f"CELL_TYPES {m}")
    lines.extend(["5"] * m)
    lines.append(f"POINT_DATA {mesh.vertex_count}")
    for name, values in point_data.items():
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(v) for v in np.asarray(values, dtype=float))
    pathlib.Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8",
                                  newline="\n")


def read_vtk(path):
    """Parse a snapshot written by :func:`write_vtk`.

    Returns (vertices, triangles, {scalar name: values}).
    """
    tokens = pathlib.Path(path).read_text(encoding="utf-8").splitlines()
    idx = tokens.index(next(t for t in tokens if t.startswith("POINTS")))
    count = int(tokens[idx].split()[1])
    vertices = np.array([[float(c) for c in line.split()]
                         for line in tokens[idx + 1: idx + 1 + count]])
    idx = idx + 1 + count
    m = int(tokens[idx].split()[1])
    triangles = np.array([[int(c) for c in line.split()[1:]]
                          for line in tokens[idx + 1: idx + 1 + m]], dtype=int)
    idx = idx + 1 + m
    assert tokens[idx].startswith("CELL_TYPES")
    idx += m + 1
    assert tokens[idx].startswith("POINT_DATA")
    idx += 1
    scalars: dict[str, np.ndarray] = {}
    while idx < len(tokens) and tokens[idx].startswith("SCALARS"):
        name = tokens[idx].split()[1]
        idx += 2  # skip LOOKUP_TABLE line
        scalars[name] = np.array([float(v) for v in tokens[idx: idx + count]])
        idx += count
    return vertices, triangles, scalars


# ---------------------------------------------------------------------------
# subcommands


def _resolve_output(config: ExperimentConfig, flag: str | None) -> pathlib.Path:
    target = flag or config.output_dir
    if target is None:
        raise ConfigError("no output directory: set output.dir or pass --output")
    path = pathlib.Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(config: ExperimentConfig, output: str | None) -> int:
    out = _resolve_output(config, output)
    family = build_family(config)
    mesh = build_mesh(config, family)
    params = build_scheme(config)
    if config.snapshot_every < 0:
        raise ConfigError("output.snapshot_every must be nonnegative")
    u0 = operators.interpolate(mesh, initial_field(config))
    # refuse inadmissible data before any output file is created
    report = solver.validate_initial(mesh, family, u0, params=params.potential)
    if not report.passed:
        raise ConfigError("initial data is not admissible: "
                          + "; ".join(report.reasons))
    n_steps = solver.number_of_steps(params)
    every = config.snapshot_every

    with open(out / "trace.csv", "w", encoding="utf-8", newline="\n") as trace:
        trace.write(TRACE_HEADER + "\n")

        def callback(state: solver.SolverState) -> None:
            if state.step > 0 or n_steps == 0:
                record = diagnostics.make_record(
                    state.mesh, family, state.u.coefficients, params.potential,
                    state.step, state.time, state.newton_iters)
                trace.write(trace_row(record) + "\n")
                trace.flush()
            periodic = every > 0 and state.step % every == 0
            if periodic or state.step in (0, n_steps):
                write_vtk(out / f"snap_{state.step}.vtk", state.mesh,
                          {"u": state.u.coefficients, "w": state.w.coefficients})

        try:
            solver.run_simulation(mesh, family, params, u0, callback=callback)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return 0


def _eoc_level_tau(t_end: float, h: float) -> float:
    raw = EOC_TAU_FACTOR * h * h
    n = max(1, math.ceil(t_end / raw - 1e-9))
    return t_end / n


def _run_to_final(config: ExperimentConfig, level: int,
                  tau: float) -> solver.SolverState:
    family = build_family(config)
    mesh = meshing.make_icosphere(level, family)
    params = build_scheme(config, tau=tau)
    u0 = operators.interpolate(mesh, initial_field(config))
    return solver.run_simulation(mesh, family, params, u0)


def eoc_study(config: ExperimentConfig, levels, reference: int):
    """Run the refinement study; returns a list of (h, error, eoc-or-None)."""
    if config.mesh_type != "icosphere":
        raise ConfigError("convergence studies require icosphere meshes")
    levels = list(levels)
    if not levels:
        raise ConfigError("no study levels given")
    if reference <= max(levels):
        raise ConfigError("the reference level must be finer than every "
                          "study level")
    family = build_family(config)
    hs = [meshing.quality(meshing.make_icosphere(level, family)).h
          for level in levels]
    n_ref = max(1, math.ceil(config.t_end / config.tau - 1e-9))

    with concurrent.futures.ThreadPoolExecutor(
            max_workers=min(4, len(levels) + 1)) as pool:
        ref_task = pool.submit(_run_to_final, config, reference,
                               config.t_end / n_ref)
        tasks = [pool.submit(_run_to_final, config, level,
                             _eoc_level_tau(config.t_end, h))
                 for level, h in zip(levels, hs)]
        ref_state = ref_task.result()
        finals = [task.result() for task in tasks]

    ref_mesh = ref_state.mesh
    stiffness = None
    errors = []
    for state in finals:
        lifted = operators.prolong(state.mesh, state.u.coefficients, ref_mesh)
        gap = ref_state.u.coefficients - lifted.coefficients
        if stiffness is None:
            stiffness = assembly.stiffness(ref_mesh)
        errors.append(operators.h1_seminorm(ref_mesh, gap, stiffness=stiffness))

    rows = []
    for i, (h, err) in enumerate(zip(hs, errors)):
        rate = None
        if i > 0:
            prev_h, prev_err = hs[i - 1], errors[i - 1]
            if prev_h != h and prev_err > 0.0 and err > 0.0:
                rate = math.log(prev_err / err) / math.log(prev_h / h)
        rows.append((h, err, rate))
    return rows


def cmd_eoc(config: ExperimentConfig, levels, reference: int,
            output: str | None) -> int:
    out = _resolve_output(config, output)
    rows = eoc_study(config, levels, reference)
    with open(out / "eoc.csv", "w", encoding="utf-8", newline="\n") as table:
        table.write("h,error,eoc\n")
        for h, err, rate in rows:
            eoc_txt = "" if rate is None else _fmt(rate)
            table.write(f"{_fmt(h)},{_fmt(err)},{eoc_txt}\n")
    for h, err, rate in rows:
        eoc_txt = "-" if rate is None else f"{rate:.4f}"
        print(f"h={h:.6e} error={err:.6e} eoc={eoc_txt}")
    return 0


def cmd_verify(suites, seed: int) -> int:
    try:
        results = verify.run_suites(suites, seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for result in results:
        print(result.line())
    failed = verify.failures(results)
    if failed:
        print(f"{len(failed)} properties failed", file=sys.stderr)
        return 4
    return 0


def cmd_mesh_info(config: ExperimentConfig) -> int:
    family = build_family(config)
    mesh = build_mesh(config, family)
    q = meshing.quality(mesh)
    print(f"surface: {config.surface_kind}")
    print(f"vertices: {mesh.vertex_count}")
    print(f"triangles: {len(mesh.triangles)}")
    print(f"euler_characteristic: {meshing.euler_characteristic(mesh)}")
    print(f"h: {q.h:.6e}")
    print(f"rho_min: {q.rho_min:.6e}")
    print(f"min_angle_deg: {math.degrees(q.min_angle):.3f}")
    print(f"max_angle_deg: {math.degrees(q.max_angle):.3f}")
    print(f"is_acute: {q.is_acute}")
    print(f"mesh_area: {meshing.mesh_area(mesh):.12e}")
    print(f"exact_area: {geometry.exact_area(family, mesh.time):.12e}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _config_from_args(args) -> ExperimentConfig:
    if args.config is not None and args.preset is not None:
        raise ConfigError("pass either --config or --preset, not both")
    if args.config is not None:
        return load_config(args.config)
    if args.preset is not None:
        return load_preset(args.preset)
    raise ConfigError("one of --config or --preset is required")


def _parse_levels(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"--levels: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfch",
        description="Phase separation on evolving closed surfaces.")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(sub):
        sub.add_argument("--config", help="path to a key = value config file")
        sub.add_argument("--preset", help="named preset: "
                         + ", ".join(sorted(PRESETS)))

    run = commands.add_parser("run", help="integrate one configuration")
    add_config_flags(run)
    run.add_argument("--output", help="output directory (overrides output.dir)")

    eoc = commands.add_parser("eoc", help="refinement study against a "
                              "finer reference")
    add_config_flags(eoc)
    eoc.add_argument("--levels", required=True,
                     help="comma-separated icosphere study levels, e.g. 2,3,4")
    eoc.add_argument("--reference", required=True, type=int,
                     help="reference icosphere level (finer than all studied)")
    eoc.add_argument("--output", help="output directory (overrides output.dir)")

    ver = commands.add_parser("verify", help="run property suites")
    ver.add_argument("--suite", action="append", default=None,
                     help="suite name (repeatable); omit to run all: "
                     + ", ".join(verify.SUITES))
    ver.add_argument("--seed", type=int, default=0,
                     help="seed for randomized property samples")

    info = commands.add_parser("mesh-info", help="print mesh statistics")
    add_config_flags(info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_config_from_args(args), args.output)
        if args.command == "eoc":
            return cmd_eoc(_config_from_args(args), _parse_levels(args.levels),
                           args.reference, args.output)
        if args.command == "verify":
            suites = tuple(name for arg in (args.suite or ())
                           for name in arg.split(",") if name)
            return cmd_verify(suites, args.seed)
        return cmd_mesh_info(_config_from_args(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except solver.StepFailure as exc:
        print(f"step failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
