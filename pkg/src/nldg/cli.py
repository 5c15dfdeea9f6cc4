"""Command-line front end.

Settings come from (lowest to highest precedence) built-in defaults, a flat
TOML config file (``--config``), the ``NLDG_SEED`` environment variable (seed
only) and command-line flags, which share the config keys' names.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import ERROR_QUAD_ORDER, TRUTH_MODES, MeshFamily, jump_study, run_study
from .assembly import K_QUAD_ORDER, LOAD_QUAD_ORDER, dump_triplets, stiffness
from .kernel import Kernel, parse_variant
from .mesh import RNG_NAME, elements_for_ratio, perturbed_mesh, uniform_mesh
from .presets import PRESETS, published_rows_markdown, run_preset
from .problems import REFERENCE_RATIO, get_problem, solve_problem
from .solver import condition_report

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_CONFIG = 2


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def _float_list(v):
    if isinstance(v, str):
        v = [s for s in v.replace(",", " ").split() if s]
    if isinstance(v, (int, float)):
        v = [v]
    return [float(x) for x in v]


def _int_list(v):
    if isinstance(v, str) and ".." in v:
        lo, hi = v.split("..")
        return list(range(int(lo), int(hi) + 1))
    vals = _float_list(v)
    if not all(x.is_integer() for x in vals):
        raise ValueError(f"expected integers, got {v!r}")
    return [int(x) for x in vals]


def _choice(*options):
    def conv(v):
        v = str(v)
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v
    return conv


def _kernel_name(v):
    return parse_variant(v).value


def _opt_int(v):
    return None if v in (None, "", "none") else int(v)


# key -> (converter, default, help)
KEYS = {
    "problem": (_choice("example1", "example2", "example3", "custom"), "example1", "benchmark problem"),
    "forcing": (str, None, "forcing expression in x for problem=custom, e.g. 'exp(x) - x^2'"),
    "kernel": (_kernel_name, None, "kernel: constant | hat (default: the problem's own kernel)"),
    "delta": (float, 0.4, "horizon, in (0, 1/2)"),
    "mesh": (_choice("uniform", "perturbed"), "uniform", "mesh family"),
    "M": (_opt_int, None, "number of elements (solve/cond; overrides delta_over_h)"),
    "delta_over_h": (int, 8, "single resolution for solve"),
    "resolutions": (_int_list, [4, 8, 16, 32, 64], "delta/h ladder for study/cond/jump"),
    "seed": (int, 0, "seed for a single perturbed mesh"),
    "seeds": (_int_list, None, "seed list for perturbed studies, e.g. '0..19'"),
    "amplitude": (float, 0.1, "perturbation amplitude as a fraction of h"),
    "pin": (_float_list, [], "points kept as nodes of perturbed meshes, e.g. '0.4,0.6'"),
    "solver": (_choice("cg", "cholesky"), "cg", "linear solver"),
    "tol": (float, 1e-12, "CG relative residual tolerance"),
    "maxit": (_opt_int, None, "CG iteration cap"),
    "k_order": (int, K_QUAD_ORDER, "Gauss order for the outer integral of K"),
    "load_order": (int, LOAD_QUAD_ORDER, "Gauss order for load vectors"),
    "error_order": (int, ERROR_QUAD_ORDER, "Gauss order for error norms"),
    "reference": (int, REFERENCE_RATIO, "delta/h of the reference solution"),
    "truth": (_choice(*TRUTH_MODES), "auto", "error truth: auto | exact | reference | successive"),
    "x0": (float, 0.4, "jump location for the jump command"),
    "out": (str, None, "output path prefix"),
    "jobs": (int, 1, "worker threads for study rows"),
    "dump_matrix": (str, None, "write the stiffness matrix as 'i j value' triplets (solve)"),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def problem(self):
        name = self.values["problem"]
        kname = self.values["kernel"]
        delta = self.values["delta"]
        kernel = Kernel(kname, delta) if kname else None
        spec = get_problem(name, delta, kernel, self.values["forcing"])
        if kernel is not None and kernel.variant is not spec.kernel.variant:
            raise ConfigError("kernel", f"problem {name} is defined with the {spec.kernel.variant.value} kernel")
        return spec

    def mesh_family(self) -> MeshFamily:
        return MeshFamily(self.values["mesh"], self.values["amplitude"], tuple(self.values["pin"]))

    def echo(self) -> dict:
        return dict(self.values)


def _convert(key: str, value):
    try:
        conv = KEYS[key][0]
    except KeyError:
        raise ConfigError(key, "unknown key") from None
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None


def load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    out = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ConfigError(key, "config files are flat; tables are not allowed")
        out[key] = _convert(key, value)
    return out


def resolve_config(args: argparse.Namespace, env=None) -> RunConfig:
    env = os.environ if env is None else env
    values = {k: v[1] for k, v in KEYS.items()}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    if env.get("NLDG_SEED"):
        values["seed"] = _convert("seed", env["NLDG_SEED"])
    for key in KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _convert(key, v)
    if values["kernel"] is None and values["problem"] == "custom":
        values["kernel"] = "constant"
    if not 0 < values["delta"] < 0.5:
        raise ConfigError("delta", f"must lie in (0, 1/2), got {values['delta']}")
    if not values["resolutions"]:
        raise ConfigError("resolutions", "must be nonempty")
    if values["problem"] == "custom" and not values["forcing"]:
        raise ConfigError("forcing", "required when problem = custom")
    return RunConfig(values)


def _metadata(cfg: RunConfig, command: str, **extra) -> dict:
    meta = {
        "command": command,
        "config": cfg.echo(),
        "rng": RNG_NAME,
        "versions": {"nldg": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }
    meta.update(extra)
    return meta


def _write_json(path: Path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _out_prefix(cfg: RunConfig, default: str) -> Path:
    p = Path(cfg.out or default)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _single_mesh(cfg: RunConfig):
    delta = cfg.delta
    M = cfg.M if cfg.M is not None else elements_for_ratio(cfg.delta_over_h, delta)
    if cfg.mesh == "uniform":
        return uniform_mesh(M, delta)
    return perturbed_mesh(M, delta, cfg.seed, cfg.amplitude, tuple(cfg.pin))


def _fmt(v) -> str:
    return f"{v:.17g}"


def cmd_solve(cfg: RunConfig) -> int:
    spec = cfg.problem()
    mesh = _single_mesh(cfg)
    disc = solve_problem(spec, mesh, cfg.solver, cfg.tol, cfg.maxit, cfg.k_order, cfg.load_order)
    cond = condition_report(disc.stiffness)
    prefix = _out_prefix(cfg, f"solve_{spec.name.split(':')[0]}")
    csv_path = prefix.with_suffix(".csv")
    forcing = spec.forcing(mesh.nodes)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for x, u, b in zip(mesh.nodes, disc.solution.values, forcing):
            w.writerow([_fmt(x), _fmt(u), _fmt(b)])
    if cfg.dump_matrix:
        dump_triplets(disc.stiffness, cfg.dump_matrix)
    _write_json(prefix.with_suffix(".meta.json"), _metadata(
        cfg, "solve", columns=["x", "u_h", "forcing"], num_dofs=mesh.num_dofs, h_max=mesh.h_max,
        cond=cond.cond, lambda_min=cond.lambda_min, lambda_max=cond.lambda_max,
        residual=disc.report.final_residual, iterations=disc.report.iterations))
    print(f"{spec.name}: {mesh.num_dofs} dofs, h_max={mesh.h_max:.6g}")
    print(f"cond = {cond.cond:.6f}  (lambda_min={cond.lambda_min:.6e}, lambda_max={cond.lambda_max:.6e})")
    print(f"{disc.report.method}: iterations={disc.report.iterations}, relative residual={disc.report.final_residual:.3e}")
    print(f"wrote {csv_path}")
    return 0


def _study_seeds(cfg: RunConfig):
    if cfg.mesh != "perturbed":
        return None
    return cfg.seeds if cfg.seeds else [cfg.seed]


def _write_study(report, prefix: Path, title: str, meta: dict, extra_md: str = "") -> None:
    report.to_csv(prefix.with_suffix(".csv"))
    md = report.to_markdown(title)
    if extra_md:
        md += "\n" + extra_md
    prefix.with_suffix(".md").write_text(md)
    meta = dict(meta)
    meta["study"] = report.metadata
    _write_json(prefix.with_suffix(".meta.json"), meta)


def cmd_study(cfg: RunConfig) -> int:
    if len(cfg.resolutions) < 2:
        raise ConfigError("resolutions", "a study needs at least two resolutions")
    spec = cfg.problem()
    report = run_study(spec, cfg.mesh_family(), cfg.resolutions, _study_seeds(cfg),
                       reference_ratio=cfg.reference, method=cfg.solver, tol=cfg.tol, maxit=cfg.maxit,
                       k_order=cfg.k_order, load_order=cfg.load_order, error_order=cfg.error_order,
                       jobs=cfg.jobs, truth=cfg.truth)
    prefix = _out_prefix(cfg, f"study_{spec.name.split(':')[0]}")
    title = f"{spec.name}, {report.metadata['mesh_family']} meshes"
    _write_study(report, prefix, title, _metadata(cfg, "study"))
    print(report.to_markdown(title))
    print(f"wrote {prefix.with_suffix('.csv')}, {prefix.with_suffix('.md')}")
    return 0


def cmd_cond(cfg: RunConfig) -> int:
    kernel = cfg.problem().kernel
    fam = cfg.mesh_family()
    prefix = _out_prefix(cfg, f"cond_{kernel.variant.value}")
    rows = []
    for r in cfg.resolutions:
        mesh = fam.build(r, cfg.delta, cfg.seed)
        rep = condition_report(stiffness(mesh, kernel, cfg.k_order))
        rows.append((r, mesh.h_max, rep.cond, rep.lambda_min, rep.lambda_max))
        print(f"delta/h={r:4d}  h={mesh.h_max:.6g}  cond={rep.cond:.4f}")
    with open(prefix.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delta_over_h", "h", "cond", "lambda_min", "lambda_max"])
        for r, h, c, lo, hi in rows:
            w.writerow([r, _fmt(h), _fmt(c), _fmt(lo), _fmt(hi)])
    _write_json(prefix.with_suffix(".meta.json"), _metadata(cfg, "cond"))
    return 0


def cmd_jump(cfg: RunConfig) -> int:
    spec = cfg.problem()
    rows = jump_study(spec, cfg.x0, cfg.resolutions, cfg.mesh_family(),
                      cfg.seed if cfg.mesh == "perturbed" else None, cfg.solver, cfg.tol)
    prefix = _out_prefix(cfg, f"jump_{spec.name.split(':')[0]}")
    with open(prefix.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h", "jump", "delta_over_h", "snap_distance"])
        for r in rows:
            w.writerow([_fmt(r["h"]), _fmt(r["jump"]), r["delta_over_h"], _fmt(r["snap_distance"])])
            print(f"delta/h={r['delta_over_h']:4d}  h={r['h']:.6g}  jump={r['jump']:.6e}  snap={r['snap_distance']:.2e}")
    _write_json(prefix.with_suffix(".meta.json"), _metadata(cfg, "jump"))
    return 0


def cmd_reproduce(cfg: RunConfig, table: str) -> int:
    preset = PRESETS[table]
    report, checks = run_preset(table, seeds=cfg.seeds, jobs=cfg.jobs)
    prefix = _out_prefix(cfg, table)
    _write_study(report, prefix, f"{table}: {preset.title}", _metadata(cfg, f"reproduce {table}"),
                 published_rows_markdown(preset))
    print(report.to_markdown(f"{table}: {preset.title}"))
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"{table}: {'all golden checks passed' if ok else 'golden checks FAILED'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat TOML file with any of the keys below")
    for key, (_, default, help_) in KEYS.items():
        flags = [f"--{key}"]
        if "_" in key:
            flags.append(f"--{key.replace('_', '-')}")
        common.add_argument(*flags, dest=key, default=None, help=f"{help_} (default: {default})")

    parser = argparse.ArgumentParser(prog="nldg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve on one mesh and write nodal values")
    sub.add_parser("study", parents=[common], help="convergence study over a delta/h ladder")
    sub.add_parser("cond", parents=[common], help="spectral condition numbers over a ladder")
    sub.add_parser("jump", parents=[common], help="slope jump of u_h at x0 over a ladder")
    rp = sub.add_parser("reproduce", parents=[common], help="rerun a published table and check it")
    rp.add_argument("table", choices=sorted(PRESETS))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "study":
            return cmd_study(cfg)
        if args.command == "cond":
            return cmd_cond(cfg)
        if args.command == "jump":
            return cmd_jump(cfg)
        return cmd_reproduce(cfg, args.table)
    except ConfigError as exc:
        print(f"nldg: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"nldg: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
