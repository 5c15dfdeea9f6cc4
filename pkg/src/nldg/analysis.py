"""Error norms, convergence rates, regularity diagnostics and convergence studies."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, assembly
from .functions import PiecewiseLinear, quadrature_points, split_points
from .mesh import RNG_NAME, Mesh1D, elements_for_ratio, perturbed_mesh, uniform_mesh
from .problems import ProblemSpec, REFERENCE_RATIO, reference_solution, solve_problem
from .solver import condition_report

ERROR_QUAD_ORDER = 7
CSV_COLUMNS = ("delta_over_h", "h", "l2_error", "l2_rate", "h1_error", "h1_rate", "cond", "cg_iters", "seed")


class StudyError(RuntimeError):
    pass


def _error_cuts(u_h, truth, mesh: Mesh1D):
    return split_points(mesh.nodes, getattr(u_h, "breakpoints", ()), getattr(truth, "breakpoints", ()))


def l2_error(u_h, truth, mesh: Mesh1D, order: int = ERROR_QUAD_ORDER) -> float:
    """``||u_h - truth||`` over [0, 1], split at both functions' breakpoints."""
    X, W = quadrature_points(_error_cuts(u_h, truth, mesh), order)
    diff = u_h(X) - truth(X)
    return float(np.sqrt(np.sum(diff * diff * W)))


def h1_seminorm_error(u_h, truth, mesh: Mesh1D, order: int = ERROR_QUAD_ORDER) -> float:
    """``||u_h' - truth'||`` over [0, 1]; ``truth`` must carry a derivative."""
    X, W = quadrature_points(_error_cuts(u_h, truth, mesh), order)
    diff = u_h.derivative(X) - truth.derivative(X)
    return float(np.sqrt(np.sum(diff * diff * W)))


def convergence_rates(errors, h_values) -> list[float]:
    """Two-point rates ``log(e_{k-1}/e_k) / log(h_{k-1}/h_k)``, one per consecutive pair."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(h_values, dtype=float)
    if e.shape != h.shape or e.size < 2:
        raise ValueError("need matching error and h sequences of length >= 2")
    if np.any(e <= 0) or np.any(h <= 0):
        raise ValueError("errors and mesh sizes must be positive")
    return list(np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:]))


def snap_to_node(mesh: Mesh1D, x0: float):
    """Nearest node index to ``x0`` and its distance."""
    if not 0.0 < x0 < 1.0:
        raise ValueError(f"jump location {x0} must lie strictly inside (0, 1)")
    k = int(np.argmin(np.abs(mesh.nodes - x0)))
    if k == 0 or k == mesh.num_elements:
        raise ValueError(f"x0 = {x0} is within half an element of the boundary")
    return k, float(abs(mesh.nodes[k] - x0))


def derivative_jump(u_h: PiecewiseLinear, x0: float, mesh: Mesh1D) -> float:
    """Slope jump of a P1 function across the node nearest ``x0``."""
    k, _ = snap_to_node(mesh, x0)
    slopes = np.diff(u_h(mesh.nodes)) / mesh.spacings
    return float(abs(slopes[k] - slopes[k - 1]))


@dataclass(frozen=True)
class MeshFamily:
    kind: str = "uniform"  # "uniform" or "perturbed"
    amplitude: float = 0.1
    pinned: tuple = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "perturbed"):
            raise ValueError(f"unknown mesh family {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "uniform":
            return "uniform"
        pins = f", pinned={list(self.pinned)}" if self.pinned else ""
        return f"perturbed(amplitude={self.amplitude}{pins})"

    def build(self, delta_over_h: int, delta: float, seed: int | None = None) -> Mesh1D:
        M = elements_for_ratio(delta_over_h, delta)
        if self.kind == "uniform":
            return uniform_mesh(M, delta)
        return perturbed_mesh(M, delta, seed, self.amplitude, self.pinned)


@dataclass
class StudyRow:
    delta_over_h: int
    h: float
    l2_error: float
    l2_rate: float | None
    h1_error: float
    h1_rate: float | None
    cond: float | None
    cg_iters: int
    seed: int | str | None = None
    residual: float = 0.0

    def as_csv(self) -> list[str]:
        def num(v):
            return "" if v is None else f"{v:.17g}"
        seed = "" if self.seed is None else str(self.seed)
        return [str(self.delta_over_h), num(self.h), num(self.l2_error), num(self.l2_rate),
                num(self.h1_error), num(self.h1_rate), num(self.cond), str(self.cg_iters), seed]


@dataclass
class StudyReport:
    rows: list[StudyRow]
    metadata: dict = field(default_factory=dict)
    seed_rows: list[StudyRow] = field(default_factory=list)

    def column(self, name: str, rows=None) -> list:
        return [getattr(r, name) for r in (self.rows if rows is None else rows)]

    def rates(self, kind: str = "l2") -> list[float]:
        """Rates of the summary rows (first row excluded)."""
        return [getattr(r, f"{kind}_rate") for r in self.rows[1:]]

    def pooled_rates(self, kind: str = "l2") -> list[float]:
        """Every per-seed rate (all seeds, all refinement steps)."""
        src = self.seed_rows or self.rows
        return [getattr(r, f"{kind}_rate") for r in src if getattr(r, f"{kind}_rate") is not None]

    def median_rate(self, kind: str = "l2") -> float:
        return float(np.median(self.pooled_rates(kind)))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.seed_rows:
            w.writerow(r.as_csv())
        for r in self.rows:
            w.writerow(r.as_csv())
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_markdown(self, title: str | None = None) -> str:
        rows = self.rows
        head = ["δ/h"] + [str(r.delta_over_h) for r in rows]
        lines = []
        if title:
            lines += [f"**{title}**", ""]
        lines.append("| " + " | ".join(head) + " |")
        lines.append("|" + "---|" * len(head))

        def fmt(vals, spec):
            return ["--" if v is None else format(v, spec) for v in vals]

        body = [
            ("‖u−u_h‖", fmt(self.column("l2_error"), ".3e")),
            ("Rate", fmt(self.column("l2_rate"), ".4f")),
            ("‖u′−u_h′‖", fmt(self.column("h1_error"), ".3e")),
            ("Rate", fmt(self.column("h1_rate"), ".4f")),
        ]
        if any(c is not None for c in self.column("cond")):
            body.append(("Cond", fmt(self.column("cond"), ".4f")))
        for label, cells in body:
            lines.append("| " + " | ".join([label] + cells) + " |")
        return "\n".join(lines) + "\n"


TRUTH_MODES = ("auto", "exact", "reference", "successive")


def _truth_for(problem: ProblemSpec, resolutions, reference_ratio: int, mode: str):
    """Callable ``r -> truth`` for each study resolution.

    ``reference`` uses one fine uniform solution at ``reference_ratio``;
    ``successive`` compares each mesh with the uniform solution at twice its
    ``delta/h``; ``auto`` picks the exact solution when there is one.
    """
    if mode not in TRUTH_MODES:
        raise StudyError(f"unknown truth mode {mode!r}; expected one of {TRUTH_MODES}")
    if mode == "auto":
        mode = "exact" if problem.exact_solution is not None else "reference"
    if mode == "exact":
        if problem.exact_solution is None:
            raise StudyError(f"problem {problem.name} has no exact solution")
        exact = problem.exact_solution
        return mode, lambda r: exact
    if mode == "reference":
        ref = reference_solution(problem, reference_ratio, finest=max(resolutions))
        return mode, lambda r: ref
    cache = {}

    def successive(r):
        if r not in cache:
            mesh = uniform_mesh(elements_for_ratio(2 * r, problem.delta), problem.delta)
            cache[r] = solve_problem(problem, mesh, method="cholesky").solution
        return cache[r]

    for r in resolutions:
        successive(r)
    return mode, successive


def _run_one(problem, family, r, seed, truth_of, method, tol, maxit, k_order, load_order, err_order, with_cond):
    stage = "mesh"
    try:
        mesh = family.build(r, problem.delta, seed)
        stage = "assemble/solve"
        disc = solve_problem(problem, mesh, method, tol, maxit, k_order, load_order)
        stage = "errors"
        truth = truth_of(r)
        u_h = disc.solution
        l2 = l2_error(u_h, truth, mesh, err_order)
        h1 = h1_seminorm_error(u_h, truth, mesh, err_order)
        stage = "condition number"
        cond = condition_report(disc.stiffness).cond if with_cond else None
    except Exception as exc:
        raise StudyError(f"stage '{stage}' failed at delta/h={r}, seed={seed}: {exc}") from exc
    return StudyRow(r, mesh.h_max, l2, None, h1, None, cond, disc.report.iterations, seed, disc.report.final_residual)


def _fill_rates(rows: list[StudyRow]) -> None:
    if len(rows) < 2:
        return
    h = [r.h for r in rows]
    for kind in ("l2", "h1"):
        rates = convergence_rates([getattr(r, f"{kind}_error") for r in rows], h)
        for row, rate in zip(rows[1:], rates):
            setattr(row, f"{kind}_rate", float(rate))


def run_study(
    problem: ProblemSpec,
    mesh_family: MeshFamily | str = "uniform",
    resolutions=(4, 8, 16, 32, 64),
    seeds=None,
    *,
    reference_ratio: int = REFERENCE_RATIO,
    method: str = "cg",
    tol: float = 1e-12,
    maxit: int | None = None,
    k_order: int = assembly.K_QUAD_ORDER,
    load_order: int = assembly.LOAD_QUAD_ORDER,
    error_order: int = ERROR_QUAD_ORDER,
    with_cond: bool = True,
    jobs: int = 1,
    truth: str = "auto",
) -> StudyReport:
    """Solve ``problem`` on a ladder of ``delta/h`` values and tabulate errors.

    Perturbed families run once per seed; the summary rows then hold the
    per-resolution medians over seeds, and every seed's rows are kept in
    ``seed_rows``.
    """
    if isinstance(mesh_family, str):
        mesh_family = MeshFamily(mesh_family)
    resolutions = [int(r) for r in resolutions]
    if not resolutions:
        raise StudyError("no resolutions requested")
    if any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise StudyError("resolutions must be strictly increasing")
    if mesh_family.kind == "perturbed":
        seeds = list(seeds or [])
        if not seeds:
            raise StudyError("perturbed mesh studies need at least one seed")
    else:
        seeds = [None]

    try:
        truth_mode, truth_of = _truth_for(problem, resolutions, reference_ratio, truth)
    except StudyError:
        raise
    except Exception as exc:
        raise StudyError(f"stage 'reference solution' failed: {exc}") from exc

    jobs_list = [(r, s) for s in seeds for r in resolutions]
    args = (method, tol, maxit, k_order, load_order, error_order, with_cond)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda rs: _run_one(problem, mesh_family, rs[0], rs[1], truth_of, *args), jobs_list))
    else:
        results = [_run_one(problem, mesh_family, r, s, truth_of, *args) for r, s in jobs_list]

    per_seed = {s: [] for s in seeds}
    for row in results:
        per_seed[row.seed].append(row)
    for rows in per_seed.values():
        _fill_rates(rows)

    meta = {
        "problem": problem.name,
        "kernel": problem.kernel.variant.value,
        "delta": problem.delta,
        "mesh_family": mesh_family.label,
        "resolutions": resolutions,
        "seeds": [s for s in seeds if s is not None],
        "rng": RNG_NAME if mesh_family.kind == "perturbed" else None,
        "quadrature": {"K": k_order, "load": load_order, "error": error_order},
        "truth": {"exact": "exact", "reference": f"reference delta/h={reference_ratio}",
                  "successive": "uniform solution at 2 delta/h"}[truth_mode],
        "solver": method,
        "tol": tol,
        "version": __version__,
    }

    if mesh_family.kind == "uniform":
        return StudyReport(per_seed[None], meta)

    seed_rows = [row for s in seeds for row in per_seed[s]]
    summary = []
    for k, r in enumerate(resolutions):
        col = [per_seed[s][k] for s in seeds]

        def med(name):
            vals = [getattr(c, name) for c in col if getattr(c, name) is not None]
            return float(np.median(vals)) if vals else None

        summary.append(StudyRow(r, med("h"), med("l2_error"), med("l2_rate"), med("h1_error"),
                                med("h1_rate"), med("cond"), int(np.median([c.cg_iters for c in col])),
                                "median", max(c.residual for c in col)))
    return StudyReport(summary, meta, seed_rows)


def jump_study(problem: ProblemSpec, x0: float, resolutions, mesh_family: MeshFamily | str = "uniform",
               seed: int | None = None, method: str = "cg", tol: float = 1e-12):
    """Slope jump of ``u_h`` at the node nearest ``x0`` on each mesh of the ladder.

    Returns a list of dicts with ``delta_over_h``, ``h``, ``jump`` and ``snap_distance``.
    """
    if isinstance(mesh_family, str):
        mesh_family = MeshFamily(mesh_family)
    out = []
    for r in resolutions:
        mesh = mesh_family.build(r, problem.delta, seed)
        u_h = solve_problem(problem, mesh, method, tol).solution
        _, dist = snap_to_node(mesh, x0)
        out.append({"delta_over_h": r, "h": mesh.h_max, "jump": derivative_jump(u_h, x0, mesh),
                    "snap_distance": dist})
    return out


def report_metadata_json(report: StudyReport) -> dict:
    meta = dict(report.metadata)
    meta["rows"] = [asdict(r) for r in report.rows]
    return meta


def empirical_rate(values, h_values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(h)``."""
    return float(np.polyfit(np.log(h_values), np.log(values), 1)[0])


__all__ = [
    "CSV_COLUMNS", "MeshFamily", "StudyError", "StudyReport", "StudyRow", "convergence_rates",
    "derivative_jump", "empirical_rate", "h1_seminorm_error", "jump_study", "l2_error", "run_study",
    "snap_to_node",
]
