"""End-to-end experiment runs: generate, obstruction checks, solve, verify.

Everything here is deterministic given the config seed: the generator, the
orbit pair samples and the net cloud are all derived from it, so rerunning
a config reproduces its reports byte for byte apart from the ``timing``
block, which holds wall-clock durations and is excluded from comparisons.
"""

from __future__ import annotations

import json
import time
from typing import Mapping

import numpy as np

from .cocycles import (GermObservable, coboundary_from, observable_from_record,
                       poo_check, random_germ_observable)
from .config import ExperimentConfig
from .dynamics import BaseSystem, system_from_config
from .germs import Germ
from .majorant import certify_kappa, check_majorant_domination, solve_G_scaled
from .series import series_space
from .solver import (CombinedSolution, MatrixPOOFailure, coefficient_seminorms,
                     data_poo_check, germ_solve, livsic_constant,
                     orbit_pair_sample, reduce_linear_part, verify_solution)

__all__ = [
    "generate_pair",
    "run_poo",
    "run_solve",
    "run_verify",
    "solution_to_record",
    "LoadedSolution",
    "solution_from_record",
    "canonical_json",
    "strip_timing",
]


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def strip_timing(report: Mapping) -> dict:
    """Copy of a report without its wall-clock block (for determinism diffs)."""
    return {k: v for k, v in report.items() if k != "timing"}


# ---------------------------------------------------------------------------
# generate


def generate_pair(config: ExperimentConfig) -> tuple[dict, dict]:
    """Seeded ground-truth observable and its coboundary, as file records.

    The observable's nonlinear coefficients vanish at the dense-orbit base
    point and its linear part is the identity unless a matrix coboundary is
    requested; the cocycle record embeds the observable under the
    ``coboundary`` kind, which is how the solver evaluates it.
    """
    system = config.build_system()
    rng = np.random.default_rng(config.seed)
    h_true = random_germ_observable(
        system, config.d, config.N, rng, rho=config.rho, window=config.window,
        max_freq=config.max_freq, n_modes=config.n_modes, alpha=config.alpha,
        matrix_linear=config.matrix_linear)
    f = coboundary_from(system, h_true)
    common = {
        "config": config.to_record(),
        "config_hash": config.config_hash(),
        "system": system.to_record(),
    }
    h_record = {"kind": "observable_file", **common, "observable": h_true.to_record()}
    f_record = {"kind": "cocycle_file", **common, "observable": f.to_record()}
    return h_record, f_record


def load_cocycle(record: Mapping) -> tuple[BaseSystem, GermObservable, ExperimentConfig]:
    system = system_from_config(record["system"])
    obs = observable_from_record(record["observable"], system)
    config = ExperimentConfig.from_mapping(
        {k: _flatten(v) for k, v in record["config"].items()})
    return system, obs, config


def _flatten(v) -> str:
    if isinstance(v, list):
        return " ".join(str(x) for row in v for x in (row if isinstance(row, list) else [row]))
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# ---------------------------------------------------------------------------
# obstruction check


def run_poo(system: BaseSystem, F: GermObservable,
            config: ExperimentConfig, kmax: int | None = None,
            tol: float | None = None) -> dict:
    t0 = time.perf_counter()
    report = poo_check(system, F, kmax or config.kmax, tol or config.poo_tol)
    return {
        "kind": "poo_report",
        "config": config.to_record(),
        "config_hash": config.config_hash(),
        "system": system.to_record(),
        "tol": report.tol,
        "kmax": report.kmax,
        "max_residual": report.max_residual,
        "passed": report.passed,
        "orbits": report.to_json_lines(),
        "timing": {"seconds": time.perf_counter() - t0},
    }


# ---------------------------------------------------------------------------
# solve


def run_solve(system: BaseSystem, F: GermObservable,
              config: ExperimentConfig) -> tuple[dict, CombinedSolution | None]:
    """The full solve pipeline; the report carries every check's outcome.

    Order: germ-level POO (abort on failure -- solving non-coboundaries is a
    diagnostic non-goal), linear-part reduction, degree-by-degree solve,
    on-orbit verification, per-cycle data obstruction, and the majorant
    domination of the empirical coefficient seminorms at the configured
    scale policy.
    """
    t0 = time.perf_counter()
    L, N, alpha = config.orbit_length, config.N, config.alpha
    timing: dict[str, float] = {}
    report: dict = {
        "kind": "solve_report",
        "config": config.to_record(),
        "config_hash": config.config_hash(),
        "system": system.to_record(),
        "d": F.dims,
        "N": N,
        "L": L,
        "alpha": alpha,
    }

    points = system.dense_orbit_prefix(L + 1)
    f_arrays = F.orbit_germ_arrays(system, points[:L], consecutive=True)
    timing["orbit_evaluation"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    poo = poo_check(system, F, config.kmax, config.poo_tol)
    timing["poo"] = time.perf_counter() - t1
    report["poo"] = {
        "max_residual": poo.max_residual,
        "passed": poo.passed,
        "tol": poo.tol,
        "kmax": poo.kmax,
        "orbits": len(poo.results),
    }
    if not poo.passed:
        report["poo"]["failures"] = [
            row for row in poo.to_json_lines() if not row["pass"]][:20]
        report["passed"] = False
        report["timing"] = timing
        return report, None

    t1 = time.perf_counter()
    try:
        reduction = reduce_linear_part(
            system, F, L, kmax=config.kmax, matrix_poo_tol=config.matrix_poo_tol,
            points=points, f_arrays=f_arrays)
    except MatrixPOOFailure as exc:
        report["linear_reduction"] = {"matrix_poo_residual": exc.residual,
                                      "passed": False}
        report["passed"] = False
        report["timing"] = timing
        return report, None
    timing["linear_reduction"] = time.perf_counter() - t1
    report["linear_reduction"] = {
        "trivial": reduction.trivial,
        "matrix_poo_residual": reduction.matrix_poo_residual,
        "max_product_norm": reduction.max_product_norm,
        "passed": True,
    }

    t1 = time.perf_counter()
    reduced_arrays = f_arrays if reduction.trivial else \
        reduction.reduced.orbit_germ_arrays(system, points[:L], consecutive=True)
    result = germ_solve(system, reduction.reduced, L, N, points=points[:L],
                        f_arrays=reduced_arrays)
    solution = CombinedSolution(reduction, result)
    timing["germ_solve"] = time.perf_counter() - t1
    report["degrees"] = {
        str(k): diag for k, diag in sorted(result.diagnostics.items())
    }

    t1 = time.perf_counter()
    verify = verify_solution(system, F, solution, tol=config.solve_tol,
                             f_arrays=f_arrays)
    timing["verify"] = time.perf_counter() - t1
    report["verify"] = {
        "max_residual": verify.max_residual,
        "worst_index": verify.worst_index,
        "n_samples": verify.n_samples,
        "tol": verify.tol,
        "passed": verify.passed,
    }

    t1 = time.perf_counter()
    data_poo = data_poo_check(system, F, config.kmax, N,
                              tol=config.data_poo_tol)
    timing["data_poo"] = time.perf_counter() - t1
    per_degree: dict[str, float] = {}
    for row in data_poo.rows:
        for k, v in row["residuals"].items():
            key = str(k)
            per_degree[key] = max(per_degree.get(key, 0.0), v)
    report["data_poo"] = {
        "max_residual": data_poo.max_residual,
        "max_linear_residual": max(
            (row["linear_residual"] for row in data_poo.rows), default=0.0),
        "per_degree": per_degree,
        "tol": data_poo.tol,
        "passed": data_poo.passed,
    }

    t1 = time.perf_counter()
    pair_rng = np.random.default_rng([config.seed, 101])
    pairs = orbit_pair_sample(system, points[:L], config.pair_count, pair_rng)
    seminorms = coefficient_seminorms(result, alpha, pairs)
    constants = livsic_constant(system, alpha, points[:L])
    space = series_space(F.dims, N)
    coeff_values = {
        (i, space.indices[pos]): reduced_arrays[:, i, pos]
        for pos in range(F.dims, space.size)
        for i in range(F.dims)
    }
    pair_dists = [system.dist(points[a], points[b]) for a, b in pairs]
    bounds = certify_kappa(coeff_values, pairs, pair_dists, alpha, K=constants.K)
    if config.S == "auto":
        scale = 4.0 * constants.K * bounds.kappa
        policy = "auto"
    else:
        scale = float(config.S)
        policy = "explicit"
    table = solve_G_scaled(scale, F.dims, N)
    domination = check_majorant_domination(seminorms, table, K=constants.K,
                                           kappa=bounds.kappa)
    timing["majorant"] = time.perf_counter() - t1
    report["holder"] = {
        "K": constants.K,
        "smoothing_term": constants.smoothing_term,
        "net_term": constants.net_term,
        "net_time": constants.net_time,
        "delta0": constants.delta0,
        "kappa": bounds.kappa,
        "kappa_exact": bounds.kappa_exact,
        "S": scale,
        "S_policy": policy,
    }
    report["seminorms"] = [
        {"component": i, "index": list(idx), "seminorm": est.seminorm,
         "sup": est.sup_norm}
        for (i, idx), est in sorted(seminorms.items())
    ]
    report["majorant"] = {
        "growth_rate": table.growth_rate,
        "max_imag": table.max_imag,
        "threshold": domination.threshold,
        "sup_growth_rate": domination.sup_growth_rate,
        "passed": domination.passed,
        "chain_passed": domination.chain_passed,
        "rows": domination.rows,
    }

    report["passed"] = bool(verify.passed and data_poo.passed
                            and domination.passed and domination.chain_passed)
    timing["total"] = time.perf_counter() - t0
    report["timing"] = timing
    return report, solution


# ---------------------------------------------------------------------------
# solution files and re-verification


def solution_to_record(solution: CombinedSolution) -> dict:
    result = solution.nonlinear
    rec = {
        "kind": "solution_file",
        "system": result.system.to_record(),
        "dims": result.d,
        "max_degree": result.N,
        "length": result.L,
        "coefficients": [
            {"component": i, "index": list(idx),
             "values": [[v.real, v.imag] for v in vals]}
            for (i, idx), vals in sorted(result.coefficients.items())
        ],
    }
    if not solution.reduction.trivial:
        h1 = solution.reduction.h1[: result.L]
        rec["h1"] = [[[[z.real, z.imag] for z in row] for row in mat]
                     for mat in h1]
    return rec


class LoadedSolution:
    """Solution reloaded from a file: enough surface for verification and
    extension queries (points, germ stack, nearest-point lookup)."""

    def __init__(self, system: BaseSystem, d: int, N: int, L: int,
                 coefficients: dict, h1: np.ndarray | None):
        self.system = system
        self.d = d
        self.N = N
        self.L = L
        self.points = system.dense_orbit_prefix(L)
        self.coefficients = coefficients
        self._h1 = h1
        self._space = series_space(d, N)
        self._stack: np.ndarray | None = None

    def germ_arrays(self) -> np.ndarray:
        if self._stack is None:
            stack = np.zeros((self.L, self.d, self._space.size),
                             dtype=np.complex128)
            stack[:, :, : self.d] = np.eye(self.d)
            for (i, idx), vals in self.coefficients.items():
                stack[:, i, self._space.position[idx]] = vals
            if self._h1 is not None:
                stack = np.einsum("nde,nes->nds", self._h1, stack)
            self._stack = stack
        return self._stack

    def germ_at_index(self, n: int) -> Germ:
        return Germ(self._space, self.germ_arrays()[n].copy(), validate=False)

    def nearest_index(self, x) -> tuple[int, float]:
        best, best_d = 0, float("inf")
        for n, p in enumerate(self.points):
            d = self.system.dist(p, x)
            if d < best_d:
                best, best_d = n, d
                if d == 0.0:
                    break
        return best, best_d

    def germ_at(self, x) -> Germ:
        n, _ = self.nearest_index(x)
        return self.germ_at_index(n)


def solution_from_record(rec: Mapping) -> LoadedSolution:
    system = system_from_config(rec["system"])
    coeffs = {
        (int(e["component"]), tuple(e["index"])):
            np.array([complex(a, b) for a, b in e["values"]])
        for e in rec["coefficients"]
    }
    h1 = None
    if "h1" in rec:
        h1 = np.array([[[complex(a, b) for a, b in row] for row in mat]
                       for mat in rec["h1"]])
    return LoadedSolution(system, int(rec["dims"]), int(rec["max_degree"]),
                          int(rec["length"]), coeffs, h1)


def run_verify(system: BaseSystem, F: GermObservable, solution,
               config: ExperimentConfig) -> dict:
    t0 = time.perf_counter()
    verify = verify_solution(system, F, solution, tol=config.solve_tol)
    return {
        "kind": "verify_report",
        "config": config.to_record(),
        "config_hash": config.config_hash(),
        "system": system.to_record(),
        "max_residual": verify.max_residual,
        "worst_index": verify.worst_index,
        "n_samples": verify.n_samples,
        "tol": verify.tol,
        "passed": verify.passed,
        "timing": {"seconds": time.perf_counter() - t0},
    }
