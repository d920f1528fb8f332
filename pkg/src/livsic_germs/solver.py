"""Orbit-summation solvers for cohomological equations over a dense orbit.

The scalar layer solves ``phi o T - phi = psi`` constructively: fix the
system's dense orbit base point x0, set ``phi(x0) = 0`` and
``phi(T^n x0) = sum_{j<n} psi(T^j x0)``.  When the periodic orbit
obstruction holds for psi, these partial sums inherit a Hoelder bound
with the constant

    K = max(4 c^alpha / (1 - e^{-lam alpha}),  N_net / delta0^alpha)

where (c, lam, delta0) are the system's closing constants and N_net is the
measured delta0-net time of the dense orbit (the two branches are the
shadowing case and the compactness case of the estimate).

The germ layer reduces the linear part first (a matrix cocycle solved by
orbit products, legitimate only when those products stay bounded -- the
unbounded case is rejected as unsupported), then solves degree by degree:
with the coefficients below degree k already known, the conjugated cocycle

    Ftilde_k(x) = H_{<k}(Tx)^{-1} o F(x) o H_{<k}(x)

is the identity below degree k and its degree-k coefficients are exactly
the scalar data R^i_j for the next family of cohomological equations; each
equation is solved by the scalar layer with normalization h(x0) = 0.
(The orientation matches the cohomological form ``F(x) o H(x) = H(Tx)``:
conjugating by the true solution trivializes the cocycle.)

The data inherit the obstruction: along any periodic cycle the conjugation
telescopes, so ``sum_v R^i_j(T^v p) = 0`` whenever the cocycle product at p
is the identity.  :func:`data_poo_check` verifies this per cycle, rebuilding
H locally on the cycle by the same recursion; this keeps the check at
float-roundoff scale instead of polluting it with the off-orbit extension
error of the dense-orbit solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .cocycles import GermObservable
from .dynamics import BaseSystem, FullShift, ToralAutomorphism, TorusPoint
from .germs import (Germ, compose_batch, germ_compose, identity_batch,
                    invert_batch, max_coefficient_difference)
from .series import series_space

__all__ = [
    "OrbitTable",
    "scalar_solve",
    "HolderEstimate",
    "holder_seminorm_empirical",
    "orbit_pair_sample",
    "LivsicConstants",
    "OrbitNotDenseError",
    "net_cloud",
    "livsic_constant",
    "MatrixPOOFailure",
    "UnsupportedLinearCocycle",
    "LinearReduction",
    "reduce_linear_part",
    "GermSolveResult",
    "germ_solve",
    "CombinedSolution",
    "DataPOOReport",
    "data_poo_check",
    "VerifyReport",
    "verify_solution",
    "extension_residual_report",
    "coefficient_seminorms",
]


# ---------------------------------------------------------------------------
# scalar solver


class OrbitTable:
    """Values of one solved function along the dense-orbit prefix.

    ``values[n]`` is the solution at ``T^n x0`` with ``values[0] = 0``.
    Off-orbit queries return the value at the nearest tabulated point; the
    approximation error is bounded by ``[phi]_alpha * dist^alpha``.
    """

    def __init__(self, system: BaseSystem, points: Sequence,
                 values: np.ndarray):
        if len(points) != len(values):
            raise ValueError("points and values must have equal length")
        if not points:
            raise ValueError("an orbit table needs at least one point")
        self.system = system
        self.points = list(points)
        self.values = np.asarray(values, dtype=np.complex128)

    @property
    def length(self) -> int:
        return len(self.points)

    @property
    def base_point(self):
        return self.points[0]

    def nearest_index(self, x) -> tuple[int, float]:
        """Index of the nearest orbit point and its distance (ties -> lowest n)."""
        best, best_d = 0, math.inf
        for n, p in enumerate(self.points):
            d = self.system.dist(p, x)
            if d < best_d:
                best, best_d = n, d
                if d == 0.0:
                    break
        return best, best_d

    def extend(self, x) -> complex:
        n, _ = self.nearest_index(x)
        return complex(self.values[n])

    def extend_detailed(self, x, seminorm: float | None = None,
                        alpha: float = 1.0) -> dict:
        n, d = self.nearest_index(x)
        out = {"value": complex(self.values[n]), "index": n, "distance": d}
        if seminorm is not None:
            out["error_bound"] = seminorm * d ** alpha
        return out

    def save(self, path) -> None:
        import json

        rec = {
            "system": self.system.to_record(),
            "length": self.length,
            "values": [[v.real, v.imag] for v in self.values],
        }
        with open(path, "w") as fh:
            json.dump(rec, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "OrbitTable":
        """Rebuilds the table on the system's dense orbit (the only orbit
        tables this package persists)."""
        import json

        from .dynamics import system_from_config

        with open(path) as fh:
            rec = json.load(fh)
        system = system_from_config(rec["system"])
        values = np.array([complex(a, b) for a, b in rec["values"]])
        points = system.dense_orbit_prefix(rec["length"])
        return cls(system, points, values)


def scalar_solve(system: BaseSystem, psi: Callable, L: int) -> OrbitTable:
    """Partial sums of psi along the dense orbit: the orbit solution of
    ``phi o T - phi = psi`` normalized by ``phi(x0) = 0``.

    The caller certifies the periodic orbit obstruction separately; without
    it the table still telescopes exactly but drifts unboundedly.
    """
    if L < 2:
        raise ValueError(f"orbit length must be >= 2, got {L}")
    points = system.dense_orbit_prefix(L)
    steps = np.fromiter((complex(psi(points[n])) for n in range(L - 1)),
                        dtype=np.complex128, count=L - 1)
    values = np.concatenate([[0.0 + 0.0j], np.cumsum(steps)])
    return OrbitTable(system, points, values)


# ---------------------------------------------------------------------------
# empirical Hoelder estimates


@dataclass(frozen=True)
class HolderEstimate:
    """A Hoelder seminorm figure: declared bound or empirical lower bound."""

    alpha: float
    seminorm: float
    sup_norm: float
    method: str  # "declared" | "empirical"


def holder_seminorm_empirical(f: Callable, alpha: float,
                              pairs: Sequence[tuple], dist: Callable) -> HolderEstimate:
    """Max of ``|f(x) - f(y)| / dist(x, y)^alpha`` over the sampled pairs.

    A lower bound on the true seminorm, monotone in the sample set.
    Zero-distance pairs are rejected.
    """
    if not pairs:
        raise ValueError("need at least one sample pair")
    best = 0.0
    sup = 0.0
    for x, y in pairs:
        d = dist(x, y)
        if d == 0.0:
            raise ValueError("zero-distance pair in Hoelder sample")
        fx, fy = complex(f(x)), complex(f(y))
        best = max(best, abs(fx - fy) / d ** alpha)
        sup = max(sup, abs(fx), abs(fy))
    return HolderEstimate(alpha=alpha, seminorm=best, sup_norm=sup,
                          method="empirical")


def orbit_pair_sample(system: BaseSystem, points: Sequence, count: int,
                      rng: np.random.Generator,
                      include_base: bool = True) -> list[tuple[int, int]]:
    """Deterministic sample of index pairs with nonzero distance.

    With ``include_base`` every sampled index is also paired with index 0,
    which makes ``sup |f| <= [f]_emp`` automatic for functions vanishing at
    the base point (the diameter is at most 1).
    """
    L = len(points)
    pairs: list[tuple[int, int]] = []
    seen = set()

    def push(a: int, b: int):
        if a == b or (a, b) in seen:
            return
        if system.dist(points[a], points[b]) == 0.0:
            return
        seen.add((a, b))
        pairs.append((a, b))

    attempts = 0
    while len(pairs) < count and attempts < 50 * count + 1000:
        attempts += 1
        a, b = int(rng.integers(L)), int(rng.integers(L))
        before = len(pairs)
        push(a, b)
        if include_base and len(pairs) > before:
            push(a, 0)
            push(b, 0)
    if not pairs:
        raise ValueError("could not sample any positive-distance orbit pair")
    return pairs


# ---------------------------------------------------------------------------
# the solution-seminorm constant


class OrbitNotDenseError(ValueError):
    """The dense-orbit prefix never became delta0-dense against the net cloud."""


@dataclass(frozen=True)
class LivsicConstants:
    """The constant K in ``[phi]_alpha <= K ([psi]_alpha + ||psi||)``.

    ``smoothing_term`` is the shadowing branch ``4 c^alpha/(1-e^{-lam alpha})``
    and ``net_term`` the compactness branch ``N_net / delta0^alpha``; K is
    their maximum.  K depends only on the system, alpha and the orbit.
    """

    K: float
    smoothing_term: float
    net_term: float
    net_time: int
    delta0: float
    alpha: float


def net_cloud(system: BaseSystem) -> list:
    """Fixed sample cloud whose delta0-coverage certifies delta0-density.

    Shift: one periodic point per central word of half-width h, aligned so
    the word sits at indices -h..h, with ``2^{-(h+1)} <= delta0``; any point
    of the shift lies within delta0 of the cloud point showing its central
    word.  Torus: the uniform rational grid with spacing fine enough that
    the covering radius ``sqrt(2)/(2g)`` is below delta0.
    """
    cc = system.closing_constants()
    if isinstance(system, FullShift):
        h = max(0, math.ceil(-math.log2(cc.delta0)) - 1)
        return [system.periodic_point(w).shifted(h)
                for w in _all_words(system.alphabet_size, 2 * h + 1)]
    if isinstance(system, ToralAutomorphism):
        g = max(2, math.ceil(math.sqrt(2.0) / (2.0 * cc.delta0)))
        return [TorusPoint((a / g, b / g)) for a in range(g) for b in range(g)]
    raise TypeError(f"no net cloud rule for {type(system).__name__}")


def _all_words(m: int, length: int) -> list[tuple[int, ...]]:
    words = [()]
    for _ in range(length):
        words = [w + (s,) for w in words for s in range(m)]
    return words


def livsic_constant(system: BaseSystem, alpha: float, orbit_points: Sequence,
                    cloud: Sequence | None = None) -> LivsicConstants:
    """K from the closing constants plus the measured net time of the orbit.

    ``net_time`` is the first n such that every cloud point lies within
    delta0 of ``{x0, ..., T^n x0}``; the orbit must reach it within its
    length.  K is independent of the data being solved.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    cc = system.closing_constants()
    if cloud is None:
        cloud = net_cloud(system)
    remaining = list(range(len(cloud)))
    net_time = None
    for n, p in enumerate(orbit_points):
        remaining = [t for t in remaining
                     if system.dist(cloud[t], p) > cc.delta0]
        if not remaining:
            net_time = n
            break
    if net_time is None:
        raise OrbitNotDenseError(
            f"orbit of length {len(orbit_points)} is not delta0-dense "
            f"({len(remaining)} of {len(cloud)} cloud points uncovered)")
    smoothing = 4.0 * cc.c ** alpha / (1.0 - math.exp(-cc.lam * alpha))
    net = net_time / cc.delta0 ** alpha
    return LivsicConstants(K=max(smoothing, net), smoothing_term=smoothing,
                           net_term=net, net_time=net_time, delta0=cc.delta0,
                           alpha=alpha)


# ---------------------------------------------------------------------------
# linear-part reduction


class MatrixPOOFailure(RuntimeError):
    """The linear-part matrix cocycle violates the periodic orbit obstruction."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class UnsupportedLinearCocycle(RuntimeError):
    """Linear-part orbit products grow beyond the bound: outside the
    bounded-product regime this solver supports."""


@dataclass
class LinearReduction:
    """Result of the linear-part reduction.

    ``h1`` holds the cumulative orbit products ``A1(n, x0)`` (shape
    (L+1, d, d), ``h1[0] = I``); ``reduced`` is the conjugated cocycle with
    identity linear part along the orbit.
    """

    system: BaseSystem
    points: list
    h1: np.ndarray
    reduced: GermObservable
    matrix_poo_residual: float
    max_product_norm: float
    trivial: bool


class _LinearConjugateObservable(GermObservable):
    """``x -> H1(Tx)^{-1} F(x) H1(x)`` with H1 tabulated on the orbit and
    extended by nearest orbit point off it."""

    def __init__(self, system: BaseSystem, base: GermObservable, points: list,
                 h1: np.ndarray, f_arrays: np.ndarray):
        self.system = system
        self.base = base
        self.dims = base.dims
        self.max_degree = base.max_degree
        self.alpha = base.alpha
        self.points = points
        self.h1 = h1
        self.h1_inv = np.linalg.inv(h1)
        self._f_arrays = f_arrays
        self._space = series_space(self.dims, self.max_degree)

    def _nearest(self, x) -> int:
        # restrict to indices where both h1[n] and h1[n+1] are tabulated
        best, best_d = 0, math.inf
        for n in range(len(self._f_arrays)):
            d = self.system.dist(self.points[n], x)
            if d < best_d:
                best, best_d = n, d
                if d == 0.0:
                    break
        return best

    def _conjugate(self, f_arr: np.ndarray, n: int) -> np.ndarray:
        lin = identity_batch(1, self._space)
        lin[0, :, : self.dims] = self.h1[n]
        inner = compose_batch(f_arr[None, :, :], lin, self._space)[0]
        return self.h1_inv[n + 1] @ inner

    def germ_at(self, x) -> Germ:
        n = self._nearest(x)
        return Germ(self._space, self._conjugate(self._f_arrays[n], n),
                    validate=False)

    def orbit_germ_arrays(self, system: BaseSystem, points: Sequence,
                          consecutive: bool = False) -> np.ndarray:
        if points is self.points or (len(points) <= len(self._f_arrays)
                                     and all(a is b for a, b in
                                             zip(points, self.points))):
            n = len(points)
            lin = identity_batch(n, self._space)
            lin[:, :, : self.dims] = self.h1[:n]
            inner = compose_batch(self._f_arrays[:n], lin, self._space)
            return np.einsum("nde,nes->nds", self.h1_inv[1: n + 1], inner)
        return super().orbit_germ_arrays(system, points, consecutive)


def _orbit_f_arrays(system: BaseSystem, F: GermObservable,
                    points: Sequence) -> np.ndarray:
    return F.orbit_germ_arrays(system, points, consecutive=True)


def reduce_linear_part(system: BaseSystem, F: GermObservable, L: int, *,
                       kmax: int = 6, matrix_poo_tol: float = 1e-8,
                       product_bound: float = 1e6,
                       points: list | None = None,
                       f_arrays: np.ndarray | None = None) -> LinearReduction:
    """Conjugate F by the linear cocycle solution so its linear part is I.

    The matrix cocycle ``A1 = linear part of F`` must satisfy the matrix
    periodic orbit obstruction (checked up to ``kmax``); its orbit products
    ``A1(n, x0)`` build the solution ``H1`` by telescoping and must stay
    below ``product_bound`` -- unbounded products mean a nontrivial Lyapunov
    spectrum, which is outside the supported regime and raises
    :class:`UnsupportedLinearCocycle`.
    """
    d = F.dims
    if points is None:
        points = system.dense_orbit_prefix(L + 1)
    if f_arrays is None:
        f_arrays = _orbit_f_arrays(system, F, points[:L])
    lins = f_arrays[:, :, :d]
    dev = float(np.max(np.abs(lins - np.eye(d)))) if L else 0.0
    if dev <= 1e-12:
        h1 = np.broadcast_to(np.eye(d, dtype=np.complex128), (L + 1, d, d)).copy()
        return LinearReduction(system=system, points=points, h1=h1, reduced=F,
                               matrix_poo_residual=0.0, max_product_norm=1.0,
                               trivial=True)

    worst = 0.0
    for k in range(1, kmax + 1):
        for p in system.periodic_points(k):
            prod = np.eye(d, dtype=np.complex128)
            x = p
            for _ in range(k):
                prod = F.germ_at(x).linear_part @ prod
                x = system.step(x)
            worst = max(worst, float(np.max(np.abs(prod - np.eye(d)))))
    if worst > matrix_poo_tol:
        raise MatrixPOOFailure(
            f"linear-part cocycle violates the matrix POO "
            f"(residual {worst:.3e} > tol {matrix_poo_tol:.1e})", worst)

    h1 = np.empty((L + 1, d, d), dtype=np.complex128)
    h1[0] = np.eye(d)
    max_norm = 1.0
    for n in range(L):
        h1[n + 1] = lins[n] @ h1[n]
        max_norm = max(max_norm, float(np.max(np.abs(h1[n + 1]))))
        if max_norm > product_bound:
            raise UnsupportedLinearCocycle(
                f"linear orbit products exceed {product_bound:.1e} by step "
                f"{n + 1}: general matrix cocycles with nontrivial Lyapunov "
                f"spectrum are not supported")
    reduced = _LinearConjugateObservable(system, F, points, h1, f_arrays)
    return LinearReduction(system=system, points=points, h1=h1, reduced=reduced,
                           matrix_poo_residual=worst, max_product_norm=max_norm,
                           trivial=False)


# ---------------------------------------------------------------------------
# degree-by-degree germ solver


@dataclass
class GermSolveResult:
    """Solved coefficient tables ``h^i_j`` on the orbit, identity linear part.

    ``coefficients[(i, j)][n]`` is the coefficient at multi-index j of
    component i of H(T^n x0); each vanishes at n = 0.  ``diagnostics[k]``
    records, per degree, the sup of the scalar data and the deviation of the
    conjugated cocycle below its active degree (which exact arithmetic would
    make zero).
    """

    system: BaseSystem
    d: int
    N: int
    L: int
    points: list
    coefficients: dict[tuple[int, tuple[int, ...]], np.ndarray]
    diagnostics: dict[int, dict]
    f_arrays: np.ndarray

    def __post_init__(self):
        self._space = series_space(self.d, self.N)
        self._germ_stack: np.ndarray | None = None

    def germ_arrays(self) -> np.ndarray:
        """H along the orbit as a (L, d, M) stack (identity linear part)."""
        if self._germ_stack is None:
            stack = identity_batch(self.L, self._space)
            for (i, idx), vals in self.coefficients.items():
                stack[:, i, self._space.position[idx]] = vals
            self._germ_stack = stack
        return self._germ_stack

    def germ_at_index(self, n: int) -> Germ:
        return Germ(self._space, self.germ_arrays()[n].copy(), validate=False)

    def nearest_index(self, x) -> tuple[int, float]:
        best, best_d = 0, math.inf
        for n, p in enumerate(self.points):
            dd = self.system.dist(p, x)
            if dd < best_d:
                best, best_d = n, dd
                if dd == 0.0:
                    break
        return best, best_d

    def germ_at(self, x) -> Germ:
        n, _ = self.nearest_index(x)
        return self.germ_at_index(n)

    def coefficient_table(self, i: int, idx: tuple[int, ...]) -> OrbitTable:
        return OrbitTable(self.system, self.points,
                          self.coefficients[(i, tuple(idx))])

    def save(self, path) -> None:
        import json

        rec = {
            "system": self.system.to_record(),
            "dims": self.d,
            "max_degree": self.N,
            "length": self.L,
            "coefficients": [
                {"component": i, "index": list(idx),
                 "values": [[v.real, v.imag] for v in vals]}
                for (i, idx), vals in sorted(self.coefficients.items())
            ],
        }
        with open(path, "w") as fh:
            json.dump(rec, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "GermSolveResult":
        import json

        from .dynamics import system_from_config

        with open(path) as fh:
            rec = json.load(fh)
        system = system_from_config(rec["system"])
        L = int(rec["length"])
        coeffs = {
            (int(e["component"]), tuple(e["index"])):
                np.array([complex(a, b) for a, b in e["values"]])
            for e in rec["coefficients"]
        }
        d, N = int(rec["dims"]), int(rec["max_degree"])
        return cls(system=system, d=d, N=N, L=L,
                   points=system.dense_orbit_prefix(L), coefficients=coeffs,
                   diagnostics={}, f_arrays=np.zeros((0, d, series_space(d, N).size)))


def germ_solve(system: BaseSystem, F: GermObservable, L: int,
               N: int | None = None, *, points: list | None = None,
               f_arrays: np.ndarray | None = None,
               identity_tol: float = 1e-8,
               coefficient_order: str = "canonical") -> GermSolveResult:
    """Degree-by-degree solution of ``F(x) o H(x) = H(Tx)`` on the orbit.

    Requires the linear part of F to be the identity along the orbit (run
    :func:`reduce_linear_part` first).  For each degree k = 2..N the
    conjugated cocycle ``H_{<k}(Tx)^{-1} o F(x) o H_{<k}(x)`` is formed at
    the orbit points truncated at degree k; its degree-k coefficients are
    the data of the scalar equations, each solved by partial sums with
    ``h(x0) = 0``.  Within one degree the solves are independent;
    ``coefficient_order`` only permutes their bookkeeping order.
    """
    d, N = F.dims, N or F.max_degree
    if N > F.max_degree:
        raise ValueError(f"cannot solve to degree {N} > observable degree {F.max_degree}")
    if L < 2:
        raise ValueError(f"orbit length must be >= 2, got {L}")
    space = series_space(d, N)
    if points is None:
        points = system.dense_orbit_prefix(L)
    if f_arrays is None:
        f_arrays = _orbit_f_arrays(system, F, points[:L])
    if f_arrays.shape[2] != space.size:
        f_arrays = f_arrays[:, :, : space.size]
    lin_dev = float(np.max(np.abs(f_arrays[:, :, :d] - np.eye(d))))
    if lin_dev > identity_tol:
        raise ValueError(
            f"linear part deviates from the identity by {lin_dev:.3e}; "
            f"reduce the linear part before solving")

    coeffs: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}
    diagnostics: dict[int, dict] = {}
    h_stack = identity_batch(L, space)
    ident = identity_batch(1, space)[0]
    for k in range(2, N + 1):
        h_next_inv = invert_batch(h_stack[1:L], space, up_to=k)
        t1 = compose_batch(f_arrays[: L - 1], h_stack[: L - 1], space, up_to=k)
        t2 = compose_batch(h_next_inv, t1, space, up_to=k)
        below = space.upto_end(k - 1)
        sub_dev = float(np.max(np.abs(t2[:, :, :below] - ident[:, :below])))
        sl = space.degree_slice(k)
        data = t2[:, :, sl]
        indices = list(enumerate((space.indices[p] for p in range(sl.start, sl.stop))))
        order = list(range(len(indices)))
        if coefficient_order == "reversed":
            order = order[::-1]
        elif coefficient_order != "canonical":
            raise ValueError(f"unknown coefficient order {coefficient_order!r}")
        for t in order:
            col, idx = indices[t]
            for i in range(d):
                vals = np.concatenate([[0.0 + 0.0j], np.cumsum(data[:, i, col])])
                coeffs[(i, idx)] = vals
                h_stack[:, i, sl.start + col] = vals
        diagnostics[k] = {
            "data_sup": float(np.max(np.abs(data))) if data.size else 0.0,
            "sub_degree_deviation": sub_dev,
            "n_coefficients": d * len(indices),
        }
    return GermSolveResult(system=system, d=d, N=N, L=L, points=points,
                           coefficients=coeffs, diagnostics=diagnostics,
                           f_arrays=f_arrays)


@dataclass
class CombinedSolution:
    """Full solution ``H(x) = H1(x) o H_nl(x)``: the linear cocycle solution
    composed (as outer linear germ) with the identity-linear germ solution."""

    reduction: LinearReduction
    nonlinear: GermSolveResult

    def __post_init__(self):
        self._stack: np.ndarray | None = None

    @property
    def system(self) -> BaseSystem:
        return self.nonlinear.system

    @property
    def points(self) -> list:
        return self.nonlinear.points

    @property
    def N(self) -> int:
        return self.nonlinear.N

    def germ_arrays(self) -> np.ndarray:
        if self._stack is None:
            base = self.nonlinear.germ_arrays()
            h1 = self.reduction.h1[: len(base)]
            self._stack = np.einsum("nde,nes->nds", h1, base)
        return self._stack

    def germ_at_index(self, n: int) -> Germ:
        space = series_space(self.nonlinear.d, self.N)
        return Germ(space, self.germ_arrays()[n].copy(), validate=False)

    def nearest_index(self, x) -> tuple[int, float]:
        return self.nonlinear.nearest_index(x)

    def germ_at(self, x) -> Germ:
        n, _ = self.nearest_index(x)
        return self.germ_at_index(n)


# ---------------------------------------------------------------------------
# data-level periodic orbit obstruction


@dataclass
class DataPOOReport:
    tol: float
    kmax: int
    rows: list[dict] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max((r["max_residual"] for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)


def data_poo_check(system: BaseSystem, F: GermObservable, kmax: int,
                   N: int | None = None, tol: float = 1e-9) -> DataPOOReport:
    """Verify ``sum_v R^i_j(T^v p) = 0`` on every periodic cycle, per degree.

    The recursion is rebuilt locally on each cycle: the linear part is
    reduced by the cycle's own matrix products (its wrap-around defect is the
    reported ``linear_residual``) and the degree-k data are read from the
    conjugated cocycle with an H assembled from the cycle's own partial
    sums.  No off-orbit extension enters, so the residual of a true
    coboundary stays at float roundoff.
    """
    d, N = F.dims, N or F.max_degree
    space = series_space(d, N)
    report = DataPOOReport(tol=tol, kmax=kmax)
    for kp in range(1, kmax + 1):
        for p in system.periodic_points(kp):
            cycle = system.orbit_segment(p, kp)
            f_arr = F.orbit_germ_arrays(system, cycle, consecutive=True)
            if f_arr.shape[2] != space.size:
                f_arr = f_arr[:, :, : space.size]
            # cycle-local linear reduction: h1[v] = A1(v, p), h1[0] = I
            h1 = np.empty((kp + 1, d, d), dtype=np.complex128)
            h1[0] = np.eye(d)
            for v in range(kp):
                h1[v + 1] = f_arr[v, :, :d] @ h1[v]
            linear_residual = float(np.max(np.abs(h1[kp] - np.eye(d))))
            lin_germs = identity_batch(kp, space)
            lin_germs[:, :, :d] = h1[:kp]
            inner = compose_batch(f_arr, lin_germs, space)
            h1_next_inv = np.linalg.inv(np.concatenate([h1[1:kp], h1[:1]]))
            f_red = np.einsum("nde,nes->nds", h1_next_inv, inner)
            h_loc = identity_batch(kp, space)
            residuals = {}
            for k in range(2, N + 1):
                h_next = np.roll(h_loc, -1, axis=0)
                t1 = compose_batch(f_red, h_loc, space, up_to=k)
                t2 = compose_batch(invert_batch(h_next, space, up_to=k), t1,
                                   space, up_to=k)
                sl = space.degree_slice(k)
                data = t2[:, :, sl]
                sums = np.sum(data, axis=0)
                residuals[k] = float(np.max(np.abs(sums))) if sums.size else 0.0
                partial = np.concatenate(
                    [np.zeros((1, d, sl.stop - sl.start), dtype=np.complex128),
                     np.cumsum(data[:-1], axis=0)])
                h_loc[:, :, sl] = partial
            worst = max(residuals.values(), default=0.0)
            report.rows.append({
                "period": kp,
                "representative": system.point_record(p),
                "linear_residual": linear_residual,
                "residuals": residuals,
                "max_residual": worst,
                "pass": worst <= tol,
            })
    return report


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerifyReport:
    tol: float
    n_samples: int
    max_residual: float
    worst_index: int
    passed: bool
    rows: list[dict] = field(default_factory=list)


def verify_solution(system: BaseSystem, F: GermObservable, solution, *,
                    tol: float = 1e-8, f_arrays: np.ndarray | None = None,
                    sample_indices: Sequence[int] | None = None,
                    keep_rows: bool = False) -> VerifyReport:
    """Residual of ``F(x) o H(x) - H(Tx)`` at orbit points.

    ``solution`` provides ``points`` and ``germ_arrays()`` (a
    :class:`GermSolveResult` or a combined solution); the residual at index
    n is the largest coefficient deviation.
    """
    points = solution.points
    L = len(points)
    space = series_space(F.dims, solution.N)
    h_stack = solution.germ_arrays()
    if f_arrays is None:
        f_arrays = F.orbit_germ_arrays(system, points[: L - 1], consecutive=True)
    if f_arrays.shape[2] != space.size:
        f_arrays = f_arrays[:, :, : space.size]
    idx = np.arange(L - 1) if sample_indices is None else np.asarray(sample_indices)
    lhs = compose_batch(f_arrays[idx], h_stack[idx], space)
    res = np.max(np.abs(lhs - h_stack[idx + 1]), axis=(1, 2))
    worst = int(np.argmax(res)) if len(res) else 0
    rows = []
    if keep_rows:
        rows = [{"index": int(n), "residual": float(r)}
                for n, r in zip(idx, res)]
    max_res = float(res[worst]) if len(res) else 0.0
    return VerifyReport(tol=tol, n_samples=len(idx), max_residual=max_res,
                        worst_index=int(idx[worst]) if len(res) else 0,
                        passed=max_res <= tol, rows=rows)


def extension_residual_report(system: BaseSystem, F: GermObservable, solution,
                              sample_points: Sequence, alpha: float,
                              seminorms: Mapping[tuple, HolderEstimate]) -> list[dict]:
    """Residuals at off-orbit points against the Hoelder-extension budget.

    H is extended by nearest orbit point, so at x the equation can miss by
    the extension error at Tx plus the composed image of the error at x:
    the budget is ``e(Tx) + Lip * e(x)`` with ``e(z) = max_j [h_j] *
    dist(z, orbit)^alpha`` and ``Lip`` the coarse coefficient-Lipschitz bound
    ``sum_j |a_j| |j| (1 + sum|h|)^{|j|-1}`` of composition with F.
    """
    space = series_space(F.dims, solution.N)
    degrees = space.degrees.astype(float)
    worst_semi = max((e.seminorm for e in seminorms.values()), default=0.0)
    rows = []
    for x in sample_points:
        n_x, d_x = solution.nearest_index(x)
        tx = system.step(x)
        n_tx, d_tx = solution.nearest_index(tx)
        f_germ = F.germ_at(x)
        if f_germ.max_degree != solution.N:
            f_germ = f_germ.truncate(solution.N)
        h_x = solution.germ_at_index(n_x)
        h_tx = solution.germ_at_index(n_tx)
        residual = max_coefficient_difference(germ_compose(f_germ, h_x), h_tx)
        h_mass = float(np.max(np.sum(np.abs(h_x.components), axis=1)))
        lip = float(np.sum(np.abs(f_germ.components) * degrees[None, :]
                           * (1.0 + h_mass) ** (degrees[None, :] - 1.0)))
        bound = worst_semi * (d_tx ** alpha + max(lip, 1.0) * d_x ** alpha)
        rows.append({"distance_x": d_x, "distance_Tx": d_tx,
                     "residual": residual, "bound": bound,
                     "within_bound": residual <= bound + 1e-12})
    return rows


def coefficient_seminorms(result: GermSolveResult, alpha: float,
                          pair_indices: Sequence[tuple[int, int]]) -> dict:
    """Empirical Hoelder data of every solved coefficient over orbit pairs."""
    dists = {}
    for a, b in pair_indices:
        if (a, b) not in dists:
            dists[(a, b)] = result.system.dist(result.points[a], result.points[b])
    out = {}
    for key, vals in result.coefficients.items():
        semi = 0.0
        sup = 0.0
        for (a, b), dd in dists.items():
            semi = max(semi, float(abs(vals[a] - vals[b])) / dd ** alpha)
            sup = max(sup, float(abs(vals[a])), float(abs(vals[b])))
        out[key] = HolderEstimate(alpha=alpha, seminorm=semi, sup_norm=sup,
                                  method="empirical")
    return out
