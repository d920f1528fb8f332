"""Majorant-series machinery bounding the solved coefficient seminorms.

The generating germ ``J_S`` has components ``z_i - sum_{1<|j|<=N} S^{|j|-1}
Z^j``; its compositional inverse ``G_S = Z + sum g^i_{S,j} Z^j`` has
coefficients satisfying the positive recursion
``g^i_{S,j*} = sum_{1<|j|} S^{|j|-1} P(j*, j){G_S}``, so every coefficient
is a positive real growing at most geometrically: ``g <= R(S)^{|j|-1}``
for the fitted rate ``R(S)``.

With a cocycle bound kappa (``||a^i_j|| <= kappa^{|j|}`` and the same for
the seminorms) and the solution-seminorm constant K of the scalar solver,
choosing the scale ``S >> 2 K kappa`` makes ``g^i_{S,j}`` dominate the
Hoelder seminorms of the solved coefficients ``h^i_j`` -- the package
default policy is ``S = 4 K kappa``.  Empirical seminorms are lower bounds
of the true ones, so a domination failure flags a bug rather than a theory
gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .germs import Germ, germ_invert
from .series import multiindex_count, series_space
from .solver import HolderEstimate

__all__ = [
    "MajorantTable",
    "build_J_scaled",
    "solve_G_scaled",
    "CocycleBounds",
    "certify_kappa",
    "DominationReport",
    "check_majorant_domination",
    "ReassemblyReport",
    "reassembly_check",
]


def build_J_scaled(S: float, d: int, N: int) -> Germ:
    """The scaled generating germ: component i is ``z_i - sum S^{|j|-1} Z^j``
    over all 1 < |j| <= N."""
    if S <= 0:
        raise ValueError(f"scale must be positive, got S={S}")
    space = series_space(d, N)
    comp = np.zeros((d, space.size), dtype=np.complex128)
    comp[:, :d] = np.eye(d)
    degs = space.degrees
    comp[:, d:] = -(float(S) ** (degs[d:] - 1.0))
    return Germ(space, comp, validate=False)


@dataclass
class MajorantTable:
    """Coefficients ``g^i_{S,j}`` of the inverse germ G_S, all positive reals.

    ``growth_rate`` is the fitted R(S) with ``g <= R(S)^{|j|-1}`` for every
    stored index (degree-1 entries are the identity and are not stored).
    ``max_imag`` records the largest imaginary residue of the inversion,
    which exact arithmetic would make zero.
    """

    S: float
    dims: int
    max_degree: int
    coefficients: dict[tuple[int, tuple[int, ...]], float]
    growth_rate: float
    max_imag: float

    def g(self, i: int, idx: Sequence[int]) -> float:
        return self.coefficients[(i, tuple(int(e) for e in idx))]

    def to_record(self) -> dict:
        return {
            "S": self.S,
            "dims": self.dims,
            "max_degree": self.max_degree,
            "growth_rate": self.growth_rate,
            "max_imag": self.max_imag,
            "coefficients": [
                {"component": i, "index": list(idx), "g": g}
                for (i, idx), g in sorted(self.coefficients.items())
            ],
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "MajorantTable":
        coeffs = {
            (int(e["component"]), tuple(e["index"])): float(e["g"])
            for e in rec["coefficients"]
        }
        return cls(S=float(rec["S"]), dims=int(rec["dims"]),
                   max_degree=int(rec["max_degree"]), coefficients=coeffs,
                   growth_rate=float(rec["growth_rate"]),
                   max_imag=float(rec["max_imag"]))


def solve_G_scaled(S: float, d: int, N: int) -> MajorantTable:
    """Invert J_S degree by degree and tabulate its positive coefficients.

    The inversion realizes the recursion ``g_{j*} = sum S^{|j|-1} P{G_S}``
    automatically; the growth rate is fitted as the largest
    ``g^{1/(|j|-1)}`` over stored entries.
    """
    g = germ_invert(build_J_scaled(S, d, N))
    space = g.space
    coeffs: dict[tuple[int, tuple[int, ...]], float] = {}
    max_imag = 0.0
    rate = 0.0
    for pos in range(d, space.size):
        idx = space.indices[pos]
        deg = sum(idx)
        for i in range(d):
            val = g.components[i, pos]
            max_imag = max(max_imag, abs(val.imag))
            coeffs[(i, idx)] = val.real
            rate = max(rate, val.real ** (1.0 / (deg - 1)))
    return MajorantTable(S=float(S), dims=d, max_degree=N, coefficients=coeffs,
                         growth_rate=rate, max_imag=max_imag)


# ---------------------------------------------------------------------------
# cocycle coefficient bounds


@dataclass
class CocycleBounds:
    """The certified kappa with ``||a^i_j||, [a^i_j]_alpha <= kappa^{|j|}``.

    ``kappa_exact`` is the smallest valid value on the sampled data
    (largest ``max(sup, seminorm)^{1/|j|}``); ``kappa`` rounds it up to the
    certification grid.  ``K`` carries the solution-seminorm constant the
    scale policy combines it with.
    """

    kappa: float
    kappa_exact: float
    K: float | None
    grid: float
    rows: list[dict] = field(default_factory=list)


def certify_kappa(coefficient_values: Mapping[tuple[int, tuple[int, ...]], np.ndarray],
                  pairs: Sequence[tuple[int, int]], pair_dists: Sequence[float],
                  alpha: float, K: float | None = None,
                  grid: float = 0.01) -> CocycleBounds:
    """Smallest grid kappa bounding sups and empirical seminorms of the
    nonlinear coefficient fields.

    ``coefficient_values[(i, j)]`` holds the field values over a fixed point
    sample; ``pairs`` index into that sample.  Degree-1 entries (the
    identity block of a reduced cocycle) are ignored.
    """
    if grid <= 0:
        raise ValueError(f"grid must be positive, got {grid}")
    worst = 0.0
    rows = []
    for (i, idx), vals in sorted(coefficient_values.items()):
        deg = sum(idx)
        if deg <= 1:
            continue
        vals = np.asarray(vals)
        sup = float(np.max(np.abs(vals))) if vals.size else 0.0
        semi = 0.0
        for (a, b), dd in zip(pairs, pair_dists):
            if dd == 0.0:
                raise ValueError("zero-distance pair in kappa certification")
            semi = max(semi, float(abs(vals[a] - vals[b])) / dd ** alpha)
        root = max(sup, semi) ** (1.0 / deg)
        worst = max(worst, root)
        rows.append({"component": i, "index": list(idx), "sup": sup,
                     "seminorm": semi, "root": root})
    kappa = max(grid, grid * math.ceil(worst / grid))
    return CocycleBounds(kappa=kappa, kappa_exact=worst, K=K, grid=grid,
                         rows=rows)


# ---------------------------------------------------------------------------
# domination of the solved coefficients


@dataclass
class DominationReport:
    S: float
    threshold: float  # the 2*K*kappa the scale must dominate
    rows: list[dict]
    chain_rows: list[dict]
    sup_growth_rate: float
    passed: bool
    chain_passed: bool


def check_majorant_domination(seminorms: Mapping[tuple[int, tuple[int, ...]], HolderEstimate],
                              table: MajorantTable, *,
                              K: float | None = None,
                              kappa: float | None = None) -> DominationReport:
    """Check ``[h^i_j]_emp <= g^i_{S,j}`` coefficient by coefficient.

    Also checks the vanishing-at-base chain ``||h||_emp <= [h]_emp`` (valid
    because every solved coefficient vanishes at x0 and the diameter is at
    most 1) and fits the exponential growth rate of the sups.  Failures are
    recorded per row, not raised.
    """
    rows = []
    chain_rows = []
    sup_rate = 0.0
    for (i, idx), est in sorted(seminorms.items()):
        deg = sum(idx)
        if deg <= 1:
            continue
        g = table.coefficients.get((i, tuple(idx)))
        if g is None:
            raise ValueError(f"majorant table lacks index {(i, idx)}")
        rows.append({"component": i, "index": list(idx), "degree": deg,
                     "h_seminorm": float(est.seminorm), "g": g,
                     "pass": bool(est.seminorm <= g)})
        chain_rows.append({"component": i, "index": list(idx),
                           "sup": float(est.sup_norm),
                           "seminorm": float(est.seminorm),
                           "pass": bool(est.sup_norm <= est.seminorm + 1e-15)})
        if est.sup_norm > 0 and deg >= 2:
            sup_rate = max(sup_rate, est.sup_norm ** (1.0 / (deg - 1)))
    threshold = 2.0 * K * kappa if (K is not None and kappa is not None) else 0.0
    return DominationReport(
        S=table.S, threshold=threshold, rows=rows, chain_rows=chain_rows,
        sup_growth_rate=sup_rate,
        passed=all(r["pass"] for r in rows),
        chain_passed=all(r["pass"] for r in chain_rows))


# ---------------------------------------------------------------------------
# reassembly of coefficient fields into a Hoelder germ map


@dataclass
class ReassemblyReport:
    C: float
    R: float
    delta: float
    alpha: float
    weight: float
    C_assembled: float
    decay_rows: list[dict]
    pair_rows: list[dict]
    decay_passed: bool
    pairs_passed: bool

    @property
    def passed(self) -> bool:
        return self.decay_passed and self.pairs_passed


def _weight_factor(d: int, delta: float) -> float:
    """``(sum_{s>=1} count(d, s) delta^{2s})^{1/2}``, summed to convergence."""
    total = 0.0
    s = 1
    while True:
        term = multiindex_count(d, s) * delta ** (2 * s)
        total += term
        s += 1
        if term < 1e-18 * max(total, 1.0) or s > 10_000:
            break
    return math.sqrt(total)


def reassembly_check(space, value_pairs: Sequence[tuple[np.ndarray, np.ndarray]],
                     pair_dists: Sequence[float], C: float, R: float,
                     delta: float, alpha: float) -> ReassemblyReport:
    """Verify that coefficientwise-Hoelder fields assemble to a Hoelder map
    into the shrunken polydisc.

    Each pair supplies the full coefficient arrays (d, M) of the observable
    at two base points.  The per-coefficient decay rows check
    ``|t_j(x) - t_j(y)| <= (C / R^{|j|}) dist^alpha``; the assembled rows
    check ``||Psi(x) - Psi(y)||_{2, delta R} <= C' dist^alpha`` with
    ``C' = sqrt(d) C (sum_s count(d, s) delta^{2s})^{1/2}``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if R <= 0 or C < 0:
        raise ValueError("need R > 0 and C >= 0")
    d = space.dims
    degs = space.degrees.astype(float)
    weight = _weight_factor(d, delta)
    c_assembled = math.sqrt(d) * C * weight
    decay_rows = []
    pair_rows = []
    w2 = (delta * R) ** (2.0 * degs)
    for (ax, ay), dd in zip(value_pairs, pair_dists):
        if dd == 0.0:
            raise ValueError("zero-distance pair in reassembly check")
        diff = np.abs(ax - ay)
        bound = (C / R ** degs) * dd ** alpha
        decay_rows.append({
            "dist": dd,
            "max_violation": float(np.max(diff - bound[None, :])),
            "pass": bool(np.all(diff <= bound[None, :] + 1e-15)),
        })
        lhs = math.sqrt(float(np.sum((diff ** 2) * w2[None, :])))
        rhs = c_assembled * dd ** alpha
        pair_rows.append({"dist": dd, "norm": lhs, "bound": rhs,
                          "pass": lhs <= rhs + 1e-15})
    return ReassemblyReport(
        C=C, R=R, delta=delta, alpha=alpha, weight=weight,
        C_assembled=c_assembled, decay_rows=decay_rows, pair_rows=pair_rows,
        decay_passed=all(r["pass"] for r in decay_rows),
        pairs_passed=all(r["pass"] for r in pair_rows))
