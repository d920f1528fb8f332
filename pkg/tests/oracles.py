"""Independent brute-force oracles for the test suite.

Everything here works on plain dicts and Python ints/complex so the oracles
share no code path with the package's vectorized implementations.
"""

from __future__ import annotations

import itertools

import numpy as np

from livsic_germs.germs import Germ
from livsic_germs.series import TruncatedSeries, series_space


def brute_multiindices(d: int, s: int) -> set[tuple[int, ...]]:
    return {j for j in itertools.product(range(s + 1), repeat=d) if sum(j) == s}


def dict_multiply(a: dict, b: dict, N: int) -> dict:
    """Truncated polynomial product of {multi-index: coeff} dicts."""
    out: dict[tuple[int, ...], complex] = {}
    for ja, ca in a.items():
        for jb, cb in b.items():
            jc = tuple(x + y for x, y in zip(ja, jb))
            if sum(jc) > N:
                continue
            out[jc] = out.get(jc, 0.0) + ca * cb
    return out


def dict_power(base: dict, exponent: int, N: int, d: int) -> dict:
    out = {tuple(0 for _ in range(d)): 1.0 + 0.0j}
    for _ in range(exponent):
        out = dict_multiply(out, base, N)
    return out


def series_to_dict(series: TruncatedSeries) -> dict:
    return {idx: c for idx, c in series.items()}


def dict_compose(outer: list[dict], inner: list[dict], d: int, N: int) -> list[dict]:
    """Monomial-by-monomial substitution of inner into outer, truncated."""
    results = []
    for comp in outer:
        acc: dict[tuple[int, ...], complex] = {}
        for j, coeff in comp.items():
            mono = {tuple(0 for _ in range(d)): 1.0 + 0.0j}
            for var, exp in enumerate(j):
                if exp:
                    mono = dict_multiply(mono, dict_power(inner[var], exp, N, d), N)
            for jc, c in mono.items():
                if 0 < sum(jc) <= N:
                    acc[jc] = acc.get(jc, 0.0) + coeff * c
        results.append(acc)
    return results


def germ_to_dicts(g: Germ) -> list[dict]:
    return [series_to_dict(g.component(i)) for i in range(g.dims)]


def dicts_to_germ(comps: list[dict], d: int, N: int) -> Germ:
    terms = {}
    for i, comp in enumerate(comps):
        for idx, c in comp.items():
            terms[(i, idx)] = c
    return Germ.from_terms(d, N, terms)


def _random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_germ(rng: np.random.Generator, d: int, N: int, scale: float = 0.8,
                density: float = 0.7, identity_linear: bool = False) -> Germ:
    """Random germ with a well-conditioned linear part (condition <= 3)."""
    space = series_space(d, N)
    comp = np.zeros((d, space.size), dtype=np.complex128)
    if identity_linear:
        lin = np.eye(d)
    else:
        sing = rng.uniform(0.6, 1.8, size=d)
        lin = _random_unitary(rng, d) @ np.diag(sing) @ _random_unitary(rng, d)
    comp[:, :d] = lin
    mask = rng.uniform(size=(d, space.size - d)) < density
    vals = scale * (rng.normal(size=(d, space.size - d))
                    + 1j * rng.normal(size=(d, space.size - d)))
    comp[:, d:] = np.where(mask, vals, 0.0)
    return Germ(space, comp)


def compositions(total: int, parts: int):
    """All tuples of `parts` integers >= 1 summing to `total`."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def p_formula_d1(j_star: int, j: int, b_coeffs: dict[int, complex]) -> complex:
    """The explicit one-variable sum: P(j*, j){B} = sum over r_1+..+r_j = j*
    of B_{r_1} ... B_{r_j}."""
    total = 0.0 + 0.0j
    for parts in compositions(j_star, j):
        prod = 1.0 + 0.0j
        for r in parts:
            prod *= b_coeffs.get(r, 0.0)
        total += prod
    return total


def torus_periodic_count_bruteforce(matrix, k: int) -> int:
    """Count solutions of M^k p = p (mod 1) by pure-int grid scan."""
    M = [[int(matrix[0][0]), int(matrix[0][1])],
         [int(matrix[1][0]), int(matrix[1][1])]]
    Mk = [[1, 0], [0, 1]]
    for _ in range(k):
        Mk = [[M[0][0] * Mk[0][0] + M[0][1] * Mk[1][0],
               M[0][0] * Mk[0][1] + M[0][1] * Mk[1][1]],
              [M[1][0] * Mk[0][0] + M[1][1] * Mk[1][0],
               M[1][0] * Mk[0][1] + M[1][1] * Mk[1][1]]]
    a, b, c, dd = Mk[0][0] - 1, Mk[0][1], Mk[1][0], Mk[1][1] - 1
    q = abs(a * dd - b * c)
    count = 0
    for x in range(q):
        for y in range(q):
            if (a * x + b * y) % q == 0 and (c * x + dd * y) % q == 0:
                count += 1
    return count
