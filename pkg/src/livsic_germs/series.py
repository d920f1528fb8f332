"""Truncated multivariate complex power series with polydisc coefficient norms.

A series in ``d`` variables truncated at total degree ``N`` is a finite
coefficient family ``{t_j : 1 <= |j| <= N}`` indexed by exponent
multi-indices ``j = (j_1, ..., j_d)``, ``|j| = j_1 + ... + j_d``.  The
constant term is identically zero: every series here represents a map
fixing the origin, and all arithmetic truncates back to degree ``N``.

Coefficients are stored as a dense complex vector laid out over the
canonical index list of :func:`series_space` (degrees ascending,
lexicographically descending within one degree, so for d=2, s=3 the order
is (3,0), (2,1), (1,2), (0,3)).  The dense layout is what makes products
and compositions cheap enough for orbit-length workloads; the serialized
form remains a sparse list of nonzero terms in canonical order.

The weighted norm :func:`norm_2r` is the l2 norm of the coefficients with
the coefficient at ``j`` weighted by ``R^{|j|}``; it is the coefficient
form of the L2 norm over the polydisc of radius ``R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "enumerate_multiindices",
    "multiindex_count",
    "index_degree",
    "index_leq",
    "index_lt",
    "series_space",
    "SeriesSpace",
    "TruncatedSeries",
    "series_add",
    "series_multiply",
    "norm_2r",
    "coeff_decay_check",
    "HolderParams",
]


def enumerate_multiindices(d: int, s: int) -> list[tuple[int, ...]]:
    """All length-``d`` exponent tuples of total degree ``s``, graded-lex order.

    Within the degree the order is lexicographic with the leftmost exponent
    decreasing first: (3,0), (2,1), (1,2), (0,3) for d=2, s=3.  The list has
    exactly ``(s+d-1)! / (s!(d-1)!)`` entries.
    """
    if d < 1:
        raise ValueError(f"need at least one variable, got d={d}")
    if s < 0:
        raise ValueError(f"degree must be non-negative, got s={s}")
    if d == 1:
        return [(s,)]
    out: list[tuple[int, ...]] = []
    for first in range(s, -1, -1):
        for rest in enumerate_multiindices(d - 1, s - first):
            out.append((first,) + rest)
    return out


def multiindex_count(d: int, s: int) -> int:
    """Number of multi-indices of degree ``s`` in ``d`` variables."""
    return math.comb(s + d - 1, d - 1)


def index_degree(j: Sequence[int]) -> int:
    return sum(j)


def index_leq(j: Sequence[int], k: Sequence[int]) -> bool:
    """Componentwise partial order ``j <= k``."""
    return len(j) == len(k) and all(a <= b for a, b in zip(j, k))


def index_lt(j: Sequence[int], k: Sequence[int]) -> bool:
    """Strict componentwise order: ``j <= k`` and ``j != k``."""
    return index_leq(j, k) and tuple(j) != tuple(k)


class SeriesSpace:
    """Shared index bookkeeping for all series of a fixed ``(d, N)``.

    Holds the canonical index list, index -> position map, per-degree
    offsets, the parent decomposition used by monomial recursion
    (``Z^j = Z^{j - e_k} * z_k``), and the flattened multiplication table
    (pairs of positions whose index sum stays within the truncation).
    Instances are interned via :func:`series_space`; do not construct
    directly.
    """

    def __init__(self, dims: int, max_degree: int):
        if dims < 1:
            raise ValueError(f"dims must be >= 1, got {dims}")
        if max_degree < 1:
            raise ValueError(f"max_degree must be >= 1, got {max_degree}")
        self.dims = dims
        self.max_degree = max_degree
        indices: list[tuple[int, ...]] = []
        ends = [0]
        for s in range(1, max_degree + 1):
            indices.extend(enumerate_multiindices(dims, s))
            ends.append(len(indices))
        self.indices: tuple[tuple[int, ...], ...] = tuple(indices)
        self.size = len(indices)
        self.position: dict[tuple[int, ...], int] = {
            idx: p for p, idx in enumerate(indices)
        }
        self.degrees = np.array([sum(idx) for idx in indices], dtype=np.int64)
        self._degree_end = ends  # ends[k] = #indices of degree <= k
        self._pairs: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._pair_end: list[int] | None = None
        self._parents: tuple[np.ndarray, np.ndarray] | None = None
        self._scatter: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def __repr__(self) -> str:
        return f"SeriesSpace(d={self.dims}, N={self.max_degree})"

    def degree_slice(self, k: int) -> slice:
        """Positions of the indices of total degree exactly ``k``."""
        if not 1 <= k <= self.max_degree:
            raise ValueError(f"degree {k} outside 1..{self.max_degree}")
        return slice(self._degree_end[k - 1], self._degree_end[k])

    def upto_end(self, k: int) -> int:
        """Number of positions with degree <= ``k``."""
        return self._degree_end[min(k, self.max_degree)]

    def pair_arrays(self, up_to: int | None = None):
        """Multiplication table ``(ia, ib, ic)``, sorted by result degree.

        ``coeff[ic] += a[ia] * b[ib]`` over the returned triples computes the
        truncated Cauchy product; passing ``up_to`` restricts to result
        degrees <= ``up_to``.
        """
        if self._pairs is None:
            ia, ib, ic = [], [], []
            for pa, ja in enumerate(self.indices):
                da = sum(ja)
                for pb, jb in enumerate(self.indices):
                    if da + sum(jb) > self.max_degree:
                        continue
                    jc = tuple(x + y for x, y in zip(ja, jb))
                    ia.append(pa)
                    ib.append(pb)
                    ic.append(self.position[jc])
            order = sorted(range(len(ic)), key=lambda t: (int(self.degrees[ic[t]]), ic[t], ia[t]))
            ia_arr = np.array([ia[t] for t in order], dtype=np.intp)
            ib_arr = np.array([ib[t] for t in order], dtype=np.intp)
            ic_arr = np.array([ic[t] for t in order], dtype=np.intp)
            degs = self.degrees[ic_arr]
            self._pair_end = [int(np.searchsorted(degs, k, side="right"))
                              for k in range(self.max_degree + 1)]
            self._pairs = (ia_arr, ib_arr, ic_arr)
        ia_arr, ib_arr, ic_arr = self._pairs
        if up_to is None or up_to >= self.max_degree:
            return ia_arr, ib_arr, ic_arr
        end = self._pair_end[max(up_to, 0)]
        return ia_arr[:end], ib_arr[:end], ic_arr[:end]

    def scatter_arrays(self, up_to: int | None = None):
        """Multiplication as a dense linear map: ``(ia, ib, S)`` such that the
        truncated product of coefficient rows a, b is ``(a[ia] * b[ib]) @ S``.

        Used by the batched operations, where many series share one space and
        the scatter-add becomes a single matrix product.
        """
        key = self.max_degree if up_to is None else min(up_to, self.max_degree)
        cached = self._scatter.get(key)
        if cached is None:
            ia, ib, ic = self.pair_arrays(key)
            S = np.zeros((len(ic), self.size), dtype=np.complex128)
            S[np.arange(len(ic)), ic] = 1.0
            cached = (ia, ib, S)
            self._scatter[key] = cached
        return cached

    def parent_tables(self):
        """Monomial recursion tables: position and variable of ``j - e_k``.

        For each position of degree >= 2, ``parent_pos`` holds the position of
        the index with the first nonzero exponent decremented and
        ``parent_var`` that variable; degree-1 rows carry ``parent_pos = -1``
        and the variable itself.
        """
        if self._parents is None:
            ppos = np.empty(self.size, dtype=np.intp)
            pvar = np.empty(self.size, dtype=np.intp)
            for p, idx in enumerate(self.indices):
                k = next(i for i, e in enumerate(idx) if e > 0)
                if sum(idx) == 1:
                    ppos[p] = -1
                    pvar[p] = k
                else:
                    parent = list(idx)
                    parent[k] -= 1
                    ppos[p] = self.position[tuple(parent)]
                    pvar[p] = k
            self._parents = (ppos, pvar)
        return self._parents


@lru_cache(maxsize=None)
def series_space(d: int, N: int) -> SeriesSpace:
    """Interned :class:`SeriesSpace` for ``d`` variables at truncation ``N``."""
    return SeriesSpace(d, N)


def _mul_vec(a: np.ndarray, b: np.ndarray, space: SeriesSpace,
             up_to: int | None = None) -> np.ndarray:
    ia, ib, ic = space.pair_arrays(up_to)
    prod = a[ia] * b[ib]
    re = np.bincount(ic, weights=prod.real, minlength=space.size)
    im = np.bincount(ic, weights=prod.imag, minlength=space.size)
    return re + 1j * im


ComplexLike = Union[int, float, complex]


class TruncatedSeries:
    """One d-variable power series with zero constant term, truncated at N.

    Supports ``+``, ``-``, scalar ``*``, and the truncated Cauchy product via
    ``*`` with another series or :meth:`multiply`.  Values are immutable by
    convention: operations return new instances and never mutate operands.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space: SeriesSpace, coeffs: np.ndarray | None = None):
        self.space = space
        if coeffs is None:
            coeffs = np.zeros(space.size, dtype=np.complex128)
        else:
            coeffs = np.asarray(coeffs, dtype=np.complex128)
            if coeffs.shape != (space.size,):
                raise ValueError(
                    f"coefficient vector has shape {coeffs.shape}, "
                    f"expected ({space.size},)")
        self.coeffs = coeffs

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, d: int, N: int) -> "TruncatedSeries":
        return cls(series_space(d, N))

    @classmethod
    def variable(cls, d: int, N: int, k: int) -> "TruncatedSeries":
        """The series ``z_{k+1}`` (0-based variable index ``k``)."""
        space = series_space(d, N)
        if not 0 <= k < d:
            raise ValueError(f"variable index {k} outside 0..{d - 1}")
        vec = np.zeros(space.size, dtype=np.complex128)
        vec[k] = 1.0
        return cls(space, vec)

    @classmethod
    def from_terms(cls, d: int, N: int,
                   terms: Mapping[tuple[int, ...], ComplexLike]) -> "TruncatedSeries":
        """Series with the given ``{multi-index: coefficient}`` terms.

        Indices of degree 0 or degree above ``N`` are rejected.
        """
        space = series_space(d, N)
        vec = np.zeros(space.size, dtype=np.complex128)
        for idx, val in terms.items():
            idx = tuple(int(e) for e in idx)
            if len(idx) != d or any(e < 0 for e in idx):
                raise ValueError(f"bad multi-index {idx} for d={d}")
            deg = sum(idx)
            if deg == 0:
                raise ValueError("constant term must be zero; index () of degree 0 rejected")
            if deg > N:
                raise ValueError(f"index {idx} has degree {deg} > truncation {N}")
            vec[space.position[idx]] += complex(val)
        return cls(space, vec)

    # -- basic queries -----------------------------------------------------

    @property
    def dims(self) -> int:
        return self.space.dims

    @property
    def max_degree(self) -> int:
        return self.space.max_degree

    def coefficient(self, idx: Sequence[int]) -> complex:
        pos = self.space.position.get(tuple(int(e) for e in idx))
        if pos is None:
            return 0.0 + 0.0j
        return complex(self.coeffs[pos])

    def items(self) -> Iterator[tuple[tuple[int, ...], complex]]:
        """Nonzero ``(index, coefficient)`` pairs in canonical order."""
        for pos, idx in enumerate(self.space.indices):
            c = self.coeffs[pos]
            if c != 0:
                yield idx, complex(c)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.space.size else 0.0

    def degree_part(self, k: int) -> "TruncatedSeries":
        vec = np.zeros_like(self.coeffs)
        sl = self.space.degree_slice(k)
        vec[sl] = self.coeffs[sl]
        return TruncatedSeries(self.space, vec)

    def truncate(self, new_max_degree: int) -> "TruncatedSeries":
        """Copy of the series re-truncated at ``new_max_degree``."""
        space2 = series_space(self.dims, new_max_degree)
        vec = np.zeros(space2.size, dtype=np.complex128)
        n = min(self.space.upto_end(new_max_degree), space2.size)
        vec[:n] = self.coeffs[:n]
        return TruncatedSeries(space2, vec)

    def allclose(self, other: "TruncatedSeries", tol: float = 1e-10) -> bool:
        self._check_compatible(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def _check_compatible(self, other: "TruncatedSeries") -> None:
        if self.space is not other.space:
            raise ValueError(
                f"series mismatch: (d={self.dims}, N={self.max_degree}) vs "
                f"(d={other.dims}, N={other.max_degree})")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check_compatible(other)
        return TruncatedSeries(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check_compatible(other)
        return TruncatedSeries(self.space, self.coeffs - other.coeffs)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.space, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return self.multiply(other)
        return TruncatedSeries(self.space, self.coeffs * complex(other))

    def __rmul__(self, scalar):
        return TruncatedSeries(self.space, self.coeffs * complex(scalar))

    def multiply(self, other: "TruncatedSeries",
                 up_to: int | None = None) -> "TruncatedSeries":
        """Cauchy product, discarding all terms of degree above the truncation
        (or above ``up_to`` when given)."""
        self._check_compatible(other)
        return TruncatedSeries(self.space,
                               _mul_vec(self.coeffs, other.coeffs, self.space, up_to))

    def __repr__(self) -> str:
        head = ", ".join(f"{idx}: {c:.4g}" for idx, c in list(self.items())[:4])
        more = "" if sum(1 for _ in self.items()) <= 4 else ", ..."
        return f"TruncatedSeries(d={self.dims}, N={self.max_degree}, {{{head}{more}}})"

    # -- serialization -----------------------------------------------------

    def to_record(self) -> dict:
        """JSON-style record: nonzero terms in canonical order."""
        return {
            "dims": self.dims,
            "max_degree": self.max_degree,
            "terms": [
                {"index": list(idx), "re": c.real, "im": c.imag}
                for idx, c in self.items()
            ],
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "TruncatedSeries":
        terms = {
            tuple(t["index"]): complex(t["re"], t["im"]) for t in rec["terms"]
        }
        return cls.from_terms(int(rec["dims"]), int(rec["max_degree"]), terms)


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def series_multiply(a: TruncatedSeries, b: TruncatedSeries,
                    up_to: int | None = None) -> TruncatedSeries:
    return a.multiply(b, up_to=up_to)


def _component_list(f) -> list[TruncatedSeries]:
    if isinstance(f, TruncatedSeries):
        return [f]
    return list(f)


def norm_2r(f, R: float) -> float:
    """Polydisc coefficient norm ``(sum_i sum_j |t^i_j|^2 R^{2|j|})^{1/2}``.

    ``f`` may be a single series or a sequence of component series sharing
    one space.
    """
    if R <= 0:
        raise ValueError(f"polydisc radius must be positive, got R={R}")
    comps = _component_list(f)
    total = 0.0
    for c in comps:
        w = float(R) ** (2.0 * c.space.degrees)
        total += float(np.sum((np.abs(c.coeffs) ** 2) * w))
    return math.sqrt(total)


def coeff_decay_check(f, C: float, R: float) -> bool:
    """True iff every stored coefficient satisfies ``|t^i_j| <= C * R^{-|j|}``."""
    if C < 0:
        raise ValueError(f"C must be non-negative, got {C}")
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    for c in _component_list(f):
        bound = C * float(R) ** (-c.space.degrees.astype(float))
        if not np.all(np.abs(c.coeffs) <= bound):
            return False
    return True


@dataclass(frozen=True)
class HolderParams:
    """A (C, alpha)-Hoelder budget on a polydisc of radius R."""

    C: float
    alpha: float
    R: float

    def __post_init__(self):
        if self.C < 0:
            raise ValueError(f"Hoelder constant must be >= 0, got {self.C}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.R <= 0:
            raise ValueError(f"radius must be positive, got {self.R}")
