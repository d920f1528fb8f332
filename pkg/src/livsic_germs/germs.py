"""The group of truncated analytic-diffeomorphism germs fixing the origin.

A germ is a d-tuple of truncated series with zero constant term whose
degree-1 coefficient block (the linear part) is an invertible d x d complex
matrix.  Composition substitutes one germ into another and truncates; it
realizes the Faa di Bruno coefficient formula
``c_{j*} = sum_{|j|=1} a_j b^j_{j*} + sum_{|j|>1} a_j P(j*, j){B}``
where ``P(j*, j){B}`` is the coefficient at ``j*`` of the monomial
``B^j = B_1^{j_1} ... B_d^{j_d}``.  Note the second sum runs over all
``1 < |j| <= |j*|``: restricting it to componentwise ``j <= j*`` is only
sound for d = 1 (for d >= 2 a factor such as ``B_1 = z_1 + z_2^2`` feeds
index (2,0) into target (0,4)).  Substitution sidesteps the issue.

Inversion works degree by degree: the degree-1 block is the matrix inverse,
and for each k >= 2 the degree-k coefficients solve a linear system whose
left side is the linear part applied to the unknowns and whose right side
is minus the degree-k part of ``(f - linear) o g_{<k}``.

All operations are pure; germs are immutable values.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .series import (SeriesSpace, TruncatedSeries, index_degree, index_leq,
                     series_space, _mul_vec)

__all__ = [
    "SingularLinearPart",
    "Germ",
    "germ_identity",
    "germ_compose",
    "germ_invert",
    "linear_part",
    "fdb_homogeneous_P",
    "monomial_coefficient",
    "max_coefficient_difference",
    "deviation_from_identity",
]

#: linear parts with |det| at or below this are treated as singular
SINGULAR_DET_THRESHOLD = 1e-12


class SingularLinearPart(ValueError):
    """Raised when a germ's linear part is not invertible."""


def _identity_components(space: SeriesSpace) -> np.ndarray:
    d = space.dims
    comp = np.zeros((d, space.size), dtype=np.complex128)
    comp[:, :d] = np.eye(d)
    return comp


class Germ:
    """Element of the truncated germ group: components stacked as a (d, M) array.

    The first ``d`` coefficient columns are the degree-1 block, so
    ``components[:, :d]`` is the linear part acting on ``(z_1, ..., z_d)``.
    """

    __slots__ = ("space", "components")

    def __init__(self, space: SeriesSpace, components: np.ndarray,
                 validate: bool = True):
        components = np.asarray(components, dtype=np.complex128)
        if components.shape != (space.dims, space.size):
            raise ValueError(
                f"component array has shape {components.shape}, expected "
                f"({space.dims}, {space.size})")
        self.space = space
        self.components = components
        if validate:
            det = np.linalg.det(components[:, :space.dims])
            if abs(det) <= SINGULAR_DET_THRESHOLD:
                raise SingularLinearPart(
                    f"linear part is singular (|det| = {abs(det):.3e})")

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, d: int, N: int) -> "Germ":
        space = series_space(d, N)
        return cls(space, _identity_components(space), validate=False)

    @classmethod
    def from_components(cls, comps: Sequence[TruncatedSeries]) -> "Germ":
        if not comps:
            raise ValueError("a germ needs at least one component")
        space = comps[0].space
        if len(comps) != space.dims:
            raise ValueError(f"got {len(comps)} components for d={space.dims}")
        for c in comps[1:]:
            if c.space is not space:
                raise ValueError("components live in different series spaces")
        return cls(space, np.stack([c.coeffs for c in comps]))

    @classmethod
    def from_linear(cls, matrix: np.ndarray, N: int) -> "Germ":
        """The linear germ ``Z -> matrix @ Z``."""
        matrix = np.asarray(matrix, dtype=np.complex128)
        d = matrix.shape[0]
        if matrix.shape != (d, d):
            raise ValueError(f"linear part must be square, got {matrix.shape}")
        space = series_space(d, N)
        comp = np.zeros((d, space.size), dtype=np.complex128)
        comp[:, :d] = matrix
        return cls(space, comp)

    @classmethod
    def from_terms(cls, d: int, N: int,
                   terms: Mapping[tuple[int, tuple[int, ...]], complex]) -> "Germ":
        """Germ from ``{(component, multi-index): coefficient}``; components 0-based."""
        space = series_space(d, N)
        comp = np.zeros((d, space.size), dtype=np.complex128)
        for (i, idx), val in terms.items():
            if not 0 <= i < d:
                raise ValueError(f"component {i} outside 0..{d - 1}")
            idx = tuple(int(e) for e in idx)
            if idx not in space.position:
                raise ValueError(f"index {idx} not storable at (d={d}, N={N})")
            comp[i, space.position[idx]] += complex(val)
        return cls(space, comp)

    # -- queries -----------------------------------------------------------

    @property
    def dims(self) -> int:
        return self.space.dims

    @property
    def max_degree(self) -> int:
        return self.space.max_degree

    @property
    def linear_part(self) -> np.ndarray:
        """The degree-1 coefficient matrix (copy)."""
        return self.components[:, : self.dims].copy()

    def component(self, i: int) -> TruncatedSeries:
        return TruncatedSeries(self.space, self.components[i].copy())

    def coefficient(self, i: int, idx: Sequence[int]) -> complex:
        pos = self.space.position.get(tuple(int(e) for e in idx))
        if pos is None:
            return 0.0 + 0.0j
        return complex(self.components[i, pos])

    def allclose(self, other: "Germ", tol: float = 1e-10) -> bool:
        return max_coefficient_difference(self, other) <= tol

    def truncate(self, new_max_degree: int) -> "Germ":
        space2 = series_space(self.dims, new_max_degree)
        comp = np.zeros((self.dims, space2.size), dtype=np.complex128)
        n = min(self.space.upto_end(new_max_degree), space2.size)
        comp[:, :n] = self.components[:, :n]
        return Germ(space2, comp, validate=False)

    def __repr__(self) -> str:
        return f"Germ(d={self.dims}, N={self.max_degree})"

    # -- serialization -----------------------------------------------------

    def to_record(self) -> dict:
        return {
            "dims": self.dims,
            "max_degree": self.max_degree,
            "components": [self.component(i).to_record() for i in range(self.dims)],
            "linear_part": [
                [{"re": z.real, "im": z.imag} for z in row]
                for row in self.linear_part
            ],
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "Germ":
        comps = [TruncatedSeries.from_record(r) for r in rec["components"]]
        germ = cls.from_components(comps)
        stored = np.array(
            [[complex(z["re"], z["im"]) for z in row] for row in rec["linear_part"]])
        if not np.allclose(stored, germ.linear_part, atol=1e-12):
            raise ValueError("linear_part record disagrees with degree-1 coefficients")
        return germ


def germ_identity(d: int, N: int) -> Germ:
    """The identity germ ``Z -> Z``."""
    return Germ.identity(d, N)


def _monomial_rows(space: SeriesSpace, inner: np.ndarray,
                   up_to: int) -> np.ndarray:
    """Rows ``mono[p] = coefficients of B^{indices[p]}`` truncated at ``up_to``.

    Computed by the parent recursion ``B^j = B^{j - e_k} * B_k``; rows of
    degree above ``up_to`` are left at zero.
    """
    ppos, pvar = space.parent_tables()
    mono = np.zeros((space.size, space.size), dtype=np.complex128)
    end = space.upto_end(up_to)
    for p in range(end):
        if ppos[p] < 0:
            mono[p] = inner[pvar[p]]
        else:
            mono[p] = _mul_vec(mono[ppos[p]], inner[pvar[p]], space, up_to)
    return mono


def _compose_arrays(outer: np.ndarray, inner: np.ndarray, space: SeriesSpace,
                    up_to: int | None = None) -> np.ndarray:
    """Truncated substitution of raw component arrays (no invertibility checks)."""
    if up_to is None:
        up_to = space.max_degree
    mono = _monomial_rows(space, inner, up_to)
    return outer @ mono


def germ_compose(outer: Germ, inner: Germ, up_to: int | None = None) -> Germ:
    """The composition ``outer o inner`` truncated at the common degree.

    The degree-1 block is the matrix product of the linear parts; higher
    coefficients come from substituting ``inner`` into each monomial of
    ``outer`` and truncating every partial product eagerly.
    """
    if outer.space is not inner.space:
        raise ValueError(
            f"germ mismatch: (d={outer.dims}, N={outer.max_degree}) vs "
            f"(d={inner.dims}, N={inner.max_degree})")
    comp = _compose_arrays(outer.components, inner.components, outer.space, up_to)
    return Germ(outer.space, comp, validate=False)


def _invert_arrays(f: np.ndarray, space: SeriesSpace,
                   up_to: int | None = None) -> np.ndarray:
    d = space.dims
    if up_to is None:
        up_to = space.max_degree
    lin = f[:, :d]
    det = np.linalg.det(lin)
    if abs(det) <= SINGULAR_DET_THRESHOLD:
        raise SingularLinearPart(
            f"cannot invert germ: linear part singular (|det| = {abs(det):.3e})")
    lin_inv = np.linalg.inv(lin)
    g = np.zeros_like(f)
    g[:, :d] = lin_inv
    if up_to < 2:
        return g
    fnl = f.copy()
    fnl[:, :d] = 0.0
    for k in range(2, up_to + 1):
        comp = _compose_arrays(fnl, g, space, up_to=k)
        sl = space.degree_slice(k)
        g[:, sl] = -lin_inv @ comp[:, sl]
    return g


def germ_invert(f: Germ) -> Germ:
    """Compositional inverse at truncation: ``compose(f, g) = identity`` up to N."""
    return Germ(f.space, _invert_arrays(f.components, f.space), validate=False)


def linear_part(f: Germ) -> np.ndarray:
    return f.linear_part


def monomial_coefficient(j_star: Sequence[int], j: Sequence[int],
                         B: Germ) -> complex:
    """Coefficient at ``j_star`` of ``B^j = B_1^{j_1} ... B_d^{j_d}``.

    No order restriction between ``j`` and ``j_star``; the result vanishes
    whenever ``|j| > |j_star|``.
    """
    j = tuple(int(e) for e in j)
    j_star = tuple(int(e) for e in j_star)
    d = B.dims
    if len(j) != d or len(j_star) != d:
        raise ValueError(f"multi-indices must have length d={d}")
    if index_degree(j) < 1:
        raise ValueError("monomial exponent must have degree >= 1")
    if index_degree(j) > index_degree(j_star):
        return 0.0 + 0.0j
    factors = [k for k in range(d) for _ in range(j[k])]
    acc = B.components[factors[0]]
    for k in factors[1:]:
        acc = _mul_vec(acc, B.components[k], B.space)
    pos = B.space.position.get(j_star)
    return 0.0 + 0.0j if pos is None else complex(acc[pos])


def fdb_homogeneous_P(j_star: Sequence[int], j: Sequence[int],
                      B: Germ) -> complex:
    """The Faa di Bruno building block ``P(j*, j){B}`` for ``1 < |j|``, ``j <= j*``.

    This is the coefficient multiplying ``a_j`` in the composition formula:
    homogeneous of degree ``|j|`` in the coefficients of ``B``, and a positive
    integer combination of them (hence positive real whenever ``B`` has
    all-positive real coefficients).  The componentwise precondition
    ``j <= j*`` matches the stated domain of the formula; use
    :func:`monomial_coefficient` for unrestricted index pairs.
    """
    j = tuple(int(e) for e in j)
    j_star = tuple(int(e) for e in j_star)
    if index_degree(j) <= 1:
        raise ValueError(f"P(j*, j) requires |j| > 1, got j={j}")
    if not index_leq(j, j_star):
        raise ValueError(f"P(j*, j) requires j <= j* componentwise, got j={j}, j*={j_star}")
    return monomial_coefficient(j_star, j, B)


def max_coefficient_difference(f: Germ, g: Germ) -> float:
    """Max magnitude over all coefficient slots (linear block included) of f - g."""
    if f.space is not g.space:
        raise ValueError("germs live in different spaces")
    return float(np.max(np.abs(f.components - g.components)))


def deviation_from_identity(f: Germ) -> float:
    return max_coefficient_difference(f, Germ.identity(f.dims, f.max_degree))


# ---------------------------------------------------------------------------
# batched operations over stacks of germs
#
# Orbit workloads apply the same algebra to thousands of germs sharing one
# series space.  Stacks are arrays of shape (n, d, M); the batched product
# turns the coefficient scatter into one dense matrix multiply.


def identity_batch(n: int, space: SeriesSpace) -> np.ndarray:
    out = np.zeros((n, space.dims, space.size), dtype=np.complex128)
    out[:, :, : space.dims] = np.eye(space.dims)
    return out


def mul_batch(a: np.ndarray, b: np.ndarray, space: SeriesSpace,
              up_to: int | None = None) -> np.ndarray:
    """Rowwise truncated products of coefficient rows: (n, M) x (n, M) -> (n, M)."""
    ia, ib, S = space.scatter_arrays(up_to)
    return (a[:, ia] * b[:, ib]) @ S


def compose_batch(outer: np.ndarray, inner: np.ndarray, space: SeriesSpace,
                  up_to: int | None = None) -> np.ndarray:
    """Rowwise truncated composition of germ stacks of shape (n, d, M)."""
    if up_to is None:
        up_to = space.max_degree
    n = outer.shape[0]
    end = space.upto_end(up_to)
    ppos, pvar = space.parent_tables()
    mono = np.zeros((n, space.size, space.size), dtype=np.complex128)
    for p in range(end):
        if ppos[p] < 0:
            mono[:, p, :] = inner[:, pvar[p], :]
        else:
            mono[:, p, :] = mul_batch(mono[:, ppos[p], :], inner[:, pvar[p], :],
                                      space, up_to)
    return np.einsum("ndp,npm->ndm", outer, mono)


def invert_batch(f: np.ndarray, space: SeriesSpace,
                 up_to: int | None = None) -> np.ndarray:
    """Rowwise compositional inverses of a germ stack of shape (n, d, M)."""
    d = space.dims
    if up_to is None:
        up_to = space.max_degree
    lin = f[:, :, :d]
    dets = np.linalg.det(lin)
    if np.any(np.abs(dets) <= SINGULAR_DET_THRESHOLD):
        bad = int(np.argmin(np.abs(dets)))
        raise SingularLinearPart(
            f"stack entry {bad} has singular linear part (|det| = "
            f"{abs(dets[bad]):.3e})")
    lin_inv = np.linalg.inv(lin)
    g = np.zeros_like(f)
    g[:, :, :d] = lin_inv
    if up_to < 2:
        return g
    fnl = f.copy()
    fnl[:, :, :d] = 0.0
    for k in range(2, up_to + 1):
        comp = compose_batch(fnl, g, space, up_to=k)
        sl = space.degree_slice(k)
        g[:, :, sl] = -np.einsum("nde,nes->nds", lin_inv, comp[:, :, sl])
    return g
