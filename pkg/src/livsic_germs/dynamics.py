"""Concrete hyperbolic base systems with a constructive closing property.

Two topologically transitive homeomorphisms of compact metric spaces are
provided, each with a metric of diameter <= 1, exact periodic-point
enumeration, a constructive closing map (orbits that nearly return are
shadowed by genuine periodic orbits, exponentially closely), and a fixed
forward orbit used as the scaffold for orbit-summation solvers:

* :class:`ToralAutomorphism` -- a hyperbolic automorphism of the 2-torus
  given by an integer matrix ``M`` with ``|det M| = 1`` and ``|tr M| > 2``.
  Closing solves ``(M^k - I) e = m - (M^k x - x)`` with ``m`` the nearest
  integer vector, and the closing constants come from the eigen-splitting:
  with expansion rate ``lam`` and angle ``theta`` between the eigenvector
  directions, ``c = 2 / (sin(theta) (1 - 1/lam))`` and the exponent is
  ``log(lam)``.

* :class:`FullShift` -- the two-sided full shift on ``m >= 2`` symbols with
  the metric ``2^{-n}``, ``n`` the least |index| where two sequences
  differ.  Closing repeats the sighted word; the constants are
  ``c = 4``, exponent ``log 2``, threshold ``1/8``.  The shift's fixed
  dense orbit starts from the point whose non-negative symbols concatenate
  all finite words in length-lexicographic order (zeros to the left), so
  density is constructive rather than generic.

The closing definition also involves an auxiliary point whose orbit decays
one-sidedly toward each endpoint; :meth:`closing_aux` builds it (leaf
intersection on the torus, past/future splice on the shift).  It is not
used by the solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ClosingConstants",
    "ClosingPreconditionError",
    "BaseSystem",
    "TorusPoint",
    "ToralAutomorphism",
    "ShiftPoint",
    "FullShift",
    "empirical_density",
    "exponential_closeness_profile",
    "closing_aux_profile",
    "system_from_config",
]


@dataclass(frozen=True)
class ClosingConstants:
    """Constants (c, lambda, delta0) of the quantitative closing property."""

    c: float
    lam: float
    delta0: float

    def __post_init__(self):
        if self.c <= 0 or self.lam <= 0 or self.delta0 <= 0:
            raise ValueError(f"closing constants must be positive: {self}")


class ClosingPreconditionError(ValueError):
    """Raised when close_orbit is called with dist(x, T^k x) >= delta0."""


class BaseSystem:
    """Interface shared by the concrete base systems.

    Implementations provide ``step``, ``step_inverse``, ``dist`` (a metric
    with diameter <= 1), ``closing_constants``, ``periodic_points(k)`` (all
    solutions of T^k p = p, deterministic order), ``close_orbit(x, k)``,
    ``closing_aux(x, k)`` and ``dense_orbit(n)``.  Systems are immutable
    after construction and all queries are pure.
    """

    def step(self, x):
        raise NotImplementedError

    def step_inverse(self, x):
        raise NotImplementedError

    def dist(self, x, y) -> float:
        raise NotImplementedError

    def closing_constants(self) -> ClosingConstants:
        raise NotImplementedError

    def periodic_points(self, k: int) -> list:
        raise NotImplementedError

    def close_orbit(self, x, k: int):
        raise NotImplementedError

    def closing_aux(self, x, k: int):
        raise NotImplementedError

    def dense_orbit(self, n: int):
        raise NotImplementedError

    def iterate(self, x, n: int):
        """T^n x for any integer n (negative uses the inverse)."""
        for _ in range(abs(n)):
            x = self.step(x) if n > 0 else self.step_inverse(x)
        return x

    def orbit_segment(self, x, length: int) -> list:
        out = [x]
        for _ in range(length - 1):
            out.append(self.step(out[-1]))
        return out

    def dense_orbit_prefix(self, length: int) -> list:
        return [self.dense_orbit(n) for n in range(length)]

    def point_record(self, x) -> dict:
        raise NotImplementedError

    def to_record(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# hyperbolic toral automorphisms


@dataclass(frozen=True)
class TorusPoint:
    """Point of the 2-torus, coordinates in [0, 1)."""

    coords: tuple[float, float]

    def __post_init__(self):
        if len(self.coords) != 2 or not all(0.0 <= c < 1.0 for c in self.coords):
            raise ValueError(f"torus coordinates must lie in [0,1): {self.coords}")

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


def _wrap(v: np.ndarray) -> TorusPoint:
    w = np.mod(np.asarray(v, dtype=float), 1.0)
    w[w >= 1.0] = 0.0  # mod can round up to 1.0
    return TorusPoint((float(w[0]), float(w[1])))


class ToralAutomorphism(BaseSystem):
    """x -> M x (mod 1) for an integer matrix with |det| = 1 and |trace| > 2."""

    def __init__(self, matrix: Sequence[Sequence[int]] = ((2, 1), (1, 1))):
        M = np.array(matrix, dtype=np.int64)
        if M.shape != (2, 2):
            raise ValueError(f"matrix must be 2x2, got shape {M.shape}")
        det = int(round(np.linalg.det(M.astype(float))))
        if abs(det) != 1:
            raise ValueError(f"matrix must be unimodular, det = {det}")
        if abs(int(M[0, 0] + M[1, 1])) <= 2:
            raise ValueError(f"matrix must be hyperbolic, |trace| = {abs(int(M.trace()))}")
        self.matrix = M
        self.matrix_inverse = (det * np.array(
            [[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]], dtype=np.int64))
        eigvals, eigvecs = np.linalg.eig(M.astype(float))
        order = np.argsort(-np.abs(eigvals))
        self.expansion = float(abs(eigvals[order[0]]))
        vu = np.real(eigvecs[:, order[0]])
        vs = np.real(eigvecs[:, order[1]])
        self.unstable_direction = vu / np.linalg.norm(vu)
        self.stable_direction = vs / np.linalg.norm(vs)
        vu2, vs2 = self.unstable_direction, self.stable_direction
        sin_theta = abs(float(vu2[0] * vs2[1] - vu2[1] * vs2[0]))
        c = 2.0 / (sin_theta * (1.0 - 1.0 / self.expansion))
        self._closing = ClosingConstants(c=c, lam=math.log(self.expansion),
                                         delta0=min(0.25, 1.0 / (4.0 * c)))
        self._dense_base = TorusPoint((math.sqrt(2.0) - 1.0, math.sqrt(3.0) - 1.0))
        self._dense_cache: list[TorusPoint] = [self._dense_base]

    def step(self, x: TorusPoint) -> TorusPoint:
        return _wrap(self.matrix @ x.as_array())

    def step_inverse(self, x: TorusPoint) -> TorusPoint:
        return _wrap(self.matrix_inverse @ x.as_array())

    def dist(self, x: TorusPoint, y: TorusPoint) -> float:
        d = np.abs(x.as_array() - y.as_array())
        d = np.minimum(d, 1.0 - d)
        return float(np.hypot(d[0], d[1]))

    def closing_constants(self) -> ClosingConstants:
        return self._closing

    def matrix_power(self, k: int) -> np.ndarray:
        Mk = np.eye(2, dtype=np.int64)
        base = self.matrix if k >= 0 else self.matrix_inverse
        for _ in range(abs(k)):
            Mk = base @ Mk
        return Mk

    def periodic_points(self, k: int) -> list[TorusPoint]:
        """All solutions of M^k p = p (mod 1), by exact rational grid scan.

        Solutions are rational with denominator q = |det(M^k - I)|; the scan
        tests ``(M^k - I)(a, b) = 0 (mod q)`` in integer arithmetic row by
        row, so the enumeration is exact and deterministic (lexicographic in
        the numerators).
        """
        if k < 1:
            raise ValueError(f"period must be >= 1, got {k}")
        Ak = self.matrix_power(k) - np.eye(2, dtype=np.int64)
        q = abs(int(round(np.linalg.det(Ak.astype(float)))))
        if q == 0:
            raise ValueError("M^k - I is singular; matrix is not hyperbolic")
        pts = []
        b = np.arange(q, dtype=np.int64)
        for a in range(q):
            r0 = (Ak[0, 0] * a + Ak[0, 1] * b) % q
            r1 = (Ak[1, 0] * a + Ak[1, 1] * b) % q
            for bb in b[(r0 == 0) & (r1 == 0)]:
                pts.append(TorusPoint((a / q, int(bb) / q)))
        return pts

    def close_orbit(self, x: TorusPoint, k: int) -> TorusPoint:
        """Periodic point of period k shadowing x, Tx, ..., T^k x.

        Writes the return displacement in the lift as ``v = M^k x - x``,
        rounds to the nearest integer vector ``m``, and corrects x by
        ``e = (M^k - I)^{-1} (m - v)`` so that ``M^k (x + e) - (x + e) = m``
        exactly.  Requires ``dist(x, T^k x) < delta0``.
        """
        p, _ = self._close_with_lift(x, k)
        return p

    def _close_with_lift(self, x: TorusPoint, k: int):
        gap = self.dist(x, self.iterate(x, k))
        if gap >= self._closing.delta0:
            raise ClosingPreconditionError(
                f"dist(x, T^k x) = {gap:.4g} >= delta0 = {self._closing.delta0:.4g}")
        Mk = self.matrix_power(k).astype(float)
        xv = x.as_array()
        v = Mk @ xv - xv
        m = np.rint(v)
        e = np.linalg.solve(Mk - np.eye(2), m - v)
        return _wrap(xv + e), e

    def closing_aux(self, x: TorusPoint, k: int):
        """The closing pair (p, y): y sits on the stable leaf of p and the
        unstable leaf of x, so its orbit decays toward p forward and matches
        x near time 0."""
        p, e = self._close_with_lift(x, k)
        basis = np.column_stack([self.unstable_direction, self.stable_direction])
        u, s = np.linalg.solve(basis, e)
        y = _wrap(x.as_array() + u * self.unstable_direction)
        return p, y

    def dense_orbit(self, n: int) -> TorusPoint:
        """Forward orbit of a fixed irrational point.

        Density is not certified for the torus; this orbit exists for
        diagnostics, while solver-grade runs use the full shift.
        """
        if n < 0:
            raise ValueError(f"orbit index must be >= 0, got {n}")
        while len(self._dense_cache) <= n:
            self._dense_cache.append(self.step(self._dense_cache[-1]))
        return self._dense_cache[n]

    def point_record(self, x: TorusPoint) -> dict:
        return {"coords": [x.coords[0], x.coords[1]]}

    def to_record(self) -> dict:
        return {"type": "torus", "matrix": self.matrix.tolist()}


# ---------------------------------------------------------------------------
# the full shift


#: scan budget for distances between points without two-sided periodicity data
DEFAULT_HORIZON = 320


@lru_cache(maxsize=1 << 16)
def _enum_symbol(m: int, i: int) -> int:
    """Symbol i >= 0 of the concatenation of all words over {0..m-1} in
    length-lexicographic order ("0", "1", ..., "00", "01", ...)."""
    length, block = 1, m
    while i >= length * block:
        i -= length * block
        length += 1
        block *= m
    word_idx, pos = divmod(i, length)
    return (word_idx // m ** (length - 1 - pos)) % m


class ShiftPoint:
    """Bi-infinite symbol sequence over {0, ..., m-1}.

    Content is a function of an absolute index; the point views it through
    an ``origin`` offset so shifting is O(1).  ``left``/``right`` record
    eventual periodicity of the content as ``(start, period)`` pairs (in
    content coordinates) when known; rule-backed points (the dense orbit)
    carry ``None`` and distances fall back to a fixed scan horizon.
    """

    __slots__ = ("alphabet_size", "origin", "_content", "left", "right")

    def __init__(self, alphabet_size: int, content: Callable[[int], int],
                 origin: int = 0, left: tuple[int, int] | None = None,
                 right: tuple[int, int] | None = None):
        if alphabet_size < 2:
            raise ValueError(f"alphabet size must be >= 2, got {alphabet_size}")
        self.alphabet_size = alphabet_size
        self.origin = origin
        self._content = content
        self.left = left
        self.right = right

    def symbol(self, i: int) -> int:
        return self._content(i + self.origin)

    def center_word(self, w: int) -> tuple[int, ...]:
        """Symbols at indices -w..w."""
        return tuple(self.symbol(i) for i in range(-w, w + 1))

    def word(self, start: int, length: int) -> tuple[int, ...]:
        return tuple(self.symbol(start + i) for i in range(length))

    def shifted(self, steps: int) -> "ShiftPoint":
        return ShiftPoint(self.alphabet_size, self._content,
                          self.origin + steps, self.left, self.right)

    def __repr__(self) -> str:
        w = "".join(str(s) for s in self.center_word(4))
        return f"ShiftPoint(m={self.alphabet_size}, ...{w[:4]}|{w[4:]}...)"


def _periodic_content(word: tuple[int, ...]) -> Callable[[int], int]:
    k = len(word)
    return lambda i: word[i % k]


def _window_content(center: tuple[int, ...], left_word: tuple[int, ...],
                    right_word: tuple[int, ...], start: int) -> Callable[[int], int]:
    end = total = start + len(center)
    lw, rw = len(left_word), len(right_word)

    def content(i: int) -> int:
        if start <= i < end:
            return center[i - start]
        if i < start:
            return left_word[(i - start) % lw]
        return right_word[(i - total) % rw]

    return content


class FullShift(BaseSystem):
    """Two-sided full shift on ``m`` symbols with the 2^{-n} metric.

    ``dist(x, y) = 2^{-n}`` where n is the least |i| with ``x_i != y_i``
    (0 when no difference is found within the decidable horizon), giving a
    metric of diameter exactly 1.  The closing constants are ``c = 4``,
    exponent ``log 2`` and threshold ``delta0 = 1/8``: if x and its k-step
    image agree on |i| <= n-1, the periodic repetition p of ``x_0..x_{k-1}``
    satisfies ``p_l = x_l`` for ``-(n-1) <= l <= k+n-1``, which yields
    ``dist(T^j x, T^j p) <= 2^{1-n} 2^{-min(j, k-j)}`` -- half the budget
    ``c 2^{-n} e^{-lam min(j, k-j)}``.
    """

    def __init__(self, alphabet_size: int = 2):
        if alphabet_size < 2:
            raise ValueError(f"alphabet size must be >= 2, got {alphabet_size}")
        self.alphabet_size = alphabet_size
        self._closing = ClosingConstants(c=4.0, lam=math.log(2.0), delta0=0.125)
        m = alphabet_size
        self._dense_base = ShiftPoint(
            m, lambda i: 0 if i < 0 else _enum_symbol(m, i), origin=0,
            left=(0, 1), right=None)

    # -- point constructors -------------------------------------------------

    def periodic_point(self, word: Sequence[int]) -> ShiftPoint:
        word = self._check_word(word)
        k = len(word)
        return ShiftPoint(self.alphabet_size, _periodic_content(word),
                          origin=0, left=(0, k), right=(0, k))

    def point(self, center: Sequence[int], left_word: Sequence[int] = (0,),
              right_word: Sequence[int] = (0,), start: int = 0) -> ShiftPoint:
        """Point with explicit ``center`` at indices ``start..`` and periodic tails."""
        center = self._check_word(center)
        left_word = self._check_word(left_word)
        right_word = self._check_word(right_word)
        content = _window_content(center, left_word, right_word, start)
        return ShiftPoint(self.alphabet_size, content, origin=0,
                          left=(start, len(left_word)),
                          right=(start + len(center), len(right_word)))

    def _check_word(self, word: Sequence[int]) -> tuple[int, ...]:
        word = tuple(int(s) for s in word)
        if not word:
            raise ValueError("word must be nonempty")
        if any(not 0 <= s < self.alphabet_size for s in word):
            raise ValueError(f"symbols must lie in 0..{self.alphabet_size - 1}: {word}")
        return word

    # -- system interface ----------------------------------------------------

    def step(self, x: ShiftPoint) -> ShiftPoint:
        return x.shifted(1)

    def step_inverse(self, x: ShiftPoint) -> ShiftPoint:
        return x.shifted(-1)

    def first_difference(self, x: ShiftPoint, y: ShiftPoint) -> int | None:
        """Least |i| with ``x_i != y_i``, or None if equal within the horizon.

        When both points are eventually periodic on a side, the scan on that
        side stops after the preperiods plus one least common multiple of the
        periods, which decides equality exactly.
        """
        if x.alphabet_size != y.alphabet_size:
            raise ValueError("points use different alphabets")
        if x.right is not None and y.right is not None:
            right_lim = max(x.right[0] - x.origin, y.right[0] - y.origin, 0) + \
                math.lcm(x.right[1], y.right[1])
        else:
            right_lim = DEFAULT_HORIZON
        if x.left is not None and y.left is not None:
            left_lim = max(x.origin - x.left[0], y.origin - y.left[0], 0) + \
                math.lcm(x.left[1], y.left[1])
        else:
            left_lim = DEFAULT_HORIZON
        for n in range(max(right_lim, left_lim) + 1):
            if n <= right_lim and x.symbol(n) != y.symbol(n):
                return n
            if 0 < n <= left_lim and x.symbol(-n) != y.symbol(-n):
                return n
        return None

    def dist(self, x: ShiftPoint, y: ShiftPoint) -> float:
        n = self.first_difference(x, y)
        return 0.0 if n is None else 2.0 ** (-n)

    def closing_constants(self) -> ClosingConstants:
        return self._closing

    def periodic_points(self, k: int) -> list[ShiftPoint]:
        """All m^k periodic repetitions of length-k words, lexicographic order."""
        if k < 1:
            raise ValueError(f"period must be >= 1, got {k}")
        m = self.alphabet_size
        words = [[]]
        for _ in range(k):
            words = [w + [s] for w in words for s in range(m)]
        return [self.periodic_point(w) for w in words]

    def close_orbit(self, x: ShiftPoint, k: int) -> ShiftPoint:
        """The periodic repetition of ``x_0 .. x_{k-1}``; requires
        ``dist(x, T^k x) < 1/8``."""
        gap = self.dist(x, x.shifted(k))
        if gap >= self._closing.delta0:
            raise ClosingPreconditionError(
                f"dist(x, T^k x) = {gap:.4g} >= delta0 = {self._closing.delta0:.4g}")
        return self.periodic_point(x.word(0, k))

    def closing_aux(self, x: ShiftPoint, k: int):
        """The closing pair (p, y): y splices x's past onto p's future at index
        -(n-2), where 2^{-n} = dist(x, T^k x); on the overlap the two agree."""
        n = self.first_difference(x, x.shifted(k))
        p = self.close_orbit(x, k)
        if n is None:
            return p, p
        cut = -(n - 2)

        def content(i: int) -> int:
            return p.symbol(i) if i >= cut else x.symbol(i)

        left = None
        if x.left is not None:
            left = (min(x.left[0] - x.origin, cut), x.left[1])
        return p, ShiftPoint(self.alphabet_size, content, origin=0,
                             left=left, right=(cut, k))

    def dense_orbit(self, n: int) -> ShiftPoint:
        """n-th step of the fixed dense orbit (word-enumeration point).

        The base point has zeros at negative indices and, at non-negative
        indices, the concatenation of all finite words in
        length-lexicographic order, so its forward orbit visits every
        cylinder.
        """
        if n < 0:
            raise ValueError(f"orbit index must be >= 0, got {n}")
        return self._dense_base.shifted(n)

    def point_record(self, x: ShiftPoint) -> dict:
        if x.left == x.right and x.left is not None and x.left[1] <= 64:
            period = x.left[1]
            return {"word": list(x.word(0, period))}
        return {"center": list(x.center_word(8)), "center_start": -8}

    def to_record(self) -> dict:
        return {"type": "shift", "alphabet": self.alphabet_size}


# ---------------------------------------------------------------------------
# shared helpers


def empirical_density(system: BaseSystem, orbit_points: Sequence,
                      samples: Sequence) -> float:
    """Covering radius of the orbit against the sample cloud:
    ``max over samples of min over orbit of dist``."""
    if not orbit_points or not samples:
        raise ValueError("orbit and sample lists must be nonempty")
    worst = 0.0
    for s in samples:
        best = math.inf
        for p in orbit_points:
            d = system.dist(p, s)
            if d < best:
                best = d
                if best == 0.0:
                    break
        worst = max(worst, best)
    return worst


def exponential_closeness_profile(system: BaseSystem, x, k: int) -> dict:
    """Runs close_orbit and checks the closing inequality at every step.

    Returns the periodic point, per-step distances and bounds
    ``delta e^{-lam min(j, k-j)}`` with ``delta = c dist(x, T^k x)``, and
    whether every step satisfied its bound.
    """
    cc = system.closing_constants()
    p = system.close_orbit(x, k)
    delta = cc.c * system.dist(x, system.iterate(x, k))
    xs, ps = x, p
    rows = []
    ok = True
    for j in range(k + 1):
        bound = delta * math.exp(-cc.lam * min(j, k - j))
        d = system.dist(xs, ps)
        rows.append({"j": j, "dist": d, "bound": bound})
        ok = ok and d <= bound + 1e-12
        xs, ps = system.step(xs), system.step(ps)
    return {"periodic_point": p, "delta": delta, "rows": rows, "ok": ok,
            "return_residual": system.dist(system.iterate(p, k), p)}


def closing_aux_profile(system: BaseSystem, x, k: int) -> dict:
    """Checks the auxiliary-point half of the closing property:
    ``dist(T^j p, T^j y) <= delta e^{-lam j}`` and
    ``dist(T^j y, T^j x) <= delta e^{-lam (k-j)}``."""
    cc = system.closing_constants()
    p, y = system.closing_aux(x, k)
    delta = cc.c * system.dist(x, system.iterate(x, k))
    xs, ps, ys = x, p, y
    ok = True
    rows = []
    for j in range(k + 1):
        b_py = delta * math.exp(-cc.lam * j)
        b_yx = delta * math.exp(-cc.lam * (k - j))
        d_py = system.dist(ps, ys)
        d_yx = system.dist(ys, xs)
        rows.append({"j": j, "dist_py": d_py, "bound_py": b_py,
                     "dist_yx": d_yx, "bound_yx": b_yx})
        ok = ok and d_py <= b_py + 1e-12 and d_yx <= b_yx + 1e-12
        xs, ps, ys = system.step(xs), system.step(ps), system.step(ys)
    return {"p": p, "y": y, "rows": rows, "ok": ok}


def system_from_config(record: dict) -> BaseSystem:
    """Build a base system from a config record:
    ``{"type": "shift", "alphabet": m}`` or ``{"type": "torus", "matrix": [[..]]}``."""
    kind = record.get("type")
    if kind == "shift":
        return FullShift(int(record.get("alphabet", 2)))
    if kind == "torus":
        return ToralAutomorphism(record.get("matrix", ((2, 1), (1, 1))))
    raise ValueError(f"unknown base system type: {kind!r}")
