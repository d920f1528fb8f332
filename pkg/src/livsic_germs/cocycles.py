"""Germ-valued cocycles over a base system.

A cocycle is determined by its time-1 map, stored here as an evaluable
family of coefficient fields ``t^i_j : X -> C`` (one scalar field per
component i and multi-index j) that assemble into a germ at every base
point.  Two field representations are provided, matching the two base
systems:

* torus Fourier polynomials ``f(x) = sum_m amp_m exp(2 pi i m . x)`` over a
  finite frequency set, Lipschitz with constant at most
  ``sum 2 pi |m| |amp_m|``;
* shift cylinder functions, constant on the central word of half-width w,
  hence (C, alpha)-Hoelder for every alpha with ``C = 2^{alpha w} osc``.

Cocycles are kept evaluable (not tabulated) so solvers can query arbitrary
orbit points.  Coboundaries ``x -> H(Tx) o H(x)^{-1}`` are realized by
per-point composition; their products along any periodic orbit telescope to
the identity, which is the periodic orbit obstruction (POO) certified by
:func:`poo_check`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .dynamics import BaseSystem, FullShift, ShiftPoint, TorusPoint
from .germs import (Germ, SingularLinearPart, compose_batch, deviation_from_identity,
                    germ_compose, germ_invert, invert_batch)
from .series import enumerate_multiindices, series_space

__all__ = [
    "ObservableField",
    "TorusFourierField",
    "ShiftCylinderField",
    "CallableField",
    "GermObservable",
    "FieldGermObservable",
    "CoboundaryObservable",
    "evaluate_germ",
    "cocycle_product",
    "coboundary_from",
    "POOOrbitResult",
    "POOReport",
    "poo_check",
    "random_germ_observable",
    "observable_from_record",
]


class ObservableField:
    """A scalar coefficient field on the base space.

    Subclasses implement ``evaluate``; ``holder_bound`` returns a declared
    Hoelder-constant hint for the stored ``alpha`` when one is available.
    """

    alpha: float = 1.0

    def evaluate(self, x) -> complex:
        raise NotImplementedError

    def __call__(self, x) -> complex:
        return self.evaluate(x)

    def holder_bound(self) -> float | None:
        return None

    def to_record(self) -> dict:
        raise NotImplementedError


class TorusFourierField(ObservableField):
    """Finite Fourier polynomial on the 2-torus."""

    def __init__(self, amplitudes: Mapping[tuple[int, int], complex],
                 alpha: float = 1.0):
        self.amplitudes = {(int(m[0]), int(m[1])): complex(a)
                           for m, a in amplitudes.items()}
        self.alpha = float(alpha)

    def evaluate(self, x: TorusPoint) -> complex:
        c1, c2 = x.coords
        return sum(a * cmath.exp(2j * math.pi * (m1 * c1 + m2 * c2))
                   for (m1, m2), a in self.amplitudes.items())

    def holder_bound(self) -> float | None:
        # Lipschitz bound; valid as alpha-Hoelder constant since diam <= 1.
        return sum(2.0 * math.pi * math.hypot(*m) * abs(a)
                   for m, a in self.amplitudes.items())

    def to_record(self) -> dict:
        return {
            "type": "torus_fourier",
            "alpha": self.alpha,
            "amplitudes": [
                {"freq": list(m), "re": a.real, "im": a.imag}
                for m, a in sorted(self.amplitudes.items())
            ],
        }


class ShiftCylinderField(ObservableField):
    """Function of the central word of half-width ``window`` on the full shift.

    Words missing from the table evaluate to 0.
    """

    def __init__(self, window: int, values: Mapping[Sequence[int], complex],
                 alpha: float = 1.0):
        if window < 0:
            raise ValueError(f"window must be >= 0, got {window}")
        self.window = int(window)
        self.values = {tuple(int(s) for s in w): complex(v)
                       for w, v in values.items()}
        for w in self.values:
            if len(w) != 2 * self.window + 1:
                raise ValueError(
                    f"cylinder word {w} has length {len(w)}, expected {2 * self.window + 1}")
        self.alpha = float(alpha)

    def evaluate(self, x: ShiftPoint) -> complex:
        return self.values.get(x.center_word(self.window), 0.0 + 0.0j)

    def holder_bound(self) -> float | None:
        vals = list(self.values.values()) + ([0j] if len(self.values) <
                                             (2 ** (2 * self.window + 1)) else [])
        if not vals:
            return 0.0
        osc = max(abs(a - b) for a in vals for b in vals)
        return (2.0 ** (self.alpha * self.window)) * osc

    def to_record(self) -> dict:
        return {
            "type": "shift_cylinder",
            "alpha": self.alpha,
            "window": self.window,
            "values": [
                {"word": list(w), "re": v.real, "im": v.imag}
                for w, v in sorted(self.values.items())
            ],
        }


class CallableField(ObservableField):
    """Evaluator-backed field (used for coefficients exposed by evaluation)."""

    def __init__(self, fn: Callable, alpha: float = 1.0,
                 holder_hint: float | None = None):
        self.fn = fn
        self.alpha = float(alpha)
        self.holder_hint = holder_hint

    def evaluate(self, x) -> complex:
        return complex(self.fn(x))

    def holder_bound(self) -> float | None:
        return self.holder_hint


def _field_from_record(rec: Mapping) -> ObservableField:
    kind = rec["type"]
    if kind == "torus_fourier":
        amps = {tuple(t["freq"]): complex(t["re"], t["im"])
                for t in rec["amplitudes"]}
        return TorusFourierField(amps, alpha=rec.get("alpha", 1.0))
    if kind == "shift_cylinder":
        vals = {tuple(t["word"]): complex(t["re"], t["im"])
                for t in rec["values"]}
        return ShiftCylinderField(rec["window"], vals, alpha=rec.get("alpha", 1.0))
    raise ValueError(f"unknown field type {kind!r}")


# ---------------------------------------------------------------------------
# germ-valued observables


class GermObservable:
    """A map x -> germ, exposed through ``germ_at`` plus per-coefficient fields."""

    dims: int
    max_degree: int
    alpha: float = 1.0

    def germ_at(self, x) -> Germ:
        raise NotImplementedError

    def coefficient_field(self, i: int, idx: Sequence[int]) -> ObservableField:
        idx = tuple(int(e) for e in idx)
        return CallableField(lambda x: self.germ_at(x).coefficient(i, idx),
                             alpha=self.alpha)

    def orbit_germ_arrays(self, system: BaseSystem, points: Sequence,
                          consecutive: bool = False) -> np.ndarray:
        """Coefficient arrays of the germs at ``points``, shape (n, d, M).

        ``consecutive`` asserts that the points are successive orbit steps,
        which coboundary-style observables exploit to share evaluations.
        """
        return np.stack([self.germ_at(x).components for x in points])

    def to_record(self) -> dict:
        raise NotImplementedError


class FieldGermObservable(GermObservable):
    """Observable assembled from stored coefficient fields.

    ``fields`` maps ``(component, multi-index)`` to an
    :class:`ObservableField`; degree-1 entries that are absent default to
    the identity linear part.  The assembled germ must have an invertible
    linear part at every evaluated point.
    """

    def __init__(self, dims: int, max_degree: int,
                 fields: Mapping[tuple[int, tuple[int, ...]], ObservableField],
                 alpha: float = 1.0):
        self.dims = dims
        self.max_degree = max_degree
        self.space = series_space(dims, max_degree)
        self.alpha = float(alpha)
        self.fields: dict[tuple[int, tuple[int, ...]], ObservableField] = {}
        for (i, idx), f in fields.items():
            idx = tuple(int(e) for e in idx)
            if not 0 <= i < dims:
                raise ValueError(f"component {i} outside 0..{dims - 1}")
            if idx not in self.space.position:
                raise ValueError(f"index {idx} not storable at (d={dims}, N={max_degree})")
            self.fields[(i, idx)] = f

    def germ_at(self, x) -> Germ:
        comp = np.zeros((self.dims, self.space.size), dtype=np.complex128)
        comp[:, : self.dims] = np.eye(self.dims)
        for (i, idx), f in self.fields.items():
            # stored linear entries replace the identity default
            comp[i, self.space.position[idx]] = f.evaluate(x)
        return Germ(self.space, comp)

    def orbit_germ_arrays(self, system: BaseSystem, points: Sequence,
                          consecutive: bool = False) -> np.ndarray:
        n = len(points)
        out = np.zeros((n, self.dims, self.space.size), dtype=np.complex128)
        out[:, :, : self.dims] = np.eye(self.dims)
        for (i, idx), f in self.fields.items():
            pos = self.space.position[idx]
            out[:, i, pos] = [f.evaluate(x) for x in points]
        dets = np.linalg.det(out[:, :, : self.dims])
        if np.any(np.abs(dets) <= 1e-12):
            bad = int(np.argmin(np.abs(dets)))
            raise SingularLinearPart(
                f"assembled germ at orbit index {bad} has singular linear part")
        return out

    def coefficient_field(self, i: int, idx: Sequence[int]) -> ObservableField:
        idx = tuple(int(e) for e in idx)
        f = self.fields.get((i, idx))
        if f is not None:
            return f
        return super().coefficient_field(i, idx)

    def to_record(self) -> dict:
        return {
            "kind": "fields",
            "dims": self.dims,
            "max_degree": self.max_degree,
            "alpha": self.alpha,
            "fields": [
                {"component": i, "index": list(idx), "field": f.to_record()}
                for (i, idx), f in sorted(self.fields.items())
            ],
        }


class CoboundaryObservable(GermObservable):
    """The coboundary of ``h_observable``: ``x -> H(Tx) o H(x)^{-1}``."""

    def __init__(self, system: BaseSystem, h_observable: GermObservable):
        self.system = system
        self.h_observable = h_observable
        self.dims = h_observable.dims
        self.max_degree = h_observable.max_degree
        self.alpha = h_observable.alpha

    def germ_at(self, x) -> Germ:
        h_here = self.h_observable.germ_at(x)
        h_next = self.h_observable.germ_at(self.system.step(x))
        return germ_compose(h_next, germ_invert(h_here))

    def orbit_germ_arrays(self, system: BaseSystem, points: Sequence,
                          consecutive: bool = False) -> np.ndarray:
        if consecutive and len(points) > 1:
            extended = list(points) + [self.system.step(points[-1])]
            h_all = self.h_observable.orbit_germ_arrays(self.system, extended,
                                                        consecutive=True)
            h_here, h_next = h_all[:-1], h_all[1:]
        else:
            h_here = self.h_observable.orbit_germ_arrays(self.system, points)
            h_next = self.h_observable.orbit_germ_arrays(
                self.system, [self.system.step(x) for x in points])
        space = series_space(self.dims, self.max_degree)
        return compose_batch(h_next, invert_batch(h_here, space), space)

    def to_record(self) -> dict:
        return {"kind": "coboundary", "of": self.h_observable.to_record()}


def observable_from_record(rec: Mapping,
                           system: BaseSystem | None = None) -> GermObservable:
    kind = rec.get("kind")
    if kind == "fields":
        fields = {
            (entry["component"], tuple(entry["index"])): _field_from_record(entry["field"])
            for entry in rec["fields"]
        }
        return FieldGermObservable(int(rec["dims"]), int(rec["max_degree"]),
                                   fields, alpha=rec.get("alpha", 1.0))
    if kind == "coboundary":
        if system is None:
            raise ValueError("a coboundary record needs the base system")
        return CoboundaryObservable(system, observable_from_record(rec["of"], system))
    raise ValueError(f"unknown observable kind {kind!r}")


def evaluate_germ(observable: GermObservable, x) -> Germ:
    return observable.germ_at(x)


def cocycle_product(system: BaseSystem, observable: GermObservable, n: int,
                    x) -> Germ:
    """The n-step cocycle ``F(T^{n-1} x) o ... o F(x)``; n = 0 is the identity."""
    if n < 0:
        raise ValueError(f"cocycle time must be >= 0, got {n}")
    acc = Germ.identity(observable.dims, observable.max_degree)
    for _ in range(n):
        acc = germ_compose(observable.germ_at(x), acc)
        x = system.step(x)
    return acc


def coboundary_from(system: BaseSystem,
                    h_observable: GermObservable) -> CoboundaryObservable:
    return CoboundaryObservable(system, h_observable)


# ---------------------------------------------------------------------------
# periodic orbit obstruction


@dataclass(frozen=True)
class POOOrbitResult:
    period: int
    representative: dict
    residual: float
    passed: bool


@dataclass
class POOReport:
    tol: float
    kmax: int
    results: list[POOOrbitResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.results), default=0.0)

    def to_json_lines(self) -> list[dict]:
        return [
            {"period": r.period, "representative": r.representative,
             "residual": r.residual, "pass": r.passed}
            for r in self.results
        ]


def poo_check(system: BaseSystem, observable: GermObservable, kmax: int,
              tol: float = 1e-8) -> POOReport:
    """Certify the periodic orbit obstruction up to period ``kmax``.

    For every point p with T^k p = p, k <= kmax, the k-step cocycle product
    at p is compared to the identity germ; the residual is the largest
    coefficient deviation (linear block included).
    """
    if kmax < 1:
        raise ValueError(f"kmax must be >= 1, got {kmax}")
    report = POOReport(tol=tol, kmax=kmax)
    for k in range(1, kmax + 1):
        for p in system.periodic_points(k):
            res = deviation_from_identity(cocycle_product(system, observable, k, p))
            report.results.append(POOOrbitResult(
                period=k, representative=system.point_record(p),
                residual=res, passed=res <= tol))
    return report


# ---------------------------------------------------------------------------
# seeded random observables


def _random_disk(rng: np.random.Generator, radius: float) -> complex:
    r = radius * math.sqrt(rng.uniform())
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return r * cmath.exp(1j * phi)


def _random_torus_field(rng: np.random.Generator, scale: float, max_freq: int,
                        n_modes: int, alpha: float,
                        vanish_at: TorusPoint | None) -> TorusFourierField:
    box = [(a, b) for a in range(-max_freq, max_freq + 1)
           for b in range(-max_freq, max_freq + 1)]
    picks = rng.choice(len(box), size=min(n_modes, len(box)), replace=False)
    amps = {box[int(t)]: _random_disk(rng, scale / n_modes) for t in sorted(picks)}
    f = TorusFourierField(amps, alpha=alpha)
    if vanish_at is not None:
        base = f.evaluate(vanish_at)
        amps[(0, 0)] = amps.get((0, 0), 0j) - base
        f = TorusFourierField(amps, alpha=alpha)
    return f


def _random_shift_field(rng: np.random.Generator, scale: float, window: int,
                        alphabet: int, alpha: float,
                        vanish_at: ShiftPoint | None) -> ShiftCylinderField:
    words = [[]]
    for _ in range(2 * window + 1):
        words = [w + [s] for w in words for s in range(alphabet)]
    values = {tuple(w): _random_disk(rng, scale) for w in words}
    if vanish_at is not None:
        base = values[vanish_at.center_word(window)]
        values = {w: v - base for w, v in values.items()}
    return ShiftCylinderField(window, values, alpha=alpha)


def random_germ_observable(system: BaseSystem, d: int, N: int,
                           rng: np.random.Generator, rho: float = 0.3,
                           window: int = 1, max_freq: int = 2, n_modes: int = 3,
                           alpha: float = 1.0,
                           matrix_linear: bool = False) -> FieldGermObservable:
    """Seeded germ observable with geometrically decaying coefficient fields.

    Nonlinear coefficients at multi-index j are drawn with amplitude scale
    ``rho^{|j|}`` and recentred to vanish at the dense-orbit base point; the
    linear part is the identity unless ``matrix_linear`` is set, in which
    case it is ``I`` plus a small fluctuation field vanishing at the base
    point (so products along the orbit stay bounded and the matrix cocycle
    of the induced coboundary has trivial obstruction).
    """
    if rho < 0:
        raise ValueError(f"amplitude scale must be >= 0, got {rho}")
    x0 = system.dense_orbit(0)
    is_shift = isinstance(system, FullShift)

    def draw(scale, vanish):
        if is_shift:
            return _random_shift_field(rng, scale, window, system.alphabet_size,
                                       alpha, vanish)
        return _random_torus_field(rng, scale, max_freq, n_modes, alpha, vanish)

    fields: dict[tuple[int, tuple[int, ...]], ObservableField] = {}
    if matrix_linear:
        fluct = min(0.2, rho if rho > 0 else 0.2) / (2.0 * d)
        for i in range(d):
            for k in range(d):
                idx = tuple(1 if t == k else 0 for t in range(d))
                g = draw(fluct, x0)
                base = 1.0 if i == k else 0.0
                fields[(i, idx)] = _shifted_field(g, base)
    for s in range(2, N + 1):
        for idx in enumerate_multiindices(d, s):
            for i in range(d):
                if rho == 0.0:
                    continue
                fields[(i, idx)] = draw(rho ** s, x0)
    return FieldGermObservable(d, N, fields, alpha=alpha)


def _shifted_field(f: ObservableField, offset: float) -> ObservableField:
    """f + offset, staying within the serializable representations."""
    if isinstance(f, TorusFourierField):
        amps = dict(f.amplitudes)
        amps[(0, 0)] = amps.get((0, 0), 0j) + offset
        return TorusFourierField(amps, alpha=f.alpha)
    if isinstance(f, ShiftCylinderField):
        return ShiftCylinderField(f.window,
                                  {w: v + offset for w, v in f.values.items()},
                                  alpha=f.alpha)
    raise TypeError(f"cannot shift field of type {type(f).__name__}")
