"""Experiment configuration: flat key-value files, validation, hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Mapping

from .dynamics import BaseSystem, FullShift, ToralAutomorphism

__all__ = ["ExperimentConfig", "parse_flat_config", "ConfigError"]


class ConfigError(ValueError):
    """Invalid or missing configuration data."""


def parse_flat_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


_DEFAULTS = {
    "system": "shift",
    "alphabet": "2",
    "matrix": "2 1 1 1",
    "d": "1",
    "N": "4",
    "rho": "0.3",
    "orbit_length": "2000",
    "kmax": "6",
    "alpha": "1.0",
    "window": "1",
    "max_freq": "2",
    "n_modes": "3",
    "poo_tol": "1e-8",
    "solve_tol": "1e-8",
    "data_poo_tol": "1e-9",
    "matrix_poo_tol": "1e-8",
    "S": "auto",
    "matrix_linear": "false",
    "pair_count": "200",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one experiment; the seed is mandatory.

    ``S`` is either the string ``"auto"`` (scale the majorant at 4*K*kappa)
    or an explicit positive number.
    """

    seed: int
    system: str = "shift"
    alphabet: int = 2
    matrix: tuple[tuple[int, int], tuple[int, int]] = ((2, 1), (1, 1))
    d: int = 1
    N: int = 4
    rho: float = 0.3
    orbit_length: int = 2000
    kmax: int = 6
    alpha: float = 1.0
    window: int = 1
    max_freq: int = 2
    n_modes: int = 3
    poo_tol: float = 1e-8
    solve_tol: float = 1e-8
    data_poo_tol: float = 1e-9
    matrix_poo_tol: float = 1e-8
    S: str | float = "auto"
    matrix_linear: bool = False
    pair_count: int = 200

    def __post_init__(self):
        if self.system not in ("shift", "torus"):
            raise ConfigError(f"system must be 'shift' or 'torus', got {self.system!r}")
        checks = [
            (self.seed >= 0, "seed >= 0"),
            (self.d >= 1, "d >= 1"),
            (self.N >= 1, "N >= 1"),
            (self.alphabet >= 2, "alphabet >= 2"),
            (self.rho >= 0, "rho >= 0"),
            (self.orbit_length >= 2, "orbit_length >= 2"),
            (self.kmax >= 1, "kmax >= 1"),
            (0 < self.alpha <= 1, "alpha in (0, 1]"),
            (0 <= self.window <= 3, "window in 0..3"),
            (self.max_freq >= 0, "max_freq >= 0"),
            (self.n_modes >= 1, "n_modes >= 1"),
            (self.poo_tol > 0, "poo_tol > 0"),
            (self.solve_tol > 0, "solve_tol > 0"),
            (self.data_poo_tol > 0, "data_poo_tol > 0"),
            (self.matrix_poo_tol > 0, "matrix_poo_tol > 0"),
            (self.pair_count >= 1, "pair_count >= 1"),
        ]
        for ok, what in checks:
            if not ok:
                raise ConfigError(f"config violates {what}")
        if isinstance(self.S, str):
            if self.S != "auto":
                raise ConfigError(f"S must be 'auto' or a positive number, got {self.S!r}")
        elif self.S <= 0:
            raise ConfigError(f"S must be positive, got {self.S}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str],
                     overrides: Mapping[str, object] | None = None) -> "ExperimentConfig":
        m = dict(_DEFAULTS)
        m.update({k: str(v) for k, v in mapping.items()})
        if overrides:
            m.update({k: str(v) for k, v in overrides.items() if v is not None})
        if "seed" not in m:
            raise ConfigError("the seed is mandatory")
        try:
            mat = tuple(int(t) for t in m["matrix"].replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"bad matrix entry: {m['matrix']!r}") from exc
        if len(mat) != 4:
            raise ConfigError(f"matrix needs 4 integers, got {len(mat)}")
        s_raw = m["S"]
        S: str | float = "auto" if s_raw == "auto" else _as_float(s_raw, "S")
        return cls(
            seed=_as_int(m["seed"], "seed"),
            system=m["system"],
            alphabet=_as_int(m["alphabet"], "alphabet"),
            matrix=((mat[0], mat[1]), (mat[2], mat[3])),
            d=_as_int(m["d"], "d"),
            N=_as_int(m["N"], "N"),
            rho=_as_float(m["rho"], "rho"),
            orbit_length=_as_int(m["orbit_length"], "orbit_length"),
            kmax=_as_int(m["kmax"], "kmax"),
            alpha=_as_float(m["alpha"], "alpha"),
            window=_as_int(m["window"], "window"),
            max_freq=_as_int(m["max_freq"], "max_freq"),
            n_modes=_as_int(m["n_modes"], "n_modes"),
            poo_tol=_as_float(m["poo_tol"], "poo_tol"),
            solve_tol=_as_float(m["solve_tol"], "solve_tol"),
            data_poo_tol=_as_float(m["data_poo_tol"], "data_poo_tol"),
            matrix_poo_tol=_as_float(m["matrix_poo_tol"], "matrix_poo_tol"),
            S=S,
            matrix_linear=m["matrix_linear"].lower() in ("1", "true", "yes"),
            pair_count=_as_int(m["pair_count"], "pair_count"),
        )

    @classmethod
    def from_file(cls, path, overrides: Mapping[str, object] | None = None) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_mapping(parse_flat_config(fh.read()), overrides)

    def to_record(self) -> dict:
        rec = {
            "seed": self.seed,
            "system": self.system,
            "d": self.d,
            "N": self.N,
            "rho": self.rho,
            "orbit_length": self.orbit_length,
            "kmax": self.kmax,
            "alpha": self.alpha,
            "window": self.window,
            "max_freq": self.max_freq,
            "n_modes": self.n_modes,
            "poo_tol": self.poo_tol,
            "solve_tol": self.solve_tol,
            "data_poo_tol": self.data_poo_tol,
            "matrix_poo_tol": self.matrix_poo_tol,
            "S": self.S,
            "matrix_linear": self.matrix_linear,
            "pair_count": self.pair_count,
        }
        if self.system == "shift":
            rec["alphabet"] = self.alphabet
        else:
            rec["matrix"] = [list(r) for r in self.matrix]
        return rec

    def config_hash(self) -> str:
        blob = json.dumps(self.to_record(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def build_system(self) -> BaseSystem:
        if self.system == "shift":
            return FullShift(self.alphabet)
        return ToralAutomorphism(self.matrix)


def _as_int(v: str, name: str) -> int:
    try:
        return int(v)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {v!r}") from exc


def _as_float(v: str, name: str) -> float:
    try:
        return float(v)
    except ValueError as exc:
        raise ConfigError(f"{name} must be a number, got {v!r}") from exc
