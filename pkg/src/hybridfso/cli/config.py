"""Sweep specifications and the strict ``key = value`` configuration format.

A config file holds one ``key = value`` pair per line; ``#`` starts a comment.
Unknown or repeated keys are errors. Quantities carry an explicit unit suffix
(``_db`` or ``_linear``). Example::

    scheme = DF, AF
    regime = moderate
    n_users = 2
    gamma_th_db = 10
    sweep = gamma_avg_db
    sweep_values = 0, 5, 10, 15, 20, 25, 30
    metrics = outage, ber
    mode = both
    trials = 1000000
    seed = 0
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from ..analytic import Scheme, SystemConfig
from ..channels import MODERATE, STRONG, TurbulenceParams
from ..errors import ConfigError, HybridFsoError

__all__ = [
    "SweepVariable", "Metric", "Mode", "Base", "SweepSpec", "parse_config", "parse_config_text",
    "db_to_linear", "MIN_SIM_TRIALS",
]

MIN_SIM_TRIALS = 10 ** 4
REGIMES = {"moderate": MODERATE, "strong": STRONG}


class SweepVariable(enum.Enum):
    GAMMA_AVG_DB = "gamma_avg_db"
    N_USERS = "n_users"
    GAMMA_TH_DB = "gamma_th_db"


class Metric(enum.Enum):
    OUTAGE = "outage"
    BER = "ber"


class Mode(enum.Enum):
    ANALYTIC = "analytic"
    SIMULATE = "simulate"
    BOTH = "both"

    @property
    def analytic(self) -> bool:
        return self is not Mode.SIMULATE

    @property
    def simulate(self) -> bool:
        return self is not Mode.ANALYTIC


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class Base:
    """One curve of a sweep: a system configuration plus the dB values it was built from."""

    config: SystemConfig
    gamma_avg_db: float
    gamma_th_db: float
    regime: str = "custom"

    def at(self, variable: SweepVariable, value) -> "Base":
        """The base with the swept quantity set to ``value``."""
        if variable is SweepVariable.GAMMA_AVG_DB:
            s = db_to_linear(value)
            return replace(self, config=self.config.with_(mean_snr_rf=s, mean_snr_fso=s), gamma_avg_db=value)
        if variable is SweepVariable.GAMMA_TH_DB:
            return replace(self, config=self.config.with_(gamma_th=db_to_linear(value)), gamma_th_db=value)
        return replace(self, config=self.config.with_(n_users=int(value)))


@dataclass(frozen=True)
class SweepSpec:
    """A sweep of one variable over one or more base configurations."""

    bases: tuple
    sweep_variable: SweepVariable
    sweep_values: tuple
    metrics: tuple = (Metric.OUTAGE, Metric.BER)
    mode: Mode = Mode.ANALYTIC
    trials: int = 10 ** 6
    seed: int = 0
    output_path: Optional[str] = None
    preset: Optional[str] = None
    notes: tuple = field(default=())

    def __post_init__(self):
        if not self.bases:
            raise ConfigError("a sweep needs at least one base configuration")
        if not self.sweep_values:
            raise ConfigError("sweep_values: must be nonempty")
        if any(b >= a for a, b in zip(self.sweep_values[1:], self.sweep_values)):
            raise ConfigError("sweep_values: must be strictly increasing")
        if not self.metrics:
            raise ConfigError("metrics: must be nonempty")
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials: must be a positive integer, got {self.trials!r}")
        if self.mode.simulate and self.trials < MIN_SIM_TRIALS:
            raise ConfigError(f"trials: simulation needs at least {MIN_SIM_TRIALS}, got {self.trials}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed: must be an integer in [0, 2^64), got {self.seed!r}")
        if self.sweep_variable is SweepVariable.N_USERS:
            if any(int(v) != v or v < 1 for v in self.sweep_values):
                raise ConfigError("sweep_values: user counts must be positive integers")

    def with_(self, **changes) -> "SweepSpec":
        return replace(self, **changes)

    def cells(self):
        """(cell index, base at the swept value) in output order: base, then sweep value."""
        index = 0
        for base in self.bases:
            for value in self.sweep_values:
                yield index, base.at(self.sweep_variable, value)
                index += 1


# -- parsing --------------------------------------------------------------------

_SCALAR_KEYS = {
    "regime", "alpha", "beta", "xi", "kappa", "n_users", "gamma_th_db", "gamma_th_linear",
    "gamma_avg_db", "gamma_avg_linear", "eta", "c_const", "sweep", "mode", "trials", "seed", "output",
}
_LIST_KEYS = {"scheme", "sweep_values", "metrics"}
_KEYS = _SCALAR_KEYS | _LIST_KEYS


class _Reader:
    def __init__(self, entries: dict, where: dict, source: str):
        self.entries = entries
        self.where = where
        self.source = source
        self.used: set = set()

    def fail(self, key, message):
        loc = f"{self.source}:{self.where[key]}" if key in self.where else self.source
        raise ConfigError(f"{loc}: {key}: {message}")

    def has(self, key):
        return key in self.entries

    def text(self, key, default=None):
        if key not in self.entries:
            if default is None:
                self.fail(key, "required key is missing")
            return default
        self.used.add(key)
        return self.entries[key]

    def items(self, key, default=None):
        raw = self.text(key, default)
        items = [p.strip() for p in raw.split(",")]
        if not raw.strip() or any(not p for p in items):
            self.fail(key, f"expected a comma-separated list, got {raw!r}")
        return items

    def number(self, key, default=None, *, positive=False, nonnegative=False):
        raw = self.text(key, None if default is None else repr(default))
        try:
            v = float(raw)
        except ValueError:
            self.fail(key, f"expected a number, got {raw!r}")
        if not math.isfinite(v):
            self.fail(key, f"expected a finite number, got {raw!r}")
        if positive and not v > 0:
            self.fail(key, f"must be positive, got {raw}")
        if nonnegative and v < 0:
            self.fail(key, f"must be nonnegative, got {raw}")
        return v

    def integer(self, key, default=None, *, minimum=None):
        raw = self.text(key, None if default is None else str(default))
        try:
            v = int(raw)
        except ValueError:
            self.fail(key, f"expected an integer, got {raw!r}")
        if minimum is not None and v < minimum:
            self.fail(key, f"must be at least {minimum}, got {v}")
        return v

    def choice(self, key, enum_cls, raw):
        try:
            return enum_cls(raw.lower())
        except ValueError:
            allowed = ", ".join(e.value for e in enum_cls)
            self.fail(key, f"unknown value {raw!r} (expected one of {allowed})")


def _split_lines(text: str, source: str):
    entries, where = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, value = (p.strip() for p in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: {key}: unknown key")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: {key}: repeated key (first on line {where[key]})")
        if not value:
            raise ConfigError(f"{source}:{lineno}: {key}: empty value")
        entries[key] = value
        where[key] = lineno
    return entries, where


def _one_of(r: _Reader, db_key: str, lin_key: str, swept: bool):
    """Read a quantity given either in dB or linear units; returns (linear, dB)."""
    if r.has(db_key) and r.has(lin_key):
        r.fail(lin_key, f"give either {db_key} or {lin_key}, not both")
    if swept:
        for k in (db_key, lin_key):
            if r.has(k):
                r.fail(k, "is swept; remove it or choose another sweep variable")
        return 1.0, 0.0
    if r.has(lin_key):
        lin = r.number(lin_key, positive=True)
        return lin, 10.0 * math.log10(lin)
    db = r.number(db_key)
    return db_to_linear(db), db


def parse_config_text(text: str, source: str = "<config>") -> SweepSpec:
    """Parse config text into a validated SweepSpec (raises ConfigError)."""
    entries, where = _split_lines(text, source)
    r = _Reader(entries, where, source)

    sweep = r.choice("sweep", SweepVariable, r.text("sweep", "gamma_avg_db"))
    schemes = []
    for item in r.items("scheme"):
        try:
            schemes.append(Scheme.parse(item))
        except HybridFsoError:
            r.fail("scheme", f"unknown scheme {item!r} (expected DF or AF)")
    if len(set(schemes)) != len(schemes):
        r.fail("scheme", "repeated scheme")

    regime = r.text("regime", "moderate").lower()
    custom = ("alpha", "beta", "xi")
    if regime in REGIMES:
        for k in custom:
            if r.has(k):
                r.fail(k, f"only allowed with regime = custom (regime is {regime})")
        t = REGIMES[regime]
        turb = TurbulenceParams(t.alpha, t.beta, t.xi, r.number("kappa", 1.0, positive=True))
    elif regime == "custom":
        vals = [r.number(k, positive=True) for k in custom]
        turb = TurbulenceParams(*vals, kappa=r.number("kappa", 1.0, positive=True))
    else:
        r.fail("regime", f"unknown regime {regime!r} (expected moderate, strong or custom)")

    if sweep is SweepVariable.N_USERS:
        if r.has("n_users"):
            r.fail("n_users", "is swept; remove it or choose another sweep variable")
        n_users = 1
    else:
        n_users = r.integer("n_users", minimum=1)
    g_th, g_th_db = _one_of(r, "gamma_th_db", "gamma_th_linear", sweep is SweepVariable.GAMMA_TH_DB)
    g_avg, g_avg_db = _one_of(r, "gamma_avg_db", "gamma_avg_linear", sweep is SweepVariable.GAMMA_AVG_DB)
    eta = r.number("eta", 1.0, positive=True)
    c_const = r.number("c_const", 1.0, positive=True)

    values = []
    for item in r.items("sweep_values"):
        try:
            v = float(item)
        except ValueError:
            r.fail("sweep_values", f"expected numbers, got {item!r}")
        if not math.isfinite(v):
            r.fail("sweep_values", f"expected finite numbers, got {item!r}")
        if sweep is SweepVariable.N_USERS:
            if v != int(v) or v < 1:
                r.fail("sweep_values", f"user counts must be positive integers, got {item!r}")
            v = int(v)
        values.append(v)
    if any(b >= a for a, b in zip(values[1:], values)):
        r.fail("sweep_values", "must be strictly increasing")

    metrics = [r.choice("metrics", Metric, m) for m in r.items("metrics", "outage, ber")]
    if len(set(metrics)) != len(metrics):
        r.fail("metrics", "repeated metric")
    mode = r.choice("mode", Mode, r.text("mode", "analytic"))
    trials = r.integer("trials", 10 ** 6, minimum=1)
    if mode.simulate and trials < MIN_SIM_TRIALS:
        r.fail("trials", f"simulation needs at least {MIN_SIM_TRIALS}, got {trials}")
    seed = r.integer("seed", 0, minimum=0)
    if seed >= 2 ** 64:
        r.fail("seed", "must be below 2^64")
    output = r.text("output", "") or None

    bases = []
    for scheme in schemes:
        try:
            cfg = SystemConfig(scheme, n_users, g_avg, g_avg, g_th, turb, eta, c_const)
        except HybridFsoError as exc:
            raise ConfigError(f"{source}: {exc}") from exc
        bases.append(Base(cfg, g_avg_db, g_th_db, regime))
    return SweepSpec(tuple(bases), sweep, tuple(values), tuple(metrics), mode, trials, seed, output)


def parse_config(path) -> SweepSpec:
    """Read and validate a config file (raises ConfigError)."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{p}: no such config file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{p}: cannot read config: {exc}") from None
    return parse_config_text(text, str(p))
