"""Experiment configuration: flat key=value files, overrides, hashing.

A configuration is a frozen record of everything an experiment run
depends on.  Sources merge in a fixed order: built-in defaults, then a
config file of ``key = value`` lines, then command-line overrides.  The
canonical text form feeds a SHA-256 digest whose first twelve hex
characters stamp every CSV header, so outputs are traceable to the
exact configuration that produced them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

from hermult.symbols import REGISTRY_KEYS

__all__ = [
    "ConfigError",
    "BudgetError",
    "ExperimentConfig",
    "parse_config_file",
    "parse_param_list",
]

MAX_TENSOR_POINTS = 2**24

_INT_KEYS = ("n", "lambda", "quad", "jmin", "jmax", "seed")
_FLOAT_KEYS = ("tol_id", "tol_quad")
_FIELD_OF = {
    "n": "dim",
    "lambda": "band_limit",
    "quad": "quad",
    "jmin": "jmin",
    "jmax": "jmax",
    "seed": "seed",
    "tol_id": "tol_id",
    "tol_quad": "tol_quad",
    "symbol": "symbol",
    "out": "out_dir",
    "orders": "orders",
}


class ConfigError(Exception):
    """Invalid or inconsistent configuration; maps to exit code 2."""


class BudgetError(ConfigError):
    """Configuration valid in form but beyond the computational budget."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated settings for one command invocation."""

    command: str
    dim: int = 1
    band_limit: int = 24
    quad: int = 0
    symbol: str = "identity"
    symbol_params: tuple[tuple[str, float], ...] = ()
    jmin: int = 3
    jmax: int = 6
    orders: tuple[int, ...] = (0, 1, 2)
    tol_id: float = 1e-9
    tol_quad: float = 1e-7
    out_dir: str = "hermult-out"
    seed: int = 20260816
    corrupt: bool = False

    @property
    def resolved_quad(self) -> int:
        """Per-axis node count; zero means the 2 Lambda + 16 default."""
        return self.quad if self.quad > 0 else 2 * self.band_limit + 16

    @property
    def params(self) -> dict[str, float]:
        return dict(self.symbol_params)

    def validate(self) -> "ExperimentConfig":
        if self.command not in ("verify", "decay", "cks", "normsweep",
                                "transfer"):
            raise ConfigError(f"unknown command {self.command!r}")
        if not 1 <= self.dim <= 3:
            raise ConfigError("n must be 1, 2, or 3")
        if not 1 <= self.band_limit <= 4096:
            raise ConfigError("lambda must be between 1 and 4096")
        if self.quad < 0 or self.quad > 4096:
            raise ConfigError("quad must be between 0 and 4096")
        if self.jmin < 0:
            raise ConfigError("jmin must be nonnegative")
        if self.jmin > self.jmax:
            raise ConfigError("empty block range: jmin exceeds jmax")
        if self.symbol not in REGISTRY_KEYS:
            raise ConfigError(
                f"unknown symbol {self.symbol!r}; choose from {REGISTRY_KEYS}"
            )
        if self.tol_id <= 0 or self.tol_quad <= 0:
            raise ConfigError("tolerances must be positive")
        if not self.orders or any(m < 0 or m > 6 for m in self.orders):
            raise ConfigError("orders must be nonempty, between 0 and 6")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.resolved_quad**self.dim > MAX_TENSOR_POINTS:
            raise BudgetError(
                f"quadrature budget exceeded: {self.resolved_quad} nodes "
                f"per axis in dimension {self.dim} is past "
                f"{MAX_TENSOR_POINTS} total points; lower lambda or quad"
            )
        return self

    def canonical_text(self) -> str:
        """Deterministic serialization used for hashing and provenance."""
        rows = [
            f"command={self.command}",
            f"corrupt={int(self.corrupt)}",
            f"jmax={self.jmax}",
            f"jmin={self.jmin}",
            f"lambda={self.band_limit}",
            f"n={self.dim}",
            f"orders={','.join(str(m) for m in self.orders)}",
            f"quad={self.quad}",
            f"seed={self.seed}",
            f"symbol={self.symbol}",
            f"tol_id={self.tol_id:.17g}",
            f"tol_quad={self.tol_quad:.17g}",
        ]
        for key, value in sorted(self.symbol_params):
            rows.append(f"param.{key}={value:.17g}")
        return "\n".join(rows) + "\n"

    @property
    def config_hash(self) -> str:
        digest = hashlib.sha256(self.canonical_text().encode())
        return digest.hexdigest()[:12]

    def with_overrides(self, **updates) -> "ExperimentConfig":
        return replace(self, **updates)


def parse_param_list(items) -> tuple[tuple[str, float], ...]:
    """Turn repeated ``key=value`` strings into sorted float pairs."""
    out: dict[str, float] = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"malformed parameter {item!r}; expected k=v")
        key, _, raw = item.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"malformed parameter {item!r}; empty name")
        try:
            out[key] = float(raw.strip())
        except ValueError:
            raise ConfigError(
                f"parameter {key!r} has non-numeric value {raw.strip()!r}"
            ) from None
    return tuple(sorted(out.items()))


def parse_config_file(path) -> dict[str, str]:
    """Read a flat ``key = value`` file into a raw string mapping.

    Blank lines and ``#`` comments are skipped; symbol parameters use
    dotted keys (``param.delta = 0.5``).  Unknown keys are rejected so
    typos surface as configuration errors instead of silent defaults.
    """
    text = Path(path).read_text()
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = body.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not (key in _FIELD_OF or key.startswith("param.")):
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = value.strip()
    return raw


def config_from_sources(
    command: str,
    file_values: dict[str, str] | None = None,
    overrides: dict | None = None,
) -> ExperimentConfig:
    """Merge defaults, config-file values, and CLI overrides, validate."""
    cfg = ExperimentConfig(command=command)
    params: dict[str, float] = {}
    updates: dict = {}

    for key, value in (file_values or {}).items():
        if key.startswith("param."):
            name = key[len("param."):]
            try:
                params[name] = float(value)
            except ValueError:
                raise ConfigError(
                    f"parameter {name!r} has non-numeric value {value!r}"
                ) from None
            continue
        field_name = _FIELD_OF[key]
        if key in _INT_KEYS:
            try:
                updates[field_name] = int(value)
            except ValueError:
                raise ConfigError(f"key {key!r} needs an integer") from None
        elif key in _FLOAT_KEYS:
            try:
                updates[field_name] = float(value)
            except ValueError:
                raise ConfigError(f"key {key!r} needs a number") from None
        elif key == "orders":
            try:
                updates[field_name] = tuple(
                    int(tok) for tok in value.split(",") if tok.strip()
                )
            except ValueError:
                raise ConfigError("orders needs comma-separated integers") from None
        else:
            updates[field_name] = value

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "symbol_params":
            params.update(dict(value))
        else:
            updates[key] = value

    if params:
        updates["symbol_params"] = tuple(sorted(params.items()))
    return cfg.with_overrides(**updates).validate()
