# run parameters for the BP<m,n>*BV_k engine

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError, field_validator, model_validator
from sympy import isprime

from .bvring import filtration_truncation
from .errors import ConfigurationError
from .fgl import DEFAULT_PADIC_PRECISION, FLAVORS, default_truncation

ENV_PREFIX = "BPBV_"

Command = Literal["pseries", "alpha", "dickson", "verify-main", "filtration", "recheck"]
COMMANDS = ("pseries", "alpha", "dickson", "verify-main", "filtration", "recheck")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
DEFAULT_DEGREES = tuple(range(-24, 25, 2))


# ========== 1. the formal group law ==========

class LawConfig(BaseModel):
    p: int = 2
    """the prime"""

    n: int = 1
    """top generator v_n of the law"""

    flavor: str = "hazewinkel"
    """generator family: hazewinkel or araki"""

    trunc_deg: Optional[int] = None
    """x-adic truncation D; None means the default for (p, m, n)"""

    padic_prec: int = DEFAULT_PADIC_PRECISION
    """N in Z/p^N, used only when m = 0"""


# ========== 2. slice checks ==========

class SliceConfig(BaseModel):
    degrees: Optional[List[int]] = None
    """cohomological degrees tested by the filtration command; None means the even degrees -24..24 up to D"""

    slack: Optional[int] = None
    """extra x-degree used to lift kernels before projecting; None means p^n"""

    filtration_trunc: Optional[int] = None
    """truncation for the filtration command; None means filtration_truncation(p, m, n)"""

    @field_validator("degrees", mode="before")
    @classmethod
    def _split_degrees(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [int(item) for item in value.replace(";", ",").split(",") if item.strip()]
        return value


# ========== 3. one run ==========

class RunConfig(BaseModel):
    command: Command = "verify-main"
    """CLI subcommand"""

    m: int = 1
    """bottom generator v_m of E* (m = 0 means Z/p^N[v_1..v_n])"""

    k: Optional[int] = None
    """rank of the elementary abelian group; None means w"""

    law: LawConfig = LawConfig()
    slices: SliceConfig = SliceConfig()

    seed: int = 0
    """seed for the random invertible matrices of the dickson command"""

    out: Optional[Path] = None
    """report path; stdout when unset"""

    cache_dir: Optional[Path] = None
    """law cache directory; overrides LAW_CACHE_DIR"""

    log_level: str = "WARNING"

    no_timing: bool = False
    """record every timing as 0 so that reports compare byte for byte"""

    archive_url: Optional[str] = None
    """SQLAlchemy URL of the optional report archive"""

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"unknown log level {value!r}; expected one of {LOG_LEVELS}")
        return level

    @model_validator(mode="after")
    def _check_parameters(self) -> "RunConfig":
        law = self.law
        if not isprime(law.p):
            raise ValueError(f"p={law.p} is not prime")
        if law.n < 1:
            raise ValueError(f"n must be >= 1, got {law.n}")
        if not 0 <= self.m <= law.n:
            raise ValueError(f"need 0 <= m <= n, got m={self.m}, n={law.n}")
        if law.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {law.flavor!r}; expected one of {FLAVORS}")
        if self.k is not None:
            if self.k < 1:
                raise ValueError(f"k must be >= 1, got {self.k}")
            # beta, beta' and the Q_i live in H*BV_k for every k
            if self.command != "dickson" and self.k > self.w:
                raise ValueError(f"k={self.k} exceeds w = n+1-m = {self.w}")
        if law.trunc_deg is not None and law.trunc_deg < 1:
            raise ValueError(f"trunc_deg must be >= 1, got {law.trunc_deg}")
        if law.padic_prec < 1:
            raise ValueError(f"padic_prec must be >= 1, got {law.padic_prec}")
        return self

    # --- derived ---

    @property
    def p(self) -> int:
        return self.law.p

    @property
    def n(self) -> int:
        return self.law.n

    @property
    def w(self) -> int:
        return self.law.n + 1 - self.m

    @property
    def effective_k(self) -> int:
        return self.w if self.k is None else self.k

    @property
    def effective_D(self) -> int:
        if self.command == "filtration":
            if self.slices.filtration_trunc is not None:
                return self.slices.filtration_trunc
            if self.law.trunc_deg is None:
                return filtration_truncation(self.p, self.m, self.n)
        if self.law.trunc_deg is not None:
            return self.law.trunc_deg
        return default_truncation(self.p, self.m, self.n)

    @property
    def effective_N(self) -> int:
        return self.law.padic_prec

    @property
    def effective_degrees(self) -> List[int]:
        if self.slices.degrees is not None:
            return list(self.slices.degrees)
        return [degree for degree in DEFAULT_DEGREES if degree <= self.effective_D]

    def params(self) -> Dict[str, Any]:
        """Config echo for the report header."""
        return {
            "command": self.command,
            "p": self.p,
            "m": self.m,
            "n": self.n,
            "k": self.effective_k,
            "w": self.w,
            "flavor": self.law.flavor,
            "D": self.effective_D,
            "N": self.effective_N,
            "degrees": self.effective_degrees,
        }

    # --- sources ---

    @classmethod
    def from_flat(cls, values: Mapping[str, Any]) -> "RunConfig":
        """Build from flat keys (prime, m, n, k, trunc_deg, degrees, ...); unknown keys are rejected."""
        nested: Dict[str, Any] = {"law": {}, "slices": {}}
        for key, value in values.items():
            name = "p" if key == "prime" else key
            if name in LawConfig.model_fields:
                nested["law"][name] = value
            elif name in SliceConfig.model_fields:
                nested["slices"][name] = value
            elif name in cls.model_fields and name not in {"law", "slices"}:
                nested[name] = value
            else:
                raise ConfigurationError(f"unknown configuration key {key!r}")
        try:
            return cls(**nested)
        except ValidationError as exc:
            messages = "; ".join(error["msg"].removeprefix("Value error, ") for error in exc.errors())
            raise ConfigurationError(messages) from exc

    @classmethod
    def from_sources(
        cls,
        cli_args: Optional[Mapping[str, Any]] = None,
        config_file: Optional[str] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> "RunConfig":
        """
        Merge defaults, a key=value file, BPBV_* environment variables and CLI flags.

        Later sources win. ``None`` values in ``cli_args`` mean "flag not given".
        """
        environ = os.environ if environ is None else environ
        values: Dict[str, Any] = {}
        if config_file:
            if not Path(config_file).is_file():
                raise ConfigurationError(f"config file {config_file} does not exist")
            for key, value in dotenv_values(config_file).items():
                if value is None:
                    continue
                name = key.lower().removeprefix(ENV_PREFIX.lower()).replace("-", "_")
                values[name] = value
        for field_name in _flat_keys():
            raw = environ.get(ENV_PREFIX + field_name.upper())
            if raw is not None:
                values[field_name] = raw
        for key, value in (cli_args or {}).items():
            if value is not None:
                values[key] = value
        return cls.from_flat(values)

    class Config:
        """Pydantic configuration."""

        arbitrary_types_allowed = True


def _flat_keys() -> List[str]:
    keys = ["prime"]
    keys += [name for name in LawConfig.model_fields if name != "p"]
    keys += list(SliceConfig.model_fields)
    keys += [name for name in RunConfig.model_fields if name not in {"law", "slices"}]
    return keys
