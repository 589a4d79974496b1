"""Model parameter set shared by the analytic layers and the simulators."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .dist import DistributionSpec
from .errors import InvalidConfig

INDEPENDENT = "independent"
MUTUAL = "mutual"


@dataclass(frozen=True)
class ModelParams:
    """SEIR-with-tracing parameters.

    ``lam`` is the per-individual contact rate (the pairwise rate is
    ``lam / N``); ``p`` the naming probability; ``pi_r`` and ``pi_t`` the
    interview probabilities of untraced and traced removals.
    """

    lam: float
    p: float = 0.0
    pi_r: float = 0.0
    pi_t: float = 0.0
    infectious: DistributionSpec = field(default_factory=lambda: DistributionSpec.exponential(1.0))
    latent: DistributionSpec = field(default_factory=DistributionSpec.zero)
    delay: DistributionSpec = field(default_factory=DistributionSpec.zero)
    N: int = 1000
    m: int = 1
    delay_coupling: str = INDEPENDENT

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InvalidConfig(f"lam must be finite and >= 0, got {self.lam}")
        for name in ("p", "pi_r", "pi_t"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {v}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidConfig(f"N must be an integer >= 1, got {self.N}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidConfig(f"m must be an integer >= 1, got {self.m}")
        if self.delay_coupling not in (INDEPENDENT, MUTUAL):
            raise InvalidConfig(f"delay_coupling must be 'independent' or 'mutual', got {self.delay_coupling!r}")
        for name in ("infectious", "latent", "delay"):
            if not isinstance(getattr(self, name), DistributionSpec):
                raise InvalidConfig(f"{name} must be a DistributionSpec")

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "p": self.p,
            "pi_R": self.pi_r,
            "pi_T": self.pi_t,
            "infectious": self.infectious.to_dict(),
            "latent": self.latent.to_dict(),
            "delay": self.delay.to_dict(),
            "N": self.N,
            "m": self.m,
            "delay_coupling": self.delay_coupling,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        known = {"lambda", "p", "pi_R", "pi_T", "infectious", "latent", "delay", "N", "m", "delay_coupling"}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfig(f"unknown parameter(s): {sorted(unknown)}")
        kw = {}
        if "lambda" in d:
            kw["lam"] = float(d["lambda"])
        else:
            raise InvalidConfig("missing parameter 'lambda'")
        for src, dst in (("p", "p"), ("pi_R", "pi_r"), ("pi_T", "pi_t")):
            if src in d:
                kw[dst] = float(d[src])
        for name in ("infectious", "latent", "delay"):
            if name in d:
                kw[name] = DistributionSpec.from_dict(d[name])
        for name in ("N", "m"):
            if name in d:
                kw[name] = int(d[name])
        if "delay_coupling" in d:
            kw["delay_coupling"] = str(d["delay_coupling"]).lower()
        return cls(**kw)
