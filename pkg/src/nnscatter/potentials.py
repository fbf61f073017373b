"""Radial potential families for the nucleon-nucleon interaction.

The interaction model is configurable: each of the spin-independent channel
V_SI and the two spin-dependent channels V_s, V_t is one radial term drawn
from a small family (Gaussian well, regulated Yukawa, harmonic for testing,
or zero).  Units are natural: energies in MeV, lengths/times in MeV^-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("zero", "gaussian", "yukawa", "harmonic")


@dataclass(frozen=True)
class RadialTerm:
    """One radial channel with an analytic value and derivative.

    kinds and parameters:
      zero                   -- identically 0
      gaussian  {C, R}       -- C * exp(-(r/R)^2)
      yukawa    {C, mu, a}   -- C * exp(-mu r)/(mu r) * (1 - exp(-(r/a)^2))
      harmonic  {k}          -- k r^2 / 2 (testing only; does not decay)
    """

    kind: str = "zero"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown radial term kind {self.kind!r}; expected one of {KINDS}")
        required = {"zero": (), "gaussian": ("C", "R"), "yukawa": ("C", "mu", "a"),
                    "harmonic": ("k",)}[self.kind]
        missing = [p for p in required if p not in self.params]
        if missing:
            raise ValueError(f"radial term {self.kind!r} missing parameters {missing}")

    def value(self, r: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "gaussian":
            c, rr = self.params["C"], self.params["R"]
            return c * np.exp(-((r / rr) ** 2))
        if self.kind == "yukawa":
            c, mu, a = self.params["C"], self.params["mu"], self.params["a"]
            reg = 1.0 - np.exp(-((r / a) ** 2))
            return c * np.exp(-mu * r) / (mu * r) * reg
        k = self.params["k"]
        return 0.5 * k * r * r

    def derivative(self, r: float) -> float:
        """Analytic dV/dr."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "gaussian":
            c, rr = self.params["C"], self.params["R"]
            return -2.0 * r / (rr * rr) * c * np.exp(-((r / rr) ** 2))
        if self.kind == "yukawa":
            c, mu, a = self.params["C"], self.params["mu"], self.params["a"]
            e = np.exp(-mu * r)
            reg = 1.0 - np.exp(-((r / a) ** 2))
            dreg = 2.0 * r / (a * a) * np.exp(-((r / a) ** 2))
            base = c * e / (mu * r)
            dbase = c * e * (-mu / (mu * r) - 1.0 / (mu * r * r))
            return dbase * reg + base * dreg
        k = self.params["k"]
        return k * r


@dataclass(frozen=True)
class PotentialModel:
    """The three radial channels of the interaction."""

    name: str = "default"
    si: RadialTerm = field(default_factory=RadialTerm)
    s: RadialTerm = field(default_factory=RadialTerm)
    t: RadialTerm = field(default_factory=RadialTerm)

    @classmethod
    def from_config(cls, cfg: dict) -> "PotentialModel":
        def term(key):
            spec = cfg.get(key, {"kind": "zero"})
            return RadialTerm(kind=spec.get("kind", "zero"),
                              params={k: float(v) for k, v in spec.get("params", {}).items()})

        return cls(name=cfg.get("name", "default"),
                   si=term("si"), s=term("s"), t=term("t"))

    def to_config(self) -> dict:
        def spec(term):
            return {"kind": term.kind, "params": dict(term.params)}

        return {"name": self.name, "si": spec(self.si), "s": spec(self.s), "t": spec(self.t)}

    def check_decay(self, r_max: float, n_samples: int = 64, rtol: float = 1e-3) -> None:
        """Verify all channels are finite on (0, r_max] and decay toward 0 at r_max.

        The harmonic channel is test-only and exempt from the decay check.
        Raises ValueError on violation.
        """
        radii = np.linspace(r_max / n_samples, r_max, n_samples)
        for label, term in (("si", self.si), ("s", self.s), ("t", self.t)):
            values = np.array([term.value(r) for r in radii])
            if not np.all(np.isfinite(values)):
                raise ValueError(f"channel {label!r} is not finite at sampled radii")
            if term.kind in ("zero", "harmonic"):
                continue
            scale = float(np.max(np.abs(values)))
            if scale > 0.0 and abs(values[-1]) > rtol * scale:
                raise ValueError(
                    f"channel {label!r} has not decayed at r={r_max}: "
                    f"|V|={abs(values[-1]):.3e} vs peak {scale:.3e}")
