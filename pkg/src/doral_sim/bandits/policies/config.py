"""
PolicyConfig - settings shared by every decision-making agent
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Sequence

from ..allocation import RATIO_MODES
from ..errors import ConfigurationError
from ..estimators import RADIUS_MODES
from ..identify import ACCEPTANCE_RULES, CUTOFF_SCOPES

POLICY_KINDS = ("DORAL", "DLinUCB", "Random", "DALP")
TAU_MODES = ("given", "estimated", "ones")
FALLBACKS = ("fail", "rank")

DEFAULT_LABELS = {
    "DORAL": "DORAL",
    "DLinUCB": "D-LinUCB",
    "Random": "Random",
    "DALP": "D-ALP",
}


@dataclass(frozen=True)
class PolicyConfig:
    """
    Attributes:
        kind: DORAL, DLinUCB, Random or DALP
        label: Display name (defaults to the policy's usual name)
        cutoff: Cut-off m for the baselines (DORAL learns its own)
        target_arms: A', responsive arms DORAL identifies
        delta: Confidence parameter of the delay race and of the LinUCB width
        alpha: Delay tail parameter
        lam: Ridge parameter
        tau_mode: Source of tau_a(m): "given", "estimated" or "ones"
        ratio_mode: Budget ratio fed to the LP: "remaining", "as_printed" or "static"
        radius_mode: Bias term of the delay bounds: "plugin" or "worst_case"
        acceptance_rule: "responsive" or "as_printed"
        cutoff_scope: Arms the cut-off is taken over: "accepted" or "all"
        identification_fraction: Identification budget cap as a fraction of B
        identification_fallback: "fail" raises on a stalled race, "rank" completes it
        fixed_cutoff: Bypass identification and use this cut-off with every arm
        fallback_cutoff: Cut-off used when the race leaves m unbounded
    """

    kind: str = "DORAL"
    label: Optional[str] = None
    cutoff: float = 500.0
    target_arms: int = 5
    delta: float = 0.05
    alpha: float = 1.0
    lam: float = 1.0
    tau_mode: str = "given"
    ratio_mode: str = "remaining"
    radius_mode: str = "plugin"
    acceptance_rule: str = "responsive"
    cutoff_scope: str = "accepted"
    identification_fraction: float = 0.25
    identification_fallback: str = "fail"
    fixed_cutoff: Optional[float] = None
    fallback_cutoff: float = 500.0

    @property
    def name(self) -> str:
        return self.label or DEFAULT_LABELS.get(self.kind, self.kind)

    @property
    def uses_allocation(self) -> bool:
        return self.kind in ("DORAL", "DALP")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def validate(self, n_arms: Optional[int] = None, costs: Optional[Sequence[float]] = None):
        """
        Check the settings, optionally against the arm set they will run on.

        Raises:
            ConfigurationError: With the offending field named in the message
        """
        choices = {
            "kind": (self.kind, POLICY_KINDS),
            "tau_mode": (self.tau_mode, TAU_MODES),
            "ratio_mode": (self.ratio_mode, RATIO_MODES),
            "radius_mode": (self.radius_mode, RADIUS_MODES),
            "acceptance_rule": (self.acceptance_rule, ACCEPTANCE_RULES),
            "cutoff_scope": (self.cutoff_scope, CUTOFF_SCOPES),
            "identification_fallback": (self.identification_fallback, FALLBACKS),
        }
        for key, (value, allowed) in choices.items():
            if value not in allowed:
                raise ConfigurationError(f"{key}: expected one of {allowed}, got {value!r}")

        if not 0 < self.delta < 1:
            raise ConfigurationError(f"delta: must lie in (0, 1), got {self.delta}")
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha: must be > 0, got {self.alpha}")
        if not self.lam > 0:
            raise ConfigurationError(f"lam: must be > 0, got {self.lam}")
        if not self.cutoff > 0:
            raise ConfigurationError(f"cutoff: must be > 0, got {self.cutoff}")
        if not 0 < self.identification_fraction <= 1:
            raise ConfigurationError(
                f"identification_fraction: must lie in (0, 1], got {self.identification_fraction}"
            )
        if self.fixed_cutoff is not None and not self.fixed_cutoff > 0:
            raise ConfigurationError(f"fixed_cutoff: must be > 0, got {self.fixed_cutoff}")
        if not (self.fallback_cutoff > 0 and math.isfinite(self.fallback_cutoff)):
            raise ConfigurationError("fallback_cutoff: must be finite and > 0")

        if self.tau_mode == "estimated" and (self.kind != "DORAL" or self.fixed_cutoff is not None):
            raise ConfigurationError(
                "tau_mode: 'estimated' needs the identification stage of DORAL"
            )

        if n_arms is not None and self.kind == "DORAL" and not 1 <= self.target_arms <= n_arms:
            raise ConfigurationError(
                f"target_arms: A' must lie in [1, {n_arms}], got {self.target_arms}"
            )
        if costs is not None and self.uses_allocation and any(cost != 1 for cost in costs):
            raise ConfigurationError(
                f"{self.name}: the allocation LP assumes unit costs; got costs {list(costs)}"
            )
        return self
