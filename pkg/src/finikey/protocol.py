"""Protocol descriptions shared by the entropy, rate and optimizer layers."""
from __future__ import annotations

import enum
from dataclasses import dataclass


class Protocol(str, enum.Enum):
    BB84 = "bb84"
    SIX_STATE = "six-state"

    @property
    def monitored_bases(self) -> tuple[str, ...]:
        """Bases whose error rate is bounded by parameter estimation."""
        if self is Protocol.BB84:
            return ("Z", "X")
        return ("Z", "X", "Y")

    @classmethod
    def parse(cls, text: str) -> "Protocol":
        key = text.strip().lower().replace("_", "-")
        aliases = {"bb84": cls.BB84, "six-state": cls.SIX_STATE, "sixstate": cls.SIX_STATE, "6-state": cls.SIX_STATE}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown protocol {text!r}") from None


class AttackModel(str, enum.Enum):
    COLLECTIVE = "collective"
    COHERENT = "coherent"
    POSTSELECTION = "postselection"

    @classmethod
    def parse(cls, text: str) -> "AttackModel":
        key = text.strip().lower().replace("-", "").replace("_", "")
        for model in cls:
            if model.value == key:
                return model
        raise ValueError(f"unknown attack model {text!r}")


@dataclass(frozen=True)
class ProtocolSpec:
    """Protocol plus the classical post-processing parameters.

    Attributes
    ----------
    kind : Protocol
    sifting_ratio : float
        Fraction of the N initial signals that survive sifting, N_s = ratio * N.
        Defaults to 1 (asymmetric basis choice in the limit of large N).
    ec_efficiency : float
        Error-correction overhead factor f in leak = n f h(Q) + log2(2/eps_EC).
    povm_outcomes : int
        Outcomes of the QBER-measuring POVM, fixed to 2.
    """

    kind: Protocol = Protocol.BB84
    sifting_ratio: float = 1.0
    ec_efficiency: float = 1.1
    povm_outcomes: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", Protocol(self.kind))
        if not 0.0 < self.sifting_ratio <= 1.0:
            raise ValueError(f"sifting_ratio must be in (0, 1], got {self.sifting_ratio}")
        if self.ec_efficiency < 1.0:
            raise ValueError(f"ec_efficiency must be >= 1, got {self.ec_efficiency}")
        if self.povm_outcomes != 2:
            raise ValueError("povm_outcomes is fixed to 2")

    def sifted(self, N: float) -> float:
        """Number of signals N_s left after sifting."""
        return float(int(self.sifting_ratio * N))
