from dataclasses import dataclass, fields
from typing import Dict, Optional


@dataclass
class OracleCounter:
    """Count oracle calls made by the solvers

    One counter is attached per run; step functions bump it for every gradient,
    prox and operator application they perform.
    """
    grad_f: int = 0
    prox_g: int = 0
    prox_hconj: int = 0
    k_apply: int = 0
    k_adjoint: int = 0

    def record(self, oracle: str, calls: int = 1):
        """
        Record calls to a single oracle

        Args:
            oracle: Name of the oracle field
            calls: Number of calls to add
        """
        setattr(self, oracle, getattr(self, oracle) + calls)

    def merge(self, other: "OracleCounter") -> "OracleCounter":
        for f in fields(self):
            self.record(f.name, getattr(other, f.name))
        return self

    def reset(self):
        for f in fields(self):
            setattr(self, f.name, 0)

    def as_dict(self) -> Dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def bump(counter: Optional[OracleCounter], oracle: str):
    if counter is not None:
        counter.record(oracle)
