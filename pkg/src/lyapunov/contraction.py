from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from ..config import get_settings
from ..tuning.rates import RateBound


@dataclass(frozen=True)
class LyapunovRecord:
    """One trace row: Lyapunov value, its theta^k envelope and the KKT residual at iteration k"""
    k: int
    value: float
    envelope: float
    kkt: float
    wall_ns: int = 0


@dataclass
class ContractionReport:
    violations: List[int] = field(default_factory=list)
    checked: int = 0
    no_linear_rate: bool = False
    note: str = ""

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> Optional[int]:
        return self.violations[0] if self.violations else None

    def as_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "violations": list(self.violations),
            "checked": self.checked,
            "no_linear_rate": self.no_linear_rate,
            "note": self.note,
        }


def _defaults(slack: Optional[float], floor: Optional[float]):
    settings = get_settings()
    return (settings.ENVELOPE_SLACK if slack is None else slack,
            settings.ENVELOPE_FLOOR if floor is None else floor)


def verify_contraction(trace: Sequence[LyapunovRecord], rate: RateBound,
                       slack: Optional[float] = None, floor: Optional[float] = None) -> ContractionReport:
    """
    List every k with value_k > theta^k * value_0 * (1 + slack) + floor * value_0

    Args:
        trace: Records from a run
        rate: Contraction factor
        slack: Relative slack on the envelope
        floor: Absolute allowance relative to value_0, for values at rounding level

    Returns:
        ContractionReport: Empty violations means the envelope holds
    """
    slack, floor = _defaults(slack, floor)
    if rate.no_linear_rate:
        return ContractionReport(checked=len(trace), no_linear_rate=True, note="no linear rate")
    if not trace:
        return ContractionReport()

    value0, k0 = trace[0].value, trace[0].k
    violations = [
        rec.k for rec in trace
        if rec.value > rate.theta ** (rec.k - k0) * value0 * (1 + slack) + floor * value0
    ]
    return ContractionReport(violations=violations, checked=len(trace))


def verify_per_step(trace: Sequence[LyapunovRecord], rate: RateBound,
                    slack: Optional[float] = None, floor: Optional[float] = None) -> ContractionReport:
    """List every k with value_k > theta * value_{k-1} * (1 + slack) + floor * value_0"""
    slack, floor = _defaults(slack, floor)
    if rate.no_linear_rate:
        return ContractionReport(checked=len(trace), no_linear_rate=True, note="no linear rate")
    if not trace:
        return ContractionReport()

    allowance = floor * trace[0].value
    violations = [
        cur.k for prev, cur in zip(trace, trace[1:])
        if cur.value > rate.theta * prev.value * (1 + slack) + allowance
    ]
    return ContractionReport(violations=violations, checked=max(len(trace) - 1, 0))
