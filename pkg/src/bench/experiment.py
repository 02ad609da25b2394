"""Experiment configuration: INI files validated by pydantic models."""
import configparser
import io
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..config import get_settings
from ..solvers.base import TWO_FUNCTION_ALGORITHMS, AlgorithmId
from ..tuning.stepsizes import Regime
from ..utils.errors import ConfigError

settings = get_settings()

DEFAULT_ALGORITHMS = {
    Regime.TWO_FUNCTION: [AlgorithmId.APGD, AlgorithmId.APGE],
    Regime.SMOOTH_H: [AlgorithmId.ACV1, AlgorithmId.ACV2, AlgorithmId.APDTR1, AlgorithmId.APDTR2],
    Regime.NONSMOOTH_H: [AlgorithmId.ACV1, AlgorithmId.ACV2, AlgorithmId.APDTR1, AlgorithmId.APDTR2],
    Regime.LINEAR_CONSTRAINT: [AlgorithmId.ACV1, AlgorithmId.ACV2, AlgorithmId.APDTR1, AlgorithmId.APDTR2],
}


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemSection(_Section):
    """Problem family and its constants"""
    regime: Regime = Regime.SMOOTH_H
    d_x: int = Field(20, ge=1)
    d_y: int = Field(10, ge=1)
    seed: int = Field(0, ge=0)
    conditioning: float = Field(16.0, gt=0)
    mu_g: float = Field(1.0, ge=0)
    mu_f: float = Field(0.0, ge=0)
    mu_hstar: float = Field(1.0, gt=0)
    l1_weight: float = Field(0.1, ge=0)
    lam_min: Optional[float] = Field(None, gt=0, le=1)
    rank: Optional[int] = Field(None, ge=1)
    transfer: bool = False

    @field_validator("regime")
    @classmethod
    def regime_has_theory(cls, v: Regime) -> Regime:
        if v is Regime.CLASSICAL:
            raise ValueError("classical is a stepsize regime, not a problem family")
        return v


class RunSection(_Section):
    algorithms: List[AlgorithmId] = Field(default_factory=list)
    max_iters: int = Field(300, ge=0)
    kkt_tol: Optional[float] = Field(None, gt=0)
    epsilon: float = Field(settings.EPSILON, gt=0, lt=1)
    slack: float = Field(settings.ENVELOPE_SLACK, ge=0)
    floor: float = Field(settings.ENVELOPE_FLOOR, ge=0)
    record_wall_time: bool = settings.RECORD_WALL_TIME

    @field_validator("algorithms", mode="before")
    @classmethod
    def parse_algorithms(cls, v: Any) -> Any:
        v = _split_list(v)
        if isinstance(v, list):
            return [AlgorithmId.parse(a) if isinstance(a, str) else a for a in v]
        return v


class StepSizeSection(_Section):
    """Explicit stepsizes replacing the corollary values"""
    eta_x: Optional[float] = Field(None, gt=0)
    eta_y: Optional[float] = Field(None, gt=0)
    eta_z: Optional[float] = Field(None, gt=0)

    def overrides(self) -> Dict[str, float]:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class SweepSection(_Section):
    conditioning: List[float] = Field(default_factory=list)
    lam_min: List[float] = Field(default_factory=list)

    @field_validator("conditioning", "lam_min", mode="before")
    @classmethod
    def parse_values(cls, v: Any) -> Any:
        return _split_list(v)


class OutputSection(_Section):
    path: str = settings.OUTPUT_DIR


class ExperimentConfig(_Section):
    """One experiment: problem, run parameters, stepsize overrides, sweep and output"""
    problem: ProblemSection = Field(default_factory=ProblemSection)
    run: RunSection = Field(default_factory=RunSection)
    stepsizes: StepSizeSection = Field(default_factory=StepSizeSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def check_compatibility(self) -> "ExperimentConfig":
        p, regime = self.problem, self.problem.regime
        if regime in (Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT) and p.d_y > p.d_x:
            raise ValueError(f"{regime.value} needs d_y <= d_x, got d_y={p.d_y}, d_x={p.d_x}")
        if p.rank is not None and p.rank > min(p.d_x, p.d_y):
            raise ValueError(f"rank {p.rank} exceeds min(d_x, d_y) = {min(p.d_x, p.d_y)}")
        if p.transfer and p.mu_f == 0:
            raise ValueError("transfer needs mu_f > 0")
        if any(v <= 0 for v in self.sweep.conditioning):
            raise ValueError("sweep conditioning values must be positive")
        if any(not 0 < v <= 1 for v in self.sweep.lam_min):
            raise ValueError("sweep lam_min values must lie in (0, 1]")

        if not self.run.algorithms:
            self.run.algorithms = list(DEFAULT_ALGORITHMS[regime])
        for alg in self.run.algorithms:
            if regime is Regime.TWO_FUNCTION and alg not in TWO_FUNCTION_ALGORITHMS:
                raise ValueError(f"{alg.label} is primal-dual; two_function admits APGD, APGE, PGD, FRB")
            if regime is not Regime.TWO_FUNCTION and alg in TWO_FUNCTION_ALGORITHMS:
                raise ValueError(f"{alg.label} has no dual variable; {regime.value} needs a primal-dual method")
            if alg is AlgorithmId.CP and regime is Regime.SMOOTH_H:
                raise ValueError("CP needs a quadratic g, but smooth_h problems carry an l1 term in g")
        return self

    @property
    def algorithms(self) -> List[AlgorithmId]:
        return list(self.run.algorithms)


def _format(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(_format(v) for v in value)
    return str(value)


def emit_config(config: ExperimentConfig) -> str:
    """Render as INI; unset options and empty lists are left out"""
    parser = configparser.ConfigParser(interpolation=None)
    for section in ExperimentConfig.model_fields:
        model = getattr(config, section)
        parser[section] = {
            key: _format(getattr(model, key))
            for key in type(model).model_fields
            if getattr(model, key) is not None and getattr(model, key) != []
        }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse and validate an INI experiment config

    Args:
        text: INI document with [problem], [run], [stepsizes], [sweep], [output] sections

    Returns:
        ExperimentConfig: The validated config

    Raises:
        ConfigError: Unparsable INI, unknown options or incompatible settings
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"unparsable config: {e}") from e

    data = {
        section: {k: v for k, v in parser[section].items() if v.strip() != ""}
        for section in parser.sections()
    }
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)


def with_overrides(config: ExperimentConfig,
                   seed: Optional[int] = None,
                   max_iters: Optional[int] = None,
                   algorithms: Optional[Union[str, List[str]]] = None,
                   out: Optional[str] = None) -> ExperimentConfig:
    """Apply command-line overrides and validate the result again"""
    data = config.model_dump()
    if seed is not None:
        data["problem"]["seed"] = seed
    if max_iters is not None:
        data["run"]["max_iters"] = max_iters
    if algorithms is not None:
        data["run"]["algorithms"] = algorithms
    if out is not None:
        data["output"]["path"] = out
    try:
        return ExperimentConfig.model_validate(data)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"invalid override: {e}") from e
