import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .core.config import parse_window
from .core.errors import ConfigError, LaxkitError


class Check(BaseModel):
    """One verdict line of a report."""

    name: str
    passed: bool
    checked: int = 0
    skipped: int = 0
    details: Dict[str, Any] = Field(default_factory=dict)
    counterexample: Optional[Dict[str, Any]] = None


class AlgebraModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["gl", "sl", "s", "so", "sp"]
    n: int = Field(ge=1)
    sigma: Optional[List[List[str]]] = None


class TyurinModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gamma: str
    alpha: List[str]


class OverrideModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: int
    i: int = Field(ge=1)
    b: str


class PrescriptionModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["standard", "m1", "custom"] = "standard"
    a: Optional[List[str]] = None
    b: Optional[List[str]] = None
    overrides: List[OverrideModel] = Field(default_factory=list)
    bound: Optional[str] = None


class RunConfig(BaseModel):
    """A run configuration file; every scalar is an exact string, floats are rejected."""

    model_config = ConfigDict(extra="forbid")

    name: str = "run"
    algebra: AlgebraModel
    in_points: List[str] = Field(min_length=1)
    out_points: List[str] = Field(min_length=1)
    tyurin: List[TyurinModel] = Field(default_factory=list)
    prescription: Optional[PrescriptionModel] = None
    window: Optional[str] = None
    sample_budget: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    output_dir: Optional[str] = None
    cycles: List[str] = Field(default_factory=list)

    @field_validator("window")
    @classmethod
    def _window(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            parse_window(value)
        return value

    def canonical(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def _no_floats(value: Any, path: Tuple[Any, ...] = ()) -> None:
    if isinstance(value, float):
        raise ConfigError("floats are not accepted; write exact strings such as \"1/3\"", field_path=path)
    if isinstance(value, dict):
        for k, v in value.items():
            _no_floats(v, path + (k,))
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _no_floats(v, path + (i,))


def parse_run_config(data: Union[Dict[str, Any], str]) -> RunConfig:
    """Validates raw JSON data; pydantic locations become dotted field paths."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    _no_floats(data)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(first["msg"], field_path=first["loc"],
                          context={"errors": len(exc.errors())}) from exc


def load_run_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc.strerror}") from exc
    return parse_run_config(text)


def build_marked_config(run: RunConfig):
    """Turns a validated RunConfig into (MarkedConfig, GradingPrescription)."""
    from sympy.polys.domains import QQ

    from .services.classical import AlgebraSpec
    from .services.exactmath import parse_point, parse_scalar
    from .services.geometry import GradingPrescription, MarkedConfig, TyurinPoint

    def exact(text: str, path: Tuple[Any, ...], parser):
        try:
            return parser(text)
        except LaxkitError as exc:
            raise ConfigError(exc.detail, field_path=path) from exc
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc), field_path=path) from exc

    def rational(text: str, path: Tuple[Any, ...]):
        c = exact(text, path, parse_scalar)
        if c.y:
            raise ConfigError("prescription values must be rational", field_path=path)
        return QQ(c.x.numerator, c.x.denominator)

    try:
        sigma = None
        if run.algebra.sigma is not None:
            sigma = tuple(tuple(exact(x, ("algebra", "sigma", i, j), parse_scalar) for j, x in enumerate(row))
                          for i, row in enumerate(run.algebra.sigma))
        spec = AlgebraSpec(run.algebra.family, run.algebra.n, sigma)
    except ConfigError:
        raise
    except LaxkitError as exc:
        raise ConfigError(exc.detail, field_path=("algebra",)) from exc

    in_points = tuple(exact(p, ("in_points", i), parse_point) for i, p in enumerate(run.in_points))
    out_points = tuple(exact(p, ("out_points", i), parse_point) for i, p in enumerate(run.out_points))
    tyurin = tuple(
        TyurinPoint(exact(t.gamma, ("tyurin", k, "gamma"), parse_point),
                    tuple(exact(a, ("tyurin", k, "alpha", j), parse_scalar) for j, a in enumerate(t.alpha)))
        for k, t in enumerate(run.tyurin)
    )
    config = MarkedConfig(in_points, out_points, tyurin, spec)

    p = run.prescription or PrescriptionModel(kind="m1" if config.M == 1 else "standard")
    try:
        if p.kind == "standard":
            prescription = GradingPrescription.standard(config.N, config.M)
        elif p.kind == "m1":
            if config.M != 1:
                raise ConfigError("the m1 prescription needs exactly one out-point", field_path=("prescription", "kind"))
            prescription = GradingPrescription.single_out(config.N)
        else:
            if p.a is None or p.b is None:
                raise ConfigError("custom prescriptions need both a and b", field_path=("prescription",))
            a = tuple(rational(x, ("prescription", "a", i)) for i, x in enumerate(p.a))
            b = tuple(rational(x, ("prescription", "b", i)) for i, x in enumerate(p.b))
            overrides = tuple(((o.m, o.i - 1), rational(o.b, ("prescription", "overrides", k, "b")))
                              for k, o in enumerate(p.overrides))
            bound = None if p.bound is None else rational(p.bound, ("prescription", "bound"))
            prescription = GradingPrescription("custom", a, b, overrides, bound)
        prescription.validate(config.N, config.M)
    except ConfigError:
        raise
    except LaxkitError as exc:
        raise ConfigError(exc.detail, field_path=("prescription",)) from exc
    return config, prescription
