"""Flat ``key = value`` run configuration.

Example::

    # Table 2, first row
    problem = pure-advection
    h = 100
    dt = 50
    t_final = 9600
    p = 6.8e-6
    snapshots = 2400, 4800, 7200

Custom problems take numpy expressions: ``u0`` in ``x``; ``f0``/``fl`` in
``t``; optional ``exact`` in ``x`` and ``t``; the domain from ``a``/``b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .assembly import DEFAULT_QUAD_ORDER
from .problems import (
    GaussianPulseParams,
    PureAdvectionParams,
    courant_number,
    element_count,
    gaussian_pulse_problem,
    pure_advection_problem,
)
from .solver import ProblemSpec

PROBLEMS = ("pure-advection", "gaussian-pulse", "custom")

_FLOAT_KEYS = ("dt", "t_final", "p", "h", "xi", "lambda", "x0", "a", "b")
_INT_KEYS = ("n", "quad_order")
_TEXT_KEYS = ("problem", "u0", "f0", "fl", "exact", "out_dir")
_LIST_KEYS = ("snapshots",)
# canonical order used by RunConfig.to_text
KNOWN_KEYS = (
    "problem", "dt", "t_final", "p", "n", "h", "xi", "lambda", "x0", "a", "b",
    "snapshots", "quad_order", "u0", "f0", "fl", "exact", "out_dir",
)
REQUIRED_KEYS = ("problem", "dt", "t_final", "p")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    problem: str
    dt: float
    t_final: float
    p: float
    n: int | None = None
    h: float | None = None
    xi: float | None = None
    lam: float | None = None
    x0: float | None = None
    a: float | None = None
    b: float | None = None
    snapshots: tuple = ()
    quad_order: int = DEFAULT_QUAD_ORDER
    u0: str | None = None
    f0: str | None = None
    fl: str | None = None
    exact: str | None = None
    out_dir: str | None = None

    # domain and mesh

    def domain(self) -> tuple[float, float]:
        if self.problem == "pure-advection":
            return 0.0, PureAdvectionParams().length
        if self.problem == "gaussian-pulse":
            d = GaussianPulseParams()
            return d.a, d.b
        return self.a, self.b

    def element_count(self) -> int:
        if self.n is not None:
            return self.n
        a, b = self.domain()
        return element_count(b - a, self.h)

    def mesh_h(self) -> float:
        a, b = self.domain()
        return (b - a) / self.element_count()

    def velocity(self) -> float:
        if self.xi is not None:
            return self.xi
        if self.problem == "pure-advection":
            return PureAdvectionParams().xi
        if self.problem == "gaussian-pulse":
            return GaussianPulseParams().xi
        return 0.0

    def courant(self) -> float:
        return courant_number(self.velocity(), self.dt, self.mesh_h())

    def with_p(self, p: float) -> RunConfig:
        return _replace(self, p=p)

    def with_x0(self, x0: float) -> RunConfig:
        return _replace(self, x0=x0)

    def to_problem(self) -> ProblemSpec:
        n = self.element_count()
        if self.problem == "pure-advection":
            kw = {"xi": self.xi, "x0": self.x0}
            params = PureAdvectionParams(**{k: v for k, v in kw.items() if v is not None})
            return pure_advection_problem(n, self.dt, self.p, self.t_final, params)
        if self.problem == "gaussian-pulse":
            kw = {"xi": self.xi, "lam": self.lam, "x0": self.x0}
            params = GaussianPulseParams(**{k: v for k, v in kw.items() if v is not None})
            return gaussian_pulse_problem(n, self.dt, self.p, self.t_final, params)
        return ProblemSpec(
            xi=self.velocity(),
            lam=self.lam or 0.0,
            a=self.a,
            b=self.b,
            n=n,
            p=self.p,
            dt=self.dt,
            t_final=self.t_final,
            u0=_expression(self.u0, "x"),
            f0=_expression(self.f0 or "0", "t"),
            fl=_expression(self.fl or "0", "t"),
            exact=_expression(self.exact, "x", "t") if self.exact else None,
        )

    # canonical text form

    def to_text(self) -> str:
        lines = []
        for key in KNOWN_KEYS:
            value = getattr(self, _attr(key))
            if value is None or (key == "snapshots" and not value):
                continue
            if key == "quad_order" and value == DEFAULT_QUAD_ORDER:
                continue
            if key == "snapshots":
                text = ", ".join(repr(float(t)) for t in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


def _attr(key: str) -> str:
    return "lam" if key == "lambda" else key


def _replace(cfg: RunConfig, **changes) -> RunConfig:
    values = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    values.update(changes)
    return RunConfig(**values)


_NAMESPACE = {
    name: getattr(np, name)
    for name in ("exp", "sin", "cos", "tan", "sinh", "cosh", "tanh", "sqrt", "log", "abs", "pi", "where", "heaviside")
}


def _expression(text: str, *args: str):
    code = compile(text, "<config>", "eval")
    for name in code.co_names:
        if name not in _NAMESPACE and name not in args:
            raise ConfigError(f"unknown name {name!r} in expression {text!r}")

    def fn(*values):
        env = dict(_NAMESPACE)
        env.update(zip(args, values))
        out = eval(code, {"__builtins__": {}}, env)
        if args == ("x",):
            return np.broadcast_to(np.asarray(out, dtype=float), np.shape(values[0])).copy()
        return out

    return fn


def _number(key, text, kind):
    try:
        value = kind(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    return value


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    if "n" in raw and "h" in raw:
        raise ConfigError("give exactly one of 'n' and 'h', not both")
    if "n" not in raw and "h" not in raw:
        raise ConfigError("one of 'n' or 'h' is required")

    values: dict = {}
    for key, text in raw.items():
        attr = _attr(key)
        if key in _FLOAT_KEYS:
            values[attr] = _number(key, text, float)
        elif key in _INT_KEYS:
            values[attr] = _number(key, text, int)
        elif key in _LIST_KEYS:
            items = [s for s in (t.strip() for t in text.split(",")) if s]
            values[attr] = tuple(sorted(_number(key, s, float) for s in items))
        else:
            values[attr] = text

    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.problem not in PROBLEMS:
        raise ConfigError(f"problem must be one of {', '.join(PROBLEMS)}, got {cfg.problem!r}")
    if not cfg.dt > 0:
        raise ConfigError(f"dt must be positive, got {cfg.dt}")
    if not cfg.t_final >= 0:
        raise ConfigError(f"t_final must be non-negative, got {cfg.t_final}")
    if not cfg.p > 0:
        raise ConfigError(f"p must be positive, got {cfg.p}")
    if cfg.n is not None and cfg.n < 3:
        raise ConfigError(f"n must be at least 3, got {cfg.n}")
    if cfg.h is not None and not cfg.h > 0:
        raise ConfigError(f"h must be positive, got {cfg.h}")
    if cfg.lam is not None and cfg.lam < 0:
        raise ConfigError(f"lambda must be non-negative, got {cfg.lam}")
    if not 8 <= cfg.quad_order <= 30:
        raise ConfigError(f"quad_order must lie in 8..30, got {cfg.quad_order}")
    custom_only = [k for k in ("a", "b", "u0", "f0", "fl", "exact") if getattr(cfg, k) is not None]
    if cfg.problem == "custom":
        for key in ("a", "b", "u0"):
            if getattr(cfg, key) is None:
                raise ConfigError(f"custom problem requires key {key!r}")
        if not cfg.a < cfg.b:
            raise ConfigError(f"need a < b, got a={cfg.a}, b={cfg.b}")
        if cfg.x0 is not None:
            raise ConfigError("'x0' applies to built-in problems only")
        for key, args in (("u0", ("x",)), ("f0", ("t",)), ("fl", ("t",)), ("exact", ("x", "t"))):
            if getattr(cfg, key) is not None:
                try:
                    _expression(getattr(cfg, key), *args)
                except SyntaxError as exc:
                    raise ConfigError(f"{key}: invalid expression ({exc.msg})") from None
    elif custom_only:
        raise ConfigError(f"key(s) {', '.join(custom_only)} apply to custom problems only")
    if cfg.problem == "pure-advection" and cfg.lam not in (None, 0.0):
        raise ConfigError("pure-advection has no diffusion; drop 'lambda'")
    if cfg.element_count() < 3:
        raise ConfigError("mesh must have at least 3 elements")
    steps = cfg.t_final / cfg.dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ConfigError(f"t_final/dt = {steps} is not a whole number of steps")
    for t in cfg.snapshots:
        if not 0 <= t <= cfg.t_final:
            raise ConfigError(f"snapshot time {t} lies outside [0, {cfg.t_final}]")
