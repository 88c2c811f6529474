"""Circle map families and noise amplitude profiles.

Angles are stored in ``[-pi, pi)`` everywhere in the package.  A map is
described by its *lift* ``F : R -> R`` with ``F(x + 2 pi) = F(x) + 2 pi``;
reducing ``F`` modulo ``2 pi`` gives the circle map itself.  Keeping the lift
around is what lets the orbit finder count windings.

Built-in map families
---------------------
``sine-circle``
    ``F(x) = x + omega - b sin x`` with ``omega = 1`` by default.
``expression``
    User supplied expressions for the lift and its derivative, written in
    terms of ``x``, the parameters and numpy functions (``sin``, ``cos``,
    ``exp``, ``pi``...).

Further families can be added with :func:`register_family`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * np.pi


def wrap_angle(x):
    """Reduce angles to the canonical interval ``[-pi, pi)``."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi
    # np.mod can return exactly 2*pi for tiny negative inputs
    y = np.where(y >= np.pi, y - TWO_PI, y)
    return float(y) if np.ndim(y) == 0 else y


def angle_diff(x, y):
    """Signed circular difference ``x - y`` reduced to ``[-pi, pi)``."""
    return wrap_angle(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))


def circle_distance(x, y):
    """Quotient-metric distance on ``R / 2 pi Z``."""
    return np.abs(angle_diff(x, y))


# -- expression evaluation --------------------------------------------------

_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in (
        "sin", "cos", "tan", "arcsin", "arccos", "arctan", "arctan2",
        "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs", "pi",
    )
}


def _compile_expression(expr: str, param_names) -> Callable:
    try:
        code = compile(expr, "<circspec expression>", "eval")
    except SyntaxError as exc:
        raise ConfigurationError(f"cannot parse expression {expr!r}: {exc}") from exc
    allowed = set(_EXPR_NAMESPACE) | set(param_names) | {"x"}
    unknown = set(code.co_names) - allowed
    if unknown:
        raise ConfigurationError(
            f"expression {expr!r} uses unknown names {sorted(unknown)}"
        )

    def fn(x, params):
        scope = dict(_EXPR_NAMESPACE)
        scope.update(params)
        scope["x"] = x
        out = eval(code, {"__builtins__": {}}, scope)
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)) * 1.0

    return fn


# -- map families -----------------------------------------------------------

@dataclass(frozen=True)
class MapFamily:
    """A named, parameterised family of circle-map lifts."""

    name: str
    lift: Callable
    deriv: Callable
    defaults: Mapping[str, float]
    required: tuple = ()
    validate: Callable | None = None


_FAMILIES: dict[str, MapFamily] = {}


def register_family(family: MapFamily, overwrite: bool = False) -> None:
    """Make ``family`` available to :class:`CircleMap` by name."""
    if family.name in _FAMILIES and not overwrite:
        raise ConfigurationError(f"map family {family.name!r} already registered")
    _FAMILIES[family.name] = family


def available_families():
    return sorted(_FAMILIES)


def _sine_lift(x, p):
    return x + p["omega"] - p["b"] * np.sin(x)


def _sine_deriv(x, p):
    return 1.0 - p["b"] * np.cos(x)


def _sine_validate(p):
    for key in ("b", "omega"):
        if not np.isfinite(p[key]):
            raise ConfigurationError(f"sine-circle parameter {key} must be finite")


register_family(
    MapFamily(
        name="sine-circle",
        lift=_sine_lift,
        deriv=_sine_deriv,
        defaults={"omega": 1.0},
        required=("b",),
        validate=_sine_validate,
    )
)


@dataclass(frozen=True)
class CircleMap:
    """A member of a registered circle-map family.

    Parameters
    ----------
    family : str
        Registered family identifier, e.g. ``"sine-circle"``.
    params : mapping
        Family parameters, e.g. ``{"b": 2.2}``.

    Examples
    --------
    >>> f = CircleMap.sine_circle(2.2)
    >>> round(f(0.0), 6)
    1.0
    """

    family: str
    params: Mapping[str, float] = field(default_factory=dict)
    expressions: tuple = ()

    def __post_init__(self):
        if self.family == "expression":
            if len(self.expressions) != 2:
                raise ConfigurationError(
                    "expression maps need (lift, derivative) expression strings"
                )
            names = tuple(self.params)
            lift = _compile_expression(self.expressions[0], names)
            deriv = _compile_expression(self.expressions[1], names)
            fam = MapFamily("expression", lift, deriv, {})
        else:
            try:
                fam = _FAMILIES[self.family]
            except KeyError:
                raise ConfigurationError(
                    f"unknown map family {self.family!r}; "
                    f"known: {available_families() + ['expression']}"
                ) from None
        params = dict(fam.defaults)
        params.update({k: float(v) for k, v in self.params.items()})
        missing = [k for k in fam.required if k not in params]
        if missing:
            raise ConfigurationError(f"{self.family}: missing parameters {missing}")
        if fam.validate is not None:
            fam.validate(params)
        object.__setattr__(self, "params", MappingProxyType(params))
        object.__setattr__(self, "_family", fam)
        if self.family == "expression":
            self._check_lift()

    @classmethod
    def sine_circle(cls, b: float, omega: float = 1.0) -> "CircleMap":
        return cls("sine-circle", {"b": b, "omega": omega})

    @classmethod
    def from_expression(cls, lift: str, derivative: str, **params) -> "CircleMap":
        """Build a map from expression strings for the lift and its derivative."""
        return cls("expression", params, (lift, derivative))

    def _check_lift(self):
        xs = np.linspace(-np.pi, np.pi, 257)
        a, b = self.lift(xs), self.lift(xs + TWO_PI)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(self.deriv(xs)))):
            raise ConfigurationError("expression map is not finite on the circle")
        if np.max(np.abs(b - a - TWO_PI)) > 1e-9:
            raise ConfigurationError(
                "expression is not the lift of a degree-one circle map "
                "(F(x + 2 pi) != F(x) + 2 pi)"
            )

    # -- evaluation ---------------------------------------------------------

    def lift(self, x):
        """Unreduced lift value ``F(x)``."""
        out = self._family.lift(np.asarray(x, dtype=float), self.params)
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, x):
        """``f(x)`` reduced to ``[-pi, pi)``."""
        _check_finite(x)
        return wrap_angle(self.lift(x))

    def deriv(self, x):
        """``f'(x)``."""
        _check_finite(x)
        out = self._family.deriv(np.asarray(x, dtype=float), self.params)
        return float(out) if np.ndim(out) == 0 else out

    def lift_iterate(self, x, p: int):
        """Return ``(F^p(x), (f^p)'(x))`` without reducing the lift value."""
        if p < 0:
            raise DomainError("iterate count p must be nonnegative")
        y = np.asarray(x, dtype=float)
        d = np.ones_like(y)
        for _ in range(p):
            d = d * self._family.deriv(y, self.params)
            y = self._family.lift(y, self.params)
        if np.ndim(y) == 0:
            return float(y), float(d)
        return y, d

    def iterate(self, x, p: int):
        """Return ``(f^p(x), (f^p)'(x))`` with the position reduced mod 2 pi.

        The derivative is accumulated with the chain rule along the trajectory.
        """
        _check_finite(x)
        y, d = self.lift_iterate(x, p)
        return wrap_angle(y), d

    def max_displacement(self, n: int = 4096) -> float:
        """Sampled ``max |F(x) - x|``, used to bound winding numbers."""
        xs = -np.pi + (np.arange(n) + 0.5) * TWO_PI / n
        return float(np.max(np.abs(self.lift(xs) - xs)))

    def __repr__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        if self.family == "expression":
            return f"CircleMap(expression {self.expressions[0]!r}, {args})"
        return f"CircleMap({self.family}, {args})"


def _check_finite(x):
    if not np.all(np.isfinite(np.asarray(x, dtype=float))):
        raise DomainError("angle must be finite")


# -- noise ------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    """Noise amplitude profile ``sigma(x)`` with positive bounds.

    ``profile`` is one of ``"constant"`` (parameter ``sigma``), ``"cosine"``
    (``sigma0 * (1 + amplitude * cos(x - phase))`` with ``|amplitude| < 1``) or
    ``"expression"`` (an expression in ``x``).
    """

    profile: str = "constant"
    params: Mapping[str, float] = field(default_factory=lambda: {"sigma": 1.0})
    expression: str | None = None
    sigma_lb: float = field(init=False)
    sigma_ub: float = field(init=False)

    def __post_init__(self):
        p = {k: float(v) for k, v in self.params.items()}
        if self.profile == "constant":
            s = p.setdefault("sigma", 1.0)
            if not s > 0:
                raise ConfigurationError("constant noise level must be positive")
            fn = lambda x, q: np.full(np.shape(x), q["sigma"])
            lb = ub = s
        elif self.profile == "cosine":
            s0 = p.setdefault("sigma0", 1.0)
            a = p.setdefault("amplitude", 0.0)
            p.setdefault("phase", 0.0)
            if not (s0 > 0 and abs(a) < 1):
                raise ConfigurationError("cosine profile needs sigma0 > 0, |amplitude| < 1")
            fn = lambda x, q: q["sigma0"] * (1.0 + q["amplitude"] * np.cos(x - q["phase"]))
            lb, ub = s0 * (1 - abs(a)), s0 * (1 + abs(a))
        elif self.profile == "expression":
            if not self.expression:
                raise ConfigurationError("expression noise profile needs an expression")
            fn = _compile_expression(self.expression, tuple(p))
            xs = np.linspace(-np.pi, np.pi, 4097)
            vals = fn(xs, p)
            if not np.all(np.isfinite(vals)) or vals.min() <= 0:
                raise ConfigurationError("noise profile must be finite and positive")
            if np.max(np.abs(fn(xs + TWO_PI, p) - vals)) > 1e-9 * vals.max():
                raise ConfigurationError("noise profile must be 2 pi periodic")
            lb, ub = float(vals.min()), float(vals.max())
        else:
            raise ConfigurationError(f"unknown noise profile {self.profile!r}")
        object.__setattr__(self, "params", MappingProxyType(p))
        object.__setattr__(self, "_fn", fn)
        object.__setattr__(self, "sigma_lb", float(lb))
        object.__setattr__(self, "sigma_ub", float(ub))

    @classmethod
    def constant(cls, sigma: float = 1.0) -> "NoiseSpec":
        return cls("constant", {"sigma": sigma})

    @property
    def is_constant(self) -> bool:
        return self.profile == "constant"

    def __call__(self, x):
        out = self._fn(np.asarray(x, dtype=float), self.params)
        return float(out) if np.ndim(out) == 0 else out
