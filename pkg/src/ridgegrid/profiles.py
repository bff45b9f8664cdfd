"""Named univariate profiles ``v(xi)`` used in ridge terms.

Every built-in profile is ``base(scale * xi + shift)`` for one of a small
set of base shapes.  Base shapes carry an integer code so the compiled
cost kernel can evaluate them without calling back into Python.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, EvaluationError

__all__ = ["Profile", "get_profile", "tabulated", "available_profiles", "register_profile"]

# Codes shared with _kernels.py
SIN, COS, HEAVISIDE, RELU, ABS, SQUARE, MEXICAN_HAT, HAAR, MORLET, TABLE, IDENTITY = range(11)
CUSTOM = -1


def _heaviside(x):
    return (x >= 0.0).astype(float)


def _relu(x):
    return np.maximum(x, 0.0)


def _mexican_hat(x):
    x2 = x * x
    return (1.0 - x2) * np.exp(-0.5 * x2)


def _haar(x):
    return np.where((x >= 0.0) & (x < 0.5), 1.0, np.where((x >= 0.5) & (x < 1.0), -1.0, 0.0))


def _morlet(x):
    return np.cos(5.0 * x) * np.exp(-0.5 * x * x)


_BASES: dict[str, tuple[int, Callable, int]] = {
    # name: (code, numpy function, parity of the base shape)
    "sin": (SIN, np.sin, -1),
    "cos": (COS, np.cos, 1),
    "heaviside": (HEAVISIDE, _heaviside, 0),
    "relu": (RELU, _relu, 0),
    "abs": (ABS, np.abs, 1),
    "square": (SQUARE, np.square, 1),
    "mexican_hat": (MEXICAN_HAT, _mexican_hat, 1),
    "haar": (HAAR, _haar, 0),
    "morlet": (MORLET, _morlet, 1),
    "identity": (IDENTITY, lambda x: np.array(x, dtype=float), -1),
}
_ALIASES = {"hockeystick": "relu", "step": "heaviside", "mexican-hat": "mexican_hat"}
_CUSTOM: dict[str, Callable] = {}


@dataclass(frozen=True, eq=False)
class Profile:
    """A univariate profile ``v(xi) = base(scale * xi + shift)``.

    ``parity`` is +1 for even, -1 for odd and 0 otherwise; it is only
    meaningful when ``shift == 0`` and is used to identify sign-equivalent
    directions during training.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    code: int = CUSTOM
    scale: float = 1.0
    shift: float = 0.0
    parity: int = 0
    table: np.ndarray | None = field(default=None, repr=False)
    table_start: float = 0.0
    table_step: float = 1.0

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.asarray(self.func(self.scale * xi + self.shift), dtype=float)
        if not np.all(np.isfinite(out)):
            raise EvaluationError(f"profile {self.name!r} returned non-finite values")
        return out

    @property
    def native(self) -> bool:
        """True when the compiled kernel can evaluate this profile."""
        return self.code != CUSTOM

    @property
    def sign_symmetric(self) -> bool:
        """``v(-xi)`` equals ``+-v(xi)``, so ``(a, b)`` and ``(-a, -b)`` span the same ridge."""
        return self.parity != 0 and self.shift == 0.0


def get_profile(name: str, scale: float = 1.0, shift: float = 0.0) -> Profile:
    """Look up a profile by name, e.g. ``get_profile("sin", scale=10)``."""
    key = _ALIASES.get(name, name)
    if key in _BASES:
        code, fn, parity = _BASES[key]
        label = key if (scale, shift) == (1.0, 0.0) else f"{key}({scale:g}*xi{shift:+g})"
        return Profile(label, fn, code, float(scale), float(shift), parity)
    if key in _CUSTOM:
        return Profile(key, _CUSTOM[key], CUSTOM, float(scale), float(shift))
    raise ConfigurationError(f"unknown profile {name!r}; known: {available_profiles()}")


def register_profile(name: str, func: Callable[[np.ndarray], np.ndarray]) -> None:
    """Make a vectorized Python callable addressable by name.

    Custom profiles are evaluated through numpy, which is much slower than
    the built-ins inside the particle-grid loop.
    """
    if name in _BASES or name in _ALIASES:
        raise ConfigurationError(f"{name!r} is a built-in profile")
    _CUSTOM[name] = func


def available_profiles() -> list[str]:
    return sorted(set(_BASES) | set(_ALIASES) | set(_CUSTOM))


def tabulated(values, start: float, step: float, name: str = "table") -> Profile:
    """Piecewise-linear profile through equispaced samples.

    ``values[k]`` is the profile at ``start + k * step``; outside the table
    the end values are held constant.
    """
    vals = np.array(values, dtype=float)
    if vals.ndim != 1 or vals.size < 2:
        raise ConfigurationError("a tabulated profile needs at least two samples")
    if not np.all(np.isfinite(vals)) or not step > 0:
        raise ConfigurationError("table values must be finite and the step positive")
    vals.flags.writeable = False
    knots = start + step * np.arange(vals.size)

    def interp(x):
        return np.interp(x, knots, vals)

    return Profile(name, interp, TABLE, 1.0, 0.0, 0, vals, float(start), float(step))
