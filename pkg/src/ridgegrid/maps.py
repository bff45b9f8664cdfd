"""Maps from particle coordinates in (-1, 1)^D to ridge directions and offsets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ConfigurationError, DomainError, UsageError

__all__ = ["TanWarp", "AffineWarp", "ParticleMap", "map_all", "parse_slot"]


@dataclass(frozen=True)
class TanWarp:
    """``s -> tan(pi s / 2)``, a bijection (-1, 1) -> R."""

    def __call__(self, s):
        return np.tan(0.5 * np.pi * np.asarray(s, dtype=float))

    def inverse(self, y):
        return (2.0 / np.pi) * np.arctan(np.asarray(y, dtype=float))

    def spec(self) -> str:
        return "tan"


@dataclass(frozen=True)
class AffineWarp:
    """``s -> lo + (s + 1) (hi - lo) / 2``, a bijection (-1, 1) -> (lo, hi)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ConfigurationError(f"affine warp needs lo < hi, got [{self.lo}, {self.hi}]")

    def __call__(self, s):
        return self.lo + 0.5 * (np.asarray(s, dtype=float) + 1.0) * (self.hi - self.lo)

    def inverse(self, y):
        return 2.0 * (np.asarray(y, dtype=float) - self.lo) / (self.hi - self.lo) - 1.0

    def spec(self) -> str:
        return f"affine:{{}}:{self.lo!r}:{self.hi!r}"


Warp = Union[TanWarp, AffineWarp]
Slot = Union[float, tuple[int, Warp]]


def parse_slot(text) -> Slot:
    """Parse a slot from the config grammar.

    Numbers are fixed values, ``"tan:K"`` maps particle component K through
    the tan warp and ``"affine:K:LO:HI"`` through an affine warp onto (LO, HI).
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    parts = str(text).split(":")
    try:
        if parts[0] == "tan" and len(parts) == 2:
            return int(parts[1]), TanWarp()
        if parts[0] == "affine" and len(parts) == 4:
            return int(parts[1]), AffineWarp(float(parts[2]), float(parts[3]))
        return float(text)
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse map slot {text!r}") from exc


class ParticleMap:
    """Template map ``(-1, 1)^D -> (a, b) in R^d x R``.

    Each of the ``d + 1`` output slots is either a fixed number or a pair
    ``(component, warp)``.  Every particle component must feed at least one
    slot.
    """

    def __init__(self, slots: Sequence[Slot], kind: str = "template"):
        parsed = [s if isinstance(s, tuple) else parse_slot(s) for s in slots]
        if len(parsed) < 2:
            raise ConfigurationError("a map needs d + 1 >= 2 slots")
        refs = sorted({s[0] for s in parsed if isinstance(s, tuple)})
        if not refs:
            raise ConfigurationError("map has only fixed slots; at least one component must be free")
        if refs != list(range(len(refs))):
            raise ConfigurationError(f"map components must be 0..D-1 without gaps, got {refs}")
        self.slots = tuple(parsed)
        self.D = len(refs)
        self.kind = kind

    @classmethod
    def full_tan(cls, d: int) -> "ParticleMap":
        return cls([(k, TanWarp()) for k in range(d + 1)], kind="full-tan")

    @property
    def d(self) -> int:
        return len(self.slots) - 1

    def __repr__(self) -> str:
        return f"ParticleMap({self.describe()})"

    def describe(self) -> list:
        out = []
        for s in self.slots:
            if isinstance(s, tuple):
                k, w = s
                out.append(f"tan:{k}" if isinstance(w, TanWarp) else w.spec().format(k))
            else:
                out.append(s)
        return out

    def __call__(self, p):
        """Map particle block(s) to ``(a, b)``.

        ``p`` has shape ``(D,)`` or ``(B, D)``; the result has shapes
        ``(d,), ()`` or ``(B, d), (B,)`` respectively.
        """
        p = np.asarray(p, dtype=float)
        single = p.ndim == 1
        p = np.atleast_2d(p)
        if p.shape[-1] != self.D:
            raise UsageError(f"map expects {self.D} components, got {p.shape[-1]}")
        if not np.all(np.abs(p) < 1.0):
            raise DomainError("particle coordinates must lie strictly inside (-1, 1)")
        out = np.empty((p.shape[0], len(self.slots)))
        for i, s in enumerate(self.slots):
            if isinstance(s, tuple):
                out[:, i] = s[1](p[:, s[0]])
            else:
                out[:, i] = s
        a, b = out[:, :-1], out[:, -1]
        return (a[0], b[0]) if single else (a, b)

    def unmap(self, a, b) -> np.ndarray:
        """Particle block reproducing ``(a, b)``, read from the first slot using each component."""
        vals = np.append(np.asarray(a, dtype=float), float(b))
        p = np.full(self.D, np.nan)
        for i, s in enumerate(self.slots):
            if isinstance(s, tuple) and np.isnan(p[s[0]]):
                p[s[0]] = s[1].inverse(vals[i])
        return p


def map_all(maps: Sequence[ParticleMap], p):
    """Blockwise application: block j of the particle goes through map j.

    ``p`` has shape ``(P,)`` or ``(B, P)`` with ``P = sum D_j``.  Returns
    directions ``(..., M, d)`` and offsets ``(..., M)``.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    P = sum(m.D for m in maps)
    if p.shape[-1] != P:
        raise UsageError(f"particle has {p.shape[-1]} coordinates, maps need {P}")
    d = maps[0].d if maps else 0
    if any(m.d != d for m in maps):
        raise UsageError("all maps must target the same dimension d")
    A = np.empty((p.shape[0], len(maps), d))
    Bo = np.empty((p.shape[0], len(maps)))
    start = 0
    for j, m in enumerate(maps):
        A[:, j], Bo[:, j] = m(p[:, start:start + m.D])
        start += m.D
    return (A[0], Bo[0]) if single else (A, Bo)
