"""Closed catalogue of test functionals Phi: C -> C.

The library accepts any vectorized callable; the catalogue exists so the
command line can name functionals by string (``moment:1,1``, ``psi:1,0.5``,
``box:x0,x1,y0,y1``, ``disk:cx,cy,r``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _ipow(w, k: int):
    out = np.ones_like(w)
    base = w
    while k:
        if k & 1:
            out = out * base
        k >>= 1
        if k:
            base = base * base
    return out


@dataclass(frozen=True)
class Moment:
    """``w^a conj(w)^b``."""
    a: int
    b: int

    def __post_init__(self):
        if int(self.a) != self.a or int(self.b) != self.b or self.a < 0 or self.b < 0:
            raise ValueError("moment exponents must be non-negative integers")

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        # repeated squaring keeps moment(a, b) the exact conjugate of moment(b, a)
        return _ipow(w, self.a) * _ipow(np.conj(w), self.b)

    def __str__(self):
        return f"moment:{self.a},{self.b}"


@dataclass(frozen=True)
class Psi:
    """Additive character ``exp(i Re(conj(z) w))``."""
    z: complex

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        return np.exp(1j * (np.conj(self.z) * w).real)

    def __str__(self):
        return f"psi:{self.z.real!r},{self.z.imag!r}"


@dataclass(frozen=True)
class Box:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("box needs x0 < x1 and y0 < y1")

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        inside = (w.real >= self.x0) & (w.real < self.x1) & (w.imag >= self.y0) & (w.imag < self.y1)
        return inside.astype(float)

    def __str__(self):
        return f"box:{self.x0!r},{self.x1!r},{self.y0!r},{self.y1!r}"


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        return (np.abs(w - self.center) < self.radius).astype(float)

    def __str__(self):
        return f"disk:{self.center.real!r},{self.center.imag!r},{self.radius!r}"


def parse_functional(text: str):
    kind, _, rest = text.partition(":")
    args = [a for a in rest.split(",") if a.strip()]
    try:
        if kind == "moment" and len(args) == 2:
            a, b = int(args[0]), int(args[1])
            if a < 0 or b < 0:
                raise ValueError
            return Moment(a, b)
        if kind == "psi" and len(args) == 2:
            return Psi(complex(float(args[0]), float(args[1])))
        if kind == "box" and len(args) == 4:
            return Box(*map(float, args))
        if kind == "disk" and len(args) == 3:
            return Disk(complex(float(args[0]), float(args[1])), float(args[2]))
    except ValueError:
        pass
    raise ValueError(f"cannot parse functional {text!r}; expected moment:a,b | psi:x,y | "
                     "box:x0,x1,y0,y1 | disk:cx,cy,r")
