"""Signal sets used at the end nodes: PAM, QAM, and PSK with bit labelings.

PAM and QAM points are kept as exact Gaussian integers on the odd lattice
(steps of 2, centered on the origin) so that differences and ratios of
differences stay in Z[j].  PSK points are complex floats on the unit circle.
A separate ``energy_scale`` carries the factor that normalizes each set to
unit average energy; geometry stays exact, scaling is applied only where
physical distances or transmit signals are needed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .gaussian import GaussianInt

__all__ = [
    "Constellation",
    "DifferenceConstellation",
    "build_pam",
    "build_qam",
    "build_psk",
    "build_constellation",
    "difference_constellation",
    "delta_plus",
]

Point = Union[GaussianInt, complex]

#: Kinds whose points are exact Gaussian integers.
EXACT_KINDS = ("pam", "qam", "cross")


@dataclass(frozen=True)
class Constellation:
    """An indexed signal set; ``points[label]`` is the point carrying ``label``."""

    kind: str
    M: int
    points: tuple
    energy_scale: float

    def __post_init__(self) -> None:
        if self.M != len(self.points):
            raise ValueError("M must equal the number of points")
        if len(set(self.points)) != self.M:
            raise ValueError("points must be distinct")

    def point(self, label: int) -> complex:
        """Unscaled complex value of the point carrying ``label``."""
        return complex(self.points[label])

    def label_of(self, p: Point) -> int:
        """Inverse of the labeling map; exact for lattice kinds."""
        try:
            return _label_index(self)[p]
        except KeyError:
            raise ValueError(f"{p} is not a point of this constellation") from None

    def bits(self) -> int:
        b = self.M.bit_length() - 1
        if 1 << b != self.M:
            raise ValueError("size is not a power of two")
        return b

    def complex_points(self, scaled: bool = False) -> np.ndarray:
        """All points as a complex vector, optionally at unit average energy."""
        arr = np.array([complex(p) for p in self.points], dtype=np.complex128)
        return arr * self.energy_scale if scaled else arr

    def to_json_obj(self) -> dict:
        if self.kind in EXACT_KINDS:
            pts = [[p.re, p.im] for p in self.points]
        else:
            pts = [[p.real, p.imag] for p in self.points]
        return {"kind": self.kind, "M": self.M, "points": pts,
                "energy_scale": self.energy_scale}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Constellation":
        if obj["kind"] in EXACT_KINDS:
            pts = tuple(GaussianInt(int(a), int(b)) for a, b in obj["points"])
        else:
            pts = tuple(complex(a, b) for a, b in obj["points"])
        return cls(obj["kind"], int(obj["M"]), pts, float(obj["energy_scale"]))


@lru_cache(maxsize=None)
def _label_index(c: Constellation) -> dict:
    return {p: i for i, p in enumerate(c.points)}


def _unit_energy_scale(points: Sequence[Point]) -> float:
    return 1.0 / math.sqrt(sum(abs(complex(p)) ** 2 for p in points) / len(points))


def build_pam(m: int) -> Constellation:
    """m-PAM on the real line: points -(m-1), -(m-3), ..., m-1."""
    if m < 2:
        raise ValueError("PAM needs at least 2 points")
    pts = tuple(GaussianInt(2 * n - (m - 1), 0) for n in range(m))
    return Constellation("pam", m, pts, _unit_energy_scale(pts))


def build_qam(M: int) -> Constellation:
    """Square M-QAM, M a power of 4, on the odd lattice with the product labeling.

    The label of a point a + bj is ((s-1+a)*s + (s-1+b)) / 2 where s = sqrt(M),
    i.e. the in-phase index picks the high bits and the quadrature index the
    low bits.
    """
    s = math.isqrt(M)
    if s * s != M or M < 4 or M & (M - 1):
        raise ValueError("QAM size must be an even power of two")
    pts = tuple(
        GaussianInt(2 * (lab // s) - (s - 1), 2 * (lab % s) - (s - 1))
        for lab in range(M)
    )
    return Constellation("qam", M, pts, _unit_energy_scale(pts))


def build_psk(M: int) -> Constellation:
    """M-PSK on the unit circle; label k sits at angle 2*pi*k/M."""
    if M < 2 or M & (M - 1):
        raise ValueError("PSK size must be a power of two")
    pts = tuple(cmath.exp(2j * math.pi * k / M) for k in range(M))
    return Constellation("psk", M, pts, 1.0)


_BUILDERS = {"pam": build_pam, "qam": build_qam, "psk": build_psk}


def build_constellation(kind: str, M: int) -> Constellation:
    """Dispatch on the family name; kinds are 'pam', 'qam', 'psk'."""
    try:
        builder = _BUILDERS[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown constellation kind {kind!r}") from None
    return builder(M)


class DifferenceConstellation:
    """The multiset of pairwise differences x_k - x_l of a signal set.

    ``entries`` maps each distinct nonzero difference value to the ordered
    label pairs (k, l) that realize it; the zero difference is kept too,
    realized by the diagonal pairs (k, k).
    """

    def __init__(self, kind: str, entries: dict):
        self.kind = kind
        self._entries = entries

    def values(self) -> list:
        return list(self._entries.keys())

    def pairs_for(self, value) -> tuple:
        return tuple(self._entries[value])

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, value) -> bool:
        return value in self._entries

    def items(self):
        return self._entries.items()


def difference_constellation(c: Constellation) -> DifferenceConstellation:
    """All pairwise differences of ``c`` with their realizing label pairs."""
    entries: dict = {}
    if c.kind in EXACT_KINDS:
        for k, p in enumerate(c.points):
            for l, q in enumerate(c.points):
                entries.setdefault(p - q, []).append((k, l))
    else:
        # Floats: collapse values that agree to 9 decimals.  Distinct PSK
        # differences are separated by far more than float error.
        reps: dict = {}
        for k, p in enumerate(c.points):
            for l, q in enumerate(c.points):
                d = p - q
                key = (round(d.real, 9), round(d.imag, 9))
                if key not in reps:
                    reps[key] = d
                    entries[d] = []
                entries[reps[key]].append((k, l))
    return DifferenceConstellation(c.kind, entries)


def delta_plus(d: DifferenceConstellation) -> list:
    """Differences in the open right / closed upper quarter plane (re > 0, im >= 0).

    For lattice kinds every nonzero difference has exactly one associate in
    this quarter plane, so this is a fundamental domain under unit rotation.
    """
    out = []
    for v in d.values():
        if isinstance(v, GaussianInt):
            if v.re > 0 and v.im >= 0:
                out.append(v)
        else:
            if v.real > 1e-9 and v.imag > -1e-9:
                out.append(v)
    return out
