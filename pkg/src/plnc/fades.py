"""Singular fade states: enumeration, closed-form counts, and collision structure.

During the multiple-access phase the relay sees x_A + z*x_B where z is the
channel fade ratio.  For almost every z the M*M sums are distinct; the
exceptional z are the singular fade states, and they are exactly the ratios
-d1/d2 of nonzero differences of the signal set.  For PAM and QAM these are
ratios of Gaussian integers and are kept exact; for PSK they are floats
deduplicated with a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .constellation import (
    Constellation,
    EXACT_KINDS,
    build_qam,
    delta_plus,
    difference_constellation,
)
from .gaussian import (
    UNITS,
    GaussianInt,
    GaussianRational,
    gi_relatively_prime,
    gr_reduce,
    restricted_totient,
)

__all__ = [
    "FadeState",
    "ConstraintSet",
    "group_complex",
    "effective_constellation",
    "is_singular_fade",
    "scaled_delta_plus",
    "enumerate_singular_fades",
    "constraints_for_fade",
    "coprime_partner_counts",
    "count_pam",
    "count_qam",
    "count_qam_upper_bound",
    "count_psk",
]

#: Two float fades closer than this (per axis) are treated as the same state.
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class FadeState:
    """A fade ratio, exact when the geometry allows it.

    ``approx`` is always set; ``exact`` is the reduced Gaussian-integer
    ratio for lattice constellations and None for PSK.
    """

    approx: complex
    exact: Optional[GaussianRational] = None

    @classmethod
    def from_exact(cls, r: GaussianRational) -> "FadeState":
        return cls(complex(r), r)

    @classmethod
    def from_complex(cls, z: complex) -> "FadeState":
        return cls(complex(z), None)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def __complex__(self) -> complex:
        return self.approx

    def sort_key(self):
        if self.exact is not None:
            return (self.exact.real, self.exact.imag)
        return (self.approx.real, self.approx.imag)

    def to_json_obj(self) -> dict:
        obj = {"re": self.approx.real, "im": self.approx.imag,
               "exact_num": None, "exact_den": None}
        if self.exact is not None:
            obj["exact_num"] = [self.exact.num.re, self.exact.num.im]
            obj["exact_den"] = [self.exact.den.re, self.exact.den.im]
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FadeState":
        if obj.get("exact_num") is not None:
            num = GaussianInt(*map(int, obj["exact_num"]))
            den = GaussianInt(*map(int, obj["exact_den"]))
            return cls.from_exact(gr_reduce(num, den))
        return cls(complex(obj["re"], obj["im"]))

    def __str__(self) -> str:
        if self.exact is not None:
            return str(self.exact)
        return format(self.approx, "g").strip("()")


@dataclass(frozen=True)
class ConstraintSet:
    """Cells of the M x M relay map forced together by one fade state.

    Each group lists label pairs (k, l) whose received sums coincide at the
    fade; a valid relay map for this fade must give every group a single
    symbol.  No group ever contains two cells sharing a row or a column,
    because same-row or same-column collisions would need a zero difference
    on the other side.
    """

    M: int
    fade: FadeState
    groups: tuple

    def cell_count(self) -> int:
        return sum(len(g) for g in self.groups)


def group_complex(values: np.ndarray, tol: float = MERGE_TOL) -> np.ndarray:
    """Group ids for complex values equal up to ``tol`` per axis.

    Transitive banding: sorted by real part, runs with adjacent gaps <= tol
    form bands; inside a band the same is done on the imaginary part.  Ids
    are dense and ordered by (band, imag).
    """
    values = np.asarray(values, dtype=np.complex128).ravel()
    n = len(values)
    if n == 0:
        return np.empty(0, dtype=np.intp)
    order = np.lexsort((values.imag, values.real))
    sv = values[order]
    new_band = np.empty(n, dtype=bool)
    new_band[0] = True
    new_band[1:] = np.diff(sv.real) > tol
    band = np.cumsum(new_band) - 1
    order2 = np.lexsort((sv.imag, band))
    sv2 = sv[order2]
    band2 = band[order2]
    new_grp = np.empty(n, dtype=bool)
    new_grp[0] = True
    new_grp[1:] = (np.diff(band2) != 0) | (np.diff(sv2.imag) > tol)
    gid_sorted = np.cumsum(new_grp) - 1
    gid = np.empty(n, dtype=np.intp)
    gid[order[order2]] = gid_sorted
    return gid


def _fade_complex(z) -> complex:
    if isinstance(z, FadeState):
        return z.approx
    if isinstance(z, GaussianRational):
        return complex(z)
    return complex(z)


def _fade_exact(z) -> Optional[GaussianRational]:
    if isinstance(z, FadeState):
        return z.exact
    if isinstance(z, GaussianRational):
        return z
    return None


def effective_constellation(c: Constellation, z) -> np.ndarray:
    """The M*M received sums x_A + z*x_B (unscaled), row-major in (k, l)."""
    pts = c.complex_points()
    zc = _fade_complex(z)
    return (pts[:, None] + zc * pts[None, :]).ravel()


def is_singular_fade(c: Constellation, z, tol: float = MERGE_TOL) -> bool:
    """True when the effective constellation has fewer than M*M distinct points."""
    eff = effective_constellation(c, z)
    gid = group_complex(eff, tol)
    return int(gid.max()) + 1 < len(eff)


def constraints_for_fade(c: Constellation, z) -> ConstraintSet:
    """Collision groups of the effective constellation at fade ``z``.

    Only groups of size >= 2 are kept.  Groups are exact (Gaussian-integer
    keys) when both the constellation and the fade are exact; otherwise
    float values are merged with :data:`MERGE_TOL`.
    """
    M = c.M
    exact = _fade_exact(z)
    cells_by_key: dict = {}
    if exact is not None and c.kind in EXACT_KINDS:
        num, den = exact.num, exact.den
        for k, p in enumerate(c.points):
            pd = p * den
            for l, q in enumerate(c.points):
                key = pd + num * q
                cells_by_key.setdefault((key.re, key.im), []).append((k, l))
        groups = [g for g in cells_by_key.values() if len(g) > 1]
    else:
        gid = group_complex(effective_constellation(c, z))
        buckets: dict = {}
        for cell, g in enumerate(gid):
            buckets.setdefault(int(g), []).append((cell // M, cell % M))
        groups = [g for g in buckets.values() if len(g) > 1]
    groups.sort(key=lambda g: g[0])
    fs = z if isinstance(z, FadeState) else (
        FadeState.from_exact(exact) if exact is not None
        else FadeState.from_complex(_fade_complex(z)))
    return ConstraintSet(M, fs, tuple(tuple(g) for g in groups))


def scaled_delta_plus(c: Constellation) -> list[GaussianInt]:
    """Quarter-plane difference set with the common factor 2 divided out.

    PAM and QAM points sit on the odd lattice, so all differences are even;
    halving them gives the primitive geometry that the closed-form counts
    and the coprimality table are stated on.  Sorted by (norm, re, im).
    """
    if c.kind not in ("pam", "qam"):
        raise ValueError("scaled differences are defined for PAM and QAM only")
    halved = [GaussianInt(v.re // 2, v.im // 2)
              for v in delta_plus(difference_constellation(c))]
    halved.sort(key=lambda v: (v.re * v.re + v.im * v.im, v.re, v.im))
    return halved


def coprime_partner_counts(c: Constellation) -> list[tuple[GaussianInt, int]]:
    """For each scaled quarter-plane difference, how many of the others are coprime to it."""
    dp = scaled_delta_plus(c)
    return [(d, sum(1 for e in dp if e != d and gi_relatively_prime(d, e)))
            for d in dp]


def count_pam(m: int) -> int:
    """Closed-form number of singular fade states of m-PAM."""
    if m < 2:
        raise ValueError("PAM needs at least 2 points")
    return 2 + 4 * sum(restricted_totient(n) for n in range(1, m))


def count_qam(M: int) -> int:
    """Closed-form number of singular fade states of square M-QAM.

    Four unit fades plus eight per unordered coprime pair of distinct
    quarter-plane differences.
    """
    dp = scaled_delta_plus(build_qam(M))
    pairs = 0
    for i, a in enumerate(dp):
        for b in dp[i + 1:]:
            if gi_relatively_prime(a, b):
                pairs += 1
    return 4 + 8 * pairs


def count_qam_upper_bound(M: int) -> int:
    """Quadratic upper bound 4*(n*n - n + 1) with n = M - sqrt(M) on the QAM count."""
    s = math.isqrt(M)
    if s * s != M or M < 4 or M & (M - 1):
        raise ValueError("QAM size must be an even power of two")
    n = M - s
    return 4 * (n * n - n + 1)


def count_psk(M: int) -> int:
    """Closed-form number of singular fade states of M-PSK, M a power of two >= 2."""
    if M < 2 or M & (M - 1):
        raise ValueError("PSK count formula needs a power of two >= 2")
    return M * (M * M // 4 - M // 2 + 1)


def _enumerate_exact(c: Constellation) -> list[FadeState]:
    dp = scaled_delta_plus(c)
    # PAM differences are +/- the quarter-plane set; QAM differences cover
    # all four unit rotations of it.  PSK never reaches this path.
    units = UNITS if c.kind == "qam" else (UNITS[0], UNITS[2])
    seen = set()
    for a in dp:
        for b in dp:
            base = gr_reduce(a, b)
            for u in units:
                seen.add(base.times_unit(u))
    return [FadeState.from_exact(r)
            for r in sorted(seen, key=lambda r: (r.real, r.imag))]


def _enumerate_psk(c: Constellation) -> list[FadeState]:
    pts = c.complex_points()
    d = (pts[:, None] - pts[None, :]).ravel()
    d = d[np.abs(d) > 1e-12]
    # Distinct differences first: the ratio grid is quadratic in their count.
    gid = group_complex(d)
    _, first = np.unique(gid, return_index=True)
    d = d[first]
    ratios = (-d[:, None] / d[None, :]).ravel()
    gid = group_complex(ratios)
    _, first = np.unique(gid, return_index=True)
    reps = ratios[first]
    order = np.lexsort((reps.imag, reps.real))
    return [FadeState.from_complex(complex(v)) for v in reps[order]]


def enumerate_singular_fades(c: Constellation) -> list[FadeState]:
    """All singular fade states of ``c`` in canonical (re, im) order.

    Exact and deduplicated algebraically for PAM/QAM; float ratios merged
    with :data:`MERGE_TOL` for PSK.
    """
    if c.kind in ("pam", "qam"):
        return _enumerate_exact(c)
    if c.kind == "psk":
        return _enumerate_psk(c)
    raise ValueError(f"no fade enumeration for kind {c.kind!r}")
