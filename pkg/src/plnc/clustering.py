"""Cluster distances and runtime selection of the relay map.

The figure of merit for a relay map at fade z is the minimum distance
between effective-constellation points that the map sends to different
clusters; the adaptive relay picks, for each observed z, the codebook entry
maximizing it.  Distances only depend on the pair of differences
(dA, dB) = (x_k - x_k', x_l - x_l'), so everything here works on deduplicated
difference pairs instead of raw cell pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .constellation import Constellation
from .fades import FadeState
from .latin import Codebook, LatinSquare

__all__ = [
    "Clustering",
    "SelectionIndex",
    "dmin_effective",
    "min_cluster_distance",
    "pair_partition_cache",
    "select_clustering",
]

#: Relative slack under which two candidate distances count as tied.
TIE_REL_TOL = 1e-9


class Clustering:
    """A relay map viewed as a partition of the M x M cell grid.

    ``blocks[s]`` lists the cells (k, l) mapped to cluster symbol s.
    """

    def __init__(self, square: LatinSquare):
        self.square = square
        blocks: list[list[tuple]] = [[] for _ in range(square.t)]
        for k in range(square.M):
            for l in range(square.M):
                blocks[square.cells[k, l]].append((k, l))
        self.blocks = tuple(tuple(b) for b in blocks)
        self._pair_cache: dict = {}

    @property
    def M(self) -> int:
        return self.square.M

    @property
    def t(self) -> int:
        return self.square.t

    def cluster_of(self, k: int, l: int) -> int:
        return int(self.square.cells[k, l])

    def __eq__(self, other) -> bool:
        return isinstance(other, Clustering) and self.square == other.square

    def __hash__(self) -> int:
        return hash(self.square)


def _cell_difference_grids(c: Constellation) -> tuple[np.ndarray, np.ndarray]:
    # dA and dB for every ordered pair of grid cells, shape (M*M, M*M).
    pts = c.complex_points()
    M = c.M
    cells = np.arange(M * M)
    pa = pts[cells // M]
    pb = pts[cells % M]
    return pa[:, None] - pa[None, :], pb[:, None] - pb[None, :]


def _dedup_pairs(da: np.ndarray, db: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Collapse identical (dA, dB) pairs; identity keys are rounded to 9
    # decimals so float twins of the same lattice value merge, while the
    # returned representatives keep their original unrounded values.
    rows = np.column_stack([np.round(da.real, 9), np.round(da.imag, 9),
                            np.round(db.real, 9), np.round(db.imag, 9)])
    _, first = np.unique(rows, axis=0, return_index=True)
    return da[first], db[first]


@lru_cache(maxsize=8)
def _all_pair_arrays(c: Constellation) -> tuple[np.ndarray, np.ndarray]:
    DA, DB = _cell_difference_grids(c)
    off = ~np.eye(DA.shape[0], dtype=bool)
    return _dedup_pairs(DA[off], DB[off])


def dmin_effective(c: Constellation, z) -> float:
    """Minimum distance of the effective constellation at fade ``z``.

    Zero exactly when ``z`` is a singular fade state.  Distances are at the
    unit-average-energy scaling of ``c``.
    """
    zc = z.approx if isinstance(z, FadeState) else complex(z)
    A, B = _all_pair_arrays(c)
    return float(np.abs(A + zc * B).min()) * c.energy_scale


def pair_partition_cache(cl: Clustering, c: Constellation) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicated difference pairs (dA, dB) realized across clusters.

    Cached on the clustering, keyed by the constellation, so repeated
    distance evaluations over many fades reuse the arrays.
    """
    cached = cl._pair_cache.get(c)
    if cached is not None:
        return cached
    if cl.M != c.M:
        raise ValueError("clustering and constellation sizes differ")
    DA, DB = _cell_difference_grids(c)
    lab = cl.square.cells.ravel()
    cross = lab[:, None] != lab[None, :]
    pair = _dedup_pairs(DA[cross], DB[cross])
    cl._pair_cache[c] = pair
    return pair


def min_cluster_distance(c: Constellation, cl: Clustering, z) -> float:
    """Minimum distance between effective points in different clusters.

    This is what the adaptive relay maximizes; it is positive at ``z`` iff
    the clustering removes the singular fade ``z`` (or ``z`` is not singular
    at all).
    """
    zc = z.approx if isinstance(z, FadeState) else complex(z)
    A, B = pair_partition_cache(cl, c)
    return float(np.abs(A + zc * B).min()) * c.energy_scale


class SelectionIndex:
    """Precomputed structure answering argmax-of-min-cluster-distance fast.

    Construction: the global list of deduplicated difference pairs, plus a
    boolean table saying which pairs each codebook entry keeps internal
    (never split across clusters).  At a fade z, the globally closest pair
    p1 gives the floor v1 = |dA + z*dB|; every entry splitting p1 scores
    exactly v1, so only the few entries keeping p1 internal need their exact
    minimum.  Ties within :data:`TIE_REL_TOL` go to the lowest entry index,
    making selection deterministic.
    """

    _CHUNK = 128

    def __init__(self, codebook: Codebook):
        c = codebook.constellation
        self.codebook = codebook
        self.scale = c.energy_scale
        M = c.M
        DA, DB = _cell_difference_grids(c)
        off = ~np.eye(M * M, dtype=bool)
        da, db = DA[off], DB[off]
        rows = np.column_stack([np.round(da.real, 9), np.round(da.imag, 9),
                                np.round(db.real, 9), np.round(db.imag, 9)])
        uniq, first, inverse = np.unique(rows, axis=0, return_index=True,
                                         return_inverse=True)
        inverse = inverse.reshape(-1)
        self.A = da[first]
        self.B = db[first]
        P = len(first)
        pair_id = np.full((M * M, M * M), -1, dtype=np.int32)
        pair_id[off] = inverse
        E = len(codebook)
        internal = np.ones((E, P), dtype=bool)
        for e, (_, sq) in enumerate(codebook):
            lab = sq.cells.ravel()
            cross = lab[:, None] != lab[None, :]
            internal[e, pair_id[cross]] = False
        self.internal = internal
        self._clusterings: list[Optional[Clustering]] = [None] * E

    def clustering(self, idx: int) -> Clustering:
        if self._clusterings[idx] is None:
            self._clusterings[idx] = Clustering(self.codebook[idx][1])
        return self._clusterings[idx]

    def batch_select(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Selected entry index and its (scaled) min cluster distance per fade."""
        z = np.asarray(z, dtype=np.complex128).ravel()
        n = len(z)
        idx_out = np.zeros(n, dtype=np.int64)
        d_out = np.empty(n, dtype=np.float64)
        E = self.internal.shape[0]
        for lo in range(0, n, self._CHUNK):
            zc = z[lo:lo + self._CHUNK]
            F = np.abs(self.A[None, :] + zc[:, None] * self.B[None, :])
            p1 = F.argmin(axis=1)
            v1 = F[np.arange(len(zc)), p1]
            cand_mask = self.internal[:, p1]          # (E, chunk)
            has_cand = cand_mask.any(axis=0)
            for r in np.flatnonzero(has_cand):
                cands = np.flatnonzero(cand_mask[:, r])
                dvals = [float(F[r, ~self.internal[e]].min()) for e in cands]
                base = float(v1[r])
                best = max(dvals) if len(cands) == E else max(max(dvals), base)
                thr = best * (1.0 - TIE_REL_TOL)
                pick = None
                if len(cands) < E and base >= thr:
                    pick = _first_missing(cands)
                for e, d in zip(cands, dvals):
                    if d >= thr and (pick is None or e < pick):
                        pick = int(e)
                idx_out[lo + r] = pick
                d_out[lo + r] = max(dvals + ([base] if len(cands) < E else []))
            no_cand = ~has_cand
            d_out[lo:lo + len(zc)][no_cand] = v1[no_cand]
            # entries splitting p1 all score exactly v1; lowest index wins
        return idx_out, d_out * self.scale

    def select(self, z) -> tuple[int, float]:
        idx, d = self.batch_select(np.array([complex(z)]))
        return int(idx[0]), float(d[0])


def _first_missing(sorted_ids: np.ndarray) -> int:
    out = 0
    for v in sorted_ids:
        if v == out:
            out += 1
        else:
            break
    return out


def _selection_index(codebook: Codebook) -> SelectionIndex:
    idx = getattr(codebook, "_selection_index", None)
    if idx is None:
        idx = SelectionIndex(codebook)
        codebook._selection_index = idx
    return idx


def select_clustering(codebook: Codebook, z) -> tuple[FadeState, Clustering]:
    """The codebook entry maximizing min cluster distance at fade ``z``.

    Deterministic: distance ties within :data:`TIE_REL_TOL` (relative) go to
    the entry earliest in canonical fade order.
    """
    index = _selection_index(codebook)
    i, _ = index.select(z)
    return codebook[i][0], index.clustering(i)
