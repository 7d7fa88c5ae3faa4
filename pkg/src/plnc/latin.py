"""Relay network-coding maps as Latin squares.

A relay map assigns a broadcast symbol to every pair (k, l) of end-node
labels.  Both end nodes can recover the other's label from the broadcast
symbol exactly when no symbol repeats in a row or column, i.e. when the
M x M array is a Latin square (possibly on more than M symbols).  This
module builds the standard squares, transports squares between fade states
by symmetry, completes partially constrained squares with a small
branch-and-bound solver, and assembles one square per singular fade state
into a codebook.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constellation import Constellation
from .fades import ConstraintSet, FadeState, constraints_for_fade, enumerate_singular_fades
from .gaussian import GaussianInt

#: Base phase step the lattice kinds are closed under (PSK uses a float phase).
_PHASE_UNIT = {"pam": GaussianInt(-1, 0), "qam": GaussianInt(0, 1)}

__all__ = [
    "LatinSquare",
    "PartialSquare",
    "CompletionResult",
    "Codebook",
    "CodebookError",
    "is_latin",
    "exclusive_law_holds",
    "xor_square",
    "pam_standard",
    "qam_standard",
    "transpose",
    "permute_columns",
    "rotate_columns",
    "square_removes_fade",
    "complete_cpls",
    "build_codebook",
]


def is_latin(cells) -> bool:
    """True when no symbol repeats within any row or any column."""
    a = np.asarray(cells)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    n = a.shape[0]
    for i in range(n):
        if len(set(a[i, :].tolist())) != n or len(set(a[:, i].tolist())) != n:
            return False
    return True


def exclusive_law_holds(cells) -> bool:
    """Both end nodes can invert the map given their own label.

    Knowing k (resp. l) and the relay symbol determines l (resp. k) exactly
    when rows and columns are duplicate-free, so this is the Latin property.
    """
    return is_latin(cells)


class LatinSquare:
    """An M x M array on symbols 0..t-1 with no repeats in rows or columns."""

    __slots__ = ("_cells", "_t")

    def __init__(self, cells):
        a = np.array(cells, dtype=np.int16)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("cells must be a square array")
        if a.size and a.min() < 0:
            raise ValueError("symbols must be non-negative")
        syms = np.unique(a)
        t = int(syms[-1]) + 1 if a.size else 0
        if len(syms) != t:
            raise ValueError("symbols must be exactly 0..t-1 with no gaps")
        if not is_latin(a):
            raise ValueError("a symbol repeats within a row or column")
        a.setflags(write=False)
        self._cells = a
        self._t = t

    @property
    def cells(self) -> np.ndarray:
        return self._cells

    @property
    def M(self) -> int:
        return self._cells.shape[0]

    @property
    def t(self) -> int:
        """Number of distinct symbols (cluster count); always >= M."""
        return self._t

    def __eq__(self, other) -> bool:
        return (isinstance(other, LatinSquare)
                and self._cells.shape == other._cells.shape
                and bool((self._cells == other._cells).all()))

    def __hash__(self) -> int:
        return hash((self._cells.shape, self._cells.tobytes()))

    def __getitem__(self, kl) -> int:
        return int(self._cells[kl])

    def to_text(self) -> str:
        """Header line 'M t' then M rows of space-separated symbols."""
        lines = [f"{self.M} {self.t}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self._cells]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LatinSquare":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty square text")
        head = lines[0].split()
        if len(head) != 2:
            raise ValueError("header must be 'M t'")
        M, t = int(head[0]), int(head[1])
        if len(lines) != M + 1:
            raise ValueError(f"expected {M} rows, got {len(lines) - 1}")
        rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
        if any(len(r) != M for r in rows):
            raise ValueError("row length differs from M")
        sq = cls(rows)
        if sq.t != t:
            raise ValueError(f"header says {t} symbols, rows use {sq.t}")
        return sq

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"LatinSquare(M={self.M}, t={self.t})"


def xor_square(M: int) -> LatinSquare:
    """The bit-XOR map L(k, l) = k ^ l; M must be a power of two."""
    if M < 2 or M & (M - 1):
        raise ValueError("XOR square needs a power-of-two size")
    idx = np.arange(M)
    return LatinSquare(idx[:, None] ^ idx[None, :])


def pam_standard(m: int) -> LatinSquare:
    """The cyclic map L(k, l) = (k + l) mod m; removes the fade z = 1 for m-PAM."""
    if m < 2:
        raise ValueError("need m >= 2")
    idx = np.arange(m)
    return LatinSquare((idx[:, None] + idx[None, :]) % m)


def qam_standard(M: int) -> LatinSquare:
    """Component-wise cyclic map for square M-QAM; removes the fade z = 1.

    Rows and columns are indexed by (in-phase, quadrature) digit pairs; the
    symbol adds the pairs digit-wise mod sqrt(M) and re-encodes.
    """
    s = int(np.sqrt(M))
    if s * s != M or M < 4 or M & (M - 1):
        raise ValueError("QAM size must be an even power of two")
    idx = np.arange(M)
    hi = (idx[:, None] // s + idx[None, :] // s) % s
    lo = (idx[:, None] % s + idx[None, :] % s) % s
    return LatinSquare(hi * s + lo)


def transpose(sq: LatinSquare) -> LatinSquare:
    """Swap the roles of the two end nodes; maps a square for z to one for 1/z."""
    return LatinSquare(sq.cells.T)


def permute_columns(sq: LatinSquare, perm: Sequence[int]) -> LatinSquare:
    """Gather columns: result column l is input column perm[l]."""
    perm = np.asarray(perm, dtype=np.intp)
    M = sq.M
    if perm.shape != (M,) or len(set(perm.tolist())) != M or perm.min() < 0 or perm.max() >= M:
        raise ValueError("perm must be a permutation of 0..M-1")
    return LatinSquare(sq.cells[:, perm])


def _unit_label_perm(c: Constellation) -> np.ndarray:
    # Column relabeling tau with point(tau[l]) = u * point(l), where u is the
    # base phase the constellation is closed under: -1 for PAM, j for QAM,
    # exp(2*pi*j/M) for PSK.  Used to transport a square from fade z to z*u.
    M = c.M
    if c.kind == "pam":
        return np.arange(M - 1, -1, -1)
    if c.kind == "qam":
        return np.array([c.label_of(c.points[l].times_j()) for l in range(M)])
    if c.kind == "psk":
        return (np.arange(M) + 1) % M
    raise ValueError(f"no phase symmetry for kind {c.kind!r}")


def _unit_phase_order(c: Constellation) -> int:
    return {"pam": 2, "qam": 4, "psk": c.M}[c.kind]


def rotate_columns(sq: LatinSquare, c: Constellation) -> LatinSquare:
    """One phase step: a square removing fade z becomes one removing z * u.

    u is the base phase of ``c`` (see the module notes): if every collision
    of the effective constellation at z*u is a collision at z with B's label
    relabeled by tau, assigning L'(k, l) = L(k, tau(l)) keeps every collision
    group of z*u monochromatic.
    """
    return permute_columns(sq, _unit_label_perm(c))


def square_removes_fade(sq: LatinSquare, c: Constellation, z) -> bool:
    """True when the square gives one symbol to every collision group at ``z``."""
    cells = sq.cells
    for grp in constraints_for_fade(c, z).groups:
        first = cells[grp[0]]
        if any(cells[cell] != first for cell in grp[1:]):
            return False
    return True


class PartialSquare:
    """A partially specified relay map: prefilled cells plus tie groups.

    ``cells`` holds symbols with -1 for empty; ``groups`` lists cell sets
    that must share one symbol.  Cells of a group never share a row or a
    column (a collision group cannot, and the solver relies on it).
    """

    def __init__(self, M: int, cells=None, groups: Sequence[Sequence[tuple]] = ()):
        self.M = M
        if cells is None:
            cells = np.full((M, M), -1, dtype=np.int32)
        self.cells = np.array(cells, dtype=np.int32)
        if self.cells.shape != (M, M):
            raise ValueError("cells must be M x M")
        self.groups = tuple(tuple(g) for g in groups)
        self._validate()

    def _validate(self) -> None:
        M = self.M
        for i in range(M):
            for line in (self.cells[i, :], self.cells[:, i]):
                filled = line[line >= 0]
                if len(set(filled.tolist())) != len(filled):
                    raise ValueError("prefilled symbols repeat in a row or column")
        seen = set()
        for g in self.groups:
            if len(g) < 1:
                raise ValueError("empty group")
            rows = [cell[0] for cell in g]
            cols = [cell[1] for cell in g]
            if not all(0 <= r < M and 0 <= c < M for r, c in g):
                raise ValueError("group cell out of range")
            if len(set(rows)) != len(g) or len(set(cols)) != len(g):
                raise ValueError("a group repeats a row or column")
            for cell in g:
                if cell in seen:
                    raise ValueError("groups overlap")
                seen.add(cell)

    @classmethod
    def from_constraints(cls, cs: ConstraintSet) -> "PartialSquare":
        return cls(cs.M, groups=cs.groups)


@dataclass
class CompletionResult:
    """Outcome of :func:`complete_cpls`.

    ``square`` is None when an explicit symbol cap was exhaustively refuted,
    i.e. no completion with at most ``t_max`` symbols exists.
    """

    square: Optional[LatinSquare]
    proven_minimal: bool
    used_greedy: bool
    elapsed: float

    @property
    def t(self) -> int:
        return self.square.t


class _SolveTimeout(Exception):
    pass


def _search(M: int, variables: list, prefilled: list, t: int,
            deadline: Optional[float], greedy: bool) -> Optional[list]:
    """Assign one symbol < t to every variable (a tuple of cells).

    Depth-first with MRV, symbols ascending, and at most one fresh symbol
    offered at a time (unused symbols are interchangeable, so this prunes
    only permuted duplicates).  ``greedy`` disables backtracking; with no
    symbol cap that always succeeds, since a fresh symbol fits any variable.
    Returns the assignment list or None; raises _SolveTimeout past deadline.
    """
    row_used = [0] * M
    col_used = [0] * M
    introduced = 0
    for (r, c), s in prefilled:
        row_used[r] |= 1 << s
        col_used[c] |= 1 << s
        introduced = max(introduced, s + 1)
    n = len(variables)
    assign = [-1] * n
    full = (1 << t) - 1
    nodes = 0

    def rec() -> bool:
        nonlocal introduced, nodes
        nodes += 1
        if deadline is not None and nodes % 512 == 0 and time.monotonic() > deadline:
            raise _SolveTimeout
        best = -1
        best_mask = 0
        best_count = t + 1
        for i in range(n):
            if assign[i] >= 0:
                continue
            m = full
            for r, c in variables[i]:
                m &= ~(row_used[r] | col_used[c])
            m &= (1 << min(introduced + 1, t)) - 1
            cnt = m.bit_count()
            if cnt == 0:
                return False
            if cnt < best_count:
                best, best_mask, best_count = i, m, cnt
                if cnt == 1:
                    break
        if best < 0:
            return True
        m = best_mask
        while m:
            s = (m & -m).bit_length() - 1
            m &= m - 1
            bit = 1 << s
            assign[best] = s
            for r, c in variables[best]:
                row_used[r] |= bit
                col_used[c] |= bit
            old = introduced
            if s == introduced:
                introduced = s + 1
            if rec():
                return True
            introduced = old
            for r, c in variables[best]:
                row_used[r] &= ~bit
                col_used[c] &= ~bit
            assign[best] = -1
            if greedy:
                return False
        return False

    return assign if rec() else None


def _canonical_relabel(cells: np.ndarray) -> np.ndarray:
    # Rename symbols by first appearance in row-major order.
    out = np.empty_like(cells)
    mapping: dict[int, int] = {}
    flat_in = cells.ravel()
    flat_out = out.ravel()
    for i, v in enumerate(flat_in.tolist()):
        if v not in mapping:
            mapping[v] = len(mapping)
        flat_out[i] = mapping[v]
    return out


def complete_cpls(partial: PartialSquare, *, t_max: Optional[int] = None,
                  budget_s: float = 10.0) -> CompletionResult:
    """Complete a constrained partial square with as few symbols as feasible.

    Tries exact search at t = M, M+1, ... up to ``t_max`` (default M + 4)
    within the time budget; if the budget runs out, falls back to a greedy
    fill that always succeeds but is only minimal by luck, and the result
    is flagged accordingly.  ``proven_minimal`` is True when every smaller
    symbol count was exhaustively refuted.

    An explicit ``t_max`` is a hard cap: when every count up to it is
    refuted without hitting the budget, the result carries ``square=None``
    instead of a greedy fill that would break the cap.

    When the partial square had no prefilled cells, the result is relabeled
    canonically (symbols numbered by first appearance, row-major), so equal
    constraint sets always yield the identical square.
    """
    M = partial.M
    start = time.monotonic()

    prefilled = [((r, c), int(partial.cells[r, c]))
                 for r in range(M) for c in range(M) if partial.cells[r, c] >= 0]
    had_prefill = bool(prefilled)
    pre_cells = {cell for cell, _ in prefilled}
    forced: dict[int, int] = {}
    for gi, g in enumerate(partial.groups):
        vals = {int(partial.cells[cell]) for cell in g if cell in pre_cells}
        if len(vals) > 1:
            raise ValueError("a group spans two different prefilled symbols")
        if vals:
            forced[gi] = vals.pop()
    # Forced groups act like extra prefill on their empty cells.
    for gi, s in forced.items():
        for cell in partial.groups[gi]:
            if cell not in pre_cells:
                prefilled.append((cell, s))
                pre_cells.add(cell)

    variables: list[tuple] = [g for gi, g in enumerate(partial.groups) if gi not in forced]
    grouped = {cell for g in variables for cell in g}
    variables += [((r, c),) for r in range(M) for c in range(M)
                  if (r, c) not in grouped and (r, c) not in pre_cells]

    t_floor = max(M, max((s for _, s in prefilled), default=-1) + 1)
    capped = t_max is not None
    if t_max is None:
        t_max = M + 4
    t_max = max(t_max, t_floor)

    # The expensive outcome is refuting a symbol count; finding a completion
    # one level up is usually fast.  So the floor gets the full budget and,
    # after a timeout, each higher count still gets a short slice before the
    # greedy fallback.
    proven = True
    for t in range(t_floor, t_max + 1) if budget_s > 0 else ():
        slice_s = budget_s if proven else budget_s / 4.0
        deadline = time.monotonic() + slice_s
        try:
            assign = _search(M, variables, prefilled, t, deadline, greedy=False)
        except _SolveTimeout:
            proven = False
            continue
        if assign is not None:
            cells = _assemble(M, variables, prefilled, assign)
            if not had_prefill:
                cells = _canonical_relabel(cells)
            return CompletionResult(LatinSquare(cells), proven, False,
                                    time.monotonic() - start)
    if capped and proven:
        return CompletionResult(None, True, False, time.monotonic() - start)
    # Greedy never dead-ends when fresh symbols stay available.
    assign = _search(M, variables, prefilled, M * M, None, greedy=True)
    if assign is None:
        raise AssertionError("greedy completion failed unexpectedly")
    cells = _assemble(M, variables, prefilled, assign)
    if not had_prefill:
        cells = _canonical_relabel(cells)
    square = LatinSquare(cells)
    return CompletionResult(square, proven and square.t == t_floor, True,
                            time.monotonic() - start)


def _assemble(M: int, variables: list, prefilled: list, assign: list) -> np.ndarray:
    cells = np.full((M, M), -1, dtype=np.int32)
    for (r, c), s in prefilled:
        cells[r, c] = s
    for var, s in zip(variables, assign):
        for r, c in var:
            cells[r, c] = s
    return cells


class CodebookError(RuntimeError):
    """Raised when some fade cannot get a valid square (verification failure
    or an explicit symbol cap refuted)."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__(f"no valid square for {len(self.failures)} fade(s): "
                         + ", ".join(str(f) for f in self.failures[:5]))


class Codebook:
    """One Latin square per singular fade state, in canonical fade order."""

    def __init__(self, constellation: Constellation, entries, stats: Optional[dict] = None):
        self.constellation = constellation
        self.entries = tuple((f, s) for f, s in entries)
        self.stats = dict(stats or {})
        self._by_fade = {f: i for i, (f, _) in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int):
        return self.entries[i]

    def fades(self) -> list[FadeState]:
        return [f for f, _ in self.entries]

    def squares(self) -> list[LatinSquare]:
        return [s for _, s in self.entries]

    def index_of(self, fade: FadeState) -> int:
        return self._by_fade[fade]

    def square_for(self, fade: FadeState) -> LatinSquare:
        return self.entries[self._by_fade[fade]][1]

    def to_json_obj(self) -> dict:
        return {
            "constellation": self.constellation.to_json_obj(),
            "stats": self.stats,
            "entries": [{"fade": f.to_json_obj(), "t": s.t, "square": s.to_text()}
                        for f, s in self.entries],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Codebook":
        cst = Constellation.from_json_obj(obj["constellation"])
        entries = [(FadeState.from_json_obj(e["fade"]),
                    LatinSquare.from_text(e["square"]))
                   for e in obj["entries"]]
        return cls(cst, entries, obj.get("stats"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Codebook":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))


def _standard_candidates(c: Constellation) -> list[LatinSquare]:
    # Fixed isotope family: the standard square and its transpose under all
    # phase rotations.  Checked before invoking the solver; hits keep t = M.
    if c.kind == "pam":
        base = pam_standard(c.M)
    elif c.kind == "qam":
        base = qam_standard(c.M)
    else:
        base = xor_square(c.M)
    out: list[LatinSquare] = []
    seen = set()
    for b in (base, transpose(base)):
        sq = b
        for _ in range(_unit_phase_order(c)):
            if sq not in seen:
                seen.add(sq)
                out.append(sq)
            sq = rotate_columns(sq, c)
    return out


def _groups_monochromatic(sq: LatinSquare, groups) -> bool:
    cells = sq.cells
    for g in groups:
        first = cells[g[0]]
        for cell in g[1:]:
            if cells[cell] != first:
                return False
    return True


def _in_fundamental_domain(c: Constellation, fade: FadeState) -> bool:
    # Quarter plane (half line for PAM, 1/M sector for PSK) inside the unit
    # disk.  Boundary misclassification is harmless: a leftover fade is
    # solved directly in a final sweep.
    if fade.exact is not None:
        r = fade.exact
        return r.norm_le_one() and r.real > 0 and r.imag >= 0
    z = fade.approx
    if abs(z) > 1 + 1e-9:
        return False
    sector = 2 * np.pi / _unit_phase_order(c)
    theta = np.angle(z) % (2 * np.pi)
    return -1e-9 <= theta < sector - 1e-9


def _solve_one(c: Constellation, fade: FadeState, budget_s: float,
               t_max: Optional[int]) -> tuple:
    cs = constraints_for_fade(c, fade)
    for cand in _standard_candidates(c):
        if _groups_monochromatic(cand, cs.groups):
            return cand, "isotope", True
    res = complete_cpls(PartialSquare.from_constraints(cs),
                        t_max=t_max, budget_s=budget_s)
    if res.square is None:
        return None, "unsat", True
    return res.square, "solved", res.proven_minimal


def _solve_one_job(args):
    idx, c, fade, budget_s, t_max = args
    sq, method, minimal = _solve_one(c, fade, budget_s, t_max)
    return idx, sq, method, minimal


def build_codebook(c: Constellation, *, budget_s: float = 10.0,
                   t_max: Optional[int] = None, workers: int = 1,
                   verify: bool = True) -> Codebook:
    """A Latin square for every singular fade state of ``c``.

    Fades in the fundamental domain (unit disk, one phase sector) are solved
    directly: first against the fixed standard candidates, then by
    constrained completion with ``budget_s`` seconds each.  The rest of each
    phase orbit is derived by transposition (inverts the fade) and column
    rotation (advances the phase), which preserves both symbol count and
    minimality.  Every square is verified against its own fade's collision
    groups unless ``verify`` is False.

    The result does not depend on ``workers``: direct solves are independent
    and deterministic, and derivation order is fixed.
    """
    fades = enumerate_singular_fades(c)
    order = _unit_phase_order(c)
    by_exact = {f.exact: i for i, f in enumerate(fades)} if fades[0].exact is not None else None
    values = np.array([f.approx for f in fades])

    def find(exact, approx) -> Optional[int]:
        if by_exact is not None:
            return by_exact.get(exact)
        i = int(np.argmin(np.abs(values - approx)))
        return i if abs(values[i] - approx) < 1e-6 else None

    squares: dict[int, LatinSquare] = {}
    method: dict[int, str] = {}
    minimal: dict[int, bool] = {}

    def solve_direct(indices: list[int]) -> None:
        jobs = [(i, c, fades[i], budget_s, t_max) for i in indices]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_solve_one_job, jobs))
        else:
            results = [_solve_one_job(j) for j in jobs]
        for i, sq, meth, mini in results:
            squares[i], method[i], minimal[i] = sq, meth, mini

    reps = [i for i, f in enumerate(fades) if _in_fundamental_domain(c, f)]
    solve_direct(reps)

    # Transport each solved representative around its orbit.
    for i in reps:
        if squares[i] is None:
            continue
        fade = fades[i]
        for inverted in (False, True):
            if fade.exact is not None:
                base = fade.exact.reciprocal() if inverted else fade.exact
                approx = None
            else:
                base = None
                approx = 1 / fade.approx if inverted else fade.approx
            sq = transpose(squares[i]) if inverted else squares[i]
            for _ in range(order):
                j = find(base, approx)
                if j is not None and j not in squares:
                    squares[j] = sq
                    method[j] = "derived"
                    minimal[j] = minimal[i]
                if fade.exact is not None:
                    base = base.times_unit(_PHASE_UNIT[c.kind])
                else:
                    approx = approx * np.exp(2j * np.pi / order)
                sq = rotate_columns(sq, c)

    # Safety net for anything the domain test or float matching missed.
    leftovers = [i for i in range(len(fades)) if i not in squares]
    solve_direct(leftovers)

    unsat = [fades[i] for i, sq in squares.items() if sq is None]
    if unsat:
        raise CodebookError(unsat)

    if verify:
        bad = [fades[i] for i, sq in squares.items()
               if not _groups_monochromatic(sq, constraints_for_fade(c, fades[i]).groups)]
        if bad:
            raise CodebookError(bad)

    entries = [(fades[i], squares[i]) for i in range(len(fades))]
    t_vals = [sq.t for _, sq in entries]
    stats = {
        "fades": len(entries),
        "by_method": {m: sum(1 for v in method.values() if v == m)
                      for m in ("isotope", "solved", "derived")},
        "direct": len(reps) + len(leftovers),
        "max_t": max(t_vals),
        "oversize": sum(1 for t in t_vals if t > c.M),
        "t_histogram": {str(t): t_vals.count(t) for t in sorted(set(t_vals))},
        "non_minimal": sum(1 for v in minimal.values() if not v),
    }
    return Codebook(c, entries, stats)
