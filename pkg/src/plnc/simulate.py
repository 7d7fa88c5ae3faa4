"""Monte-Carlo bit-error simulation of the two-phase relay protocol.

Phase 1 (multiple access): both end nodes transmit one symbol; the relay
receives h_A*x_A + h_B*x_B + noise and jointly detects the label pair.
Phase 2 (broadcast): the relay maps the pair through a Latin square (fixed
XOR map, or the codebook entry chosen adaptively from z = h_B/h_A), sends
the cluster symbol from a broadcast constellation, and each end node inverts
its own row or column of the square to recover the other node's label.

Trials are organized in fixed-size blocks, each with an RNG seeded from
(seed, snr_index, block_index) and a fixed draw order, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .clustering import SelectionIndex
from .constellation import Constellation, build_constellation, build_qam
from .fades import FadeState
from .gaussian import GaussianInt
from .latin import Codebook, LatinSquare, xor_square

__all__ = [
    "BLOCK",
    "SimConfig",
    "BerPoint",
    "load_sim_config",
    "bc_constellation",
    "sample_fades",
    "run_ber",
    "format_ber_csv",
    "exact_decode_check",
]

#: Trials per RNG block.  Fixed: changing it changes the random stream.
BLOCK = 4096

_SCHEMES = ("ls", "xor")
_CHANNELS = ("rayleigh", "rician")


@dataclass(frozen=True)
class SimConfig:
    """Everything that determines a BER run (and its random stream)."""

    kind: str
    M: int
    scheme: str = "ls"
    snr_db: tuple = (10.0,)
    trials: int = 10_000
    seed: int = 0
    channel: str = "rayleigh"
    rician_k_db: float = 10.0
    block_fading: int = 1

    def __post_init__(self) -> None:
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}")
        if self.channel not in _CHANNELS:
            raise ValueError(f"channel must be one of {_CHANNELS}")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.block_fading < 1:
            raise ValueError("block_fading must be >= 1")
        if not self.snr_db:
            raise ValueError("need at least one SNR point")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if "family" in d:
            d["kind"] = d.pop("family")
        if "snr_db" in d and not isinstance(d["snr_db"], (list, tuple)):
            d["snr_db"] = [d["snr_db"]]
        allowed = {"kind", "M", "scheme", "snr_db", "trials", "seed",
                   "channel", "rician_k_db", "block_fading"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "snr_db" in d:
            d["snr_db"] = tuple(float(s) for s in d["snr_db"])
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "M": self.M, "scheme": self.scheme,
            "snr_db": list(self.snr_db), "trials": self.trials,
            "seed": self.seed, "channel": self.channel,
            "rician_k_db": self.rician_k_db, "block_fading": self.block_fading,
        }


def load_sim_config(path) -> SimConfig:
    """Read a config from JSON, or TOML when the file ends in .toml."""
    p = str(path)
    if p.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(p, "rb") as fh:
            return SimConfig.from_dict(tomllib.load(fh))
    import json
    with open(p, "r", encoding="utf-8") as fh:
        return SimConfig.from_dict(json.load(fh))


@dataclass
class BerPoint:
    snr_db: float
    trials: int
    bit_errors: int
    bits: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else math.nan


def bc_constellation(t: int) -> Constellation:
    """Broadcast signal set with ``t`` points.

    A square power-of-two count gets the standard QAM; any other count gets
    the ``t`` lowest-energy points of the smallest centered square lattice
    holding at least ``t`` points (energy ties broken by angle from the
    positive real axis), normalized to unit average energy.
    """
    if t < 2:
        raise ValueError("broadcast set needs at least 2 points")
    s = math.isqrt(t)
    if s * s == t and t & (t - 1) == 0:
        return build_qam(t)
    side = s if s * s == t else s + 1
    coords = [2 * i - (side - 1) for i in range(side)]
    pts = [GaussianInt(a, b) for a in coords for b in coords]
    pts.sort(key=lambda p: (p.re * p.re + p.im * p.im,
                            math.atan2(p.im, p.re) % (2 * math.pi)))
    chosen = tuple(pts[:t])
    scale = 1.0 / math.sqrt(sum(abs(complex(p)) ** 2 for p in chosen) / t)
    return Constellation("cross", t, chosen, scale)


def sample_fades(channel: str, rician_k_db: float, rng: np.random.Generator,
                 n: int) -> np.ndarray:
    """(4, n) complex gains: phase-1 h_A, h_B then phase-2 h_A, h_B.

    All links are independent with unit average power; Rician adds a real
    line-of-sight component of power K/(K+1).
    """
    g = rng.standard_normal((2, 4, n))
    h = (g[0] + 1j * g[1]) * math.sqrt(0.5)
    if channel == "rician":
        k = 10.0 ** (rician_k_db / 10.0)
        h = math.sqrt(k / (k + 1.0)) + h * math.sqrt(1.0 / (k + 1.0))
    elif channel != "rayleigh":
        raise ValueError(f"unknown channel {channel!r}")
    return h


class _Payload:
    """Precomputed per-run tables shared by all blocks."""

    def __init__(self, cfg: SimConfig, codebook: Optional[Codebook]):
        if cfg.scheme == "ls":
            if codebook is None:
                raise ValueError(
                    "the adaptive scheme needs a codebook; build one with "
                    "build_codebook() or the 'codebook' CLI command")
            c = codebook.constellation
            if (c.kind, c.M) != (cfg.kind, cfg.M):
                raise ValueError(
                    f"codebook is for {c.kind}-{c.M}, config wants {cfg.kind}-{cfg.M}")
            squares = codebook.squares()
            self.sel: Optional[SelectionIndex] = SelectionIndex(codebook)
        else:
            c = build_constellation(cfg.kind, cfg.M)
            squares = [xor_square(cfg.M)]
            self.sel = None
        self.cfg = cfg
        self.pts = c.complex_points(scaled=True)
        self.bits = c.bits()
        M = c.M
        self.PC = np.array([int(v).bit_count() for v in range(M)], dtype=np.int64)
        self.hyp_k = np.arange(M * M) // M
        self.hyp_l = np.arange(M * M) % M
        self.SQ = np.stack([np.asarray(s.cells) for s in squares])
        self.T = np.array([s.t for s in squares])
        self.bc = {int(t): bc_constellation(int(t)).complex_points(scaled=True)
                   for t in np.unique(self.T)}


def _invert_line(s_hat: np.ndarray, line: np.ndarray, bc_pts: np.ndarray) -> np.ndarray:
    # Position of the decoded broadcast symbol within the node's own row or
    # column of the square; symbols absent from the line (the square can use
    # more than M symbols) fall back to the nearest symbol present.
    eq = line == s_hat[:, None]
    found = eq.any(axis=1)
    pos = eq.argmax(axis=1)
    if not found.all():
        miss = np.flatnonzero(~found)
        dd = np.abs(bc_pts[s_hat[miss]][:, None] - bc_pts[line[miss]])
        pos[miss] = dd.argmin(axis=1)
    return pos


_ML_CHUNK = 512


def _joint_ml(y: np.ndarray, ha: np.ndarray, hb: np.ndarray,
              pts: np.ndarray, hyp_k: np.ndarray, hyp_l: np.ndarray) -> np.ndarray:
    # argmin over all M*M hypotheses, chunked to bound the matrix size.
    out = np.empty(len(y), dtype=np.int64)
    xk = pts[hyp_k]
    xl = pts[hyp_l]
    for lo in range(0, len(y), _ML_CHUNK):
        hi = min(lo + _ML_CHUNK, len(y))
        cand = ha[lo:hi, None] * xk[None, :] + hb[lo:hi, None] * xl[None, :]
        d = np.abs(y[lo:hi, None] - cand)
        out[lo:hi] = d.argmin(axis=1)
    return out


def _block_errors(pl: _Payload, snr_idx: int, block_idx: int, n: int) -> int:
    cfg = pl.cfg
    snr = cfg.snr_db[snr_idx]
    sig = 10.0 ** (-snr / 20.0) / math.sqrt(2.0)  # per-component noise std
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(snr_idx, block_idx))
    rng = np.random.Generator(np.random.Philox(ss))

    # Draw order is fixed: fades (with resampling), labels, then noise.
    nf = -(-n // cfg.block_fading)
    h = sample_fades(cfg.channel, cfg.rician_k_db, rng, nf)
    while True:
        bad = np.abs(h[0]) < 1e-12
        if not bad.any():
            break
        h[:, bad] = sample_fades(cfg.channel, cfg.rician_k_db, rng, int(bad.sum()))
    rep = np.repeat(np.arange(nf), cfg.block_fading)[:n]
    ha, hb, ha2, hb2 = (h[i][rep] for i in range(4))
    labels = rng.integers(0, cfg.M, size=(2, n))
    noise = rng.standard_normal((3, 2, n))

    k_a, l_b = labels[0], labels[1]
    if pl.sel is not None:
        sel, _ = pl.sel.batch_select(hb / ha)
    else:
        sel = np.zeros(n, dtype=np.int64)

    y = ha * pl.pts[k_a] + hb * pl.pts[l_b] + sig * (noise[0, 0] + 1j * noise[0, 1])
    best = _joint_ml(y, ha, hb, pl.pts, pl.hyp_k, pl.hyp_l)
    k_hat = pl.hyp_k[best]
    l_hat = pl.hyp_l[best]
    s_hat = pl.SQ[sel, k_hat, l_hat]

    errors = 0
    ts = pl.T[sel]
    for t in np.unique(ts):
        m = ts == t
        bc_pts = pl.bc[int(t)]
        xr = bc_pts[s_hat[m]]
        for link, nz, own_line, true_lab in (
            (ha2[m], noise[1][:, m], pl.SQ[sel[m], k_a[m], :], l_b[m]),
            (hb2[m], noise[2][:, m], pl.SQ[sel[m], :, l_b[m]], k_a[m]),
        ):
            yr = link * xr + sig * (nz[0] + 1j * nz[1])
            d = np.abs(yr[:, None] - link[:, None] * bc_pts[None, :])
            s_dec = d.argmin(axis=1)
            pos = _invert_line(s_dec, own_line, bc_pts)
            errors += int(pl.PC[pos ^ true_lab].sum())
    return errors


_WORKER_PAYLOAD: Optional[_Payload] = None


def _init_worker(cfg_dict: dict, cb_obj: Optional[dict]) -> None:
    global _WORKER_PAYLOAD
    cb = Codebook.from_json_obj(cb_obj) if cb_obj is not None else None
    _WORKER_PAYLOAD = _Payload(SimConfig.from_dict(cfg_dict), cb)


def _worker_job(job: tuple) -> tuple:
    si, bi, n = job
    return si, _block_errors(_WORKER_PAYLOAD, si, bi, n)


def run_ber(cfg: SimConfig, codebook: Optional[Codebook] = None, *,
            workers: int = 1, log=None) -> list[BerPoint]:
    """Simulate every SNR point of ``cfg``; returns one BerPoint per SNR.

    ``workers`` only distributes fixed RNG blocks over processes; counts are
    identical for any value, including 1.
    """
    pl = _Payload(cfg, codebook)
    jobs = []
    for si in range(len(cfg.snr_db)):
        left = cfg.trials
        bi = 0
        while left > 0:
            take = min(BLOCK, left)
            jobs.append((si, bi, take))
            left -= take
            bi += 1
    errors = [0] * len(cfg.snr_db)
    if workers <= 1:
        for si, bi, n in jobs:
            errors[si] += _block_errors(pl, si, bi, n)
            if log:
                log(f"snr[{si}]={cfg.snr_db[si]:g} dB block {bi} done")
    else:
        cb_obj = codebook.to_json_obj() if (codebook is not None and cfg.scheme == "ls") else None
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(cfg.to_dict(), cb_obj)) as pool:
            for si, e in pool.map(_worker_job, jobs):
                errors[si] += e
    bits_per_trial = 2 * pl.bits
    return [BerPoint(s, cfg.trials, errors[i], cfg.trials * bits_per_trial)
            for i, s in enumerate(cfg.snr_db)]


def format_ber_csv(cfg: SimConfig, points: Sequence[BerPoint]) -> str:
    """One CSV row per SNR point, with a fixed header."""
    out = ["scheme,constellation,M,channel,rician_k_db,snr_db,trials,bit_errors,bits,ber"]
    kdb = f"{cfg.rician_k_db:g}" if cfg.channel == "rician" else ""
    for p in points:
        out.append(f"{cfg.scheme},{cfg.kind},{cfg.M},{cfg.channel},{kdb},"
                   f"{p.snr_db:g},{p.trials},{p.bit_errors},{p.bits},{p.ber:.6e}")
    return "\n".join(out) + "\n"


def exact_decode_check(c: Constellation, square: LatinSquare, z,
                       h_a: complex = 1.0 + 0.0j) -> tuple[int, int]:
    """Noiseless full-chain check at fade ``z`` over every label pair.

    Returns (bit_errors, label_pairs).  With a square that removes ``z``
    (or any square when ``z`` is non-singular) the error count must be 0:
    joint detection may confuse colliding pairs, but colliding pairs share
    a cluster, so both end nodes still invert correctly.
    """
    M = c.M
    pts = c.complex_points(scaled=True)
    zc = complex(z.approx if isinstance(z, FadeState) else z)
    ha = complex(h_a)
    hb = ha * zc
    k_a = np.repeat(np.arange(M), M)
    l_b = np.tile(np.arange(M), M)
    hyp_k, hyp_l = k_a.copy(), l_b.copy()
    y = ha * pts[k_a] + hb * pts[l_b]
    best = _joint_ml(y, np.full(M * M, ha), np.full(M * M, hb), pts, hyp_k, hyp_l)
    cells = np.asarray(square.cells)
    s_hat = cells[hyp_k[best], hyp_l[best]]
    bc_pts = bc_constellation(square.t).complex_points(scaled=True)
    pc = np.array([int(v).bit_count() for v in range(M)], dtype=np.int64)
    errors = 0
    for line, true_lab in ((cells[k_a, :], l_b), (cells[:, l_b].T, k_a)):
        s_dec = np.abs(bc_pts[s_hat][:, None] - bc_pts[None, :]).argmin(axis=1)
        pos = _invert_line(s_dec, line, bc_pts)
        errors += int(pc[pos ^ true_lab].sum())
    return errors, M * M
