"""Command-line front end.

Machine-readable results (JSON, CSV, square text) go to stdout or the -o
file; progress and diagnostics go to stderr.  Exit codes: 0 success,
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .clustering import min_cluster_distance, select_clustering
from .constellation import build_constellation
from .fades import (
    FadeState,
    count_pam,
    count_psk,
    count_qam,
    count_qam_upper_bound,
    constraints_for_fade,
    enumerate_singular_fades,
)
from .gaussian import GaussianInt, gr_reduce
from .latin import (
    Codebook,
    PartialSquare,
    build_codebook,
    complete_cpls,
    pam_standard,
    qam_standard,
)
from .simulate import SimConfig, format_ber_csv, load_sim_config, run_ber

_JSON_KW = dict(indent=1, sort_keys=True)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(text: str, out_path) -> None:
    if out_path and out_path != "-":
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        _log(f"wrote {out_path}")
    else:
        sys.stdout.write(text)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("PLNC_THREADS", "1")))
    except ValueError:
        return 1


def parse_fade(spec: str):
    """'a,b/c,d' as an exact Gaussian-integer ratio, or 're[,im]' floats."""
    spec = spec.strip()
    if "/" in spec:
        num_s, den_s = spec.split("/", 1)
        a, b = (int(v) for v in num_s.split(","))
        c, d = (int(v) for v in den_s.split(","))
        return FadeState.from_exact(gr_reduce(GaussianInt(a, b), GaussianInt(c, d)))
    parts = spec.split(",")
    if len(parts) > 2:
        raise ValueError(f"bad fade spec {spec!r}: expected 're[,im]' or 'a,b/c,d'")
    re = float(parts[0])
    im = float(parts[1]) if len(parts) > 1 else 0.0
    return FadeState.from_complex(complex(re, im))


def _sfs_json(fades) -> str:
    return json.dumps([f.to_json_obj() for f in fades], **_JSON_KW) + "\n"


def cmd_sfs_list(args) -> int:
    c = build_constellation(args.family, args.M)
    fades = enumerate_singular_fades(c)
    _log(f"{args.family}-{args.M}: {len(fades)} singular fade states")
    _emit(_sfs_json(fades), args.output)
    return 0


def cmd_sfs_count(args) -> int:
    fam = args.family.lower()
    out = {"constellation": fam, "M": args.M}
    if fam == "pam":
        out["formula"] = count_pam(args.M)
        out["bound"] = None
    elif fam == "qam":
        out["formula"] = count_qam(args.M)
        out["bound"] = count_qam_upper_bound(args.M)
    elif fam == "psk":
        out["formula"] = count_psk(args.M)
        out["bound"] = None
    else:
        raise ValueError(f"unknown family {args.family!r}")
    if args.brute_force:
        n = len(enumerate_singular_fades(build_constellation(fam, args.M)))
        out["enumerated"] = n
        out["verdict"] = "AGREE" if n == out["formula"] else "DISAGREE"
    _emit(json.dumps(out, **_JSON_KW) + "\n", args.output)
    return 0


def cmd_ls_standard(args) -> int:
    fam = args.family.lower()
    if fam == "pam":
        sq = pam_standard(args.M)
    elif fam == "qam":
        sq = qam_standard(args.M)
    else:
        raise ValueError("standard squares exist for pam and qam")
    _emit(sq.to_text(), args.output)
    return 0


def cmd_ls_solve(args) -> int:
    c = build_constellation(args.family, args.M)
    fade = parse_fade(args.fade)
    cs = constraints_for_fade(c, fade)
    res = complete_cpls(PartialSquare.from_constraints(cs),
                        t_max=args.t_max, budget_s=args.budget_s)
    if res.square is None:
        raise ValueError(f"no completion with at most {args.t_max} symbols "
                         f"exists for fade {fade}")
    flags = []
    if res.used_greedy:
        flags.append("greedy fallback")
    if not res.proven_minimal:
        flags.append("symbol count not proven minimal")
    _log(f"fade {fade}: {len(cs.groups)} groups, t={res.t}"
         + (f" ({'; '.join(flags)})" if flags else ""))
    _emit(res.square.to_text(), args.output)
    return 0


def cmd_codebook(args) -> int:
    c = build_constellation(args.family, args.M)
    t0 = time.monotonic()
    cb = build_codebook(c, budget_s=args.budget_s, t_max=args.t_max,
                        workers=args.threads)
    _log(f"built {len(cb)} squares in {time.monotonic() - t0:.1f}s: {cb.stats}")
    cb.save(args.output)
    _log(f"wrote {args.output}")
    print(json.dumps(cb.stats, **_JSON_KW))
    return 0


def _grid_fades(spec: str) -> list[FadeState]:
    def axis(part: str) -> np.ndarray:
        lo, hi, n = part.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    re_part, im_part = spec.split(",")
    res, ims = axis(re_part), axis(im_part)
    return [FadeState.from_complex(complex(a, b)) for a in res for b in ims]


def cmd_distance_report(args) -> int:
    cb = Codebook.load(args.codebook)
    c = cb.constellation
    fades: list[FadeState] = [parse_fade(s) for s in args.fade or []]
    if args.grid:
        fades += _grid_fades(args.grid)
    if not fades:
        raise ValueError("give at least one --fade or a --grid")
    lines = ["fade_re,fade_im,selected,t,min_cluster_distance"]
    for f in fades:
        key, cl = select_clustering(cb, f)
        d = min_cluster_distance(c, cl, f)
        lines.append(f"{f.approx.real:g},{f.approx.imag:g},{key},{cl.t},{d:.9g}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_sim_ber(args) -> int:
    base = load_sim_config(args.config).to_dict() if args.config else {}
    if args.family is not None:
        base["kind"] = args.family
    if args.M is not None:
        base["M"] = args.M
    if args.scheme is not None:
        base["scheme"] = args.scheme
    if args.snr is not None:
        base["snr_db"] = [float(s) for s in args.snr.split(",")]
    if args.trials is not None:
        base["trials"] = args.trials
    if args.seed is not None:
        base["seed"] = args.seed
    if args.channel is not None:
        base["channel"] = args.channel
    if args.rician_k_db is not None:
        base["rician_k_db"] = args.rician_k_db
    if args.block_fading is not None:
        base["block_fading"] = args.block_fading
    if "kind" not in base or "M" not in base:
        raise ValueError("need --family and --M (or a --config file)")
    cfg = SimConfig.from_dict(base)
    codebook = None
    if cfg.scheme == "ls":
        if not args.codebook:
            raise ValueError("adaptive scheme needs --codebook (see the "
                             "'codebook' command)")
        codebook = Codebook.load(args.codebook)
    t0 = time.monotonic()
    points = run_ber(cfg, codebook, workers=args.threads,
                     log=_log if args.verbose else None)
    _log(f"simulated {cfg.trials} trials x {len(cfg.snr_db)} SNR points "
         f"in {time.monotonic() - t0:.1f}s")
    _emit(format_ber_csv(cfg, points), args.output)
    return 0


def cmd_export_fixtures(args) -> int:
    os.makedirs(args.output, exist_ok=True)
    written = []

    def put(name: str, text: str) -> None:
        path = os.path.join(args.output, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)

    put("ls_qam16.txt", qam_standard(16).to_text())
    put("ls_pam4.txt", pam_standard(4).to_text())
    put("sfs_pam4.json", _sfs_json(enumerate_singular_fades(build_constellation("pam", 4))))
    put("sfs_qam4.json", _sfs_json(enumerate_singular_fades(build_constellation("qam", 4))))
    print(json.dumps({"written": written}, **_JSON_KW))
    return 0


def _add_family_m(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--family", choices=["pam", "qam", "psk"], required=required)
    p.add_argument("--M", type=int, required=required)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plnc",
        description="Adaptive physical-layer network coding toolkit: singular "
                    "fade states, Latin-square relay maps, BER simulation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sfs-list", help="enumerate singular fade states as JSON")
    _add_family_m(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_sfs_list)

    p = sub.add_parser("sfs-count", help="closed-form fade-state count")
    _add_family_m(p)
    p.add_argument("--brute-force", action="store_true",
                   help="also enumerate and compare")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_sfs_count)

    p = sub.add_parser("ls-standard", help="standard Latin square (text format)")
    p.add_argument("--family", choices=["pam", "qam"], required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_ls_standard)

    p = sub.add_parser("ls-solve", help="complete a square for one fade state")
    _add_family_m(p)
    p.add_argument("--fade", required=True,
                   help="'a,b/c,d' exact Gaussian ratio or 're[,im]' floats")
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--budget-s", type=float, default=10.0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_ls_solve)

    p = sub.add_parser("codebook", help="build and save the full codebook (JSON)")
    _add_family_m(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--budget-s", type=float, default=10.0)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("distance-report",
                       help="selected map and min cluster distance per fade (CSV)")
    p.add_argument("--codebook", required=True)
    p.add_argument("--fade", action="append", default=None,
                   help="repeatable; same syntax as ls-solve")
    p.add_argument("--grid", default=None,
                   help="re0:re1:n,im0:im1:m evaluation grid")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_distance_report)

    p = sub.add_parser("sim-ber", help="Monte-Carlo BER curves (CSV)")
    p.add_argument("--config", default=None, help="JSON or TOML config file")
    p.add_argument("--family", choices=["pam", "qam", "psk"], default=None)
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--scheme", choices=["ls", "xor"], default=None)
    p.add_argument("--snr", default=None, help="comma-separated dB values ('inf' ok)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--channel", choices=["rayleigh", "rician"], default=None)
    p.add_argument("--rician-k-db", type=float, default=None)
    p.add_argument("--block-fading", type=int, default=None)
    p.add_argument("--codebook", default=None, help="codebook JSON for scheme=ls")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--verbose", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_sim_ber)

    p = sub.add_parser("export-fixtures", help="write reference fixture files")
    p.add_argument("-o", "--output", required=True, help="directory")
    p.set_defaults(func=cmd_export_fixtures)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
