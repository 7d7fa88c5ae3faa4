"""Adaptive map selection versus a fixed XOR map, end to end.

Runs the full two-phase protocol over a Rician fading channel: both
users transmit at once, the relay jointly detects the pair, maps it to
a cluster symbol (either adaptively per fade or with the fixed XOR
square), broadcasts it, and each user recovers the other's message by
cancelling its own.  Bit errors are counted in both directions.

4-QAM keeps the runtime to a few seconds; the CLI runs the same
pipeline for any supported constellation.
"""

import numpy as np

from plnc import SimConfig, build_codebook, build_constellation, run_ber

SNR_GRID = (10.0, 15.0, 20.0, 25.0, 30.0)
TRIALS = 40_000
SEED = 7


def run(scheme, codebook):
    cfg = SimConfig(kind="qam", M=4, scheme=scheme, snr_db=SNR_GRID,
                    trials=TRIALS, seed=SEED, channel="rician",
                    rician_k_db=5.0)
    return run_ber(cfg, codebook=codebook)


def bar(ber, floor=1e-5):
    # log-scale bar, longer = worse
    if ber <= 0:
        return ""
    width = int(np.clip(np.log10(ber / floor) * 8, 0, 40))
    return "#" * width


def main():
    c = build_constellation("qam", 4)
    cb = build_codebook(c)
    adaptive = run("ls", cb)
    fixed = run("xor", None)

    print(f"4-QAM two-way relay, Rician K=5 dB, {TRIALS} trials per point, seed {SEED}\n")
    print(f"{'SNR dB':>7}  {'adaptive BER':>12}  {'xor BER':>12}   ratio")
    for a, x in zip(adaptive, fixed):
        ratio = x.ber / a.ber if a.ber > 0 else float("inf")
        print(f"{a.snr_db:>7.0f}  {a.ber:>12.3e}  {x.ber:>12.3e}  {ratio:>6.1f}x")
    print()
    print("log-scale view (each # is an eighth of a decade above 1e-5):")
    for a, x in zip(adaptive, fixed):
        print(f"{a.snr_db:>5.0f} dB  adaptive |{bar(a.ber)}")
        print(f"{'':>5}     xor      |{bar(x.ber)}")
    print()
    print("the fixed XOR square ignores singular fades, so trials landing near")
    print("one dominate its errors; adaptive selection swaps squares instead")


if __name__ == "__main__":
    main()
