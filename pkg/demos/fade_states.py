"""Where does a two-way relay channel go blind?

The relay hears y = h_A x_A + h_B x_B + n.  For most fade ratios
z = h_B / h_A the sums h_A x_A + h_B x_B stay distinct and a joint
detector can tell the pairs apart.  At a singular fade state two
different pairs collapse onto the same point and raw joint detection
breaks no matter how strong the signal is.  Those states are exactly
the ratios -(d1/d2) of nonzero constellation differences, so they can
be enumerated and counted in closed form.

This script enumerates them for a few constellations, checks the
closed-form counts against brute force, and sketches where the 16-QAM
states sit in the complex plane.
"""

import numpy as np

from plnc import (
    build_constellation,
    coprime_partner_counts,
    count_pam,
    count_psk,
    count_qam,
    count_qam_upper_bound,
    enumerate_singular_fades,
)


def show_counts():
    print("constellation  formula  enumerated")
    for kind, M, formula in [
        ("pam", 4, count_pam), ("pam", 8, count_pam),
        ("qam", 4, count_qam), ("qam", 16, count_qam), ("qam", 64, count_qam),
        ("psk", 4, count_psk), ("psk", 16, count_psk),
    ]:
        fades = enumerate_singular_fades(build_constellation(kind, M))
        print(f"{kind.upper():>4}-{M:<8} {formula(M):>7}  {len(fades):>10}")
    print()
    for M in (4, 16, 64):
        print(f"square QAM M={M:<3} count {count_qam(M):>5}  "
              f"upper bound {count_qam_upper_bound(M):>5}")
    print()


def show_pam4_exact():
    # small enough to list in full; every state is a real rational
    fades = enumerate_singular_fades(build_constellation("pam", 4))
    vals = sorted(str(f.exact) for f in fades)
    print(f"4-PAM singular fade states ({len(fades)}):")
    print("  " + "  ".join(vals))
    print()


def show_qam16_structure():
    # the count decomposes as 4 axis states plus 8 per coprime pair
    c = build_constellation("qam", 16)
    partners = coprime_partner_counts(c)
    pairs = sum(n for _, n in partners) // 2
    print("16-QAM scaled differences and their coprime partner counts:")
    for d, n in partners:
        print(f"  {str(d):>6}: {n:>2}")
    print(f"unordered coprime pairs: {pairs}")
    print(f"4 + 8 * {pairs} = {4 + 8 * pairs} = count_qam(16) = {count_qam(16)}")
    print()


def sketch_qam16(rows=21, cols=61, half=3.0):
    # character-cell density sketch of the 388 states, clipped to a box
    fades = enumerate_singular_fades(build_constellation("qam", 16))
    z = np.array([f.approx for f in fades])
    grid = np.zeros((rows, cols), dtype=int)
    r = np.clip(((half - z.imag) / (2 * half) * (rows - 1)).round().astype(int), 0, rows - 1)
    q = np.clip(((z.real + half) / (2 * half) * (cols - 1)).round().astype(int), 0, cols - 1)
    inside = (np.abs(z.real) <= half) & (np.abs(z.imag) <= half)
    np.add.at(grid, (r[inside], q[inside]), 1)
    marks = " .:*#"
    print(f"16-QAM singular fades with |Re z|,|Im z| <= {half:g} "
          f"({int(inside.sum())} of {len(z)} shown, denser = more states):")
    for row in grid:
        print("".join(marks[min(v, len(marks) - 1)] for v in row))
    print()


if __name__ == "__main__":
    show_counts()
    show_pam4_exact()
    show_qam16_structure()
    sketch_qam16()
