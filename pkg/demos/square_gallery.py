"""Latin squares as relay maps.

In the broadcast phase the relay does not forward the pair (x_A, x_B);
it forwards one cluster symbol per pair.  The map is sound exactly when
it satisfies the exclusive law, i.e. when the M x M table of cluster
labels is a Latin square: fixing either user's symbol, the cluster
label still determines the other user's symbol.

This script prints the standard constructions, shows which singular
fade each one removes, applies the two symmetry transforms, and runs
the constrained completion solver on a singularity the XOR map cannot
handle.
"""

from plnc import (
    Clustering,
    PartialSquare,
    build_constellation,
    complete_cpls,
    constraints_for_fade,
    enumerate_singular_fades,
    min_cluster_distance,
    pam_standard,
    qam_standard,
    rotate_columns,
    square_removes_fade,
    transpose,
    xor_square,
)
from plnc.gaussian import GaussianInt, gr_reduce


def show_standard_squares():
    print("4-PAM standard square:")
    print(pam_standard(4).to_text())
    print("4-QAM standard square (equals bitwise XOR for M=4):")
    print(qam_standard(4).to_text())
    assert qam_standard(4).cells.tolist() == xor_square(4).cells.tolist()
    print()


def show_removal_at_unit_fade():
    # z = 1 is singular for every one of these constellations
    for kind, M, name, sq in [("pam", 4, "standard", pam_standard(4)),
                              ("qam", 16, "standard", qam_standard(16)),
                              ("qam", 16, "xor", xor_square(16)),
                              ("psk", 16, "xor", xor_square(16))]:
        c = build_constellation(kind, M)
        ok = square_removes_fade(sq, c, 1.0)
        d = min_cluster_distance(c, Clustering(sq), 1.0)
        print(f"{kind.upper():>4}-{M:<3} {name:>8} square at z=1: "
              f"removes={ok}  min cluster distance={d:.4f}")
    print()


def show_transforms():
    c = build_constellation("qam", 16)
    sq = qam_standard(16)
    one = gr_reduce(GaussianInt(1, 0), GaussianInt(1, 0))
    print("transform algebra on the 16-QAM standard square (removes z = 1):")
    print(f"  transpose removes 1/z:       {square_removes_fade(transpose(sq), c, one.reciprocal())}")
    rot = rotate_columns(sq, c)
    print(f"  column rotation removes j*z: {square_removes_fade(rot, c, one.times_unit(GaussianInt(0, 1)))}")
    twice = rotate_columns(rot, c)
    print(f"  rotating twice removes -z:   {square_removes_fade(twice, c, one.times_unit(GaussianInt(-1, 0)))}")
    print()


def complete_hard_fade():
    # pick a 4-QAM singularity off the unit circle and off the axes
    c = build_constellation("qam", 4)
    fades = enumerate_singular_fades(c)
    target = next(f for f in fades if abs(f.approx - (0.5 + 0.5j)) < 1e-12)
    print(f"completing a relay map for the 4-QAM fade z = {target}")
    groups = constraints_for_fade(c, target)
    print(f"  pair groups that must share a cluster: {groups.cell_count()} cells "
          f"in {len(groups.groups)} groups")
    result = complete_cpls(PartialSquare.from_constraints(groups))
    print(f"  solver: t={result.square.t} symbols, "
          f"proven minimal={result.proven_minimal}, {result.elapsed * 1e3:.1f} ms")
    print(result.square.to_text())
    xor_d = min_cluster_distance(c, Clustering(xor_square(4)), target)
    new_d = min_cluster_distance(c, Clustering(result.square), target)
    print(f"  min cluster distance at z: xor={xor_d:.4f}  completed={new_d:.4f}")


if __name__ == "__main__":
    show_standard_squares()
    show_removal_at_unit_fade()
    show_transforms()
    complete_hard_fade()
