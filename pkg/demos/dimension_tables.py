"""How big is the measurable state space of N photons with hidden modes?

For N distinguishable qubits a density matrix has 4^N real parameters.  When
the only measurable property is polarization and everything else is hidden,
the state collapses to one block per total angular momentum j, and the
parameter count drops to C(N+3, 3) -- polynomial in N.  This script prints
the block tables and checks the counting identities explicitly.
"""

import math

from accdm import (
    accessible_param_count,
    occurring_two_j,
    partitions,
    su2_multiplicity,
    symmetric_dimension,
    weyl_dimension,
)

print("Two-level (polarization) systems")
print(f"{'N':>3} {'full 4^N':>10} {'accessible C(N+3,3)':>20} {'symmetric (N+1)^2':>18}")
for n in range(1, 11):
    acc = accessible_param_count(n, 2)
    explicit = sum((tj + 1) ** 2 for tj in occurring_two_j(n))
    assert acc == explicit == math.comb(n + 3, 3)
    print(f"{n:>3} {4 ** n:>10} {acc:>20} {(n + 1) ** 2:>18}")

print()
print("Block structure for N = 3 (j descending):")
print(f"{'j':>5} {'multiplicity':>13} {'block dim':>10}")
for two_j in occurring_two_j(3):
    label = f"{two_j // 2}" if two_j % 2 == 0 else f"{two_j}/2"
    print(f"{label:>5} {su2_multiplicity(3, two_j):>13} {two_j + 1:>10}")
print("sum of squared block dimensions:",
      sum((tj + 1) ** 2 for tj in occurring_two_j(3)), "= 20 parameters")

print()
print("The same counting for d-level systems (partitions = Young diagrams):")
for d in (3, 4):
    for n in (2, 3):
        dims = {lam: weyl_dimension(lam, d) for lam in partitions(n, d)}
        total = sum(v ** 2 for v in dims.values())
        assert total == accessible_param_count(n, d)
        parts = ", ".join(f"{lam}:{v}" for lam, v in dims.items())
        print(f"  N={n}, d={d}: irrep dims {{{parts}}} -> "
              f"{total} accessible parameters "
              f"(symmetric space alone: {symmetric_dimension(n, d)}^2)")
