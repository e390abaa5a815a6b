"""Quasi-sets: quantities without identities.

Run with ``python3 demos/qsets.py``.
"""

from __future__ import annotations

from oplogic.qset import (
    QSet, combine, concretize, format_qset, indist, permute_exchange, power_profile,
    quasi_cardinal, quotient, strong_singleton,
)

electrons = QSet({"e": 3}, ["lab"])
print("q          =", format_qset(electrons))
print("qc(q)      =", quasi_cardinal(electrons))

# Power qset: shapes of subqsets with how many labeled subsets realize each.
prof = power_profile(electrons)
for shape, mult in prof:
    print(f"  {mult} x {format_qset(shape)}")
print("total      =", prof.total(), "= 2 **", quasi_cardinal(electrons))

print("singleton  =", format_qset(strong_singleton(electrons, "e")))
print("indist     =", indist(QSet({"e": 2}), QSet({"e": 2})))
print("union      =", format_qset(combine("union", QSet({"e": 2}), QSet({"e": 1, "p": 1}))))

# Swapping two same-species atoms inside a labeled concretization changes
# nothing observable: the quotient before and after is the same qset.
c = concretize(QSet({"e": 2})).with_realized(frozenset({1}))
after, same = permute_exchange(c, 1, 2)
print("swap 1<->2 observable?", not same, "| quotient", format_qset(quotient(after, after.realized[0][0], ())))
