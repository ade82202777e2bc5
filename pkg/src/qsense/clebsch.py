"""Clebsch-Gordan coefficients from Racah's closed form.

Angular momenta may be half-integers; they are handled internally as
doubled integers so every factorial argument is exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


def _twice(x) -> int:
    t = Fraction(x) * 2
    if t.denominator != 1:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(t)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley phase convention."""
    return _cg2(_twice(j1), _twice(m1), _twice(j2), _twice(m2), _twice(J), _twice(M))


@lru_cache(maxsize=None)
def _cg2(j1, m1, j2, m2, J, M) -> float:
    if m1 + m2 != M:
        return 0.0
    if any(a < 0 for a in (j1, j2, J)) or not abs(j1 - j2) <= J <= j1 + j2:
        return 0.0
    if any(abs(m) > j or (j - m) % 2 for j, m in ((j1, m1), (j2, m2), (J, M))):
        return 0.0
    if (j1 + j2 + J) % 2:
        return 0.0

    f = math.factorial

    def h(x2):  # doubled -> integer
        return x2 // 2

    pre = Fraction(
        (J + 1) * f(h(J + j1 - j2)) * f(h(J - j1 + j2)) * f(h(j1 + j2 - J)),
        f(h(j1 + j2 + J) + 1),
    )
    pre *= f(h(J + M)) * f(h(J - M)) * f(h(j1 - m1)) * f(h(j1 + m1)) * f(h(j2 - m2)) * f(h(j2 + m2))

    total = Fraction(0)
    for k in range(0, h(j1 + j2 - J) + 1):
        args = (
            k,
            h(j1 + j2 - J) - k,
            h(j1 - m1) - k,
            h(j2 + m2) - k,
            h(J - j2 + m1) + k,
            h(J - j1 - m2) + k,
        )
        if min(args) < 0:
            continue
        denom = 1
        for a in args:
            denom *= f(a)
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return 0.0
    return math.copysign(math.sqrt(float(pre * total * total)), float(total))


# Reference entries for j <= 1 (standard tables), keyed by
# (j1, m1, j2, m2, J, M) in doubled units.
_TABLE = {
    # 1/2 x 1/2
    (1, 1, 1, 1, 2, 2): 1.0,
    (1, 1, 1, -1, 2, 0): math.sqrt(1 / 2),
    (1, -1, 1, 1, 2, 0): math.sqrt(1 / 2),
    (1, 1, 1, -1, 0, 0): math.sqrt(1 / 2),
    (1, -1, 1, 1, 0, 0): -math.sqrt(1 / 2),
    # 1/2 x 1 -> 1/2
    (1, 1, 2, 0, 1, 1): math.sqrt(1 / 3),
    (1, -1, 2, 2, 1, 1): -math.sqrt(2 / 3),
    # 1 x 1
    (2, 2, 2, -2, 0, 0): math.sqrt(1 / 3),
    (2, 0, 2, 0, 0, 0): -math.sqrt(1 / 3),
    (2, 2, 2, 0, 2, 2): math.sqrt(1 / 2),
    (2, 0, 2, 2, 2, 2): -math.sqrt(1 / 2),
    (2, 0, 2, 0, 2, 0): 0.0,
    (2, 2, 2, -2, 4, 0): math.sqrt(1 / 6),
    (2, 0, 2, 0, 4, 0): math.sqrt(2 / 3),
    # 1 x 2 -> 1
    (2, 0, 4, 0, 2, 0): -math.sqrt(2 / 5),
    (2, 2, 4, 0, 2, 2): math.sqrt(1 / 10),
}


def reference_table() -> dict[tuple[int, ...], float]:
    """Tabulated coefficients (doubled-integer keys) used to cross-check the formula."""
    return dict(_TABLE)
