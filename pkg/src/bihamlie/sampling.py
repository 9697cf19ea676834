"""Seeded small-rational sampling shared by the solver, biham and CLI."""

from __future__ import annotations

import random
from fractions import Fraction


def random_rational(rng: random.Random, nonzero: bool = False) -> Fraction:
    """n/d with n in [-9, 9] and d in [1, 9]."""
    while True:
        q = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        if q or not nonzero:
            return q


def random_point(rng: random.Random, m: int) -> dict[int, Fraction]:
    return {i: random_rational(rng) for i in range(1, m + 1)}
