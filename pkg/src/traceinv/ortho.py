"""Exact orthonormalization of the basis functions t^(1/(i+1)).

The functions phi_i(t) = t^(1/(i+1)), i = 1..p, are orthonormalized on
[0, 1] under the scale-invariant inner product <f, g> = int_0^1 f g dt/t.
All pairwise inner products are rational, so Gram-Schmidt runs in exact
rational arithmetic and each orthonormal function splits into a radical
prefactor alpha_i = +-sqrt(2/(i+1)) and a primitive integer coefficient
vector a_i1..a_ii:

    phi_i_orth(t) = alpha_i * sum_j a_ij * t^(1/(j+1))

Floating point enters only at evaluation time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd, sqrt

import numpy as np

from .exceptions import InvalidShape

MAX_ORDER = 12


def haar_inner_product_basis(i, j) -> Fraction:
    """Exact <t^(1/(i+1)), t^(1/(j+1))> under dt/t on [0, 1]."""
    i, j = int(i), int(j)
    if i < 1 or j < 1:
        raise InvalidShape("basis indices start at 1")
    return Fraction((i + 1) * (j + 1), i + j + 2)


@dataclass(frozen=True)
class OrthoCoefficients:
    """Orthonormalization coefficients up to order p.

    ``rows[i-1]`` holds the integers a_i1..a_ii with no common factor and
    a_i1 > 0; ``signs[i-1]`` is the sign of alpha_i. The radicand of
    alpha_i is 2/(i+1); signs alternate starting positive at i = 1.
    """

    order: int
    signs: tuple
    rows: tuple  # tuple of integer tuples, row i has length i

    def alpha(self, i):
        if not 1 <= i <= self.order:
            raise InvalidShape(f"function index {i} outside 1..{self.order}")
        return self.signs[i - 1] * sqrt(2.0 / (i + 1))

    def to_json(self):
        return {
            "order": self.order,
            "alpha_signs": list(self.signs),
            "alpha_radicands": [[2, i + 1] for i in range(1, self.order + 1)],
            "coefficients": [list(row) for row in self.rows],
        }

    def table_text(self):
        """Human-readable table: one row per function, alpha then integers."""
        lines = ["  i  alpha        coefficients"]
        for i in range(1, self.order + 1):
            sign = "+" if self.signs[i - 1] > 0 else "-"
            coeffs = "  ".join(str(c) for c in self.rows[i - 1])
            lines.append(f"{i:3d}  {sign}sqrt(2/{i + 1})   {coeffs}")
        return "\n".join(lines)


def _bilinear(x, y):
    return sum(
        xa * yb * haar_inner_product_basis(a + 1, b + 1)
        for a, xa in enumerate(x) if xa
        for b, yb in enumerate(y) if yb
    )


@lru_cache(maxsize=None)
def gram_schmidt(p) -> OrthoCoefficients:
    """Exact Gram-Schmidt over phi_1..phi_p; reproduces the reference table.

    The unnormalized pass keeps coefficient 1 on the newest basis function;
    clearing denominators and dividing by the gcd (leading integer kept
    positive) yields the primitive rows, and the exact norm check pins
    alpha_i = sign(a_ii) * sqrt(2/(i+1)).
    """
    p = int(p)
    if not 1 <= p <= MAX_ORDER:
        raise InvalidShape(f"order must be within 1..{MAX_ORDER}, got {p}")
    signs = []
    rows = []
    ortho = []  # unnormalized orthogonal vectors over phi_1..phi_p, with cached norms
    for i in range(1, p + 1):
        c = [Fraction(0)] * p
        c[i - 1] = Fraction(1)
        for vec, norm_sq in ortho:
            coef = _bilinear(c, vec) / norm_sq
            if coef:
                c = [cj - coef * vj for cj, vj in zip(c, vec)]
        ortho.append((c, _bilinear(c, c)))

        denominator_lcm = reduce(
            lambda acc, f: acc * f.denominator // gcd(acc, f.denominator), c, 1
        )
        ints = [int(f * denominator_lcm) for f in c[:i]]
        common = reduce(gcd, (abs(v) for v in ints if v))
        ints = [v // common for v in ints]
        if ints[0] < 0:
            ints = [-v for v in ints]

        norm_sq = _bilinear(ints, ints)
        if norm_sq != Fraction(i + 1, 2):
            raise AssertionError(
                f"norm pattern broken at i={i}: got {norm_sq}, expected {(i + 1)}/2"
            )
        sign = 1 if ints[-1] > 0 else -1
        if sign != (1 if i % 2 == 1 else -1):
            raise AssertionError(f"sign alternation broken at i={i}")
        signs.append(sign)
        rows.append(tuple(ints))
    return OrthoCoefficients(order=p, signs=tuple(signs), rows=tuple(rows))


def eval_ortho_function(coeffs: OrthoCoefficients, i, t):
    """Evaluate the i-th orthonormal function at t >= 0 (scalar or array)."""
    if not 1 <= i <= coeffs.order:
        raise InvalidShape(f"function index {i} outside 1..{coeffs.order}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise InvalidShape("basis functions are defined for t >= 0")
    total = np.zeros_like(t)
    for j, a in enumerate(coeffs.rows[i - 1], start=1):
        total += a * np.power(t, 1.0 / (j + 1))
    result = coeffs.alpha(i) * total
    return float(result) if result.ndim == 0 else result
