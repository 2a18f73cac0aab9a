"""Block coding between bounded integer sequences and sparse bit strings.

A bound sequence g fixes, for each n, a block of g(n)+1 bit positions.
A sequence f with f(n) <= g(n) everywhere is coded by the bit string
that is 1 exactly once per block, at offset f(n).
"""

from __future__ import annotations

from typing import Sequence

from ..exactnum import DomainError


def cut_points(g: Sequence[int]) -> tuple[int, ...]:
    """Prefix sums G(-1..len(g)-1): block n occupies [G(n-1), G(n)),
    G(n) = n+1 + sum(g[:n+1])."""
    if any(b < 0 for b in g):
        raise DomainError("block bounds must be nonnegative")
    cuts = [0]
    for bound in g:
        cuts.append(cuts[-1] + bound + 1)
    return tuple(cuts)


def encode(f: Sequence[int], g: Sequence[int]) -> tuple[int, ...]:
    if len(f) > len(g):
        raise DomainError("sequence longer than its bound")
    cuts = cut_points(g[:len(f)])
    bits = [0] * cuts[-1]
    for n, value in enumerate(f):
        if not 0 <= value <= g[n]:
            raise DomainError(f"entry {value} at {n} escapes the bound {g[n]}")
        bits[cuts[n] + value] = 1
    return tuple(bits)


def decode(bits: Sequence[int], g: Sequence[int]) -> tuple[int, ...]:
    cuts = cut_points(g)
    if len(bits) not in cuts:
        raise DomainError("bit string does not end on a block boundary")
    if any(b not in (0, 1) for b in bits):
        raise DomainError("code strings are binary")
    out = []
    for n, (lo, hi) in enumerate(zip(cuts, cuts[1:])):
        if hi > len(bits):
            break
        ones = [i for i in range(lo, hi) if bits[i]]
        if len(ones) != 1:
            raise DomainError(f"block {n} holds {len(ones)} ones instead of 1")
        out.append(ones[0] - lo)
    return tuple(out)


def value_at(bits: Sequence[int], g: Sequence[int], n: int) -> int:
    """Offset of the unique 1 inside block n."""
    values = decode(bits, g)
    if n >= len(values):
        raise DomainError("block index beyond the coded prefix")
    return values[n]
