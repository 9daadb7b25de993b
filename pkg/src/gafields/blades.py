"""Blade-level engine shared by the numeric and symbolic layers.

Multivectors at this level are sparse dicts {bitmask: scalar}; bit i-1 of
the mask set means generator e^i is present, and a mask stands for the
Grassmann blade with its indices in ascending order.  The scalars only
need +, -, * (with floats on either side) and an is-zero test, so the
same routines serve complex numbers and symbolic expression pairs.

The Clifford product of Grassmann blades goes in three steps: expand
the left blade into Clifford generator chains
(the alternating-sign index-pair contraction), then fold each generator
into the right factor, one wedge-plus-contraction step at a time.
"""

from __future__ import annotations

from math import factorial


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def blade_indices(mask: int):
    """Ascending 1-based generator indices of a blade mask."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(indices) -> int:
    mask = 0
    for i in indices:
        bit = 1 << (i - 1)
        if mask & bit:
            raise ValueError(f"repeated index {i}")
        mask |= bit
    return mask


def wedge_sign(a: int, b: int) -> int:
    """Sign of merging two disjoint ascending blades a, b into a | b."""
    swaps = 0
    rest = a
    bb = b
    i = 0
    while bb:
        if bb & 1:
            swaps += popcount(rest >> (i + 1))
        bb >>= 1
        i += 1
    return -1 if swaps & 1 else 1


def is_zero(s) -> bool:
    if isinstance(s, (int, float, complex)):
        return s == 0
    return s.is_zero()


def add_term(d: dict, mask: int, value) -> None:
    cur = d.get(mask)
    d[mask] = value if cur is None else cur + value


def wedge_dicts(u: dict, v: dict) -> dict:
    out: dict = {}
    for a, ca in u.items():
        if is_zero(ca):
            continue
        for b, cb in v.items():
            if a & b or is_zero(cb):
                continue
            s = wedge_sign(a, b)
            term = ca * cb
            add_term(out, a | b, term if s > 0 else -term)
    return out


def gen_mul(i: int, w: dict, g) -> dict:
    """Clifford product e^i * W for a multivector W in the Grassmann basis.

    Splits into the exterior part e^i ^ W and the metric contraction of
    e^i into each blade; g(i, j) supplies the scalar g^{ij}.
    """
    bit = 1 << (i - 1)
    out: dict = {}
    for mask, c in w.items():
        if is_zero(c):
            continue
        if not mask & bit:
            below = popcount(mask & (bit - 1))
            add_term(out, mask | bit, c if below % 2 == 0 else -c)
        else:
            # e^i ^ (blade containing i) = 0; only the contraction of the
            # repeated index survives, handled by the loop below.
            pass
        pos = 0
        mm = mask
        j = 1
        while mm:
            if mm & 1:
                pos += 1
                gij = g(i, j)
                if not is_zero(gij):
                    term = gij * c
                    add_term(out, mask ^ (1 << (j - 1)),
                             term if pos % 2 == 1 else -term)
            mm >>= 1
            j += 1
    return out


def grassmann_to_chains(mask: int, g) -> dict:
    """Expand a Grassmann blade over Clifford generator chains.

    Returns {chain_mask: scalar} with e^{i1}^...^e^{ik} =
    sum_r (-1)^r/r! Q^r applied to the generator chain; every chain keeps
    ascending indices, so chain masks are Clifford basis monomials.
    """
    return _convert_blade(mask, g, -1.0)


def clifford_to_grassmann_blade(mask: int, g) -> dict:
    """Expand a Clifford basis monomial over Grassmann blades (the inverse
    index-pair contraction, with all-plus signs)."""
    return _convert_blade(mask, g, 1.0)


def _convert_blade(mask: int, g, sign: float) -> dict:
    k = popcount(mask)
    acc = {mask: 1.0}
    cur = {tuple(blade_indices(mask)): 1.0}
    for r in range(1, k // 2 + 1):
        cur = _q_step(cur, g)
        factor = (sign ** r) / factorial(r)
        for chain, coeff in cur.items():
            if is_zero(coeff):
                continue
            add_term(acc, mask_of(chain), coeff * factor)
    return {m: c for m, c in acc.items() if not is_zero(c)}


def _q_step(chains: dict, g) -> dict:
    out: dict = {}
    for chain, coeff in chains.items():
        k = len(chain)
        for p in range(k):
            for q in range(p + 1, k):
                gpq = g(chain[p], chain[q])
                if is_zero(gpq):
                    continue
                reduced = chain[:p] + chain[p + 1:q] + chain[q + 1:]
                term = gpq * coeff
                if (q - p - 1) % 2 == 1:
                    term = -term
                cur = out.get(reduced)
                out[reduced] = term if cur is None else cur + term
    return out


def blade_clifford_mul(mask: int, v: dict, g, chains_cache=None) -> dict:
    """Clifford product (Grassmann blade `mask`) * V."""
    if chains_cache is not None and mask in chains_cache:
        chains = chains_cache[mask]
    else:
        chains = grassmann_to_chains(mask, g)
        if chains_cache is not None:
            chains_cache[mask] = chains
    out: dict = {}
    for chain_mask, coeff in chains.items():
        w = v
        for i in reversed(blade_indices(chain_mask)):
            w = gen_mul(i, w, g)
        for b, c in w.items():
            if not is_zero(c):
                add_term(out, b, coeff * c)
    return out


def clifford_mul_dicts(u: dict, v: dict, g, chains_cache=None) -> dict:
    out: dict = {}
    for a, ca in u.items():
        if is_zero(ca):
            continue
        part = blade_clifford_mul(a, v, g, chains_cache)
        for b, cb in part.items():
            if not is_zero(cb):
                add_term(out, b, ca * cb)
    return out
