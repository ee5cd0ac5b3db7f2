"""Pure-Python exact row reduction (fallback for the compiled kernel).

Rows are kept sparse as ``{column: int}`` dicts and reduced fraction-free
with gcd normalisation, so intermediate integers stay small on the sparse
systems produced by Leibniz-type constraints.
"""
from __future__ import annotations

from math import gcd


def _primitive(row: dict[int, int], pivot_col: int) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    if row[pivot_col] < 0:
        g = -g
    if g != 1:
        row = {c: v // g for c, v in row.items()}
    return row


def rref_int(rows, ncols):
    """Reduced row echelon form of an integer matrix.

    ``rows`` is a sequence of dense integer lists of length ``ncols`` (sparse
    ``{column: value}`` dicts are accepted too).  Returns
    ``(reduced, pivots)`` where ``reduced`` holds the nonzero rows as dense
    integer lists, each primitive (content 1) with a positive pivot, and
    ``pivots`` their pivot columns in increasing order.  The result is the
    unique primitive-integer scaling of the rational RREF.
    """
    work = []
    for r in rows:
        items = r.items() if isinstance(r, dict) else enumerate(r)
        d = {c: int(v) for c, v in items if v}
        if d:
            work.append(d)

    pivots: list[int] = []
    pivot_rows: list[dict[int, int]] = []
    active = work
    for col in range(ncols):
        if not active:
            break
        piv_idx = -1
        for i, r in enumerate(active):
            if col in r:
                piv_idx = i
                break
        if piv_idx < 0:
            continue
        prow = _primitive(active.pop(piv_idx), col)
        p = prow[col]
        # eliminate below
        nxt = []
        for r in active:
            a = r.get(col)
            if a is not None:
                r = _combine(r, prow, a, p, col)
                if not r:
                    continue
            nxt.append(r)
        active = nxt
        # eliminate above
        for k, q in enumerate(pivot_rows):
            a = q.get(col)
            if a is not None:
                pivot_rows[k] = _primitive(_combine(q, prow, a, p, col), pivots[k])
        pivots.append(col)
        pivot_rows.append(prow)

    dense = []
    for r in pivot_rows:
        out = [0] * ncols
        for c, v in r.items():
            out[c] = v
        dense.append(out)
    return dense, pivots


def _combine(r: dict[int, int], prow: dict[int, int], a: int, p: int, col: int) -> dict[int, int]:
    # r <- (p/g)*r - (a/g)*prow, with the entry at ``col`` cancelled
    g = gcd(a, p)
    ps, as_ = p // g, a // g
    if ps != 1:
        out = {c: ps * v for c, v in r.items()}
    else:
        out = dict(r)
    for c, v in prow.items():
        nv = out.get(c, 0) - as_ * v
        if nv:
            out[c] = nv
        else:
            out.pop(c, None)
    out.pop(col, None)
    if not out:
        return out
    g = 0
    for v in out.values():
        g = gcd(g, v)
        if g == 1:
            return out
    return {c: v // g for c, v in out.items()}
