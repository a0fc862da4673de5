"""Numba kernels for the message-passing inner loops.

Graph encoding shared by all kernels:

* edge e pairs factor ``e_fac[e]`` with variable ``fvar[e]``; edges are laid
  out factor-major, so edge ids for factor f occupy [fptr[f], fptr[f+1]) and
  the slot of edge e within its factor is ``e - fptr[f]``.
* ``vedge`` lists each variable's incident edge ids (CSR via ``vptr``).
* factor tables are flattened row-major over the factor's variables in slot
  order and concatenated into ``ftab`` (offsets ``ftabptr``).
* messages live in (E, max_domain) arrays; only the first ``dom[var]``
  columns of a row are meaningful.

A pool entry ``code`` encodes a directed edge: code < E sends
variable-to-factor over edge code, otherwise factor-to-variable over
code - E.  Operation counts cover message construction only: one unit per
message-entry addition and per table-cell visit.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _send_var_message(e, fvar, dom, vptr, vedge, msg_vf, msg_fv, damping, scratch):
    v = fvar[e]
    m = dom[v]
    ops = 0
    for x in range(m):
        scratch[x] = 0.0
    for idx in range(vptr[v], vptr[v + 1]):
        e2 = vedge[idx]
        if e2 != e:
            for x in range(m):
                scratch[x] += msg_fv[e2, x]
            ops += m
    mx = scratch[0]
    for x in range(1, m):
        if scratch[x] > mx:
            mx = scratch[x]
    delta = 0.0
    for x in range(m):
        new = (1.0 - damping) * (scratch[x] - mx) + damping * msg_vf[e, x]
        d = abs(new - msg_vf[e, x])
        if d > delta:
            delta = d
        msg_vf[e, x] = new
    return delta, ops


@njit(cache=True)
def _send_factor_message(
    e, e_fac, fptr, fvar, dom, ftab, ftabptr, msg_vf, msg_fv, damping, best, digits
):
    f = e_fac[e]
    base = fptr[f]
    deg = fptr[f + 1] - base
    s0 = e - base
    v0 = fvar[e]
    m0 = dom[v0]
    off = ftabptr[f]
    cells = ftabptr[f + 1] - off
    for x in range(m0):
        best[x] = -np.inf
    for s in range(deg):
        digits[s] = 0
    for c in range(cells):
        score = ftab[off + c]
        for s in range(deg):
            if s != s0:
                score += msg_vf[base + s, digits[s]]
        d0 = digits[s0]
        if score > best[d0]:
            best[d0] = score
        for s in range(deg - 1, -1, -1):
            digits[s] += 1
            if digits[s] < dom[fvar[base + s]]:
                break
            digits[s] = 0
    ops = cells * deg
    mx = best[0]
    for x in range(1, m0):
        if best[x] > mx:
            mx = best[x]
    delta = 0.0
    for x in range(m0):
        new = (1.0 - damping) * (best[x] - mx) + damping * msg_fv[e, x]
        d = abs(new - msg_fv[e, x])
        if d > delta:
            delta = d
        msg_fv[e, x] = new
    return delta, ops


@njit(cache=True)
def run_sequential(
    pool, e_fac, fptr, fvar, dom, ftab, ftabptr, vptr, vedge, msg_vf, msg_fv, damping
):
    num_edges = fvar.shape[0]
    max_dom = msg_vf.shape[1]
    scratch = np.empty(max_dom)
    best = np.empty(max_dom)
    digits = np.empty(64, dtype=np.int64)
    max_delta = 0.0
    ops = 0
    for p in range(pool.shape[0]):
        code = pool[p]
        if code < num_edges:
            delta, o = _send_var_message(
                code, fvar, dom, vptr, vedge, msg_vf, msg_fv, damping, scratch
            )
        else:
            delta, o = _send_factor_message(
                code - num_edges,
                e_fac,
                fptr,
                fvar,
                dom,
                ftab,
                ftabptr,
                msg_vf,
                msg_fv,
                damping,
                best,
                digits,
            )
        ops += o
        if delta > max_delta:
            max_delta = delta
    return max_delta, ops


@njit(cache=True)
def run_parallel(
    e_fac, fptr, fvar, dom, ftab, ftabptr, vptr, vedge, old_vf, old_fv, msg_vf, msg_fv, damping
):
    """Synchronous update: every message is computed from the previous
    iteration's sent values (``old_*``) and written into ``msg_*``."""
    num_edges = fvar.shape[0]
    max_dom = msg_vf.shape[1]
    scratch = np.empty(max_dom)
    best = np.empty(max_dom)
    digits = np.empty(64, dtype=np.int64)
    max_delta = 0.0
    ops = 0
    for e in range(num_edges):
        delta, o = _send_var_message(
            e, fvar, dom, vptr, vedge, msg_vf, old_fv, damping, scratch
        )
        ops += o
        if delta > max_delta:
            max_delta = delta
    for e in range(num_edges):
        delta, o = _send_factor_message(
            e, e_fac, fptr, fvar, dom, ftab, ftabptr, old_vf, msg_fv, damping, best, digits
        )
        ops += o
        if delta > max_delta:
            max_delta = delta
    return max_delta, ops
