"""Hot inner loops of the Monte Carlo and enumeration code.

Each kernel has a numba implementation and a pure-numpy implementation with
identical results.  The numba path is used when numba imports and the
environment variable ``SDS_IRS_NO_NUMBA`` is unset (or ``0``).  Random numbers
are always drawn by numpy outside the kernels, so both paths see the same
draws and produce bit-identical output.

Conventions shared by all kernels: ``perms`` is a 2-d integer array with one
permutation ``s`` per row; ``g`` is a fixed permutation of the same degree.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

# Category codes returned by count_block_split.
CAT_E = 0  # s(z0) or s(y0) lands in U
CAT_SAME = 1  # both land in the same block
CAT_DIFF = 2  # both in T, different blocks


# --------------------------------------------------------------------------
# numpy implementations


def _np_shuffle_from_draws(draws):
    batch, width = draws.shape
    m = width + 1
    perms = np.tile(np.arange(m, dtype=np.int64), (batch, 1))
    rows = np.arange(batch)
    for c in range(width):
        i = m - 1 - c
        j = draws[:, c]
        tmp = perms[rows, j].copy()
        perms[rows, j] = perms[:, i]
        perms[:, i] = tmp
    return perms


def _np_conj_preserves_partition(perms, g, labels, nlabels, fixed):
    src = labels[perms]
    dst = labels[perms[:, g]]
    if fixed:
        return np.all(src == dst, axis=1)
    rows = np.arange(perms.shape[0])[:, None]
    target = np.full((perms.shape[0], nlabels), -1, dtype=labels.dtype)
    target[rows, src] = dst
    return np.all(target[rows, src] == dst, axis=1)


def _np_count_block_split(perms, zs, gzs, z0, y0, labels):
    b0 = labels[perms[:, z0]]
    c0 = labels[perms[:, y0]]
    in_b0 = labels[perms[:, zs]] == b0[:, None]
    out_c0 = labels[perms[:, gzs]] != c0[:, None]
    event = (b0 < 0) | (c0 < 0)
    counts = np.where(event, 0, np.count_nonzero(in_b0 & out_c0, axis=1)).astype(np.int64)
    cat = np.where(event, CAT_E, np.where(b0 == c0, CAT_SAME, CAT_DIFF)).astype(np.int8)
    return counts, cat


def _np_count_intransitive(perms, zs, gzs, umask):
    hit = umask[perms[:, zs]] & ~umask[perms[:, gzs]]
    return np.count_nonzero(hit, axis=1).astype(np.int64)


numpy_kernels = SimpleNamespace(
    name="numpy",
    shuffle_from_draws=_np_shuffle_from_draws,
    conj_preserves_partition=_np_conj_preserves_partition,
    count_block_split=_np_count_block_split,
    count_intransitive=_np_count_intransitive,
)


# --------------------------------------------------------------------------
# numba implementations


def _build_numba():
    from numba import njit

    @njit(cache=True, nogil=True)
    def shuffle_from_draws(draws):
        batch, width = draws.shape
        m = width + 1
        perms = np.empty((batch, m), dtype=np.int64)
        for b in range(batch):
            p = perms[b]
            for x in range(m):
                p[x] = x
            for c in range(width):
                i = m - 1 - c
                j = draws[b, c]
                tmp = p[j]
                p[j] = p[i]
                p[i] = tmp
        return perms

    @njit(cache=True, nogil=True)
    def conj_preserves_partition(perms, g, labels, nlabels, fixed):
        batch, m = perms.shape
        out = np.empty(batch, dtype=np.bool_)
        target = np.empty(nlabels, dtype=np.int64)
        for b in range(batch):
            p = perms[b]
            for k in range(nlabels):
                target[k] = -1
            ok = True
            for x in range(m):
                src = labels[p[x]]
                dst = labels[p[g[x]]]
                if fixed:
                    if src != dst:
                        ok = False
                        break
                elif target[src] < 0:
                    target[src] = dst
                elif target[src] != dst:
                    ok = False
                    break
            out[b] = ok
        return out

    @njit(cache=True, nogil=True)
    def count_block_split(perms, zs, gzs, z0, y0, labels):
        batch = perms.shape[0]
        counts = np.zeros(batch, dtype=np.int64)
        cat = np.empty(batch, dtype=np.int8)
        for b in range(batch):
            p = perms[b]
            b0 = labels[p[z0]]
            c0 = labels[p[y0]]
            if b0 < 0 or c0 < 0:
                cat[b] = 0
                continue
            cat[b] = 1 if b0 == c0 else 2
            n = 0
            for i in range(zs.size):
                if labels[p[zs[i]]] == b0 and labels[p[gzs[i]]] != c0:
                    n += 1
            counts[b] = n
        return counts, cat

    @njit(cache=True, nogil=True)
    def count_intransitive(perms, zs, gzs, umask):
        batch = perms.shape[0]
        counts = np.zeros(batch, dtype=np.int64)
        for b in range(batch):
            p = perms[b]
            n = 0
            for i in range(zs.size):
                if umask[p[zs[i]]] and not umask[p[gzs[i]]]:
                    n += 1
            counts[b] = n
        return counts

    return SimpleNamespace(
        name="numba",
        shuffle_from_draws=shuffle_from_draws,
        conj_preserves_partition=conj_preserves_partition,
        count_block_split=count_block_split,
        count_intransitive=count_intransitive,
    )


try:
    numba_kernels = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_kernels = None


def _select():
    if numba_kernels is None or os.environ.get("SDS_IRS_NO_NUMBA", "0") not in ("", "0"):
        return numpy_kernels
    return numba_kernels


active = _select()
BACKEND = active.name


def shuffle_from_draws(draws: np.ndarray) -> np.ndarray:
    """Apply Fisher-Yates swaps: column ``c`` swaps position ``m-1-c`` with ``draws[:, c]``."""
    return active.shuffle_from_draws(np.ascontiguousarray(draws))


def conj_preserves_partition(perms, g, labels, nlabels: int, fixed: bool) -> np.ndarray:
    """Per row ``s``: does ``s g s^-1`` map label classes onto label classes?

    With ``fixed`` every class must map onto itself.
    """
    return active.conj_preserves_partition(
        np.ascontiguousarray(perms, dtype=np.int64),
        np.ascontiguousarray(g, dtype=np.int64),
        np.ascontiguousarray(labels, dtype=np.int64),
        int(nlabels),
        bool(fixed),
    )


def count_block_split(perms, zs, gzs, z0: int, y0: int, labels):
    """Per row: ``#{z in zs : s(z) in B0, s(g z) not in C0}`` and the conditioning category.

    ``labels`` gives the block index of each point of T and -1 on U.
    """
    return active.count_block_split(
        np.ascontiguousarray(perms, dtype=np.int64),
        np.ascontiguousarray(zs, dtype=np.int64),
        np.ascontiguousarray(gzs, dtype=np.int64),
        int(z0),
        int(y0),
        np.ascontiguousarray(labels, dtype=np.int64),
    )


def count_intransitive(perms, zs, gzs, umask):
    """Per row: ``#{z in zs : s(z) in U, s(g z) not in U}``."""
    return active.count_intransitive(
        np.ascontiguousarray(perms, dtype=np.int64),
        np.ascontiguousarray(zs, dtype=np.int64),
        np.ascontiguousarray(gzs, dtype=np.int64),
        np.ascontiguousarray(umask, dtype=np.bool_),
    )
