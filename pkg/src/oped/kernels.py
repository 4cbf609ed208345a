"""Pixel-level summation kernels with interchangeable execution backends.

Both backends run the same floating-point operations in the same order, so
for a fixed summation mode their outputs are bitwise identical.  Pixels are
accumulated independently, which keeps the threaded path deterministic for
any thread count.  The environment variable OPED_BACKEND forces "numba" or
"numpy" (default: numba when importable); OPED_THREADS caps the numba
thread pool.
"""

import os

import numpy as np

from .errors import ValidationError

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

_ENV_BACKEND = "OPED_BACKEND"
_ENV_THREADS = "OPED_THREADS"


def available_backends() -> tuple:
    """Names of the backends usable in this environment."""
    return ("numba", "numpy") if numba is not None else ("numpy",)


def active_backend() -> str:
    """Backend selected by OPED_BACKEND, defaulting to numba when importable."""
    choice = os.environ.get(_ENV_BACKEND)
    if choice is None:
        return "numba" if numba is not None else "numpy"
    if choice not in ("numba", "numpy"):
        raise ValidationError(f"OPED_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and numba is None:
        raise ValidationError("OPED_BACKEND requests numba but numba is not importable")
    return choice


def thread_count() -> int:
    """Worker count the numba backend will use (1 for the numpy backend)."""
    if active_backend() == "numpy":
        return 1
    return _apply_thread_request()


def _apply_thread_request() -> int:
    env = os.environ.get(_ENV_THREADS)
    if env is not None:
        try:
            requested = int(env)
        except ValueError:
            raise ValidationError(f"OPED_THREADS must be a positive integer, got {env!r}") from None
        if requested < 1:
            raise ValidationError(f"OPED_THREADS must be a positive integer, got {env!r}")
        numba.set_num_threads(min(requested, numba.config.NUMBA_NUM_THREADS))
    return numba.get_num_threads()


def backproject(points, directions, table, lam, pairwise=True) -> np.ndarray:
    """Per-direction Gegenbauer series summed at each evaluation point.

    out[p] = sum_nu sum_k table[nu, k] * C_k^lam(<points[p], directions[nu]>)
    with the direction sum either folded pairwise (halving passes) or run
    strictly left to right.
    """
    points, directions, table = _as_matrices(points, directions, table)
    if table.shape[0] != directions.shape[0]:
        raise ValidationError("coefficient table must have one row per direction")
    out = np.empty(points.shape[0])
    if points.shape[0] == 0:
        return out
    if active_backend() == "numba":
        _apply_thread_request()
        _backproject_numba(points, directions, np.ascontiguousarray(table.T), float(lam), bool(pairwise), out)
    else:
        _backproject_numpy(points, directions, table, float(lam), bool(pairwise), out)
    return out


def lebesgue_values(points, directions, direction_weights, node_factors, kernel_rows, lam) -> np.ndarray:
    """Weighted absolute-kernel sums, the operator's pointwise norm diagnostic.

    out[p] = sum_nu dw[nu] * sum_j nf[j] * |sum_k rows[j, k] * C_k^lam(u_nu)|
    where u_nu = <points[p], directions[nu]>.
    """
    points, directions, kernel_rows = _as_matrices(points, directions, kernel_rows)
    direction_weights = np.ascontiguousarray(np.asarray(direction_weights, dtype=float))
    node_factors = np.ascontiguousarray(np.asarray(node_factors, dtype=float))
    if direction_weights.shape != (directions.shape[0],):
        raise ValidationError("need one direction weight per direction")
    if node_factors.shape != (kernel_rows.shape[0],):
        raise ValidationError("need one node factor per kernel row")
    out = np.empty(points.shape[0])
    if points.shape[0] == 0:
        return out
    if active_backend() == "numba":
        _apply_thread_request()
        rows_t = np.ascontiguousarray(kernel_rows.T)
        _lebesgue_numba(points, directions, direction_weights, node_factors, rows_t, float(lam), out)
    else:
        _lebesgue_numpy(points, directions, direction_weights, node_factors, kernel_rows, float(lam), out)
    return out


def _as_matrices(points, directions, table):
    points = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    directions = np.ascontiguousarray(np.atleast_2d(np.asarray(directions, dtype=float)))
    table = np.ascontiguousarray(np.atleast_2d(np.asarray(table, dtype=float)))
    if directions.shape[0] == 0:
        raise ValidationError("at least one direction is required")
    if points.shape[1] != directions.shape[1]:
        raise ValidationError("points and directions disagree in dimension")
    return points, directions, table


def _backproject_numpy(points, directions, table, lam, pairwise, out):
    ndir = directions.shape[0]
    kmax = table.shape[1] - 1
    block = max(1, min(32768, (1 << 23) // ndir))
    for start in range(0, points.shape[0], block):
        pts = points[start : start + block]
        buf = np.empty((pts.shape[0], ndir))
        for nu in range(ndir):
            u = pts[:, 0] * directions[nu, 0]
            for i in range(1, pts.shape[1]):
                u = u + pts[:, i] * directions[nu, i]
            acc = np.full(pts.shape[0], table[nu, 0])
            if kmax >= 1:
                c0 = np.ones(pts.shape[0])
                c1 = (2.0 * lam) * u
                acc = acc + table[nu, 1] * c1
                for k in range(2, kmax + 1):
                    c2 = ((2.0 * (k - 1.0 + lam)) * u * c1 - (k - 2.0 + 2.0 * lam) * c0) / k
                    acc = acc + table[nu, k] * c2
                    c0 = c1
                    c1 = c2
            buf[:, nu] = acc
        if pairwise:
            gap = 1
            while gap < ndir:
                idx = 0
                while idx + gap < ndir:
                    buf[:, idx] += buf[:, idx + gap]
                    idx += 2 * gap
                gap *= 2
            out[start : start + block] = buf[:, 0]
        else:
            total = buf[:, 0].copy()
            for nu in range(1, ndir):
                total += buf[:, nu]
            out[start : start + block] = total


def _lebesgue_numpy(points, directions, dweights, nfactors, rows, lam, out):
    ndir = directions.shape[0]
    nnod = rows.shape[0]
    kmax = rows.shape[1] - 1
    block = max(1, min(8192, (1 << 22) // (kmax + 1)))
    for start in range(0, points.shape[0], block):
        pts = points[start : start + block]
        ck = np.empty((pts.shape[0], kmax + 1))
        total = np.zeros(pts.shape[0])
        for nu in range(ndir):
            u = pts[:, 0] * directions[nu, 0]
            for i in range(1, pts.shape[1]):
                u = u + pts[:, i] * directions[nu, i]
            ck[:, 0] = 1.0
            if kmax >= 1:
                ck[:, 1] = (2.0 * lam) * u
                for k in range(2, kmax + 1):
                    ck[:, k] = ((2.0 * (k - 1.0 + lam)) * u * ck[:, k - 1] - (k - 2.0 + 2.0 * lam) * ck[:, k - 2]) / k
            snu = np.zeros(pts.shape[0])
            for j in range(nnod):
                s = np.zeros(pts.shape[0])
                for k in range(kmax + 1):
                    s = s + rows[j, k] * ck[:, k]
                snu = snu + nfactors[j] * np.abs(s)
            total = total + dweights[nu] * snu
        out[start : start + block] = total


if numba is not None:

    @numba.njit(parallel=True, cache=True, fastmath=False)
    def _backproject_numba(points, directions, tableT, lam, pairwise, out):  # pragma: no cover - compiled
        # The recurrence is serial in k but independent across directions,
        # so the inner loops run over nu to auto-vectorize; tableT is the
        # coefficient table transposed to make those accesses contiguous.
        npts = points.shape[0]
        ndir = directions.shape[0]
        kmax = tableT.shape[0] - 1
        dim = points.shape[1]
        for p in numba.prange(npts):
            u = np.empty(ndir)
            c0 = np.empty(ndir)
            c1 = np.empty(ndir)
            buf = np.empty(ndir)
            for nu in range(ndir):
                ip = points[p, 0] * directions[nu, 0]
                for i in range(1, dim):
                    ip += points[p, i] * directions[nu, i]
                u[nu] = ip
                buf[nu] = tableT[0, nu]
            if kmax >= 1:
                for nu in range(ndir):
                    c0[nu] = 1.0
                    c1[nu] = (2.0 * lam) * u[nu]
                    buf[nu] += tableT[1, nu] * c1[nu]
                for k in range(2, kmax + 1):
                    a = 2.0 * (k - 1.0 + lam)
                    b = k - 2.0 + 2.0 * lam
                    fk = float(k)
                    for nu in range(ndir):
                        c2 = (a * u[nu] * c1[nu] - b * c0[nu]) / fk
                        buf[nu] += tableT[k, nu] * c2
                        c0[nu] = c1[nu]
                        c1[nu] = c2
            if pairwise:
                gap = 1
                while gap < ndir:
                    idx = 0
                    while idx + gap < ndir:
                        buf[idx] += buf[idx + gap]
                        idx += 2 * gap
                    gap *= 2
                out[p] = buf[0]
            else:
                total = buf[0]
                for nu in range(1, ndir):
                    total += buf[nu]
                out[p] = total

    @numba.njit(parallel=True, cache=True, fastmath=False)
    def _lebesgue_numba(points, directions, dweights, nfactors, rowsT, lam, out):  # pragma: no cover - compiled
        # rowsT is the kernel-row matrix transposed so the accumulation
        # loops run contiguously over nodes and auto-vectorize; the
        # summation order per output element matches the numpy backend.
        npts = points.shape[0]
        ndir = directions.shape[0]
        nnod = rowsT.shape[1]
        kmax = rowsT.shape[0] - 1
        dim = points.shape[1]
        for p in numba.prange(npts):
            ck = np.empty(kmax + 1)
            s = np.empty(nnod)
            total = 0.0
            for nu in range(ndir):
                u = points[p, 0] * directions[nu, 0]
                for i in range(1, dim):
                    u += points[p, i] * directions[nu, i]
                ck[0] = 1.0
                if kmax >= 1:
                    ck[1] = (2.0 * lam) * u
                    for k in range(2, kmax + 1):
                        ck[k] = ((2.0 * (k - 1.0 + lam)) * u * ck[k - 1] - (k - 2.0 + 2.0 * lam) * ck[k - 2]) / k
                for j in range(nnod):
                    s[j] = 0.0
                for k in range(kmax + 1):
                    cku = ck[k]
                    for j in range(nnod):
                        s[j] += rowsT[k, j] * cku
                snu = 0.0
                for j in range(nnod):
                    snu += nfactors[j] * abs(s[j])
                total += dweights[nu] * snu
            out[p] = total
