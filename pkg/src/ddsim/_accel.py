"""Hot numeric kernels with an optional numba backend.

Every kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorized numpy version.  Set ``DDSIM_NUMBA=0`` in the environment (before
import) to force the numpy path; it is also used when numba is missing.

Bit conventions shared by all kernels:

* Pauli masks: bit ``q`` of ``x``/``z`` refers to qubit ``q`` (0-based site).
* Dense basis: qubit 0 is the most significant bit of the basis index, so
  matrices agree with ``kron(sigma_0, sigma_1, ...)``.  Callers convert a
  mask to dense ordering with :func:`reverse_bits` first.
"""

import os

import numpy as np

__all__ = [
    "USE_NUMBA",
    "reverse_bits",
    "mul_terms",
    "pauli_dense",
    "conj_dense",
    "left_mul_dense",
    "trace_pauli_dag",
]


def _want_numba():
    flag = os.environ.get("DDSIM_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _want_numba()

if USE_NUMBA:
    import logging

    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    njit = numba.njit(cache=True, nogil=True)
else:  # pragma: no cover - exercised by the numpy-mode test run
    njit = None


def reverse_bits(mask, n):
    """Map a site-ordered mask onto the dense basis-index ordering."""
    out = 0
    for q in range(n):
        if (mask >> q) & 1:
            out |= 1 << (n - 1 - q)
    return out


# --------------------------------------------------------------------------
# numpy reference implementations
# --------------------------------------------------------------------------

if hasattr(np, "bitwise_count"):
    def _np_popcount(a):
        return np.bitwise_count(a).astype(np.int64)
else:  # pragma: no cover
    def _np_popcount(a):
        a = np.asarray(a, dtype=np.uint64)
        out = np.zeros(a.shape, dtype=np.int64)
        while np.any(a):
            out += (a & np.uint64(1)).astype(np.int64)
            a = a >> np.uint64(1)
        return out


def _np_product_phase(xa, za, xb, zb):
    """Exponent e (mod 4) with letters(a)*letters(b) = i**e letters(a^b)."""
    ya, yb = xa & za, xb & zb
    pa_x, pa_z = xa & ~za, za & ~xa
    pb_x, pb_z = xb & ~zb, zb & ~xb
    # XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i
    pos = (pa_x & yb) | (ya & pb_z) | (pa_z & pb_x)
    neg = (ya & pb_x) | (pa_z & yb) | (pa_x & pb_z)
    return (_np_popcount(pos) - _np_popcount(neg)) % 4


_I_POW = np.array([1.0, 1.0j, -1.0, -1.0j])


def _np_mul_terms(xa, za, ca, xb, zb, cb):
    xa2, xb2 = xa[:, None], xb[None, :]
    za2, zb2 = za[:, None], zb[None, :]
    e = _np_product_phase(xa2, za2, xb2, zb2)
    x = (xa2 ^ xb2).ravel()
    z = (za2 ^ zb2).ravel()
    c = (ca[:, None] * cb[None, :] * _I_POW[e]).ravel()
    return x, z, c


def _np_signs(d, zr):
    idx = np.arange(d, dtype=np.uint64)
    return 1.0 - 2.0 * (_np_popcount(idx & np.uint64(zr)) & 1)


def _np_pauli_dense(xr, zr, cs, n):
    d = 1 << n
    m = np.zeros((d, d), dtype=np.complex128)
    cols = np.arange(d, dtype=np.uint64)
    for x, z, c in zip(xr, zr, cs):
        ph = _I_POW[int(_np_popcount(np.uint64(x) & np.uint64(z))) % 4]
        rows = (cols ^ np.uint64(x)).astype(np.int64)
        m[rows, cols.astype(np.int64)] += c * ph * _np_signs(d, z)
    return m


def _np_conj_dense(m, xr, zr):
    d = m.shape[0]
    idx = (np.arange(d, dtype=np.uint64) ^ np.uint64(xr)).astype(np.int64)
    s = _np_signs(d, zr)
    return (s[:, None] * s[None, :]) * m[np.ix_(idx, idx)]


def _np_left_mul_dense(m, xr, zr):
    d = m.shape[0]
    src = (np.arange(d, dtype=np.uint64) ^ np.uint64(xr)).astype(np.int64)
    s = _np_signs(d, zr)[src]
    ph = _I_POW[int(_np_popcount(np.uint64(xr) & np.uint64(zr))) % 4]
    return (ph * s)[:, None] * m[src, :]


def _np_trace_pauli_dag(m, xr, zr):
    d = m.shape[0]
    cols = np.arange(d)
    rows = (cols.astype(np.uint64) ^ np.uint64(xr)).astype(np.int64)
    ph = _I_POW[int(_np_popcount(np.uint64(xr) & np.uint64(zr))) % 4]
    return np.conj(ph) * np.sum(_np_signs(d, zr) * m[rows, cols])


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if USE_NUMBA:

    @njit
    def _popcount64(v):
        v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
        v = (v & np.uint64(0x3333333333333333)) + (
            (v >> np.uint64(2)) & np.uint64(0x3333333333333333))
        v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return np.int64((v * np.uint64(0x0101010101010101)) >> np.uint64(56))

    @njit
    def _nb_mul_terms(xa, za, ca, xb, zb, cb):
        na, nb = xa.shape[0], xb.shape[0]
        x = np.empty(na * nb, dtype=np.uint64)
        z = np.empty(na * nb, dtype=np.uint64)
        c = np.empty(na * nb, dtype=np.complex128)
        ipow = np.array([1.0 + 0j, 1j, -1.0 + 0j, -1j])
        k = 0
        for i in range(na):
            a_x, a_z = xa[i], za[i]
            ya = a_x & a_z
            pax, paz = a_x & ~a_z, a_z & ~a_x
            for j in range(nb):
                b_x, b_z = xb[j], zb[j]
                yb = b_x & b_z
                pbx, pbz = b_x & ~b_z, b_z & ~b_x
                pos = (pax & yb) | (ya & pbz) | (paz & pbx)
                neg = (ya & pbx) | (paz & yb) | (pax & pbz)
                e = (_popcount64(pos) - _popcount64(neg)) % 4
                x[k] = a_x ^ b_x
                z[k] = a_z ^ b_z
                c[k] = ca[i] * cb[j] * ipow[e]
                k += 1
        return x, z, c

    @njit
    def _nb_pauli_dense(xr, zr, cs, n):
        d = 1 << n
        m = np.zeros((d, d), dtype=np.complex128)
        ipow = np.array([1.0 + 0j, 1j, -1.0 + 0j, -1j])
        for t in range(xr.shape[0]):
            x, z = xr[t], zr[t]
            base = cs[t] * ipow[_popcount64(x & z) % 4]
            for j in range(d):
                ju = np.uint64(j)
                if _popcount64(ju & z) & 1:
                    m[np.int64(ju ^ x), j] -= base
                else:
                    m[np.int64(ju ^ x), j] += base
        return m

    @njit
    def _nb_conj_dense(m, xr, zr):
        d = m.shape[0]
        out = np.empty_like(m)
        s = np.empty(d)
        for j in range(d):
            s[j] = -1.0 if _popcount64(np.uint64(j) & zr) & 1 else 1.0
        for a in range(d):
            ra = np.int64(np.uint64(a) ^ xr)
            for b in range(d):
                out[a, b] = s[a] * s[b] * m[ra, np.int64(np.uint64(b) ^ xr)]
        return out

    @njit
    def _nb_left_mul_dense(m, xr, zr):
        d = m.shape[0]
        out = np.empty_like(m)
        ipow = np.array([1.0 + 0j, 1j, -1.0 + 0j, -1j])
        ph = ipow[_popcount64(xr & zr) % 4]
        for a in range(d):
            src = np.uint64(a) ^ xr
            f = -ph if _popcount64(src & zr) & 1 else ph
            r = np.int64(src)
            for b in range(d):
                out[a, b] = f * m[r, b]
        return out

    @njit
    def _nb_trace_pauli_dag(m, xr, zr):
        d = m.shape[0]
        ipow = np.array([1.0 + 0j, 1j, -1.0 + 0j, -1j])
        ph = ipow[_popcount64(xr & zr) % 4]
        acc = 0j
        for a in range(d):
            v = m[np.int64(np.uint64(a) ^ xr), a]
            if _popcount64(np.uint64(a) & zr) & 1:
                acc -= v
            else:
                acc += v
        return np.conj(ph) * acc


# --------------------------------------------------------------------------
# public dispatch
# --------------------------------------------------------------------------

def _u64(a):
    return np.ascontiguousarray(a, dtype=np.uint64)


def _c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def mul_terms(xa, za, ca, xb, zb, cb):
    """All pairwise products of two term lists, flattened row-major."""
    args = (_u64(xa), _u64(za), _c128(ca), _u64(xb), _u64(zb), _c128(cb))
    if USE_NUMBA:
        return _nb_mul_terms(*args)
    return _np_mul_terms(*args)


def pauli_dense(xr, zr, cs, n):
    """Dense matrix of sum_t cs[t] * P_t; masks already in dense ordering."""
    if USE_NUMBA:
        return _nb_pauli_dense(_u64(xr), _u64(zr), _c128(cs), int(n))
    return _np_pauli_dense(_u64(xr), _u64(zr), _c128(cs), int(n))


def conj_dense(m, xr, zr):
    """P^dagger M P for a bare Pauli string P (dense-ordered masks)."""
    if USE_NUMBA:
        return _nb_conj_dense(_c128(m), np.uint64(xr), np.uint64(zr))
    return _np_conj_dense(_c128(m), xr, zr)


def left_mul_dense(m, xr, zr):
    """P M for a bare Pauli string P."""
    if USE_NUMBA:
        return _nb_left_mul_dense(_c128(m), np.uint64(xr), np.uint64(zr))
    return _np_left_mul_dense(_c128(m), xr, zr)


def trace_pauli_dag(m, xr, zr):
    """Tr(P^dagger M) in O(d)."""
    if USE_NUMBA:
        return complex(_nb_trace_pauli_dag(_c128(m), np.uint64(xr), np.uint64(zr)))
    return complex(_np_trace_pauli_dag(_c128(m), xr, zr))
