# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled propagation kernel.

Applies a sequence of short-time exponentials ``exp(-i K_e)`` to a block of
state vectors, where every generator ``K_e`` has the bichromatic structure

    K = sum_q [ sigma+_q (x) (u_q G) + sigma-_q (x) (u_q G)^dagger ]

and the motional block ``G`` is assembled on the fly from the displacement
matrices ``C_j = exp(i eta_j (a + a^dagger))`` and the trap-frame rotation
``exp(i nu t n)``. See :mod:`geogate._kernel_py` for the reference version.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cdef extern from "<complex.h>" nogil:
    double complex cexp(double complex)
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)

cnp.import_array()


cdef inline double cabs_max(double complex z) nogil:
    cdef double a = fabs(creal(z))
    cdef double b = fabs(cimag(z))
    return a if a > b else b


cdef void apply_structured(
    const double complex[:, ::1] G,
    const double complex[::1] u,
    int n_ions,
    double complex[:, :, ::1] src,
    double complex[:, :, ::1] dst,
) noexcept nogil:
    """dst = K src for the structured generator (dst is overwritten)."""
    cdef Py_ssize_t n_int = src.shape[0]
    cdef Py_ssize_t N = src.shape[1]
    cdef Py_ssize_t k = src.shape[2]
    cdef Py_ssize_t s, q, m, n, c, bit, hi
    cdef double complex g, uq, uqc
    for s in range(n_int):
        for m in range(N):
            for c in range(k):
                dst[s, m, c] = 0
    for q in range(n_ions):
        bit = 1 << (n_ions - 1 - q)
        uq = u[q]
        uqc = conj(uq)
        for s in range(n_int):
            if s & bit:
                continue
            hi = s | bit
            # sigma+ : |S> -> |D> on ion q, motional block G
            # sigma- : |D> -> |S>, motional block G^dagger
            for m in range(N):
                for n in range(N):
                    g = G[m, n]
                    if g == 0:
                        continue
                    for c in range(k):
                        dst[hi, m, c] = dst[hi, m, c] + uq * g * src[s, n, c]
                        dst[s, n, c] = dst[s, n, c] + uqc * conj(g) * src[hi, m, c]


def propagate(
    double complex[:, :, ::1] psi,
    double complex[:, :, ::1] C,
    const double[:, ::1] theta,
    const double complex[:, :, ::1] coef,
    const double complex[::1] ion_phase,
    double tol=1e-16,
    int max_terms=40,
):
    """Apply ``prod_e exp(-i K_e)`` to ``psi`` in place (first ``e`` first).

    Parameters
    ----------
    psi : complex array, shape (2**n_ions, N, k)
        Block of state vectors; overwritten with the result.
    C : complex array, shape (J, N, N)
        Per-tone displacement matrices ``exp(i eta_j (a + a^dagger))``.
    theta : float array, shape (E, P)
        Trap-frame angle ``nu * t`` at every quadrature node.
    coef : complex array, shape (E, P, J)
        Node weights already multiplied by the step, half Rabi frequency,
        envelope and laser phase factor.
    ion_phase : complex array, shape (n_ions,)
        Extra optical phase factor ``exp(-i theta_q)`` per ion.

    Returns
    -------
    int
        Largest number of Taylor terms used by any exponential.
    """
    cdef Py_ssize_t n_int = psi.shape[0]
    cdef Py_ssize_t N = psi.shape[1]
    cdef Py_ssize_t k = psi.shape[2]
    cdef Py_ssize_t J = C.shape[0]
    cdef Py_ssize_t E = theta.shape[0]
    cdef Py_ssize_t P = theta.shape[1]
    cdef int n_ions = 0
    while (1 << n_ions) < n_int:
        n_ions += 1
    if (1 << n_ions) != n_int:
        raise ValueError("first axis of psi must be a power of two")
    if C.shape[1] != N or C.shape[2] != N:
        raise ValueError("displacement matrices do not match the Fock dimension")
    if coef.shape[0] != E or coef.shape[1] != P or coef.shape[2] != J:
        raise ValueError("coefficient array shape mismatch")
    if ion_phase.shape[0] != n_ions:
        raise ValueError("one optical phase factor per ion is required")

    G_arr = np.zeros((N, N), dtype=np.complex128)
    ph_arr = np.zeros(N, dtype=np.complex128)
    term_arr = np.zeros((n_int, N, k), dtype=np.complex128)
    nxt_arr = np.zeros((n_int, N, k), dtype=np.complex128)
    cdef double complex[:, ::1] G = G_arr
    cdef double complex[::1] ph = ph_arr
    cdef double complex[:, :, ::1] term = term_arr
    cdef double complex[:, :, ::1] nxt = nxt_arr
    cdef double complex[:, :, ::1] swap
    cdef Py_ssize_t e, p, j, m, n, s, c
    cdef double complex w, rot, pm
    cdef double complex minus_i = -1j
    cdef double big
    cdef int it, used = 0

    with nogil:
        for e in range(E):
            for m in range(N):
                for n in range(N):
                    G[m, n] = 0
            for p in range(P):
                rot = cexp(1j * theta[e, p])
                ph[0] = 1
                for m in range(1, N):
                    ph[m] = ph[m - 1] * rot
                for j in range(J):
                    w = coef[e, p, j]
                    if w == 0:
                        continue
                    for m in range(N):
                        pm = w * ph[m]
                        for n in range(N):
                            G[m, n] = G[m, n] + pm * C[j, m, n] * conj(ph[n])
            for s in range(n_int):
                for m in range(N):
                    for c in range(k):
                        term[s, m, c] = psi[s, m, c]
            it = 0
            while it < max_terms:
                it += 1
                apply_structured(G, ion_phase, n_ions, term, nxt)
                big = 0.0
                for s in range(n_int):
                    for m in range(N):
                        for c in range(k):
                            w = nxt[s, m, c] * (minus_i / it)
                            nxt[s, m, c] = w
                            psi[s, m, c] = psi[s, m, c] + w
                            if cabs_max(w) > big:
                                big = cabs_max(w)
                swap = term
                term = nxt
                nxt = swap
                if big < tol:
                    break
            if it > used:
                used = it
    return used
