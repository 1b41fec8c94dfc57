"""Pure-NumPy reference implementation of the propagation kernel.

Same contract as the compiled ``geogate._kernel.propagate``; used when the
extension is not built and as the cross-check in the test suite.
"""

import numpy as np


def _apply(G, u, n_ions, src):
    out = np.zeros_like(src)
    Gh = G.conj().T
    for q in range(n_ions):
        bit = 1 << (n_ions - 1 - q)
        for s in range(src.shape[0]):
            if s & bit:
                continue
            hi = s | bit
            out[hi] += u[q] * (G @ src[s])
            out[s] += np.conj(u[q]) * (Gh @ src[hi])
    return out


def propagate(psi, C, theta, coef, ion_phase, tol=1e-16, max_terms=40):
    n_int, N, _ = psi.shape
    n_ions = n_int.bit_length() - 1
    if 1 << n_ions != n_int:
        raise ValueError("first axis of psi must be a power of two")
    if C.shape[1:] != (N, N):
        raise ValueError("displacement matrices do not match the Fock dimension")
    if coef.shape != theta.shape + (C.shape[0],):
        raise ValueError("coefficient array shape mismatch")
    if len(ion_phase) != n_ions:
        raise ValueError("one optical phase factor per ion is required")
    levels = np.arange(N)
    used = 0
    for e in range(theta.shape[0]):
        ph = np.exp(1j * np.outer(theta[e], levels))  # (P, N)
        G = np.einsum("pj,pm,jmn,pn->mn", coef[e], ph, C, ph.conj())
        term = psi.copy()
        for it in range(1, max_terms + 1):
            term = (-1j / it) * _apply(G, ion_phase, n_ions, term)
            psi += term
            if np.abs(term.real).max(initial=0.0) < tol and np.abs(term.imag).max(initial=0.0) < tol:
                break
        used = max(used, it)
    return used
