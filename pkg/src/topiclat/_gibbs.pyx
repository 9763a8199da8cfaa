# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled collapsed Gibbs kernel.

Operation-for-operation mirror of topiclat._gibbs_py (same xorshift128+
stream, same sampling and accumulation order), so both kernels produce
bit-identical posteriors. This one releases the GIL during sweeps when no
callback is installed.
"""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint64_t

COMPILED = True


cdef inline uint64_t _splitmix64(uint64_t *carry) nogil:
    carry[0] = carry[0] + <uint64_t>0x9E3779B97F4A7C15UL
    cdef uint64_t z = carry[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9UL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBUL
    return z ^ (z >> 31)


cdef inline void _seed_state(uint64_t seed, uint64_t *s0, uint64_t *s1) nogil:
    cdef uint64_t carry = seed
    s0[0] = _splitmix64(&carry)
    s1[0] = _splitmix64(&carry)
    if s0[0] == 0 and s1[0] == 0:
        s0[0] = 1


cdef inline uint64_t _next_u64(uint64_t *s0, uint64_t *s1) nogil:
    cdef uint64_t x = s0[0]
    cdef uint64_t y = s1[0]
    s0[0] = y
    x = x ^ (x << 23)
    s1[0] = x ^ y ^ (x >> 17) ^ (y >> 26)
    return s1[0] + y


cdef inline double _next_double(uint64_t *s0, uint64_t *s1) nogil:
    return <double>(_next_u64(s0, s1) >> 11) * (1.0 / 9007199254740992.0)


cdef void _sweep(
    const int32_t[::1] tokens,
    const int64_t[::1] offsets,
    int32_t[::1] z,
    int64_t[:, ::1] n_dk,
    int64_t[:, ::1] n_kw,
    int64_t[::1] n_k,
    double[::1] probs,
    int n_topics,
    double alpha,
    double beta,
    double v_beta,
    uint64_t *s0,
    uint64_t *s1,
) nogil:
    cdef Py_ssize_t n_docs = offsets.shape[0] - 1
    cdef Py_ssize_t d, i
    cdef int k, j, w
    cdef double total, u, acc, p
    for d in range(n_docs):
        for i in range(offsets[d], offsets[d + 1]):
            w = tokens[i]
            k = z[i]
            n_dk[d, k] -= 1
            n_kw[k, w] -= 1
            n_k[k] -= 1
            total = 0.0
            for j in range(n_topics):
                p = (
                    (n_kw[j, w] + beta)
                    / (n_k[j] + v_beta)
                    * (n_dk[d, j] + alpha)
                )
                probs[j] = p
                total += p
            u = _next_double(s0, s1) * total
            k = n_topics - 1
            acc = 0.0
            for j in range(n_topics):
                acc += probs[j]
                if u < acc:
                    k = j
                    break
            z[i] = k
            n_dk[d, k] += 1
            n_kw[k, w] += 1
            n_k[k] += 1


cdef void _acc_theta(
    const int64_t[:, ::1] n_dk,
    const int64_t[::1] offsets,
    double[:, ::1] theta_acc,
    int n_topics,
    double alpha,
) nogil:
    cdef Py_ssize_t n_docs = offsets.shape[0] - 1
    cdef Py_ssize_t d
    cdef int j
    cdef double denom
    cdef int64_t length
    for d in range(n_docs):
        length = offsets[d + 1] - offsets[d]
        denom = length + n_topics * alpha
        for j in range(n_topics):
            theta_acc[d, j] += (n_dk[d, j] + alpha) / denom


cdef void _acc_phi(
    const int64_t[:, ::1] n_kw,
    const int64_t[::1] n_k,
    double[:, ::1] phi_acc,
    int n_topics,
    int n_terms,
    double beta,
    double v_beta,
) nogil:
    cdef int j, w
    cdef double denom
    for j in range(n_topics):
        denom = n_k[j] + v_beta
        for w in range(n_terms):
            phi_acc[j, w] += (n_kw[j, w] + beta) / denom


def gibbs_fit(
    tokens_in,
    doc_offsets_in,
    int n_topics,
    int n_terms,
    double alpha,
    double beta,
    int iterations,
    int burn_in,
    int sample_lag,
    seed,
    sweep_callback=None,
):
    """Run collapsed Gibbs over doc-grouped token ids.

    Returns (theta_mean, phi_mean, n_dk, n_kw, n_k, z).
    """
    tokens_arr = np.ascontiguousarray(tokens_in, dtype=np.int32)
    offsets_arr = np.ascontiguousarray(doc_offsets_in, dtype=np.int64)
    cdef const int32_t[::1] tokens = tokens_arr
    cdef const int64_t[::1] offsets = offsets_arr
    cdef Py_ssize_t n_docs = offsets.shape[0] - 1
    cdef Py_ssize_t n_tokens = tokens.shape[0]

    cdef uint64_t s0, s1
    cdef uint64_t useed = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    _seed_state(useed, &s0, &s1)

    z_arr = np.zeros(n_tokens, dtype=np.int32)
    n_dk_arr = np.zeros((n_docs, n_topics), dtype=np.int64)
    n_kw_arr = np.zeros((n_topics, n_terms), dtype=np.int64)
    n_k_arr = np.zeros(n_topics, dtype=np.int64)
    theta_acc_arr = np.zeros((n_docs, n_topics), dtype=np.float64)
    phi_acc_arr = np.zeros((n_topics, n_terms), dtype=np.float64)
    probs_arr = np.zeros(n_topics, dtype=np.float64)

    cdef int32_t[::1] z = z_arr
    cdef int64_t[:, ::1] n_dk = n_dk_arr
    cdef int64_t[:, ::1] n_kw = n_kw_arr
    cdef int64_t[::1] n_k = n_k_arr
    cdef double[:, ::1] theta_acc = theta_acc_arr
    cdef double[:, ::1] phi_acc = phi_acc_arr
    cdef double[::1] probs = probs_arr

    cdef Py_ssize_t d, i
    cdef int k, sweep
    cdef double v_beta = n_terms * beta
    cdef int n_samples = 0

    for d in range(n_docs):
        for i in range(offsets[d], offsets[d + 1]):
            k = <int>(_next_u64(&s0, &s1) % <uint64_t>n_topics)
            z[i] = k
            n_dk[d, k] += 1
            n_kw[k, tokens[i]] += 1
            n_k[k] += 1

    if sweep_callback is None:
        with nogil:
            for sweep in range(iterations):
                _sweep(tokens, offsets, z, n_dk, n_kw, n_k, probs,
                       n_topics, alpha, beta, v_beta, &s0, &s1)
                if sweep >= burn_in and (sweep - burn_in) % sample_lag == 0:
                    n_samples += 1
                    _acc_theta(n_dk, offsets, theta_acc, n_topics, alpha)
                    _acc_phi(n_kw, n_k, phi_acc, n_topics, n_terms, beta, v_beta)
    else:
        for sweep in range(iterations):
            _sweep(tokens, offsets, z, n_dk, n_kw, n_k, probs,
                   n_topics, alpha, beta, v_beta, &s0, &s1)
            if sweep >= burn_in and (sweep - burn_in) % sample_lag == 0:
                n_samples += 1
                _acc_theta(n_dk, offsets, theta_acc, n_topics, alpha)
                _acc_phi(n_kw, n_k, phi_acc, n_topics, n_terms, beta, v_beta)
            sweep_callback(
                sweep, n_dk_arr.copy(), n_kw_arr.copy(), n_k_arr.copy()
            )

    theta = theta_acc_arr / n_samples
    phi = phi_acc_arr / n_samples
    return theta, phi, n_dk_arr, n_kw_arr, n_k_arr, z_arr


def gibbs_fold_in(
    tokens_in,
    n_kw_in,
    n_k_in,
    double alpha,
    double beta,
    int iterations,
    seed,
):
    """Infer a topic mixture for one token stream with topic counts frozen.

    Averages theta over the second half of the sweeps; returns (K,) float64.
    """
    tokens_arr = np.ascontiguousarray(tokens_in, dtype=np.int32)
    n_kw_arr = np.ascontiguousarray(n_kw_in, dtype=np.int64)
    n_k_arr = np.ascontiguousarray(n_k_in, dtype=np.int64)
    cdef const int32_t[::1] tokens = tokens_arr
    cdef const int64_t[:, ::1] n_kw = n_kw_arr
    cdef const int64_t[::1] n_k = n_k_arr
    cdef int n_topics = <int>n_k.shape[0]
    cdef int n_terms = <int>n_kw.shape[1]
    cdef Py_ssize_t n_tokens = tokens.shape[0]

    cdef uint64_t s0, s1
    cdef uint64_t useed = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    _seed_state(useed, &s0, &s1)

    z_arr = np.zeros(n_tokens, dtype=np.int32)
    dk_arr = np.zeros(n_topics, dtype=np.int64)
    theta_acc_arr = np.zeros(n_topics, dtype=np.float64)
    probs_arr = np.zeros(n_topics, dtype=np.float64)
    cdef int32_t[::1] z = z_arr
    cdef int64_t[::1] dk = dk_arr
    cdef double[::1] theta_acc = theta_acc_arr
    cdef double[::1] probs = probs_arr

    cdef Py_ssize_t i
    cdef int k, j, w, sweep
    cdef double v_beta = n_terms * beta
    cdef double total, u, acc, p, denom
    cdef int burn = iterations // 2
    cdef int n_samples = 0

    for i in range(n_tokens):
        k = <int>(_next_u64(&s0, &s1) % <uint64_t>n_topics)
        z[i] = k
        dk[k] += 1

    with nogil:
        for sweep in range(iterations):
            for i in range(n_tokens):
                w = tokens[i]
                k = z[i]
                dk[k] -= 1
                total = 0.0
                for j in range(n_topics):
                    p = (
                        (n_kw[j, w] + beta)
                        / (n_k[j] + v_beta)
                        * (dk[j] + alpha)
                    )
                    probs[j] = p
                    total += p
                u = _next_double(&s0, &s1) * total
                k = n_topics - 1
                acc = 0.0
                for j in range(n_topics):
                    acc += probs[j]
                    if u < acc:
                        k = j
                        break
                z[i] = k
                dk[k] += 1
            if sweep >= burn:
                n_samples += 1
                denom = n_tokens + n_topics * alpha
                for j in range(n_topics):
                    theta_acc[j] += (dk[j] + alpha) / denom

    return theta_acc_arr / n_samples
