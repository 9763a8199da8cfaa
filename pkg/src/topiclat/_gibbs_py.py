"""Pure-Python collapsed Gibbs kernel, the fallback for topiclat._gibbs.

Mirrors the compiled kernel operation for operation: same xorshift128+ RNG
seeded by splitmix64, same sampling order, same accumulation order, so the
two produce bit-identical posteriors for identical inputs. Orders of
magnitude slower; see benchmarks/bench_gibbs.py.
"""

from __future__ import annotations

import numpy as np

COMPILED = False

_M64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return (z ^ (z >> 31)), state


def _seed_state(seed: int) -> list[int]:
    s0, carry = _splitmix64(seed & _M64)
    s1, _ = _splitmix64(carry)
    if s0 == 0 and s1 == 0:
        s0 = 1
    return [s0, s1]


def _next_u64(state: list[int]) -> int:
    x, y = state[0], state[1]
    state[0] = y
    x = (x ^ ((x << 23) & _M64)) & _M64
    state[1] = (x ^ y ^ (x >> 17) ^ (y >> 26)) & _M64
    return (state[1] + y) & _M64


def _next_double(state: list[int]) -> float:
    return (_next_u64(state) >> 11) * _INV_2_53


def gibbs_fit(
    tokens: np.ndarray,
    doc_offsets: np.ndarray,
    n_topics: int,
    n_terms: int,
    alpha: float,
    beta: float,
    iterations: int,
    burn_in: int,
    sample_lag: int,
    seed: int,
    sweep_callback=None,
):
    """Run collapsed Gibbs over doc-grouped token ids.

    Returns (theta_mean, phi_mean, n_dk, n_kw, n_k, z).
    """
    tokens = [int(t) for t in tokens]
    offsets = [int(o) for o in doc_offsets]
    n_docs = len(offsets) - 1
    n_tokens = len(tokens)
    k_topics = int(n_topics)
    v_terms = int(n_terms)
    state = _seed_state(int(seed))

    z = [0] * n_tokens
    n_dk = [[0] * k_topics for _ in range(n_docs)]
    n_kw = [[0] * v_terms for _ in range(k_topics)]
    n_k = [0] * k_topics
    for d in range(n_docs):
        for i in range(offsets[d], offsets[d + 1]):
            k = _next_u64(state) % k_topics
            z[i] = k
            n_dk[d][k] += 1
            n_kw[k][tokens[i]] += 1
            n_k[k] += 1

    v_beta = v_terms * beta
    theta_acc = [[0.0] * k_topics for _ in range(n_docs)]
    phi_acc = [[0.0] * v_terms for _ in range(k_topics)]
    n_samples = 0
    probs = [0.0] * k_topics

    for sweep in range(iterations):
        for d in range(n_docs):
            row = n_dk[d]
            for i in range(offsets[d], offsets[d + 1]):
                w = tokens[i]
                k = z[i]
                row[k] -= 1
                n_kw[k][w] -= 1
                n_k[k] -= 1
                total = 0.0
                for j in range(k_topics):
                    p = (
                        (n_kw[j][w] + beta)
                        / (n_k[j] + v_beta)
                        * (row[j] + alpha)
                    )
                    probs[j] = p
                    total += p
                u = _next_double(state) * total
                k = k_topics - 1
                acc = 0.0
                for j in range(k_topics):
                    acc += probs[j]
                    if u < acc:
                        k = j
                        break
                z[i] = k
                row[k] += 1
                n_kw[k][w] += 1
                n_k[k] += 1
        if sweep >= burn_in and (sweep - burn_in) % sample_lag == 0:
            n_samples += 1
            for d in range(n_docs):
                length = offsets[d + 1] - offsets[d]
                denom = length + k_topics * alpha
                for j in range(k_topics):
                    theta_acc[d][j] += (n_dk[d][j] + alpha) / denom
            for j in range(k_topics):
                denom = n_k[j] + v_beta
                for w in range(v_terms):
                    phi_acc[j][w] += (n_kw[j][w] + beta) / denom
        if sweep_callback is not None:
            sweep_callback(
                sweep,
                np.array(n_dk, dtype=np.int64),
                np.array(n_kw, dtype=np.int64),
                np.array(n_k, dtype=np.int64),
            )

    theta = np.array(theta_acc, dtype=np.float64) / n_samples
    phi = np.array(phi_acc, dtype=np.float64) / n_samples
    return (
        theta,
        phi,
        np.array(n_dk, dtype=np.int64),
        np.array(n_kw, dtype=np.int64),
        np.array(n_k, dtype=np.int64),
        np.array(z, dtype=np.int32),
    )


def gibbs_fold_in(
    tokens: np.ndarray,
    n_kw: np.ndarray,
    n_k: np.ndarray,
    alpha: float,
    beta: float,
    iterations: int,
    seed: int,
):
    """Infer a topic mixture for one token stream with topic counts frozen.

    Averages theta over the second half of the sweeps; returns (K,) float64.
    """
    tokens = [int(t) for t in tokens]
    k_topics = int(n_k.shape[0])
    v_terms = int(n_kw.shape[1])
    kw = [[int(n_kw[j, w]) for w in range(v_terms)] for j in range(k_topics)]
    k_tot = [int(n_k[j]) for j in range(k_topics)]
    n_tokens = len(tokens)
    state = _seed_state(int(seed))

    z = [0] * n_tokens
    dk = [0] * k_topics
    for i in range(n_tokens):
        k = _next_u64(state) % k_topics
        z[i] = k
        dk[k] += 1

    v_beta = v_terms * beta
    burn = iterations // 2
    theta_acc = [0.0] * k_topics
    n_samples = 0
    probs = [0.0] * k_topics
    for sweep in range(iterations):
        for i in range(n_tokens):
            w = tokens[i]
            k = z[i]
            dk[k] -= 1
            total = 0.0
            for j in range(k_topics):
                p = (kw[j][w] + beta) / (k_tot[j] + v_beta) * (dk[j] + alpha)
                probs[j] = p
                total += p
            u = _next_double(state) * total
            k = k_topics - 1
            acc = 0.0
            for j in range(k_topics):
                acc += probs[j]
                if u < acc:
                    k = j
                    break
            z[i] = k
            dk[k] += 1
        if sweep >= burn:
            n_samples += 1
            denom = n_tokens + k_topics * alpha
            for j in range(k_topics):
                theta_acc[j] += (dk[j] + alpha) / denom

    return np.array(theta_acc, dtype=np.float64) / n_samples
