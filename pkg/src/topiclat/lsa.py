"""Truncated SVD of the weighted term-document matrix.

The decomposition A ~= U_r S_r V_r^T is computed by seeded randomized
subspace iteration: a Gaussian sketch of width rank+oversample is refined by
alternating A/A^T products with QR re-orthonormalization until the top-rank
Ritz singular values stabilize. Chunk (and query) coordinates in the latent
space are the fold-in U_r^T x, which for training columns equals the matching
row of V_r S_r.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import artifacts
from .errors import ConvergenceFailure, RankTooLarge, ShapeMismatch


@dataclass(frozen=True)
class LsaModel:
    rank: int
    u: np.ndarray  # (V, rank), orthonormal columns, sign-canonical
    sigma: np.ndarray  # (rank,), descending, positive
    explained_energy: float  # sum(sigma^2) / ||A||_F^2

    def __post_init__(self):
        if self.u.shape[1] != self.rank or self.sigma.shape != (self.rank,):
            raise ShapeMismatch("inconsistent LSA model dimensions")


@dataclass(frozen=True)
class LsaVector:
    coords: np.ndarray  # (rank,)


def _canonicalize_signs(u: np.ndarray, v: np.ndarray | None = None):
    """Flip columns so each U column's largest-|.| entry is positive."""
    flips = np.ones(u.shape[1])
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            flips[j] = -1.0
    u = u * flips
    if v is not None:
        v = v * flips
    return u, v


def fit_lsa(
    weights,
    rank: int,
    seed: int,
    oversample: int = 10,
    min_power_iters: int = 4,
    max_power_iters: int = 500,
    rtol: float = 1e-10,
) -> LsaModel:
    """Fit a rank-r truncated SVD of a (V x N) sparse or dense matrix.

    Power iterations continue past `min_power_iters` until the top-rank Ritz
    values change by less than `rtol` relatively between sweeps; hitting
    `max_power_iters` without stabilizing raises ConvergenceFailure.
    """
    if sp.issparse(weights):
        matrix = weights.tocsc().astype(np.float64)
        frob_sq = float(matrix.multiply(matrix).sum())
        nnz = matrix.nnz
    else:
        matrix = np.asarray(weights, dtype=np.float64)
        frob_sq = float(np.sum(matrix * matrix))
        nnz = int(np.count_nonzero(matrix))
    n_terms, n_chunks = matrix.shape
    max_rank = min(n_terms, n_chunks)
    if rank < 1 or rank > max_rank:
        raise RankTooLarge(f"rank {rank} not in [1, min(V, N) = {max_rank}]")
    if nnz == 0:
        raise ShapeMismatch("cannot decompose an all-zero matrix")

    rng = np.random.default_rng(seed)
    width = min(rank + oversample, max_rank)
    q_basis = np.linalg.qr(matrix @ rng.standard_normal((n_chunks, width)))[0]
    prev = None
    for iteration in range(1, max_power_iters + 1):
        z = np.linalg.qr(matrix.T @ q_basis)[0]
        q_basis = np.linalg.qr(matrix @ z)[0]
        small = q_basis.T @ matrix
        if sp.issparse(small):
            small = np.asarray(small.todense())
        sigma = np.linalg.svd(small, compute_uv=False)[:rank]
        if prev is not None and iteration >= min_power_iters:
            denom = np.where(sigma > 0, sigma, 1.0)
            if np.max(np.abs(sigma - prev) / denom) < rtol:
                break
        prev = sigma
    else:
        raise ConvergenceFailure(
            f"singular values did not stabilize to rtol={rtol} "
            f"within {max_power_iters} power iterations"
        )

    small = q_basis.T @ matrix
    if sp.issparse(small):
        small = np.asarray(small.todense())
    u_small, sigma_all, _ = np.linalg.svd(small, full_matrices=False)
    sigma_r = sigma_all[:rank]
    if sigma_r[-1] <= 0:
        raise RankTooLarge(
            f"matrix rank is below the requested rank {rank} "
            f"(sigma_{rank} = {sigma_r[-1]})"
        )
    u_r = q_basis @ u_small[:, :rank]
    u_r, _ = _canonicalize_signs(u_r)
    return LsaModel(
        rank=rank,
        u=np.ascontiguousarray(u_r),
        sigma=sigma_r.copy(),
        explained_energy=float(np.sum(sigma_r**2) / frob_sq),
    )


def fit_lsa_dense(weights, rank: int) -> LsaModel:
    """Exact dense decomposition for small instances; same model contract."""
    matrix = (
        np.asarray(weights.todense()) if sp.issparse(weights)
        else np.asarray(weights, dtype=np.float64)
    )
    max_rank = min(matrix.shape)
    if rank < 1 or rank > max_rank:
        raise RankTooLarge(f"rank {rank} not in [1, min(V, N) = {max_rank}]")
    u, sigma, _ = np.linalg.svd(matrix, full_matrices=False)
    if sigma[rank - 1] <= 0:
        raise RankTooLarge(f"matrix rank is below the requested rank {rank}")
    u_r, _ = _canonicalize_signs(u[:, :rank])
    frob_sq = float(np.sum(matrix * matrix))
    return LsaModel(
        rank=rank,
        u=np.ascontiguousarray(u_r),
        sigma=sigma[:rank].copy(),
        explained_energy=float(np.sum(sigma[:rank] ** 2) / frob_sq),
    )


def project_chunk(model: LsaModel, column) -> LsaVector:
    """Fold a weighted V-vector into latent coordinates: U_r^T x."""
    if sp.issparse(column):
        dense = np.asarray(column.todense()).ravel().astype(np.float64)
    else:
        dense = np.asarray(column, dtype=np.float64).ravel()
    if dense.shape[0] != model.u.shape[0]:
        raise ShapeMismatch(
            f"column has {dense.shape[0]} rows, model expects {model.u.shape[0]}"
        )
    return LsaVector(coords=model.u.T @ dense)


def project_matrix(model: LsaModel, weights) -> np.ndarray:
    """Latent coordinates for every column at once; shape (N, rank)."""
    if sp.issparse(weights):
        coords = (weights.T @ model.u).astype(np.float64)
        if sp.issparse(coords):
            coords = np.asarray(coords.todense())
    else:
        coords = np.asarray(weights, dtype=np.float64).T @ model.u
    return np.ascontiguousarray(coords)


def save_lsa(model: LsaModel, path) -> str:
    def write(fh):
        artifacts.write_u32(fh, model.rank)
        artifacts.write_u32(fh, model.u.shape[0])
        artifacts.write_f64(fh, model.explained_energy)
        artifacts.write_array(fh, model.sigma)
        artifacts.write_array(fh, model.u)

    return artifacts.save(path, artifacts.KIND_LSA, write)


def load_lsa(path) -> tuple[LsaModel, str]:
    def read(fh):
        rank = artifacts.read_u32(fh)
        artifacts.read_u32(fh)  # V, implied by the U array
        energy = artifacts.read_f64(fh)
        sigma = artifacts.read_array(fh)
        u = artifacts.read_array(fh)
        return LsaModel(rank=rank, u=u, sigma=sigma, explained_energy=energy)

    return artifacts.load(path, artifacts.KIND_LSA, read)
