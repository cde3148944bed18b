"""Cyclic Jacobi eigenvalues for small self-adjoint matrices.

The routine works on a stack of complex Hermitian matrices at once: every
plane rotation is applied to the whole stack, which keeps the per-matrix
cost low when checking many small operators.
"""
from __future__ import annotations

import numpy as np


def _check_hermitian(h: np.ndarray) -> None:
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    if not np.allclose(h, np.swapaxes(h.conj(), -1, -2), atol=1e-12 * scale):
        raise ValueError("matrix is not Hermitian")


def jacobi_eigvalsh(h: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of Hermitian matrices, ascending along the last axis.

    ``h`` has shape (..., n, n).  Each rotation first removes the phase of
    the pivot h[p, q], then applies the real Jacobi rotation that zeroes it.
    Sweeps stop once every matrix has off-diagonal Frobenius norm below
    ``tol`` times its own norm.
    """
    h = np.array(h, dtype=complex)
    _check_hermitian(h)
    n = h.shape[-1]
    h = (h + np.swapaxes(h.conj(), -1, -2)) / 2
    stack = h.reshape(-1, n, n)
    scale = np.maximum(np.linalg.norm(stack, axis=(1, 2)), np.finfo(float).tiny)
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(stack[:, off_mask]) ** 2, axis=1))
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                hpq = stack[:, p, q]
                r = np.abs(hpq)
                live = r > 1e-300
                phase = np.where(live, hpq / np.where(live, r, 1.0), 1.0)
                diff = stack[:, q, q].real - stack[:, p, p].real
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    theta = diff / (2.0 * r)
                    t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta**2 + 1.0))
                # tiny pivots: theta overflows, use the first-order angle instead
                small = ~np.isfinite(theta) | (np.abs(theta) > 1e150)
                t = np.where(small, np.where(diff != 0, r / np.where(diff != 0, diff, 1.0), 0.0), t)
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                e = phase.conj()
                # H <- U^dagger H U with U[p,p]=c, U[p,q]=s, U[q,p]=-s e, U[q,q]=c e
                col_p = stack[:, :, p].copy()
                col_q = stack[:, :, q].copy()
                stack[:, :, p] = c[:, None] * col_p - (s * e)[:, None] * col_q
                stack[:, :, q] = s[:, None] * col_p + (c * e)[:, None] * col_q
                row_p = stack[:, p, :].copy()
                row_q = stack[:, q, :].copy()
                stack[:, p, :] = c[:, None] * row_p - (s * phase)[:, None] * row_q
                stack[:, q, :] = s[:, None] * row_p + (c * phase)[:, None] * row_q
                stack[:, p, q] = 0.0
                stack[:, q, p] = 0.0
    else:
        raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    ev = np.sort(np.diagonal(stack, axis1=1, axis2=2).real, axis=1)
    return ev.reshape(h.shape[:-1])


def eigvalsh(h: np.ndarray) -> np.ndarray:
    return jacobi_eigvalsh(h)


def spectral_norm_hermitian(h: np.ndarray) -> np.ndarray | float:
    """Largest absolute eigenvalue; a float for one matrix, an array for a stack."""
    ev = jacobi_eigvalsh(h)
    norm = np.maximum(np.abs(ev[..., 0]), np.abs(ev[..., -1]))
    return float(norm) if norm.ndim == 0 else norm


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value, via the eigenvalues of M^dagger M."""
    m = np.asarray(m, dtype=complex)
    top = jacobi_eigvalsh(np.swapaxes(m.conj(), -1, -2) @ m)[..., -1]
    norm = np.sqrt(np.maximum(top, 0.0))
    return float(norm) if norm.ndim == 0 else norm
