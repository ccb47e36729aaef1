"""Stakeholder weights from a pairwise comparison matrix.

Uses averaging over normalized columns: divide each column by its sum, then
take the mean of each row. This is the usual fast approximation of the
principal eigenvector; no consistency-ratio gate is applied, and reciprocity
is not required (deviations surface as project-validation warnings).
"""

from __future__ import annotations

import numpy as np


def compute_lambda(comparison: np.ndarray) -> np.ndarray:
    """Normalized stakeholder weights; positive and summing to 1."""
    m = np.asarray(comparison, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"comparison matrix must be square, got shape {m.shape}")
    if m.size == 0:
        return np.zeros(0)
    if not np.all(m > 0):
        raise ValueError("comparison matrix entries must be > 0")
    normalized = m / m.sum(axis=0, keepdims=True)
    return normalized.mean(axis=1)


def reciprocity_deviations(comparison: np.ndarray, tol: float = 0.10) -> list[tuple[int, int, float]]:
    """Index pairs (p, r) with entry(p,r)*entry(r,p) off 1 by more than tol."""
    m = np.asarray(comparison, dtype=float)
    out = []
    q = m.shape[0]
    for p in range(q):
        for r in range(p + 1, q):
            prod = float(m[p, r] * m[r, p])
            if abs(prod - 1.0) > tol:
                out.append((p, r, prod))
    return out
