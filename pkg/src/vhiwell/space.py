"""Euclidean space primitives: vectors, inner products, norms, box projections.

All spaces are R^n with the standard inner product, so the dual pairing is
the inner product itself and every norm below is the 2-norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, VhiError


@dataclass(frozen=True)
class SpaceDescriptor:
    dim: int
    norm_kind: str = "euclidean"

    def __post_init__(self):
        if self.dim < 1:
            raise VhiError(f"space dimension must be >= 1, got {self.dim}")
        if self.norm_kind != "euclidean":
            raise VhiError(f"unsupported norm kind {self.norm_kind!r}")


def as_vector(x) -> np.ndarray:
    """Coerce to a 1-D float64 array and reject non-finite entries."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise VhiError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise VhiError("vector has non-finite entries")
    return v


def inner(u, v) -> float:
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"inner: {u.shape} vs {v.shape}")
    return float(np.dot(u, v))


def norm(v) -> float:
    return float(np.linalg.norm(as_vector(v)))


def project_interval_box(v, lo=None, hi=None) -> np.ndarray:
    """Componentwise clamp of ``v`` onto the box [lo, hi].

    ``lo``/``hi`` may be scalars, sequences, or None (no bound on that side);
    -inf/+inf entries mean the same as an absent bound.  Idempotent, and
    returns ``v`` unchanged (as a copy) whenever it is already feasible.
    """
    v = as_vector(v)
    lo_arr = np.full_like(v, -np.inf) if lo is None else np.broadcast_to(
        np.asarray(lo, dtype=float), v.shape)
    hi_arr = np.full_like(v, np.inf) if hi is None else np.broadcast_to(
        np.asarray(hi, dtype=float), v.shape)
    if np.any(lo_arr > hi_arr):
        bad = int(np.argmax(lo_arr > hi_arr))
        raise VhiError(f"inconsistent bounds at component {bad}: "
                       f"lo={lo_arr[bad]} > hi={hi_arr[bad]}")
    return np.clip(v, lo_arr, hi_arr)
