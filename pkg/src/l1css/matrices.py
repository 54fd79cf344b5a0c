"""Dense matrix container and the entrywise norms used throughout the package.

Matrices are plain C-contiguous float64 numpy arrays validated by
:func:`as_matrix`: two-dimensional, non-empty, every entry finite.  Column
subsets are sorted tuples of distinct in-range indices.  All functions here
are pure; none mutates its arguments.
"""

import numpy as np


def as_matrix(a, name="matrix"):
    """Validate ``a`` and return it as a C-contiguous float64 2-D array.

    Raises ValueError if the input is not 2-D, is empty, or contains a
    NaN/inf entry.
    """
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got {m.ndim}-D")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(b, name="vector"):
    """Validate ``b`` as a finite float64 1-D array."""
    v = np.ascontiguousarray(b, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got {v.ndim}-D")
    if v.shape[0] < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.isfinite(v).all():
        raise ValueError(f"{name} contains non-finite entries")
    return v


def column_subset(indices, cols):
    """Return ``indices`` as a sorted tuple of distinct column indices.

    ``cols`` is the column count of the parent matrix; every index must lie
    in ``[0, cols)`` and appear once.
    """
    idx = tuple(sorted(int(i) for i in indices))
    if not idx:
        raise ValueError("column subset must be non-empty")
    if any(b == a for a, b in zip(idx, idx[1:])):
        raise ValueError("column subset has repeated indices")
    if idx[0] < 0 or idx[-1] >= cols:
        raise ValueError(f"column index out of range for {cols} columns")
    return idx


def entrywise_norm(a, p=1.0):
    """Entrywise l_p norm ``(sum |a_ij|^p)^(1/p)`` for p >= 1.

    Accumulation relies on numpy's pairwise summation, which keeps the
    rounding error of the l1 mass near machine precision even when small
    and large magnitudes mix.
    """
    m = as_matrix(a)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p == 1:
        return float(np.abs(m).sum())
    if p == 2:
        return float(np.linalg.norm(m))
    return float((np.abs(m) ** p).sum() ** (1.0 / p))


def frobenius_norm(a):
    """Frobenius norm, identical to ``entrywise_norm(a, 2)``."""
    return float(np.linalg.norm(as_matrix(a)))


def select_columns(a, subset):
    """Return a copy of the columns of ``a`` listed in ``subset``, in order."""
    m = as_matrix(a)
    idx = column_subset(subset, m.shape[1])
    return np.ascontiguousarray(m[:, list(idx)])


def residual_l1(design, coeffs, target):
    """Exact l1 fitting residual ``||design @ coeffs - target||_1``.

    ``design`` is n x s, ``coeffs`` is s x d, ``target`` is n x d.
    """
    m = as_matrix(design, "design")
    x = as_matrix(coeffs, "coeffs")
    t = as_matrix(target, "target")
    if m.shape[1] != x.shape[0]:
        raise ValueError(
            f"design has {m.shape[1]} columns but coeffs has {x.shape[0]} rows"
        )
    if m.shape[0] != t.shape[0] or x.shape[1] != t.shape[1]:
        raise ValueError(
            f"target shape {t.shape} does not match product shape "
            f"({m.shape[0]}, {x.shape[1]})"
        )
    return float(np.abs(m @ x - t).sum())
