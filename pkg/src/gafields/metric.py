"""Symmetric nondegenerate metrics, minors and isometry tests."""

from __future__ import annotations

import json

import numpy as np

SYMMETRY_RTOL = 1e-9
DEGENERACY_GATE = 1e-12
ISOMETRY_RTOL = 1e-9


class MetricError(ValueError):
    pass


class ArgumentError(ValueError):
    pass


class Metric:
    """A nondegenerate symmetric metric with both index positions.

    Stores contravariant components ``g_upper`` (the g^{ij} used by the
    algebra layer), covariant components ``g_lower`` (their inverse),
    and determinant data of the covariant matrix.  Immutable after
    construction.
    """

    __slots__ = ("dim", "g_upper", "g_lower", "det_lower", "sign", "abs_det",
                 "_table")

    def __init__(self, g_upper: np.ndarray, g_lower: np.ndarray):
        self.dim = g_upper.shape[0]
        self.g_upper = g_upper
        self.g_lower = g_lower
        self.det_lower = float(np.linalg.det(g_lower))
        self.sign = 1 if self.det_lower > 0 else -1
        self.abs_det = abs(self.det_lower)
        self._table = None
        g_upper.setflags(write=False)
        g_lower.setflags(write=False)

    def __repr__(self):
        return f"Metric(dim={self.dim}, sign={self.sign}, abs_det={self.abs_det:.6g})"


def _validated_symmetric(g: np.ndarray, name: str) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise MetricError(f"{name} must be a square matrix, got shape {g.shape}")
    scale = np.abs(g).max()
    if scale == 0.0:
        raise MetricError(f"{name} is the zero matrix")
    if np.abs(g - g.T).max() > SYMMETRY_RTOL * scale:
        raise MetricError(f"{name} is asymmetric beyond tolerance")
    g = (g + g.T) / 2.0
    n = g.shape[0]
    det = np.linalg.det(g)
    if abs(det) / scale ** n <= DEGENERACY_GATE:
        raise MetricError(f"{name} is singular (|det|/scale^n = "
                          f"{abs(det) / scale ** n:.3e})")
    return g


def new_metric(g: np.ndarray, convention: str = "upper") -> Metric:
    """Build a Metric from contravariant ('upper') or covariant ('lower')
    components; the other index position is derived by inversion."""
    if convention not in ("upper", "lower"):
        raise ArgumentError(f"convention must be 'upper' or 'lower', got {convention!r}")
    g = _validated_symmetric(g, f"g_{convention}")
    inv = np.linalg.inv(g)
    inv = (inv + inv.T) / 2.0
    if convention == "upper":
        return Metric(g, inv)
    return Metric(inv, g)


def minor(m: Metric, rows, cols) -> float:
    """Determinant of the submatrix of g^{ij} at the given 1-based
    strictly increasing row/column index lists."""
    rows = list(rows)
    cols = list(cols)
    if len(rows) != len(cols):
        raise ArgumentError("row and column index lists must have equal length")
    for name, idx in (("rows", rows), ("cols", cols)):
        if any(not 1 <= i <= m.dim for i in idx):
            raise ArgumentError(f"{name} indices out of range 1..{m.dim}: {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ArgumentError(f"{name} indices must be strictly increasing: {idx}")
    if not rows:
        return 1.0
    sub = m.g_upper[np.ix_([i - 1 for i in rows], [j - 1 for j in cols])]
    return float(np.linalg.det(sub))


def is_isometry(m: Metric, P: np.ndarray, rtol: float = ISOMETRY_RTOL) -> bool:
    """True iff the linear change with matrix p^i_j preserves the metric,
    i.e. the transformed contravariant components P g^ P^T equal g^."""
    P = np.asarray(P, dtype=float)
    if P.shape != (m.dim, m.dim):
        raise ArgumentError(f"P must be {m.dim}x{m.dim}, got {P.shape}")
    if abs(np.linalg.det(P)) < 1e-12:
        raise ArgumentError("P is singular")
    transformed = P @ m.g_upper @ P.T
    scale = np.abs(m.g_upper).max()
    return bool(np.abs(transformed - m.g_upper).max() <= rtol * scale)


def metric_to_json(m: Metric) -> str:
    return json.dumps({"dim": m.dim, "g_upper": m.g_upper.tolist()})


def metric_from_json(text: str) -> Metric:
    data = json.loads(text)
    if "g_upper" in data:
        g, conv = data["g_upper"], "upper"
    elif "g_lower" in data:
        g, conv = data["g_lower"], "lower"
    else:
        raise MetricError("metric JSON needs a 'g_upper' or 'g_lower' key")
    g = np.asarray(g, dtype=float)
    if "dim" in data and data["dim"] != g.shape[0]:
        raise MetricError(f"declared dim {data['dim']} does not match matrix "
                          f"shape {g.shape}")
    return new_metric(g, conv)
