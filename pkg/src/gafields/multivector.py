"""The 2^n-dimensional exterior bialgebra over a numeric metric.

Coefficients are complex doubles indexed by blade bitmask; the internal
basis is always the Grassmann one, with a Clifford-basis convention
available for import/export.
"""

from __future__ import annotations

import json
from math import factorial

import numpy as np

from . import blades
from .metric import ArgumentError, Metric

IDENTITY_RTOL = 1e-10


class DimensionMismatch(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


class Multivector:
    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs=None):
        self.dim = dim
        if coeffs is None:
            self.coeffs = np.zeros(1 << dim, dtype=complex)
        else:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != (1 << dim,):
                raise ValueError(f"expected {1 << dim} coefficients, got "
                                 f"{coeffs.shape}")
            if not np.all(np.isfinite(coeffs)):
                raise ValueError("non-finite coefficient")
            self.coeffs = coeffs.copy()

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "Multivector":
        return cls(dim)

    @classmethod
    def unit(cls, dim: int) -> "Multivector":
        u = cls(dim)
        u.coeffs[0] = 1.0
        return u

    @classmethod
    def blade(cls, dim: int, indices, coeff=1.0) -> "Multivector":
        u = cls(dim)
        mask = blades.mask_of(indices)
        if mask >> dim:
            raise ValueError(f"index out of range for dimension {dim}")
        u.coeffs[mask] = coeff
        return u

    @classmethod
    def scalar(cls, dim: int, value) -> "Multivector":
        u = cls(dim)
        u.coeffs[0] = value
        return u

    @classmethod
    def from_dict(cls, dim: int, d: dict) -> "Multivector":
        u = cls(dim)
        for mask, c in d.items():
            u.coeffs[mask] += c
        return u

    # -- structure ---------------------------------------------------------
    def to_dict(self) -> dict:
        return {int(m): self.coeffs[m] for m in np.nonzero(self.coeffs)[0]}

    def norm(self) -> float:
        """Max-abs coefficient norm, the identity-test yardstick."""
        return float(np.abs(self.coeffs).max())

    def grades(self):
        return sorted({blades.popcount(int(m)) for m in np.nonzero(self.coeffs)[0]})

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def grade(self) -> int:
        gs = self.grades()
        if len(gs) > 1:
            raise ValueError(f"inhomogeneous multivector with grades {gs}")
        return gs[0] if gs else 0

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(self.norm(), 1.0)
        return float(np.abs(self.coeffs.imag).max()) <= tol * scale

    def is_even(self, tol: float = 1e-12) -> bool:
        scale = max(self.norm(), 1.0)
        odd = [m for m in range(1 << self.dim) if blades.popcount(m) % 2 == 1]
        return float(np.abs(self.coeffs[odd]).max()) <= tol * scale if odd else True

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "Multivector"):
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimensions {self.dim} and {other.dim}")

    def __add__(self, other):
        self._check(other)
        out = Multivector(self.dim)
        out.coeffs = self.coeffs + other.coeffs
        return out

    def __sub__(self, other):
        self._check(other)
        out = Multivector(self.dim)
        out.coeffs = self.coeffs - other.coeffs
        return out

    def __neg__(self):
        out = Multivector(self.dim)
        out.coeffs = -self.coeffs
        return out

    def __mul__(self, scalar):
        if isinstance(scalar, Multivector):
            raise TypeError("use clifford_mul or wedge for multivector products")
        out = Multivector(self.dim)
        out.coeffs = self.coeffs * scalar
        return out

    __rmul__ = __mul__

    def __repr__(self):
        terms = []
        for mask in np.nonzero(self.coeffs)[0]:
            c = self.coeffs[mask]
            name = "e" if mask == 0 else "e^" + "^e^".join(
                str(i) for i in blades.blade_indices(int(mask)))
            terms.append(f"({c:.6g})*{name}")
        return " + ".join(terms) if terms else "0"


# ---------------------------------------------------------------------------
# Product table: per-metric cache of left-multiplication matrices and
# basis-conversion matrices.

class ProductTable:
    def __init__(self, metric: Metric):
        self.metric = metric
        self.dim = metric.dim
        self._g = lambda i, j: float(metric.g_upper[i - 1, j - 1])
        self._chains: dict = {}
        self._left: dict = {}
        self._g2c = None
        self._c2g = None
        self._volume = None

    def left_matrix(self, mask: int) -> np.ndarray:
        """Matrix of x -> blade(mask) * x in the Grassmann basis."""
        mat = self._left.get(mask)
        if mat is None:
            size = 1 << self.dim
            mat = np.zeros((size, size))
            for b in range(size):
                col = blades.blade_clifford_mul(mask, {b: 1.0}, self._g,
                                                self._chains)
                for m, c in col.items():
                    mat[m, b] = c
            self._left[mask] = mat
        return mat

    def mul(self, u: Multivector, v: Multivector) -> Multivector:
        if u.dim != self.dim or v.dim != self.dim:
            raise DimensionMismatch("multivector dimension does not match table")
        out = np.zeros(1 << self.dim, dtype=complex)
        for mask in np.nonzero(u.coeffs)[0]:
            out += u.coeffs[mask] * (self.left_matrix(int(mask)) @ v.coeffs)
        res = Multivector(self.dim)
        res.coeffs = out
        return res

    def grassmann_to_clifford_matrix(self) -> np.ndarray:
        if self._g2c is None:
            size = 1 << self.dim
            mat = np.zeros((size, size))
            for b in range(size):
                for m, c in blades.grassmann_to_chains(b, self._g).items():
                    mat[m, b] = c
            self._g2c = mat
        return self._g2c

    def clifford_to_grassmann_matrix(self) -> np.ndarray:
        if self._c2g is None:
            size = 1 << self.dim
            mat = np.zeros((size, size))
            for b in range(size):
                for m, c in blades.clifford_to_grassmann_blade(b, self._g).items():
                    mat[m, b] = c
            self._c2g = mat
        return self._c2g

    def volume(self) -> Multivector:
        if self._volume is None:
            v = Multivector(self.dim)
            v.coeffs[(1 << self.dim) - 1] = np.sqrt(self.metric.abs_det)
            self._volume = v
        return self._volume

    def structure_constants(self):
        """Yield (alpha_mask, beta_mask, gamma_mask, value) for all nonzero
        Clifford structure constants in the Grassmann basis."""
        size = 1 << self.dim
        for a in range(size):
            la = self.left_matrix(a)
            for b in range(size):
                for m in np.nonzero(la[:, b])[0]:
                    yield a, b, int(m), float(la[m, b])


def build_product_table(m: Metric) -> ProductTable:
    if m._table is None:
        object.__setattr__ if False else None
        m._table = ProductTable(m)
    return m._table


# ---------------------------------------------------------------------------
# Operations.

def wedge(u: Multivector, v: Multivector) -> Multivector:
    u._check(v)
    out = blades.wedge_dicts(u.to_dict(), v.to_dict())
    return Multivector.from_dict(u.dim, out)


def clifford_mul(u: Multivector, v: Multivector, table: ProductTable) -> Multivector:
    return table.mul(u, v)


def grade_project(u: Multivector, k: int) -> Multivector:
    if not 0 <= k <= u.dim:
        raise ArgumentError(f"grade {k} out of range 0..{u.dim}")
    out = Multivector(u.dim)
    for mask in range(1 << u.dim):
        if blades.popcount(mask) == k:
            out.coeffs[mask] = u.coeffs[mask]
    return out


def reversion(u: Multivector) -> Multivector:
    out = Multivector(u.dim)
    for mask in range(1 << u.dim):
        k = blades.popcount(mask)
        sign = -1 if (k // 2) % 2 == 1 else 1
        out.coeffs[mask] = sign * u.coeffs[mask]
    return out


def conjugate_star(u: Multivector) -> Multivector:
    out = reversion(u)
    out.coeffs = out.coeffs.conjugate()
    return out


def trace(u: Multivector) -> complex:
    return complex(u.coeffs[0])


def scalar_product(u: Multivector, v: Multivector, table: ProductTable) -> complex:
    return trace(table.mul(u, conjugate_star(v)))


def exterior_metric_block(m: Metric, k: int) -> np.ndarray:
    """Gram matrix of the grade-k Grassmann blades: the matrix of k-by-k
    minors of g^{ij}, rows/columns ordered by blade mask."""
    if not 0 <= k <= m.dim:
        raise ArgumentError(f"grade {k} out of range 0..{m.dim}")
    masks = [mask for mask in range(1 << m.dim) if blades.popcount(mask) == k]
    size = len(masks)
    out = np.zeros((size, size))
    for a, ma in enumerate(masks):
        rows = [i - 1 for i in blades.blade_indices(ma)]
        for b, mb in enumerate(masks):
            cols = [j - 1 for j in blades.blade_indices(mb)]
            if k == 0:
                out[a, b] = 1.0
            else:
                out[a, b] = np.linalg.det(m.g_upper[np.ix_(rows, cols)])
    return out


def grade_masks(dim: int, k: int):
    return [mask for mask in range(1 << dim) if blades.popcount(mask) == k]


def volume_form(m: Metric) -> Multivector:
    return build_product_table(m).volume() * 1.0


def hodge_star(u: Multivector, m: Metric) -> Multivector:
    """Hodge dual via the algebraic form: (reversion of U) * volume form."""
    table = build_product_table(m)
    return table.mul(reversion(u), table.volume())


def hodge_star_components(u: Multivector, m: Metric) -> Multivector:
    """Hodge dual via the component formula: raise the indices with k-by-k
    minors, then pair each blade with the sign of its complement permutation."""
    n = m.dim
    full = (1 << n) - 1
    out = Multivector(n)
    sqrtg = np.sqrt(m.abs_det)
    for k in range(n + 1):
        masks = grade_masks(n, k)
        block = exterior_metric_block(m, k)
        comp = np.array([u.coeffs[mask] for mask in masks])
        raised = block @ comp
        for idx, mask in enumerate(masks):
            cmask = full ^ mask
            eps = blades.wedge_sign(mask, cmask)
            out.coeffs[cmask] += sqrtg * eps * raised[idx]
    return out


def star_inverse(u: Multivector, m: Metric) -> Multivector:
    """Inverse Hodge dual, gradewise closed form from star(star U)."""
    n = m.dim
    out = Multivector(n)
    for k in u.grades():
        sign = m.sign * (-1 if (k * (n + 1)) % 2 == 1 else 1)
        out = out + sign * hodge_star(grade_project(u, k), m)
    return out


def commutator_2forms(u: Multivector, v: Multivector,
                      table: ProductTable) -> Multivector:
    for name, w in (("first", u), ("second", v)):
        gs = w.grades()
        if gs not in ([], [2]):
            raise ArgumentError(f"{name} operand is not a pure 2-form "
                                f"(grades {gs})")
    return table.mul(u, v) - table.mul(v, u)


def exp_mv(u: Multivector, table: ProductTable, rtol: float = 1e-16,
           max_terms: int = 200) -> Multivector:
    """Clifford exponential as a truncated power series."""
    acc = Multivector.unit(u.dim)
    term = Multivector.unit(u.dim)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, max_terms + 1):
            term = table.mul(term, u) * (1.0 / k)
            acc = acc + term
            if term.norm() < rtol * max(acc.norm(), 1.0):
                return acc
            if not np.isfinite(term.norm()):
                break
    raise NumericError(f"exponential series did not converge in "
                       f"{max_terms} terms (last term norm {term.norm():.3e})")


# ---------------------------------------------------------------------------
# Basis conversion (Grassmann <-> Clifford coefficient conventions).

GRASSMANN = "grassmann"
CLIFFORD = "clifford"


def basis_convert(u: Multivector, frm: str, to: str, m: Metric) -> Multivector:
    for conv in (frm, to):
        if conv not in (GRASSMANN, CLIFFORD):
            raise ArgumentError(f"unknown basis convention {conv!r}")
    if frm == to:
        return u * 1.0
    table = build_product_table(m)
    out = Multivector(u.dim)
    if frm == CLIFFORD:
        # coefficients on Clifford monomials -> coefficients on Grassmann blades
        out.coeffs = table.clifford_to_grassmann_matrix() @ u.coeffs
    else:
        out.coeffs = table.grassmann_to_clifford_matrix() @ u.coeffs
    return out


# ---------------------------------------------------------------------------
# Clifford product through wedge/star/com tables (dimensions 2..4).

def clifford_via_star(u: Multivector, v: Multivector, m: Metric) -> Multivector:
    n = m.dim
    if n > 4 or n < 2:
        raise ArgumentError(f"wedge/star product tables cover dimensions 2..4, "
                            f"got {n}")
    r, s = u.grade(), v.grade()
    table = build_product_table(m)
    sgn = m.sign

    def star(w):
        return hodge_star(w, m)

    if r == 0 or s == 0:
        return wedge(u, v)
    key = (n, r, s)
    if n == 2:
        if key == (2, 1, 1):
            return wedge(u, v) + sgn * star(wedge(u, star(v)))
        if key == (2, 1, 2):
            return sgn * wedge(star(u), star(v))
        if key == (2, 2, 1):
            return -sgn * wedge(star(u), star(v))
        if key == (2, 2, 2):
            return -sgn * wedge(star(u), star(v))
    if n == 3:
        if key == (3, 1, 1):
            return wedge(u, v) + sgn * star(wedge(u, star(v)))
        if key == (3, 1, 2):
            return wedge(u, v) - sgn * star(wedge(u, star(v)))
        if key == (3, 1, 3):
            return sgn * wedge(star(u), star(v))
        if key == (3, 2, 1):
            return wedge(u, v) - sgn * star(wedge(star(u), v))
        if key == (3, 2, 2):
            return -sgn * wedge(star(u), star(v)) - sgn * star(wedge(u, star(v)))
        if key == (3, 2, 3):
            return -sgn * wedge(star(u), star(v))
        if key == (3, 3, 1):
            return sgn * wedge(star(u), star(v))
        if key == (3, 3, 2):
            return -sgn * wedge(star(u), star(v))
        if key == (3, 3, 3):
            return -sgn * wedge(star(u), star(v))
    if n == 4:
        if key == (4, 1, 1):
            return wedge(u, v) + sgn * star(wedge(u, star(v)))
        if key == (4, 1, 2):
            return wedge(u, v) + sgn * star(wedge(u, star(v)))
        if key == (4, 1, 3):
            return wedge(u, v) + sgn * star(wedge(u, star(v)))
        if key == (4, 1, 4):
            return sgn * wedge(star(u), star(v))
        if key == (4, 2, 1):
            return wedge(u, v) - sgn * star(wedge(star(u), v))
        if key == (4, 2, 2):
            return (wedge(u, v) - sgn * star(wedge(u, star(v)))
                    + 0.5 * commutator_2forms(u, v, table))
        if key == (4, 2, 3):
            return -sgn * wedge(star(u), star(v)) + sgn * star(wedge(u, star(v)))
        if key == (4, 2, 4):
            return -sgn * wedge(star(u), star(v))
        if key == (4, 3, 1):
            return wedge(u, v) - sgn * star(wedge(star(u), v))
        if key == (4, 3, 2):
            return sgn * wedge(star(u), star(v)) + sgn * star(wedge(star(u), v))
        if key == (4, 3, 3):
            return -sgn * wedge(star(u), star(v)) - sgn * star(wedge(u, star(v)))
        if key == (4, 3, 4):
            return -sgn * wedge(star(u), star(v))
        if key == (4, 4, 1):
            return -sgn * wedge(star(u), star(v))
        if key == (4, 4, 2):
            return -sgn * wedge(star(u), star(v))
        if key == (4, 4, 3):
            return sgn * wedge(star(u), star(v))
        if key == (4, 4, 4):
            return sgn * wedge(star(u), star(v))
    raise ArgumentError(f"no table entry for grades {(r, s)} in dimension {n}")


# ---------------------------------------------------------------------------
# Text and JSON forms.

def blade_text(mask: int, basis: str = GRASSMANN) -> str:
    idx = blades.blade_indices(mask)
    if not idx:
        return "e"
    if basis == CLIFFORD:
        return "e^{" + ",".join(str(i) for i in idx) + "}"
    return "^".join(f"e^{i}" for i in idx)


def parse_blade_text(text: str) -> int:
    text = text.strip()
    if text == "e":
        return 0
    if text.startswith("e^{") and text.endswith("}"):
        idx = [int(t) for t in text[3:-1].split(",")]
        return blades.mask_of(idx)
    parts = text.split("^")
    # "e^1^e^3" tokenizes as ["e", "1", "e", "3"]
    if len(parts) % 2 == 0 and all(parts[i] == "e" for i in range(0, len(parts), 2)):
        idx = [int(parts[i]) for i in range(1, len(parts), 2)]
        return blades.mask_of(idx)
    raise ArgumentError(f"cannot parse blade text {text!r}")


def mv_to_json(u: Multivector, basis: str = GRASSMANN, m: Metric = None) -> str:
    if basis == CLIFFORD:
        if m is None:
            raise ArgumentError("Clifford-basis export needs the metric")
        u = basis_convert(u, GRASSMANN, CLIFFORD, m)
    terms = []
    for mask in np.nonzero(u.coeffs)[0]:
        c = u.coeffs[mask]
        terms.append({"indices": blades.blade_indices(int(mask)),
                      "re": c.real, "im": c.imag})
    return json.dumps({"basis": basis, "terms": terms})


def mv_from_json(text: str, dim: int, m: Metric = None) -> Multivector:
    data = json.loads(text)
    basis = data.get("basis", GRASSMANN)
    u = Multivector(dim)
    for term in data["terms"]:
        mask = blades.mask_of(term["indices"])
        u.coeffs[mask] += complex(term.get("re", 0.0), term.get("im", 0.0))
    if basis == CLIFFORD:
        if m is None:
            raise ArgumentError("Clifford-basis import needs the metric")
        u = basis_convert(u, CLIFFORD, GRASSMANN, m)
    return u
