"""Sparse multivariate polynomial arithmetic with exact unit-cube integrals.

Polynomials live on [0, 1]^K.  A monomial x^a integrates to
prod_k 1/(a_k + 1), so every moment used elsewhere in the package has a
closed form; numerical quadrature appears only in the test suite as an
independent oracle.  Coefficients are double precision; summations that
feed integrals go through ``math.fsum`` because high powers of a
polynomial produce term magnitudes spanning many orders of magnitude.

Variable indices are 1-based throughout the public API (``x1 .. xK``),
matching the labels used in serialized output.

All values are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]

__all__ = ["MultiPoly", "UniPoly", "Exponent"]


def _canonical_terms(num_vars: int, terms) -> dict[Exponent, float]:
    """Validate exponent tuples and drop exact-zero coefficients."""
    out: dict[Exponent, float] = {}
    items = terms.items() if isinstance(terms, Mapping) else terms
    for exp, coeff in items:
        exp = tuple(int(e) for e in exp)
        if len(exp) != num_vars:
            raise ValueError(
                f"exponent {exp} has length {len(exp)}, expected {num_vars}"
            )
        if any(e < 0 for e in exp):
            raise ValueError(f"negative exponent in {exp}")
        c = float(coeff)
        if c != 0.0:
            out[exp] = out.get(exp, 0.0) + c
    return {e: c for e, c in out.items() if c != 0.0}


class MultiPoly:
    """A real polynomial in ``num_vars`` variables, stored as a sparse
    map from exponent tuples to coefficients.

    The term map is canonical: no zero coefficients, every exponent
    tuple of length ``num_vars``.  Equality is canonical-term-map
    equality.  Instances are immutable; arithmetic returns new objects.
    """

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: Mapping[Exponent, float] | Iterable = ()):
        if num_vars < 1:
            raise ValueError("num_vars must be a positive integer")
        object.__setattr__(self, "num_vars", int(num_vars))
        object.__setattr__(self, "terms", _canonical_terms(num_vars, terms))

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, num_vars: int, value: float) -> "MultiPoly":
        return cls(num_vars, {(0,) * num_vars: float(value)})

    @classmethod
    def variable(cls, num_vars: int, k: int) -> "MultiPoly":
        """The polynomial x_k (1-based index)."""
        if not 1 <= k <= num_vars:
            raise IndexError(f"variable index {k} out of range 1..{num_vars}")
        exp = [0] * num_vars
        exp[k - 1] = 1
        return cls(num_vars, {tuple(exp): 1.0})

    # -- arithmetic ------------------------------------------------------

    def _check_same_vars(self, other: "MultiPoly") -> None:
        if self.num_vars != other.num_vars:
            raise ValueError(
                f"dimension mismatch: {self.num_vars} vs {other.num_vars} variables"
            )

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = MultiPoly.constant(self.num_vars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check_same_vars(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            out[exp] = out.get(exp, 0.0) + c
        return MultiPoly(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = MultiPoly.constant(self.num_vars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            c = float(other)
            return MultiPoly(self.num_vars, {e: c * v for e, v in self.terms.items()})
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check_same_vars(other)
        # Accumulate per-exponent product lists and fsum them so that the
        # stored coefficient is the correctly rounded sum of products.
        buckets: dict[Exponent, list[float]] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                exp = tuple(a + b for a, b in zip(ea, eb))
                buckets.setdefault(exp, []).append(ca * cb)
        return MultiPoly(self.num_vars, {e: math.fsum(v) for e, v in buckets.items()})

    __rmul__ = __mul__

    def __pow__(self, d: int) -> "MultiPoly":
        """Binary exponentiation; ``p ** 0`` is the constant 1."""
        if d < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.constant(self.num_vars, 1.0)
        base = self
        n = int(d)
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- queries ---------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and self.num_vars == other.num_vars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    @property
    def degree_per_var(self) -> tuple[int, ...]:
        """Maximum exponent of each variable (all zeros for constants)."""
        degs = [0] * self.num_vars
        for exp in self.terms:
            for i, e in enumerate(exp):
                if e > degs[i]:
                    degs[i] = e
        return tuple(degs)

    def sorted_terms(self) -> list[tuple[Exponent, float]]:
        """Terms in lexicographic exponent order (the canonical ordering
        for evaluation and serialization)."""
        return sorted(self.terms.items())

    # -- evaluation and integration ---------------------------------------

    def __call__(self, x: Sequence[float]) -> float:
        """Evaluate at a point, accumulating terms in lexicographic order."""
        if len(x) != self.num_vars:
            raise ValueError(
                f"dimension mismatch: point has {len(x)} coordinates, "
                f"polynomial has {self.num_vars} variables"
            )
        xs = [float(v) for v in x]
        total = 0.0
        for exp, coeff in self.sorted_terms():
            t = coeff
            for v, e in zip(xs, exp):
                if e:
                    t *= v**e
            total += t
        return total

    def eval_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate on the tensor grid spanned by 1-D coordinate arrays.

        Returns an array of shape ``(len(axes[0]), ..., len(axes[K-1]))``.
        Terms are accumulated in lexicographic order, so the result is
        deterministic.
        """
        if len(axes) != self.num_vars:
            raise ValueError("one coordinate axis required per variable")
        axes = [np.asarray(a, dtype=float) for a in axes]
        shape = tuple(a.size for a in axes)
        # Precompute the powers each axis actually needs.
        degs = self.degree_per_var
        powers = [
            np.vstack([a**e for e in range(degs[i] + 1)]) for i, a in enumerate(axes)
        ]
        out = np.zeros(shape)
        for exp, coeff in self.sorted_terms():
            term = np.full(shape, coeff)
            for i, e in enumerate(exp):
                if e:
                    idx = [None] * self.num_vars
                    idx[i] = slice(None)
                    term = term * powers[i][e][tuple(idx)]
            out += term
        return out

    def integral(self) -> float:
        """Exact integral over [0, 1]^K (compensated summation)."""
        parts = []
        for exp, coeff in self.sorted_terms():
            w = coeff
            for e in exp:
                w /= e + 1
            parts.append(w)
        return math.fsum(parts)

    def marginal(self, k: int) -> "UniPoly":
        """Integrate out every variable except x_k (1-based); returns the
        resulting univariate polynomial in x_k."""
        if not 1 <= k <= self.num_vars:
            raise IndexError(f"variable index {k} out of range 1..{self.num_vars}")
        i = k - 1
        buckets: dict[int, list[float]] = {}
        for exp, coeff in self.sorted_terms():
            w = coeff
            for j, e in enumerate(exp):
                if j != i:
                    w /= e + 1
            buckets.setdefault(exp[i], []).append(w)
        deg = max(buckets) if buckets else 0
        coeffs = [math.fsum(buckets.get(d, [0.0])) for d in range(deg + 1)]
        return UniPoly(coeffs)

    def marginal_onto(self, keep: Iterable[int]) -> "MultiPoly":
        """Integrate out all variables not in ``keep`` (1-based indices).

        The result is returned in the same K-variable space with zero
        exponents outside ``keep``.
        """
        keep_idx = {k - 1 for k in keep}
        if not all(0 <= i < self.num_vars for i in keep_idx):
            raise IndexError("variable index out of range")
        buckets: dict[Exponent, list[float]] = {}
        for exp, coeff in self.sorted_terms():
            w = coeff
            new_exp = list(exp)
            for j, e in enumerate(exp):
                if j not in keep_idx:
                    w /= e + 1
                    new_exp[j] = 0
            buckets.setdefault(tuple(new_exp), []).append(w)
        return MultiPoly(self.num_vars, {e: math.fsum(v) for e, v in buckets.items()})

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "terms": [
                {"exp": list(exp), "coeff": coeff}
                for exp, coeff in self.sorted_terms()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MultiPoly":
        try:
            num_vars = data["num_vars"]
            terms = [(tuple(t["exp"]), t["coeff"]) for t in data["terms"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial data: {exc}") from exc
        return cls(num_vars, terms)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "MultiPoly":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"MultiPoly(num_vars={self.num_vars}, n_terms={len(self.terms)})"


class UniPoly:
    """A univariate polynomial, coefficients indexed by degree.

    Trailing zero coefficients are trimmed so the leading stored
    coefficient is nonzero unless the polynomial is identically zero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[float] = ()):
        cs = [float(c) for c in coeffs]
        while cs and cs[-1] == 0.0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("UniPoly is immutable")

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __eq__(self, other):
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    def __call__(self, x):
        """Evaluate at a scalar or ndarray (Horner via numpy polyval)."""
        c = self.coeffs if self.coeffs else (0.0,)
        y = np.polynomial.polynomial.polyval(x, c)
        return float(y) if np.isscalar(x) or np.ndim(x) == 0 else y

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = UniPoly([other])
        if not isinstance(other, UniPoly):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0.0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0.0] * (n - len(other.coeffs))
        return UniPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = UniPoly([other])
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return UniPoly([float(other) * c for c in self.coeffs])
        if not isinstance(other, UniPoly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return UniPoly()
        out = [[] for _ in range(len(self.coeffs) + len(other.coeffs) - 1)]
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j].append(a * b)
        return UniPoly([math.fsum(v) for v in out])

    __rmul__ = __mul__

    def derivative(self) -> "UniPoly":
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def integral01(self) -> float:
        """Exact integral over [0, 1]."""
        return math.fsum(c / (i + 1) for i, c in enumerate(self.coeffs))

    def compose(self, inner: MultiPoly) -> MultiPoly:
        """The multivariate polynomial self(inner(x))."""
        result = MultiPoly.constant(inner.num_vars, self.coeffs[0] if self.coeffs else 0.0)
        power = MultiPoly.constant(inner.num_vars, 1.0)
        for c in self.coeffs[1:]:
            power = power * inner
            if c != 0.0:
                result = result + c * power
        return result

    def embed(self, num_vars: int, k: int) -> MultiPoly:
        """Lift to a K-variable polynomial in the variable x_k (1-based)."""
        if not 1 <= k <= num_vars:
            raise IndexError(f"variable index {k} out of range 1..{num_vars}")
        terms = {}
        for d, c in enumerate(self.coeffs):
            exp = [0] * num_vars
            exp[k - 1] = d
            terms[tuple(exp)] = c
        return MultiPoly(num_vars, terms)

    def __repr__(self):
        return f"UniPoly(degree={self.degree})"
