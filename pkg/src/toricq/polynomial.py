"""Sparse multivariate polynomials with rational coefficients.

These represent the smooth perturbation ``phi`` and the strictly convex
deformation direction ``psi`` of a toric model. Exact evaluation is available
at rational points; float evaluation, gradients and Hessians are vectorized
over point batches of shape ``(N, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._exact import format_rational, parse_rational
from .errors import MalformedInput


@dataclass(frozen=True)
class Polynomial:
    n: int
    terms: tuple[tuple[tuple[int, ...], Fraction], ...] = ()

    def __post_init__(self):
        merged: dict[tuple[int, ...], Fraction] = {}
        for exp, coef in self.terms:
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.n or any(e < 0 for e in exp):
                raise MalformedInput(f"bad exponent {exp} for a polynomial in {self.n} variables")
            merged[exp] = merged.get(exp, Fraction(0)) + Fraction(coef)
        canon = tuple(sorted((e, c) for e, c in merged.items() if c != 0))
        object.__setattr__(self, "terms", canon)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n)

    @classmethod
    def constant(cls, n: int, c) -> "Polynomial":
        return cls(n, (((0,) * n, Fraction(c)),))

    @classmethod
    def from_mapping(cls, n: int, mapping: Mapping[Sequence[int], object]) -> "Polynomial":
        return cls(n, tuple((tuple(e), parse_rational(c)) for e, c in mapping.items()))

    @classmethod
    def half_square_distance(cls, center: Sequence) -> "Polynomial":
        """``0.5 * |x - center|^2``, the default deformation direction."""
        n = len(center)
        terms = []
        for i, c in enumerate(center):
            c = Fraction(c)
            e2 = [0] * n
            e2[i] = 2
            e1 = [0] * n
            e1[i] = 1
            terms.append((tuple(e2), Fraction(1, 2)))
            terms.append((tuple(e1), -c))
            terms.append(((0,) * n, c * c / 2))
        return cls(n, tuple(terms))

    @classmethod
    def from_json(cls, n: int, data) -> "Polynomial":
        if data is None:
            return cls.zero(n)
        try:
            raw = data["terms"]
            terms = tuple((tuple(int(e) for e in t["exp"]), parse_rational(t["coef"])) for t in raw)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise MalformedInput(f"malformed polynomial: {exc}") from exc
        return cls(n, terms)

    def to_json(self) -> dict:
        return {"terms": [{"exp": list(e), "coef": format_rational(c)} for e, c in self.terms]}

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return Polynomial(self.n, self.terms + other.terms)

    def scaled(self, c) -> "Polynomial":
        c = Fraction(c)
        return Polynomial(self.n, tuple((e, c * a) for e, a in self.terms))

    def shifted(self, c) -> "Polynomial":
        """Add the constant ``c``."""
        return self + Polynomial.constant(self.n, c)

    def substitute_affine(self, matrix, offset) -> "Polynomial":
        """Return ``x -> p(matrix @ x + offset)`` for integer/rational data."""
        n = self.n
        result: dict[tuple[int, ...], Fraction] = {}
        # each variable becomes an affine form: list of (exp, coef)
        forms = []
        for i in range(n):
            form = {(0,) * n: Fraction(offset[i])}
            for j in range(n):
                if matrix[i][j]:
                    e = [0] * n
                    e[j] = 1
                    form[tuple(e)] = Fraction(matrix[i][j])
            forms.append(form)
        for exp, coef in self.terms:
            acc = {(0,) * n: coef}
            for i, k in enumerate(exp):
                for _ in range(k):
                    acc = _mul(acc, forms[i])
            for e, c in acc.items():
                result[e] = result.get(e, Fraction(0)) + c
        return Polynomial(n, tuple(result.items()))

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    # -- evaluation -----------------------------------------------------------

    def exact(self, point: Iterable) -> Fraction:
        point = [Fraction(p) for p in point]
        total = Fraction(0)
        for exp, coef in self.terms:
            term = coef
            for xi, e in zip(point, exp):
                if e:
                    term *= xi**e
            total += term
        return total

    def _arrays(self):
        cached = self.__dict__.get("_cache")
        if cached is None:
            exps = np.array([e for e, _ in self.terms], dtype=np.int64).reshape(-1, self.n)
            coefs = np.array([float(c) for _, c in self.terms], dtype=float)
            cached = (exps, coefs)
            object.__setattr__(self, "_cache", cached)
        return cached

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        exps, coefs = self._arrays()
        out = np.zeros(X.shape[0])
        for e, c in zip(exps, coefs):
            out = out + c * np.prod(X**e, axis=1)
        return out

    def gradient(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        exps, coefs = self._arrays()
        out = np.zeros(X.shape)
        for e, c in zip(exps, coefs):
            for k in range(self.n):
                if e[k] == 0:
                    continue
                d = e.copy()
                d[k] -= 1
                out[:, k] += c * e[k] * np.prod(X**d, axis=1)
        return out

    def hessian(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        exps, coefs = self._arrays()
        n = self.n
        out = np.zeros((X.shape[0], n, n))
        for e, c in zip(exps, coefs):
            for k in range(n):
                for l in range(k, n):
                    d = e.copy()
                    if k == l:
                        if e[k] < 2:
                            continue
                        factor = e[k] * (e[k] - 1)
                        d[k] -= 2
                    else:
                        if e[k] == 0 or e[l] == 0:
                            continue
                        factor = e[k] * e[l]
                        d[k] -= 1
                        d[l] -= 1
                    val = c * factor * np.prod(X**d, axis=1)
                    out[:, k, l] += val
                    if k != l:
                        out[:, l, k] += val
        return out


def _mul(a, b):
    out: dict[tuple[int, ...], Fraction] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return out


def monomial(exp: Sequence[int], coef=1) -> Polynomial:
    return Polynomial(len(exp), ((tuple(exp), Fraction(coef)),))
