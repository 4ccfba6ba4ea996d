"""Moment polytope, corrected polytope and vertex charts.

A model is given by primitive inward normals ``nu_j`` and integral corrected
offsets ``lambda_j^L``. The moment polytope uses the half-shifted offsets
``lambda_j = lambda_j^L + 1/2``::

    P_X = {x : <nu_j, x> + lambda_j   >= 0}
    P_L = {x : <nu_j, x> + lambda_j^L >= 0}

All combinatorics is exact (``fractions.Fraction``); the float views exposed
for the numerical layer are derived once at build time.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _exact
from .errors import (
    EmptyPolytope,
    MalformedInput,
    NonConvexPotential,
    NonDelzant,
    NotAVertex,
)
from .polynomial import Polynomial

HALF = Fraction(1, 2)

PX = "P_X"
PL = "P_L"

# status of the corrected polytope
FULL = "full"
LOWER = "lower-dimensional"
EMPTY = "empty"


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    lambda_L: int

    @property
    def lam(self) -> Fraction:
        return self.lambda_L + HALF


@dataclass(frozen=True)
class VertexChart:
    vertex: tuple[Fraction, ...]
    facet_indices: tuple[int, ...]
    A_v: tuple[tuple[int, ...], ...]
    lambda_v: tuple[Fraction, ...]
    lambda_v_L: tuple[int, ...]

    @property
    def det(self) -> int:
        return int(_exact.det(self.A_v))

    def coordinates(self, x) -> list[Fraction]:
        """Vertex-chart coordinates ``A_v x + lambda_v``."""
        return [a + b for a, b in zip(_exact.matvec(self.A_v, x), self.lambda_v)]


def enumerate_vertices(normals, offsets):
    """Vertices of ``{x : normals @ x + offsets >= 0}`` by n-subset solving.

    Returns a lexicographically sorted list of Fraction tuples.
    """
    normals = [list(map(Fraction, v)) for v in normals]
    offsets = [Fraction(b) for b in offsets]
    if not normals:
        return []
    n = len(normals[0])
    found = set()
    for subset in itertools.combinations(range(len(normals)), n):
        rows = [normals[i] for i in subset]
        sol = _exact.solve(rows, [-offsets[i] for i in subset])
        if sol is None:
            continue
        if all(_exact.dot(nu, sol) + b >= 0 for nu, b in zip(normals, offsets)):
            found.add(tuple(sol))
    return sorted(found)


def active_facets(normals, offsets, point):
    return tuple(
        j for j, (nu, b) in enumerate(zip(normals, offsets)) if _exact.dot(nu, point) + b == 0
    )


def fan_triangulation(normals, offsets, vertices=None):
    """Pulling triangulation from the lexicographically first vertex.

    Works for any bounded full-dimensional H-polytope (simple or not): each
    face is represented by its vertex set, and its own facets are the maximal
    intersections with the defining inequalities.
    """
    normals = [list(map(Fraction, v)) for v in normals]
    offsets = [Fraction(b) for b in offsets]
    if vertices is None:
        vertices = enumerate_vertices(normals, offsets)
    vertices = sorted(vertices)
    incidence = [frozenset(active_facets(normals, offsets, v)) for v in vertices]
    facet_sets = []
    for j in range(len(normals)):
        vs = frozenset(i for i, inc in enumerate(incidence) if j in inc)
        if vs and vs not in facet_sets:
            facet_sets.append(vs)

    def dim(idx):
        return _exact.affine_dimension([vertices[i] for i in idx])

    def recurse(face, d):
        if d == 0:
            return [(min(face),)]
        apex = min(face)
        out = []
        seen = set()
        for fs in facet_sets:
            sub = face & fs
            if apex in sub or sub in seen or len(sub) < d:
                continue
            if dim(sub) != d - 1:
                continue
            # keep only maximal proper faces
            seen.add(sub)
            for simplex in recurse(sub, d - 1):
                out.append((apex,) + simplex)
        return out

    full = frozenset(range(len(vertices)))
    d = dim(full)
    simplices = recurse(full, d)
    return [tuple(vertices[i] for i in s) for s in sorted(simplices)]


def simplex_volume(simplex) -> Fraction:
    v0 = simplex[0]
    rows = [[a - b for a, b in zip(v, v0)] for v in simplex[1:]]
    return abs(_exact.det(rows)) / math.factorial(len(rows))


@dataclass(frozen=True)
class ToricModel:
    """Validated Delzant data plus the symplectic-potential ingredients.

    Build instances with :func:`build_model`; the constructor does not
    validate.
    """

    n: int
    facets: tuple[Facet, ...]
    phi: Polynomial
    psi: Polynomial
    basepoint: tuple[Fraction, ...]
    px_vertices: tuple[tuple[Fraction, ...], ...] = ()
    pl_vertices: tuple[tuple[Fraction, ...], ...] = ()
    pl_status: str = FULL
    name: str = ""
    charts: dict = field(default_factory=dict, compare=False, repr=False)

    # -- float views --------------------------------------------------------

    @property
    def r(self) -> int:
        return len(self.facets)

    @property
    def normals(self) -> np.ndarray:
        return np.array([f.normal for f in self.facets], dtype=float)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([float(f.lam) for f in self.facets])

    @property
    def lambdas_L(self) -> np.ndarray:
        return np.array([float(f.lambda_L) for f in self.facets])

    def ell(self, X) -> np.ndarray:
        """``ell_j(x)`` for a batch of points, shape ``(N, r)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.normals.T + self.lambdas

    # -- exact combinatorics ---------------------------------------------------

    def _offsets(self, selector):
        if selector == PX:
            return [f.lam for f in self.facets]
        if selector == PL:
            return [Fraction(f.lambda_L) for f in self.facets]
        raise ValueError(f"unknown polytope selector {selector!r}")

    def vertices(self, selector: str = PX) -> list[tuple[Fraction, ...]]:
        if selector == PX:
            return list(self.px_vertices)
        if selector == PL:
            if self.pl_status == EMPTY:
                raise EmptyPolytope("the corrected polytope is empty")
            return list(self.pl_vertices)
        raise ValueError(f"unknown polytope selector {selector!r}")

    def ell_values(self, x) -> list[tuple]:
        """Pairs ``(ell_j(x), ell_j^L(x))``; exact for rational input."""
        if all(isinstance(c, (int, Fraction)) for c in x):
            x = [Fraction(c) for c in x]
            return [
                (_exact.dot(f.normal, x) + f.lam, _exact.dot(f.normal, x) + f.lambda_L)
                for f in self.facets
            ]
        x = np.asarray(x, dtype=float)
        return [
            (float(np.dot(f.normal, x) + float(f.lam)), float(np.dot(f.normal, x) + f.lambda_L))
            for f in self.facets
        ]

    def contains(self, x, selector: str = PX, strict: bool = False) -> bool:
        vals = [pair[0] if selector == PX else pair[1] for pair in self.ell_values(x)]
        return all(v > 0 for v in vals) if strict else all(v >= 0 for v in vals)

    def integer_points(self, selector: str = PX, strict: bool = False) -> list[tuple[int, ...]]:
        """Integer points of the closed (or open) polytope by box scan."""
        try:
            verts = self.vertices(selector)
        except EmptyPolytope:
            return []
        lo = [math.floor(min(v[i] for v in verts)) for i in range(self.n)]
        hi = [math.ceil(max(v[i] for v in verts)) for i in range(self.n)]
        offsets = self._offsets(selector)
        out = []
        for m in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
            vals = [sum(a * b for a, b in zip(f.normal, m)) + off for f, off in zip(self.facets, offsets)]
            if all(v > 0 for v in vals) if strict else all(v >= 0 for v in vals):
                out.append(tuple(m))
        return sorted(out)

    def lattice_points(self) -> list[tuple[int, ...]]:
        """The quantum basis labels: integer points of ``P_L``."""
        return self.integer_points(PL)

    @property
    def quantum_dimension(self) -> int:
        return len(self.lattice_points())

    def vertex_chart(self, v) -> VertexChart:
        key = tuple(Fraction(c) for c in v)
        chart = self.charts.get(key)
        if chart is None:
            raise NotAVertex(f"{[str(c) for c in key]} is not a vertex of P_X")
        return chart

    def bounding_box(self, selector: str = PX):
        verts = self.vertices(selector)
        lo = tuple(min(v[i] for v in verts) for i in range(self.n))
        hi = tuple(max(v[i] for v in verts) for i in range(self.n))
        return lo, hi

    @property
    def barycenter(self) -> tuple[Fraction, ...]:
        k = len(self.px_vertices)
        return tuple(sum(v[i] for v in self.px_vertices) / k for i in range(self.n))

    def facet_vertices(self, j: int) -> list[tuple[Fraction, ...]]:
        return [v for v in self.px_vertices if j in self.vertex_chart(v).facet_indices]

    def triangulate(self):
        """Fan triangulation of ``P_X`` (list of vertex tuples)."""
        return fan_triangulation(
            [f.normal for f in self.facets], self._offsets(PX), list(self.px_vertices)
        )

    def volume(self) -> Fraction:
        return sum((simplex_volume(s) for s in self.triangulate()), Fraction(0))

    def with_psi(self, psi: Polynomial) -> "ToricModel":
        return _replace(self, psi=psi)

    def with_phi(self, phi: Polynomial) -> "ToricModel":
        return _replace(self, phi=phi)


def _replace(model, **changes):
    from dataclasses import replace

    return replace(model, **changes)


def _primitive(v) -> bool:
    return reduce(math.gcd, (abs(int(a)) for a in v), 0) == 1


def _check_bounded(normals) -> bool:
    """True when the recession cone ``{d : normals @ d >= 0}`` is trivial."""
    from scipy.optimize import linprog

    N = np.asarray(normals, dtype=float)
    n = N.shape[1]
    for i in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = -sign
            res = linprog(c, A_ub=-N, b_ub=np.zeros(len(N)), bounds=[(-1, 1)] * n, method="highs")
            if res.status == 0 and -res.fun > 1e-9:
                return False
    return True


def _convexity_samples(model_n, px_vertices, density):
    lo = [float(min(v[i] for v in px_vertices)) for i in range(model_n)]
    hi = [float(max(v[i] for v in px_vertices)) for i in range(model_n)]
    axes = [np.linspace(a, b, density) for a, b in zip(lo, hi)]
    grid = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, model_n)
    return grid


def _is_pd(H) -> np.ndarray:
    ok = np.empty(len(H), dtype=bool)
    for i, h in enumerate(H):
        try:
            np.linalg.cholesky(h)
            ok[i] = True
        except np.linalg.LinAlgError:
            ok[i] = False
    return ok


def build_model(
    facet_data,
    phi: Polynomial | None = None,
    psi: Polynomial | None = None,
    basepoint: Sequence | None = None,
    *,
    grid_density: int = 9,
    name: str = "",
) -> ToricModel:
    """Validate Delzant data and assemble a :class:`ToricModel`.

    ``facet_data`` is a sequence of ``(normal, lambda_L)`` pairs or
    :class:`Facet` objects. ``psi`` defaults to ``0.5 * |x - p|^2`` with ``p``
    the basepoint, which in turn defaults to the barycenter of the vertices of
    ``P_X``.
    """
    facets = []
    try:
        for item in facet_data:
            if isinstance(item, Facet):
                normal, lam_L = item.normal, item.lambda_L
            else:
                normal, lam_L = item
            if isinstance(lam_L, bool) or Fraction(lam_L).denominator != 1:
                raise MalformedInput(f"lambda_L must be an integer, got {lam_L!r}")
            if any(isinstance(a, bool) or Fraction(a).denominator != 1 for a in normal):
                raise MalformedInput(f"normal {normal!r} is not integral")
            facets.append(Facet(tuple(int(a) for a in normal), int(lam_L)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MalformedInput):
            raise
        raise MalformedInput(f"malformed facet data: {exc}") from exc
    if not facets:
        raise MalformedInput("no facets given")
    n = len(facets[0].normal)
    if n == 0 or any(len(f.normal) != n for f in facets):
        raise MalformedInput("facet normals must share a positive dimension")
    for f in facets:
        if not _primitive(f.normal):
            raise MalformedInput(f"normal {f.normal} is not primitive")
    if len(set(f.normal for f in facets)) != len(facets):
        raise MalformedInput("repeated facet normal")

    normals = [f.normal for f in facets]
    offsets_x = [f.lam for f in facets]
    if not _check_bounded(normals):
        raise NonDelzant("P_X is unbounded")
    px_vertices = enumerate_vertices(normals, offsets_x)
    if _exact.affine_dimension(px_vertices) != n:
        raise MalformedInput("P_X is empty or not full-dimensional")

    charts = {}
    for v in px_vertices:
        act = active_facets(normals, offsets_x, v)
        if len(act) != n:
            raise NonDelzant(f"{len(act)} facets meet at vertex {[str(c) for c in v]}")
        A = tuple(normals[j] for j in act)
        d = _exact.det(A)
        if abs(d) != 1:
            raise NonDelzant(f"|det A_v| = {abs(d)} at vertex {[str(c) for c in v]}")
        charts[v] = VertexChart(
            vertex=v,
            facet_indices=act,
            A_v=A,
            lambda_v=tuple(facets[j].lam for j in act),
            lambda_v_L=tuple(facets[j].lambda_L for j in act),
        )
    for j in range(len(facets)):
        on_facet = [v for v in px_vertices if j in charts[v].facet_indices]
        if _exact.affine_dimension(on_facet) != n - 1:
            raise MalformedInput(f"inequality {j} does not define a facet of P_X")

    offsets_L = [Fraction(f.lambda_L) for f in facets]
    pl_vertices = enumerate_vertices(normals, offsets_L)
    pl_dim = _exact.affine_dimension(pl_vertices)
    if pl_dim < 0:
        status = EMPTY
    elif pl_dim < n:
        status = LOWER
    else:
        status = FULL
        cones_x = {frozenset(c.facet_indices) for c in charts.values()}
        cones_l = {frozenset(active_facets(normals, offsets_L, v)) for v in pl_vertices}
        if cones_x != cones_l:
            raise MalformedInput("P_L is full-dimensional but has a different normal fan from P_X")

    if basepoint is None:
        k = len(px_vertices)
        basepoint = tuple(sum(v[i] for v in px_vertices) / k for i in range(n))
    else:
        try:
            basepoint = tuple(_exact.parse_rational(c) for c in basepoint)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise MalformedInput(f"bad basepoint: {exc}") from exc
        if len(basepoint) != n:
            raise MalformedInput("basepoint has the wrong dimension")
        if not all(_exact.dot(f.normal, basepoint) + f.lam > 0 for f in facets):
            raise MalformedInput("basepoint is not interior to P_X")
    if phi is None:
        phi = Polynomial.zero(n)
    if psi is None:
        psi = Polynomial.half_square_distance(basepoint)
    if phi.n != n or psi.n != n:
        raise MalformedInput("potential terms have the wrong number of variables")

    model = ToricModel(
        n=n,
        facets=tuple(facets),
        phi=phi,
        psi=psi,
        basepoint=basepoint,
        px_vertices=tuple(px_vertices),
        pl_vertices=tuple(pl_vertices),
        pl_status=status,
        name=name,
        charts=charts,
    )
    _validate_convexity(model, grid_density)
    return model


def _validate_convexity(model: ToricModel, density: int) -> None:
    grid = _convexity_samples(model.n, model.px_vertices, density)
    ell = model.ell(grid)
    inside = np.all(ell >= 0, axis=1)
    interior = np.all(ell > 0, axis=1)
    X = grid[interior]
    if len(X):
        L = ell[interior]
        N = model.normals
        H = 0.5 * np.einsum("ij,ik,pi->pjk", N, N, 1.0 / L) + model.phi.hessian(X)
        bad = ~_is_pd(H)
        if bad.any():
            raise NonConvexPotential(f"Hess(g_P + phi) is not positive definite at {X[bad][0].tolist()}")
    verts = np.array([[float(c) for c in v] for v in model.px_vertices])
    Y = np.vstack([grid[inside], verts])
    bad = ~_is_pd(model.psi.hessian(Y))
    if bad.any():
        raise NonConvexPotential(f"Hess psi is not positive definite at {Y[bad][0].tolist()}")


# -- model files ----------------------------------------------------------------


def model_from_dict(data: dict, *, name: str = "", grid_density: int = 9) -> ToricModel:
    try:
        n = int(data["dimension"])
        facet_data = [(list(f["normal"]), f["lambda_L"]) for f in data["facets"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"malformed model file: {exc}") from exc
    phi = Polynomial.from_json(n, data.get("phi"))
    psi = Polynomial.from_json(n, data["psi"]) if data.get("psi") is not None else None
    model = build_model(
        facet_data,
        phi=phi,
        psi=psi,
        basepoint=data.get("basepoint"),
        grid_density=grid_density,
        name=name or data.get("name", ""),
    )
    if model.n != n:
        raise MalformedInput(f"declared dimension {n} but normals have length {model.n}")
    return model


def model_to_dict(model: ToricModel) -> dict:
    return {
        "name": model.name,
        "dimension": model.n,
        "facets": [{"normal": list(f.normal), "lambda_L": f.lambda_L} for f in model.facets],
        "phi": model.phi.to_json(),
        "psi": model.psi.to_json(),
        "basepoint": [_exact.format_rational(c) for c in model.basepoint],
    }


def load_model(path, **kwargs) -> ToricModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(data, name=data.get("name", path.stem), **kwargs)


FIXTURES = ("cp1", "cp2", "blowup", "cp1xcp1", "point")


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("toricq") / "data" / f"{name}.json"))


def load_fixture(name: str) -> ToricModel:
    """Load one of the shipped corpus models by short name."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    return load_model(fixture_path(name))
