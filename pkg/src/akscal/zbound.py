"""Cohomological scalar-curvature bounds from intersection-form data.

A model holds the integer intersection lattice (Q, c1) of a closed 4-manifold,
optionally extended to a product with a surface of fiber Chern number 2 - 2g
(complex dimension n = 3 instead of 2).  For a symplectic class the bound

    Z = 4 pi (c1 . [omega]^(n-1) / (n-1)!) / ([omega]^n / n!)^((n-1)/n)

is evaluated exactly from lattice pairings, maximized over a component of the
positive cone by projected gradient ascent (the bound is scale-invariant, so
one scale is pinned), and — for two special lattice shapes — certified by a
closed-form argument reducing to the scalar functions h_function_max and
y_ratio below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "IntersectionModel", "ZBoundResult", "ZBoundCertificate", "ConeError",
    "make_model", "parse_model", "serialize_model",
    "cp2_model", "reversed_cp2_model", "barlow_sigma_model", "r8_sigma_model",
    "top_power", "chern_pairing", "eval_z_bound", "optimize_z_bound",
    "h_function", "h_function_max", "y_ratio", "y_ratio_min",
    "certify_global", "ac_check", "ac_candidates",
]

CONE_EPS = 1e-9
UNBOUNDED_THRESHOLD = 1e6


class ConeError(ValueError):
    """Class is outside the positive cone the bound is defined on."""


@dataclass(frozen=True, eq=False)
class IntersectionModel:
    """Integer intersection data; fiber_chern is None for plain 4-manifolds."""

    name: str
    q: np.ndarray
    c1: np.ndarray
    n: int
    fiber_chern: Optional[int] = None
    chi: Optional[int] = None
    tau: Optional[int] = None
    seed: Optional[tuple] = None

    @property
    def rank(self) -> int:
        return self.q.shape[0]

    @property
    def class_dim(self) -> int:
        return self.rank + (1 if self.n == 3 else 0)


def make_model(name, q, c1, n=2, fiber_chern=None, chi=None, tau=None,
               seed=None) -> IntersectionModel:
    q = np.asarray(q, dtype=np.int64)
    c1 = np.asarray(c1, dtype=np.int64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError("Q must be a square matrix")
    if (q != q.T).any():
        raise ValueError("Q must be symmetric")
    if abs(round(float(np.linalg.det(q.astype(float))))) != 1:
        raise ValueError("Q must be unimodular")
    if c1.shape != (q.shape[0],):
        raise ValueError("c1 length must match the rank of Q")
    if n not in (2, 3):
        raise ValueError("complex dimension n must be 2 or 3")
    if (fiber_chern is None) == (n == 3):
        raise ValueError("fiber_chern is required exactly when n = 3")
    if seed is not None:
        seed = tuple(float(v) for v in seed)
        if len(seed) != q.shape[0] + (1 if n == 3 else 0):
            raise ValueError("seed length must match the class dimension")
    return IntersectionModel(str(name), q, c1, int(n),
                             None if fiber_chern is None else int(fiber_chern),
                             None if chi is None else int(chi),
                             None if tau is None else int(tau), seed)


# ---------------------------------------------------------------------------
# shipped lattices


def cp2_model() -> IntersectionModel:
    return make_model("cp2", [[1]], [3], n=2, chi=3, tau=1, seed=(1.0,))


def reversed_cp2_model() -> IntersectionModel:
    return make_model("cp2_reversed", [[-1]], [0], n=2, chi=3, tau=-1)


def _sigma_product(name: str, flip: bool) -> IntersectionModel:
    q = np.diag([1] + [-1] * 8)
    c1 = np.array([3] + [-1] * 8)
    beta = -c1 if not flip else c1.copy()
    return make_model(name, q, c1, n=3, fiber_chern=-2, chi=11, tau=-7,
                      seed=tuple(float(v) for v in beta) + (1.0,))


def barlow_sigma_model() -> IntersectionModel:
    """Genus-2 surface times the minimal general-type surface with K^2 = 1:
    the shipped seed sits in the cone component where the bound is finite."""
    return _sigma_product("barlow_sigma", flip=False)


def r8_sigma_model() -> IntersectionModel:
    """Same lattice as barlow_sigma (the two 4-manifolds are homeomorphic);
    the seed sits in the opposite cone component, where the bound blows up."""
    return _sigma_product("r8_sigma", flip=True)


# ---------------------------------------------------------------------------
# file format


def parse_model(text: str) -> IntersectionModel:
    """Parse the plain-text lattice format (see FORMATS.md)."""
    name, n, rank, fiber, chi, tau, seed = "model", 2, None, None, None, None, None
    q_rows, c1 = [], None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key, rest = tok[0], tok[1:]
        if key == "name":
            name = " ".join(rest)
        elif key == "n":
            n = int(rest[0])
        elif key == "rank":
            rank = int(rest[0])
        elif key == "Q":
            q_rows.append([int(v) for v in rest])
        elif key == "c1":
            c1 = [int(v) for v in rest]
        elif key == "fiber_chern":
            fiber = int(rest[0])
        elif key == "chi":
            chi = int(rest[0])
        elif key == "tau":
            tau = int(rest[0])
        elif key == "seed":
            seed = [float(v) for v in rest]
        else:
            raise ValueError(f"line {ln}: unknown key {key!r}")
    if rank is not None and len(q_rows) != rank:
        raise ValueError(f"expected {rank} Q rows, got {len(q_rows)}")
    if c1 is None:
        raise ValueError("missing c1 line")
    return make_model(name, q_rows, c1, n=n, fiber_chern=fiber, chi=chi,
                      tau=tau, seed=seed)


def serialize_model(m: IntersectionModel) -> str:
    out = [f"name {m.name}", f"n {m.n}", f"rank {m.rank}"]
    out += ["Q " + " ".join(str(v) for v in row) for row in m.q]
    out.append("c1 " + " ".join(str(v) for v in m.c1))
    if m.fiber_chern is not None:
        out.append(f"fiber_chern {m.fiber_chern}")
    if m.chi is not None:
        out.append(f"chi {m.chi}")
    if m.tau is not None:
        out.append(f"tau {m.tau}")
    if m.seed is not None:
        out.append("seed " + " ".join(f"{v:g}" for v in m.seed))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# pairings and the bound


def _split(m: IntersectionModel, cls):
    cls = np.asarray(cls, dtype=float)
    if cls.shape != (m.class_dim,):
        raise ValueError(f"class must have {m.class_dim} components, got {cls.shape}")
    if m.n == 3:
        return cls[:-1], float(cls[-1])
    return cls, None


def top_power(m: IntersectionModel, cls) -> float:
    """[omega]^n as a lattice number: beta.Q.beta, times 3l for a product."""
    beta, ell = _split(m, cls)
    a = float(beta @ m.q @ beta)
    return a if m.n == 2 else 3.0 * ell * a


def chern_pairing(m: IntersectionModel, cls) -> float:
    """c1(total) . [omega]^(n-1) from lattice pairings."""
    beta, ell = _split(m, cls)
    a = float(beta @ m.q @ beta)
    b = float(m.c1 @ m.q @ beta)
    if m.n == 2:
        return b
    return m.fiber_chern * a + 2.0 * ell * b


def _cone_scale(m: IntersectionModel, cls) -> float:
    # Matches the bi-homogeneity of the top power (degree 2 in beta, 1 in l),
    # so the degeneracy test is meaningful on very anisotropic classes.
    beta, ell = _split(m, cls)
    s = float(beta @ beta)
    return s if m.n == 2 else 3.0 * abs(ell) * s


def eval_z_bound(m: IntersectionModel, cls) -> float:
    """The scale-invariant bound at one symplectic class (top power must be > 0)."""
    cls = np.asarray(cls, dtype=float)
    t = top_power(m, cls)
    if t <= CONE_EPS * _cone_scale(m, cls):
        raise ConeError(f"class has non-positive top power {t:.3g}")
    if m.n == 3 and cls[-1] <= 0:
        raise ConeError("fiber coefficient must be positive")
    c = chern_pairing(m, cls)
    expo = (m.n - 1) / m.n
    return 4.0 * math.pi / math.factorial(m.n - 1) * c / (t / math.factorial(m.n)) ** expo


def _grad(m: IntersectionModel, cls):
    beta, ell = _split(m, cls)
    qb = m.q @ beta
    qc = m.q @ m.c1
    a = float(beta @ qb)
    b = float(m.c1 @ qb)
    fact = math.factorial(m.n)
    k4pi = 4.0 * math.pi / math.factorial(m.n - 1)
    if m.n == 2:
        t, c = a, b
        dt = 2.0 * qb
        dc = np.asarray(qc, dtype=float)
    else:
        t = 3.0 * ell * a
        c = m.fiber_chern * a + 2.0 * ell * b
        dt = np.concatenate([6.0 * ell * qb, [3.0 * a]])
        dc = np.concatenate([2.0 * m.fiber_chern * qb + 2.0 * ell * qc, [2.0 * b]])
    p = (m.n - 1) / m.n
    u = t / fact
    val = k4pi * c * u ** (-p)
    grad = k4pi * (dc * u ** (-p) - c * p * u ** (-p - 1) * dt / fact)
    return val, grad


def _normalize(m: IntersectionModel, cls):
    cls = np.asarray(cls, dtype=float).copy()
    if m.n == 3:
        return cls * (2.0 / cls[-1])
    a = top_power(m, cls)
    return cls / math.sqrt(a)


def _in_cone(m: IntersectionModel, cls) -> bool:
    if top_power(m, cls) <= CONE_EPS * _cone_scale(m, cls):
        return False
    return m.n == 2 or cls[-1] > 0


@dataclass(frozen=True)
class ZBoundResult:
    value: float
    argmax: Optional[np.ndarray]
    unbounded: bool
    iterations: int
    grad_norm: float
    certificate: "Optional[ZBoundCertificate]" = None


def optimize_z_bound(m: IntersectionModel, seed=None, max_iter: int = 5000,
                     grad_tol: float = 1e-8) -> ZBoundResult:
    """Maximize the bound over the cone component of the seed class.

    Backtracking gradient ascent with the scale pinned each step (fiber
    coefficient 2 for products, unit top power for 4-manifolds).  Values
    exceeding 1e6 — checked both on doubling rays upfront and during the
    ascent — report the supremum as +inf with no argmax.
    """
    if seed is None:
        seed = m.seed
    if seed is None:
        raise ValueError("no seed class: pass one or ship one with the model")
    x = np.asarray(seed, dtype=float)
    if not _in_cone(m, x):
        raise ConeError("seed class is outside the positive cone")
    if m.n == 3:
        ray = x.copy()
        for _ in range(60):
            ray[-1] *= 2.0
            if eval_z_bound(m, ray) > UNBOUNDED_THRESHOLD:
                return ZBoundResult(math.inf, None, True, 0, math.nan)
    x = _normalize(m, x)
    val, g = _grad(m, x)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        gn = float(np.linalg.norm(g))
        if gn <= grad_tol * (1.0 + abs(val)):
            break
        accepted = False
        t = step
        for _ in range(60):
            y = x + t * g
            if _in_cone(m, y):
                y = _normalize(m, y)
                v_new, g_new = _grad(m, y)
                if v_new >= val + 1e-4 * t * gn * gn:
                    # Barzilai-Borwein curvature estimate seeds the next trial
                    # step; plain steepest ascent zigzags on this quotient.
                    dx, dg = y - x, g_new - g
                    num, den = -float(dx @ dg), float(dg @ dg)
                    step = num / den if (den > 0 and num > 0) else min(t * 2.0, 1e3)
                    x, val, g = y, v_new, g_new
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            break
        if val > UNBOUNDED_THRESHOLD:
            return ZBoundResult(math.inf, None, True, it, float(np.linalg.norm(g)))
    return ZBoundResult(val, x, False, it, float(np.linalg.norm(g)))


# ---------------------------------------------------------------------------
# closed-form certificate pieces


def h_function(a: float, b: float, x) -> float:
    """h(x) = (2/3^(2/3)) (a/x^2 + x/b): the one-variable reduction of the
    bound along a fixed-direction slice after optimizing the fiber scale."""
    x = np.asarray(x, dtype=float)
    return 2.0 / 3.0 ** (2.0 / 3.0) * (a / x ** 2 + x / b)


def h_function_max(a: float, b: float):
    """Arg max and max of h_function on x > 0; needs a < 0 and b < 0.

    Setting h' = 0 gives x* = (2ab)^(1/3) and h(x*) = (6a/b^2)^(1/3); the
    second derivative 4a/x^4 (up to the positive prefactor) is negative, so
    the critical point is the global maximum on the ray.
    """
    if not (a < 0 and b < 0):
        raise ValueError("closed form requires a < 0 and b < 0")
    x_star = float(np.cbrt(2.0 * a * b))
    return x_star, float(np.cbrt(6.0 * a / b ** 2))


def y_ratio(y) -> float:
    """(3 - 2 sqrt(2) sqrt(y))^2 / (1 - y) on 0 <= y < 1: the squared pairing
    slack against the cone defect for the rank-(1,8) lattice."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(y >= 1):
        raise ValueError("y must lie in [0, 1)")
    val = (3.0 - 2.0 * math.sqrt(2.0) * np.sqrt(y)) ** 2 / (1.0 - y)
    return float(val) if val.ndim == 0 else val


def y_ratio_min():
    """Closed-form minimizer of y_ratio: (8/9, 1).

    The derivative vanishes where 3 sqrt(y) = 2 sqrt(2) y + ... reduces to
    sqrt(y) = 2 sqrt(2)/3; the other critical candidate y = 9/8 is outside
    the domain, and the boundary values (9 at 0, +inf at 1) are larger.
    """
    return 8.0 / 9.0, 1.0


@dataclass(frozen=True)
class ZBoundCertificate:
    pairing_a: float     # beta.Q.beta at the extremal class
    pairing_b: float     # c1.Q.beta at the extremal class
    h_a: float           # slice-reduction coefficients fed to h_function_max
    h_b: float
    h_bound: float       # max of the slice reduction = -6 (B^2/A)^(1/3) here
    y_star: float        # minimizer of the pairing-slack ratio
    ratio_min: float
    global_bound: float
    extremal_class: tuple


def certify_global(m: IntersectionModel) -> Optional[ZBoundCertificate]:
    """Closed-form global bound for the two shipped lattice shapes, else None.

    Product of a genus-2 surface with the (1, -1^8) lattice and c1 = (3, -1^8):
    optimizing the fiber scale reduces the bound on each beta-slice to
    h_function_max, giving -6 (B^2/A)^(1/3) per slice, and the Cauchy-Schwarz
    slack function y_ratio shows B^2/A >= 1 on the component with first
    coordinate negative — so the supremum 2 pi * (-6) is attained exactly at
    beta = -c1 with fiber coefficient 2.  Rank-one positive lattices in
    complex dimension 2 have a constant bound on the ray, reported directly.
    """
    if (m.n == 2 and m.rank == 1 and m.q[0][0] == 1):
        value = 4.0 * math.sqrt(2.0) * math.pi * float(m.c1[0])
        return ZBoundCertificate(1.0, float(m.c1[0]), math.nan, math.nan,
                                 math.nan, math.nan, math.nan, value, (1.0,))
    shape_ok = (m.n == 3 and m.rank == 9 and m.fiber_chern == -2
                and (m.q == np.diag([1] + [-1] * 8)).all()
                and (m.c1 == np.array([3] + [-1] * 8)).all())
    if not shape_ok:
        return None
    if m.seed is not None:
        base = np.asarray(m.seed[:m.rank], dtype=float)
        # seed on the positive-pairing component: sup is +inf, nothing to certify
        if float(m.c1 @ m.q @ base) >= 0:
            return None
    beta = -m.c1.astype(float)
    a = float(beta @ m.q @ beta)          # = c1.c1 = 1
    b = float(m.c1 @ m.q @ beta)          # = -1
    h_a = -3.0 ** (2.0 / 3.0) * a
    h_b = a / (2.0 * 3.0 ** (2.0 / 3.0) * b)
    _, h_max = h_function_max(h_a, h_b)
    y_star, ratio_min = y_ratio_min()
    global_bound = 2.0 * math.pi * h_max * ratio_min ** (1.0 / 3.0)
    cls = tuple(beta) + (2.0,)
    direct = eval_z_bound(m, np.asarray(cls))
    if abs(direct - global_bound) > 1e-9 * (1.0 + abs(global_bound)):
        raise AssertionError("certificate does not match direct evaluation")
    return ZBoundCertificate(a, b, h_a, h_b, h_max, y_star, ratio_min,
                             global_bound, cls)


# ---------------------------------------------------------------------------
# almost-complex existence arithmetic


def ac_check(m: IntersectionModel) -> bool:
    """c1.Q.c1 == 2 chi + 3 tau — the integer identity a tangent-space complex
    structure forces in complex dimension 2 (needs chi and tau on the model)."""
    if m.n != 2:
        raise ValueError("the c1^2 identity applies to 4-manifolds only")
    if m.chi is None or m.tau is None:
        raise ValueError("model lacks chi/tau")
    return int(m.c1 @ m.q @ m.c1) == 2 * m.chi + 3 * m.tau


def ac_candidates(q, chi: int, tau: int, bound: int):
    """All integer c1 with |entries| <= bound satisfying c1.Q.c1 = 2 chi + 3 tau.

    Brute force over the box; rank is capped to keep the loop honest."""
    q = np.asarray(q, dtype=np.int64)
    rank = q.shape[0]
    if rank > 3:
        raise ValueError("candidate search is limited to rank <= 3")
    target = 2 * chi + 3 * tau
    out = []
    rng = range(-bound, bound + 1)
    grids = np.meshgrid(*[list(rng)] * rank, indexing="ij")
    vecs = np.stack([g.ravel() for g in grids], axis=1)
    vals = np.einsum("ki,ij,kj->k", vecs, q, vecs)
    for v, val in zip(vecs, vals):
        if val == target:
            out.append(tuple(int(x) for x in v))
    return out
