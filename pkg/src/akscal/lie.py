"""Left-invariant almost-Kähler structures on unimodular frame algebras.

A structure is given by the bracket constants of an orthonormal frame
([e_i, e_j] = sum_k c_ij^k e_k, metric = identity) together with an orthogonal
almost-complex structure J; the symplectic form is omega = J^T, and closedness
of omega is part of validation.  With rational inputs every curvature quantity
below is an exact Fraction.

Two cross-checking curvature routes are provided: a direct evaluation of
R(X,Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y] Z from the Koszul connection, and
the Cartan structure equations Omega^i_j = d omega^i_j + omega^i_k ^ omega^k_j
evaluated on the frame.  Likewise |nabla J|^2 has a loop route (differentiating
J e_j vector by vector) and a matrix route (commutators with the connection
one-form matrices).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact, tensor

__all__ = [
    "LieFrameSpec", "CurvatureTables", "BlairReport",
    "make_frame_spec", "parse_frame_spec", "serialize_frame_spec",
    "kt_spec", "abelian_spec",
    "koszul_gamma", "connection_forms", "curvature_direct", "curvature_cartan",
    "curvature_tables", "nabla_j", "nabla_j_forms", "nabla_j_norm_sq",
    "z_ratio", "blair_check",
]


@dataclass(frozen=True, eq=False)
class LieFrameSpec:
    """Bracket constants c[i][j][k] (= c_ij^k), frame matrix of J, and the
    circumferences of the lattice directions of the compact quotient."""

    name: str
    c: np.ndarray
    j: np.ndarray
    lattice_volumes: tuple

    @property
    def dim(self) -> int:
        return self.j.shape[0]

    @property
    def n(self) -> int:
        return self.dim // 2

    @property
    def omega(self) -> np.ndarray:
        return self.j.T.copy()

    @property
    def volume(self):
        return math.prod(self.lattice_volumes)


def _eye_like(a, n):
    return exact.eye(n) if exact.is_exact(a) else np.eye(n)


def _nonzero(a) -> bool:
    if exact.is_exact(a):
        return any(v != 0 for v in a.flat)
    return bool(np.max(np.abs(a)) > 1e-12)


def make_frame_spec(name, c, j, lattice_volumes) -> LieFrameSpec:
    """Validate and freeze a frame structure.

    Checks bracket antisymmetry, the Jacobi identity, unimodularity (needed
    for a lattice quotient to exist), J orthogonal with J^2 = -I, and
    d(J^T) = 0 so that omega is symplectic.
    """
    c = exact.as_exact(c) if exact.is_exact(np.asarray(c, dtype=object)) else c
    try:
        c = exact.as_exact(c)
        j = exact.as_exact(j)
    except TypeError:
        c = np.asarray(c, dtype=float)
        j = np.asarray(j, dtype=float)
    m = j.shape[0]
    if j.shape != (m, m) or c.shape != (m, m, m):
        raise ValueError(f"shape mismatch: J {j.shape}, c {c.shape}")
    if _nonzero(c + np.swapaxes(c, 0, 1)):
        raise ValueError("bracket constants are not antisymmetric in the lower pair")
    # Jacobi: sum over cyclic rotations of (a,b,k) of c_ab^m c_mk^l.
    jac = (np.einsum("abm,mkl->abkl", c, c)
           + np.einsum("bkm,mal->abkl", c, c)
           + np.einsum("kam,mbl->abkl", c, c))
    if _nonzero(jac):
        raise ValueError("bracket constants violate the Jacobi identity")
    tr_ad = np.einsum("ijj->i", c)
    if _nonzero(np.asarray(tr_ad)):
        raise ValueError("algebra is not unimodular (trace ad != 0)")
    ident = _eye_like(j, m)
    if _nonzero(j @ j + ident) or _nonzero(j.T @ j - ident):
        raise ValueError("J must be orthogonal with J^2 = -I")
    omega = j.T
    # d omega (e_a,e_b,e_k) for invariant omega reduces to bracket insertions.
    for a in range(m):
        for b in range(a + 1, m):
            for k in range(b + 1, m):
                val = (-sum(c[a][b][p] * omega[p][k] for p in range(m))
                       + sum(c[a][k][p] * omega[p][b] for p in range(m))
                       - sum(c[b][k][p] * omega[p][a] for p in range(m)))
                if val != 0 if exact.is_exact(j) else abs(val) > 1e-12:
                    raise ValueError(f"omega is not closed (d omega on frame {a+1},{b+1},{k+1})")
    vols = tuple(lattice_volumes)
    if len(vols) != m:
        raise ValueError(f"need {m} lattice circumferences, got {len(vols)}")
    if any((v <= 0) for v in vols):
        raise ValueError("lattice circumferences must be positive")
    return LieFrameSpec(str(name), c, j, vols)


def kt_spec(d=1) -> LieFrameSpec:
    """Nilmanifold structure with [e1, e2] = e3 and J: e1 -> -e4, e2 -> e3.

    The quotient is a 2-step nilmanifold times a circle of circumference d;
    the associated symplectic form pairs (e1, e4) and (e2, e3).
    """
    c = exact.zeros((4, 4, 4))
    c[0][1][2] = Fraction(1)
    c[1][0][2] = Fraction(-1)
    j = exact.as_exact([[0, 0, 0, 1],
                        [0, 0, -1, 0],
                        [0, 1, 0, 0],
                        [-1, 0, 0, 0]])
    dd = exact.frac(d) if isinstance(d, (int, Fraction, str)) else float(d)
    return make_frame_spec("kt", c, j, (Fraction(1), Fraction(1), Fraction(1), dd))


def abelian_spec(d=1) -> LieFrameSpec:
    """Flat torus with the same J and lattice data as kt_spec but zero bracket."""
    c = exact.zeros((4, 4, 4))
    j = kt_spec().j
    dd = exact.frac(d) if isinstance(d, (int, Fraction, str)) else float(d)
    return make_frame_spec("abelian4", c, j, (Fraction(1), Fraction(1), Fraction(1), dd))


# ---------------------------------------------------------------------------
# file format


def parse_frame_spec(text: str) -> LieFrameSpec:
    """Parse the plain-text frame format (see FORMATS.md).

    Lines: `name <str>`, `dim <int>`, `c i j k value` (1-based, i<j listed
    once), `J v1 ... vm` (one per frame row), `vol v1 ... vm`; `#` comments.
    """
    name, dim, vols = "frame", None, None
    c_entries, j_rows = [], []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key, rest = tok[0], tok[1:]
        if key == "name":
            name = " ".join(rest)
        elif key == "dim":
            dim = int(rest[0])
        elif key == "c":
            if len(rest) != 4:
                raise ValueError(f"line {ln}: c needs `i j k value`")
            c_entries.append((int(rest[0]), int(rest[1]), int(rest[2]), _num(rest[3])))
        elif key == "J":
            j_rows.append([_num(v) for v in rest])
        elif key == "vol":
            vols = [_num(v) for v in rest]
        else:
            raise ValueError(f"line {ln}: unknown key {key!r}")
    if dim is None:
        dim = len(j_rows)
    if len(j_rows) != dim or any(len(r) != dim for r in j_rows):
        raise ValueError("J rows do not form a dim x dim matrix")
    if vols is None:
        vols = [Fraction(1)] * dim
    all_exact = all(isinstance(v, Fraction) for r in j_rows for v in r) and all(
        isinstance(e[3], Fraction) for e in c_entries)
    c = exact.zeros((dim, dim, dim)) if all_exact else np.zeros((dim, dim, dim))
    for i, jj, k, v in c_entries:
        for idx in (i, jj, k):
            if not 1 <= idx <= dim:
                raise ValueError(f"c index {idx} out of range 1..{dim}")
        vv = v if all_exact else float(v)
        c[i - 1][jj - 1][k - 1] = vv
        c[jj - 1][i - 1][k - 1] = -vv
    j = exact.as_exact(j_rows) if all_exact else np.asarray(j_rows, dtype=float)
    return make_frame_spec(name, c, j, vols)


def _num(s: str):
    try:
        return exact.frac(s)
    except (TypeError, ValueError):
        return float(s)


def serialize_frame_spec(spec: LieFrameSpec) -> str:
    m = spec.dim
    out = [f"name {spec.name}", f"dim {m}"]
    for i in range(m):
        for jj in range(i + 1, m):
            for k in range(m):
                if spec.c[i][jj][k] != 0:
                    out.append(f"c {i+1} {jj+1} {k+1} {spec.c[i][jj][k]}")
    for row in spec.j:
        out.append("J " + " ".join(str(v) for v in row))
    out.append("vol " + " ".join(str(v) for v in spec.lattice_volumes))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# connection and curvature


def koszul_gamma(spec: LieFrameSpec) -> np.ndarray:
    """gamma[i][j][k] = <nabla_{e_i} e_j, e_k> on the orthonormal frame.

    For left-invariant fields the Koszul formula collapses to
    (c_ij^k - c_jk^i + c_ki^j) / 2.
    """
    c = spec.c
    half = Fraction(1, 2) if exact.is_exact(c) else 0.5
    return half * (c - np.einsum("jki->ijk", c) + np.einsum("kij->ijk", c))


def connection_forms(spec: LieFrameSpec) -> np.ndarray:
    """F[i][j][k] = omega^i_j(e_k), solved from the first structure equation.

    de^i = -omega^i_j ^ e^j with omega^i_j = -omega^j_i determines F uniquely;
    the solution is the cyclic combination below, and both defining properties
    are re-checked before returning.
    """
    c = spec.c
    m = spec.dim
    half = Fraction(1, 2) if exact.is_exact(c) else 0.5
    # F[i][j][k] = (c_kj^i - c_ji^k + c_ik^j)/2
    f = half * (np.einsum("kji->ijk", c) - np.einsum("jik->ijk", c)
                + np.einsum("ikj->ijk", c))
    assert not _nonzero(f + np.transpose(f, (1, 0, 2))), "connection form not so(m)-valued"
    torsion = np.empty((m, m, m), dtype=f.dtype)
    for i in range(m):
        for a in range(m):
            for b in range(m):
                torsion[i][a][b] = f[i][b][a] - f[i][a][b] - c[a][b][i]
    assert not _nonzero(torsion), "structure equation residual"
    return f


def curvature_direct(spec: LieFrameSpec) -> np.ndarray:
    """R[a][b][i][j] = <R(e_a, e_b) e_j, e_i> from iterated covariant derivatives."""
    g = koszul_gamma(spec)
    c = spec.c
    r = (np.einsum("bjk,aki->abij", g, g)
         - np.einsum("ajk,bki->abij", g, g)
         - np.einsum("abk,kji->abij", c, g))
    return r


def curvature_cartan(spec: LieFrameSpec) -> np.ndarray:
    """Same tensor as curvature_direct, via the Cartan structure equations."""
    f = connection_forms(spec)
    c = spec.c
    m = spec.dim
    r = np.empty((m, m, m, m), dtype=f.dtype)
    for a in range(m):
        for b in range(m):
            for i in range(m):
                for jj in range(m):
                    d_om = -sum(c[a][b][k] * f[i][jj][k] for k in range(m))
                    wedge = sum(f[i][k][a] * f[k][jj][b] - f[i][k][b] * f[k][jj][a]
                                for k in range(m))
                    r[a][b][i][jj] = d_om + wedge
    return r


@dataclass(frozen=True)
class CurvatureTables:
    gamma: np.ndarray          # <nabla_i e_j, e_k>
    riemann: np.ndarray        # <R(e_a,e_b) e_j, e_i>
    sectional: np.ndarray      # K[i][j], zero on the diagonal
    ricci: np.ndarray
    scalar: object
    ricci_anti: np.ndarray     # J-anti-invariant part of the Ricci tensor
    nabla_j_sq: object         # |nabla J|^2
    star_scalar: object        # s + |nabla J|^2 / 2
    hermitian_scalar: object   # (s + s*)/2


def curvature_tables(spec: LieFrameSpec) -> CurvatureTables:
    """All frame curvature tables at once; exact for rational input."""
    gamma = koszul_gamma(spec)
    riem = curvature_direct(spec)
    m = spec.dim
    exact_mode = exact.is_exact(riem)
    sec = exact.zeros((m, m)) if exact_mode else np.zeros((m, m))
    for i in range(m):
        for jj in range(m):
            if i != jj:
                sec[i][jj] = riem[i][jj][i][jj]
    ricci = np.einsum("kikj->ij", riem)
    scalar = np.trace(ricci)
    r_anti = tensor.anti_invariant_part(ricci, spec.j)
    nj2 = nabla_j_norm_sq(spec, route="vectors")
    half = Fraction(1, 2) if exact_mode else 0.5
    star = scalar + half * nj2
    return CurvatureTables(gamma, riem, sec, ricci, scalar, r_anti, nj2, star,
                           half * (scalar + star))


def nabla_j(spec: LieFrameSpec) -> np.ndarray:
    """NJ[i][k][j] = <(nabla_{e_i} J) e_j, e_k>, differentiating J e_j directly."""
    gamma = koszul_gamma(spec)
    j = spec.j
    m = spec.dim
    nj = exact.zeros((m, m, m)) if exact.is_exact(j) else np.zeros((m, m, m))
    for i in range(m):
        for col in range(m):
            for k in range(m):
                lead = sum(gamma[i][p][k] * j[p][col] for p in range(m))
                tail = sum(j[k][p] * gamma[i][col][p] for p in range(m))
                nj[i][k][col] = lead - tail
    return nj


def nabla_j_forms(spec: LieFrameSpec) -> np.ndarray:
    """Matrix route: nabla_i J = [A_i, J] with (A_i)_km = omega^k_m(e_i)."""
    f = connection_forms(spec)
    j = spec.j
    m = spec.dim
    out = exact.zeros((m, m, m)) if exact.is_exact(j) else np.zeros((m, m, m))
    for i in range(m):
        a_i = f[:, :, i]
        out[i] = a_i @ j - j @ a_i
    return out


def nabla_j_norm_sq(spec: LieFrameSpec, route: str = "vectors"):
    """Full-norm |nabla J|^2 = sum_{i,j,k} <(nabla_i J)e_j, e_k>^2."""
    if route == "vectors":
        nj = nabla_j(spec)
    elif route == "forms":
        nj = nabla_j_forms(spec)
    else:
        raise ValueError(f"unknown route {route!r}")
    return sum(v * v for v in nj.flat)


def z_ratio(spec: LieFrameSpec) -> float:
    """Scalar curvature times Vol^(1/n): scale-normalized total s of the quotient."""
    tables = curvature_tables(spec)
    return float(tables.scalar) * float(spec.volume) ** (1.0 / spec.n)


@dataclass(frozen=True)
class BlairReport:
    lhs: float          # integral of (s + s*)/2 over the quotient
    rhs: float          # 4 pi (c1 . [omega]^{n-1}) / (n-1)!
    mismatch: float
    matches: bool


def blair_check(spec: LieFrameSpec, c1_dot_omega_power: float,
                tol: float = 1e-9) -> BlairReport:
    """Compare the total Hermitian scalar against its cohomological value.

    `c1_dot_omega_power` is the pairing c1 . [omega]^(n-1) supplied by the
    caller (it lives in cohomology, not in frame data); the right-hand side
    applies the 4 pi / (n-1)! normalization internally.
    """
    tables = curvature_tables(spec)
    lhs = float(tables.hermitian_scalar) * float(spec.volume)
    rhs = 4.0 * math.pi * float(c1_dot_omega_power) / math.factorial(spec.n - 1)
    mismatch = abs(lhs - rhs)
    return BlairReport(lhs, rhs, mismatch, mismatch <= tol * (1.0 + abs(lhs) + abs(rhs)))
