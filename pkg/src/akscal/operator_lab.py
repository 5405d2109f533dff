"""Discrete model of the adjoint linearized scalar-curvature operator.

The operator psi -> (Hess psi)^- - r^- psi maps functions to J-anti-invariant
symmetric 2-tensors.  On the frame, an anti-invariant tensor is determined by
six slot values; this module assembles the six slot operators as sparse
matrices over a QuotientGrid, in two independent discretizations:

* the frame route: compositions of the invariant frame derivatives
  (x innermost, so the sheared x-wrap only ever acts on invariant samples),
  corrected by the frame connection — this is the route the adjoint system,
  its exact-transpose forward operator, and the normal operator are built on;
* the chart route: plain coordinate stencils of the ten chart Hessian
  formulas, one-sided in x at the fundamental-domain faces so nothing crosses
  the sheared seam.

Both routes are second order; their difference contracts like h^2, which the
Richardson fit exposes.  Fourier modes feed the principal-symbol ratio check,
and the spectral floor of the normal operator certifies the kernel gap
against the flat-torus baseline.

Variants: "kt" (the sheared quotient, curved connection) and "flat" (plain
4-torus, pairing (x,y) and (z,t), zero connection).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import exact, lie
from .grid import AXES, QuotientGrid, d1_periodic, d1_sided, d2_periodic, \
    d2_sided, lift_axis

J_KT = np.array([[0., 0., 0., 1.], [0., 0., -1., 0.],
                 [0., 1., 0., 0.], [-1., 0., 0., 0.]])
J_FLAT = np.array([[0., -1., 0., 0.], [1., 0., 0., 0.],
                   [0., 0., 0., -1.], [0., 0., 1., 0.]])

_PREFERRED_SLOTS = {
    J_KT.tobytes(): ((0, 0), (1, 1), (0, 1), (0, 2), (1, 2), (0, 3)),
    J_FLAT.tobytes(): ((0, 0), (2, 2), (0, 1), (2, 3), (0, 2), (0, 3)),
}


# ---------------------------------------------------------------------------
# slot algebra of J-anti-invariant symmetric tensors


@dataclass(frozen=True)
class SlotBasis:
    """Independent entries of an anti-invariant symmetric 4x4 tensor.

    Slot s at position (i, j) determines its partner entry pairs[s] with the
    opposite sign signs[s]; weights[s] counts how many matrix entries the slot
    value fills, so |h|^2 = sum_s weights[s] * h_s^2.
    """

    slots: tuple
    weights: tuple
    pairs: tuple
    signs: tuple

    def index(self, i: int, j: int) -> int:
        return self.slots.index((i, j))


def anti_slots(j: np.ndarray) -> SlotBasis:
    """Slot basis for a signed-permutation almost-complex structure."""
    j = np.asarray(j, dtype=float)
    if j.shape != (4, 4):
        raise ValueError("expected a 4x4 J")
    pi = np.full(4, -1, dtype=int)
    sig = np.zeros(4)
    for col in range(4):
        rows = np.nonzero(j[:, col])[0]
        if len(rows) != 1 or abs(j[rows[0], col]) != 1.0:
            raise ValueError("J must be a signed permutation on the frame")
        pi[col], sig[col] = rows[0], j[rows[0], col]
    if any(pi[pi[c]] != c or sig[c] * sig[pi[c]] != -1.0 for c in range(4)):
        raise ValueError("J^2 != -I")
    found: dict = {}
    order = []
    for i in range(4):
        for jj in range(i, 4):
            if (i, jj) in found:
                continue
            partner = tuple(sorted((pi[i], pi[jj])))
            s = int(sig[i] * sig[jj])
            if partner == (i, jj):
                if s == 1:
                    continue  # forced invariant direction
                found[(i, jj)] = ((i, jj), -1, 2)
            else:
                found[(i, jj)] = (partner, s, 2 if i == jj else 4)
                found[partner] = None  # dependent entry, not a slot
            order.append((i, jj))
    preferred = _PREFERRED_SLOTS.get(j.tobytes())
    if preferred is not None:
        order = list(preferred)
    slots = tuple(order)
    return SlotBasis(slots,
                     tuple(found[s][2] for s in slots),
                     tuple(found[s][0] for s in slots),
                     tuple(found[s][1] for s in slots))


def slot_values(a: np.ndarray, basis: SlotBasis) -> np.ndarray:
    """Project a symmetric matrix onto the slots: v_s = (a_ij - s_s a_i'j')/2."""
    a = np.asarray(a, dtype=float)
    out = np.empty(len(basis.slots))
    for s, ((i, jj), (pi_, pj), sg) in enumerate(
            zip(basis.slots, basis.pairs, basis.signs)):
        out[s] = 0.5 * (a[i, jj] - sg * a[pi_, pj])
    return out


def slot_embed(values, basis: SlotBasis) -> np.ndarray:
    """Rebuild the full anti-invariant symmetric matrix from slot values."""
    h = np.zeros((4, 4))
    for s, ((i, jj), (pi_, pj), sg) in enumerate(
            zip(basis.slots, basis.pairs, basis.signs)):
        h[i, jj] = h[jj, i] = values[s]
        if (pi_, pj) != (i, jj):
            h[pi_, pj] = h[pj, pi_] = -sg * values[s]
    return h


# ---------------------------------------------------------------------------
# variants


@dataclass(frozen=True)
class OperatorVariant:
    name: str
    j: np.ndarray
    gamma: np.ndarray      # frame connection <nabla_i e_j, e_k>
    r_minus: np.ndarray    # anti-invariant Ricci part, as a 4x4 matrix
    twisted: bool


def get_variant(name: str) -> OperatorVariant:
    if name == "kt":
        spec = lie.kt_spec(1)
        tables = lie.curvature_tables(spec)
        return OperatorVariant("kt", J_KT, exact.to_float(tables.gamma),
                               exact.to_float(tables.ricci_anti), True)
    if name == "flat":
        return OperatorVariant("flat", J_FLAT, np.zeros((4, 4, 4)),
                               np.zeros((4, 4)), False)
    raise ValueError(f"unknown variant {name!r}")


# ---------------------------------------------------------------------------
# the two discretization routes


def frame_fields(g: QuotientGrid, variant: OperatorVariant) -> list:
    """Sparse frame derivatives E_i; for the sheared quotient the second field
    is D_y + x D_z (the invariant field), the rest are plain axis differences."""
    if variant.twisted != g.twisted:
        raise ValueError(f"variant {variant.name!r} expects twisted={variant.twisted}")
    dx, dy, dz, dt = (g.diff(a) for a in AXES)
    if variant.name == "kt":
        return [dx, (dy + g.x_matrix() @ dz).tocsr(), dz, dt]
    return [dx, dy, dz, dt]


def hessian_ops_frame(g: QuotientGrid, variant: OperatorVariant) -> dict:
    """Frame-route Hessian slots, (i, j) with i <= j.

    H_ij = E_j(E_i psi) - sum_k gamma[j][i][k] E_k psi, with the lower frame
    index innermost: the sheared x-difference is only ever applied directly
    to psi, never to a chart-dependent intermediate array (which would cost
    an order at the seam).
    """
    e = frame_fields(g, variant)
    gam = variant.gamma
    ops = {}
    for i in range(4):
        for jj in range(i, 4):
            op = (e[jj] @ e[i]).tocsr()
            for k in range(4):
                c = gam[jj][i][k]
                if c != 0.0:
                    op = op - c * e[k]
            ops[(i, jj)] = op.tocsr()
    return ops


def hessian_ops_chart(g: QuotientGrid, variant: OperatorVariant) -> dict:
    """Chart-route Hessian slots from the ten coordinate formulas.

    Pure coordinate stencils: narrow 3-point second differences on each axis,
    centered first differences, and one-sided (non-wrapping) x-stencils, so
    the route never crosses the sheared seam and stays second order on the
    closed fundamental domain.
    """
    if variant.twisted != g.twisted:
        raise ValueError(f"variant {variant.name!r} expects twisted={variant.twisted}")
    n, nt = g.n, g.nt
    if variant.name == "kt":
        dx = lift_axis(d1_sided(n, g.hx), "x", g)
        dxx = lift_axis(d2_sided(n, g.hx), "x", g)
    else:
        dx = lift_axis(d1_periodic(n, g.hx), "x", g)
        dxx = lift_axis(d2_periodic(n, g.hx), "x", g)
    dy = lift_axis(d1_periodic(n, g.hy), "y", g)
    dz = lift_axis(d1_periodic(n, g.hz), "z", g)
    dt = lift_axis(d1_periodic(nt, g.ht), "t", g)
    dyy = lift_axis(d2_periodic(n, g.hy), "y", g)
    dzz = lift_axis(d2_periodic(n, g.hz), "z", g)
    dtt = lift_axis(d2_periodic(nt, g.ht), "t", g)
    if variant.name == "flat":
        first = {"x": dx, "y": dy, "z": dz, "t": dt}
        second = {"x": dxx, "y": dyy, "z": dzz, "t": dtt}
        ops = {}
        for i in range(4):
            for jj in range(i, 4):
                ops[(i, jj)] = (second[AXES[i]] if i == jj
                                else (first[AXES[jj]] @ first[AXES[i]]).tocsr())
        return ops
    x = g.x_matrix()
    return {
        (0, 0): dxx,
        (1, 1): (dyy + 2.0 * (x @ (dy @ dz)) + x @ x @ dzz).tocsr(),
        (2, 2): dzz,
        (3, 3): dtt,
        (0, 1): (dy @ dx + x @ (dz @ dx) + 0.5 * dz).tocsr(),
        (0, 2): (dz @ dx + 0.5 * dy + 0.5 * (x @ dz)).tocsr(),
        (0, 3): (dt @ dx).tocsr(),
        (1, 2): (dz @ dy + x @ dzz + (-0.5) * dx).tocsr(),
        (1, 3): (dt @ dy + x @ (dt @ dz)).tocsr(),
        (2, 3): (dt @ dz).tocsr(),
    }


# ---------------------------------------------------------------------------
# the adjoint system


class AdjointSystem:
    """Slot operators A_s of (Hess psi)^- - r^- psi on one grid, frame route."""

    def __init__(self, g: QuotientGrid, variant: str | OperatorVariant = "kt"):
        self.grid = g
        self.variant = get_variant(variant) if isinstance(variant, str) else variant
        self.basis = anti_slots(self.variant.j)
        hess = hessian_ops_frame(g, self.variant)
        ident = sp.identity(g.size, format="csr")
        self.ops = []
        for (i, jj), (pi_, pj), sg in zip(self.basis.slots, self.basis.pairs,
                                          self.basis.signs):
            partner = hess[(min(pi_, pj), max(pi_, pj))]
            op = 0.5 * (hess[(i, jj)] - sg * partner)
            r = self.variant.r_minus[i][jj]
            if r != 0.0:
                op = op - r * ident
            self.ops.append(op.tocsr())
        self.weights = self.basis.weights

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Slot values of the adjoint operator: shape (6, size)."""
        psi = np.asarray(psi).ravel()
        return np.stack([op @ psi for op in self.ops])

    def forward(self, u: np.ndarray) -> np.ndarray:
        """Exact discrete adjoint of apply() in the weighted inner product:
        sum_s w_s A_s^T u_s.  Summation by parts is built in, so the pairing
        <apply(psi), u>_W = <psi, forward(u)> holds to machine precision."""
        u = np.asarray(u)
        if u.shape != (len(self.ops), self.grid.size):
            raise ValueError(f"expected slot stack of shape "
                             f"{(len(self.ops), self.grid.size)}")
        out = np.zeros(self.grid.size, dtype=u.dtype)
        for w, op, us in zip(self.weights, self.ops, u):
            out = out + w * (op.T @ us)
        return out

    def weighted_norm_sq(self, u: np.ndarray) -> float:
        u = np.asarray(u)
        total = sum(w * float(np.vdot(us, us).real)
                    for w, us in zip(self.weights, u))
        return self.grid.cell_volume * total

    @cached_property
    def normal_matrix(self) -> sp.csr_matrix:
        """M = sum_s w_s A_s^T A_s: symmetric positive semi-definite."""
        m = sp.csr_matrix((self.grid.size, self.grid.size))
        for w, op in zip(self.weights, self.ops):
            m = m + w * (op.T @ op)
        return m.tocsr()

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """Frame Laplacian sum_i E_i E_i - (trace connection term, zero here)."""
        e = frame_fields(self.grid, self.variant)
        lap = sp.csr_matrix((self.grid.size, self.grid.size))
        for i in range(4):
            lap = lap + e[i] @ e[i]
        for k in range(4):
            tr = sum(self.variant.gamma[i][i][k] for i in range(4))
            if tr != 0.0:
                lap = lap - tr * e[k]
        return lap.tocsr()

    def slot_residual_norms(self, psi: np.ndarray) -> np.ndarray:
        """Per-slot L2 norms of apply(psi) — unweighted, cell-volume measure,
        so individual near-kernel slots can be read off directly."""
        u = self.apply(psi)
        return np.array([self.grid.l2(us) for us in u])


def build_system(n: int, nt: Optional[int] = None, d: float = 1.0,
                 variant: str = "kt") -> AdjointSystem:
    v = get_variant(variant)
    g = QuotientGrid(n, nt, d, twisted=v.twisted)
    return AdjointSystem(g, v)


# ---------------------------------------------------------------------------
# symbol checks


def fourier_mode(g: QuotientGrid, k: tuple) -> np.ndarray:
    """Complex plane wave with integer frequencies (kx, ky, kz, kt).

    On the sheared quotient only kz = 0 modes descend (the z-frequency would
    have to twist with y), so anything else is rejected there.
    """
    kx, ky, kz, kt = (int(v) for v in k)
    if g.twisted and kz != 0:
        raise ValueError("sheared quotient admits plane waves with kz = 0 only")
    x, y, z, t = g.node_coordinates()
    phase = 2.0 * math.pi * (kx * x + ky * y + kz * z + kt * t / g.d)
    return np.exp(1j * phase).ravel()


def mode_sigma(g: QuotientGrid, k: tuple) -> np.ndarray:
    """Discrete first-difference symbols sin(2 pi k_a h_a)/h_a per axis."""
    kx, ky, kz, kt = (int(v) for v in k)
    return np.array([
        math.sin(2.0 * math.pi * kx * g.hx) / g.hx,
        math.sin(2.0 * math.pi * ky * g.hy) / g.hy,
        math.sin(2.0 * math.pi * kz * g.hz) / g.hz,
        math.sin(2.0 * math.pi * kt * g.ht / g.d) / g.ht,
    ])


def mode_xi(g: QuotientGrid, k: tuple) -> float:
    """Continuum wavevector length 2 pi |(kx, ky, kz, kt/d)|."""
    kx, ky, kz, kt = (int(v) for v in k)
    return 2.0 * math.pi * math.sqrt(kx * kx + ky * ky + kz * kz
                                     + (kt / g.d) ** 2)


def symbol_check(system: AdjointSystem, k: tuple) -> float:
    """Weighted squared norm of the slot symbols against half the squared
    Laplacian symbol, evaluated on one discrete plane wave.

    In the flat model the ratio is identically 1 (the discrete identity
    matches the principal symbol of half the squared Laplacian exactly); on
    the sheared quotient lower-order connection terms add O(|sigma|^-2)
    corrections that die off up the spectrum.
    """
    g = system.grid
    psi = fourier_mode(g, k)
    u = system.apply(psi)
    num = system.weighted_norm_sq(u)
    lp = system.laplacian @ psi
    den = 0.5 * g.cell_volume * float(np.vdot(lp, lp).real)
    if den == 0.0:
        raise ValueError("zero-frequency mode has no symbol ratio")
    return num / den


def symbol_sweep(system: AdjointSystem, modes=None):
    """Ratio decay along a mode family; returns (|xi|, |ratio-1|, slope).

    Default family on the sheared quotient: (1, 0, 0, e) for e = 1..nt/4 —
    kz must vanish there, and the x-frequency pins the corrections on.  The
    slope is the least-squares fit of log|ratio-1| against log|xi|.
    """
    g = system.grid
    if modes is None:
        modes = [(1, 0, 0, e) for e in range(1, g.nt // 4 + 1)]
    xi, dev = [], []
    for k in modes:
        ratio = symbol_check(system, k)
        xi.append(mode_xi(g, k))
        dev.append(abs(ratio - 1.0))
    xi, dev = np.array(xi), np.array(dev)
    good = dev > 0
    slope = float(np.polyfit(np.log(xi[good]), np.log(dev[good]), 1)[0]) \
        if good.sum() >= 2 else math.nan
    return xi, dev, slope


# ---------------------------------------------------------------------------
# spectral floor of the normal operator


@dataclass(frozen=True)
class SpectralReport:
    values: np.ndarray
    vectors: np.ndarray      # columns match values
    residuals: np.ndarray    # ||M v - lambda v|| / ||v||
    method: str
    size: int

    @property
    def floor(self) -> float:
        return float(self.values[0])


def spectral_floor(m: sp.spmatrix, k: int = 2, dense_limit: int = 4096,
                   tol: float = 1e-8, max_iter: int = 500,
                   seed: int = 0) -> SpectralReport:
    """Smallest k eigenpairs of a symmetric PSD sparse matrix.

    Dense eigendecomposition up to dense_limit nodes; beyond that, shifted
    inverse power iteration with conjugate-gradient solves and deflation.
    Residuals are reported so callers can reject unconverged output.
    """
    size = m.shape[0]
    if size <= dense_limit:
        w, v = np.linalg.eigh(m.toarray())
        vals, vecs = w[:k], v[:, :k]
        method = "dense"
    else:
        shift = 1e-3 * float(m.diagonal().mean())
        solver = spla.factorized((m + shift * sp.identity(size)).tocsc()) \
            if size <= 200000 else None
        rng = np.random.default_rng(seed)
        vecs_list = []
        vals_list = []
        for _ in range(k):
            v = rng.standard_normal(size)
            for u in vecs_list:
                v -= (u @ v) * u
            v /= np.linalg.norm(v)
            lam = float(v @ (m @ v))
            for _ in range(max_iter):
                if solver is not None:
                    w = solver(v)
                else:
                    w, info = spla.cg(m + shift * sp.identity(size), v,
                                      rtol=1e-10, atol=0.0)
                    if info != 0:
                        raise RuntimeError("conjugate gradient failed to converge")
                for u in vecs_list:
                    w -= (u @ w) * u
                w /= np.linalg.norm(w)
                lam = float(w @ (m @ w))
                res = float(np.linalg.norm(m @ w - lam * w))
                v = w
                if res <= tol:
                    break
            vecs_list.append(v)
            vals_list.append(lam)
        idx = np.argsort(vals_list)
        vals = np.array(vals_list)[idx]
        vecs = np.stack([vecs_list[i] for i in idx], axis=1)
        method = "inverse-power"
    res = np.array([float(np.linalg.norm(m @ vecs[:, i] - vals[i] * vecs[:, i]))
                    for i in range(len(vals))])
    return SpectralReport(vals, vecs, res, method, size)


def kernel_gap(n: int, nt: Optional[int] = None, d: float = 1.0,
               variant: str = "kt", k: int = 2, **kw) -> SpectralReport:
    """Spectral floor of the normal operator on an n (x nt) grid."""
    system = build_system(n, nt, d, variant)
    return spectral_floor(system.normal_matrix, k=k, **kw)


# ---------------------------------------------------------------------------
# two-route Richardson fidelity


def theta_test_field(d: float = 1.0) -> Callable:
    """Deck-invariant smooth test field with genuine z-dependence.

    A Gaussian theta sum (width 0.25, terms |m| <= 5, machine-exact truncation)
    carries the sheared invariance; a z-independent smooth part keeps every
    chart derivative in play.
    """
    w = 0.25

    def f(x, y, z, t):
        th = 0.0
        for m in range(-5, 6):
            th = th + np.exp(-(((x + m - 0.5) / w) ** 2)) * (
                np.cos(2.0 * np.pi * (z + m * y))
                + 0.5 * np.sin(2.0 * np.pi * (z + m * y)))
        mod = 0.6 + 0.25 * np.cos(2.0 * np.pi * t / d) + 0.15 * np.sin(2.0 * np.pi * y)
        smooth = (np.sin(2.0 * np.pi * x) * np.cos(2.0 * np.pi * y)
                  + 0.3 * np.cos(2.0 * np.pi * (x + t / d)))
        return th * mod + smooth

    return f


def random_invariant_field(d: float = 1.0, rng=None) -> Callable:
    """Random smooth field on the sheared quotient.

    Same invariance mechanism as theta_test_field — the Gaussian envelope
    shifts with the z-frequency twist — but with randomized amplitudes and
    phases, so convergence fits run on fresh fields every seed.
    """
    rng = np.random.default_rng(rng)
    amp = rng.uniform(0.3, 1.0, size=7)
    phs = rng.uniform(0.0, 2.0 * np.pi, size=7)
    w = 0.3

    def f(x, y, z, t):
        th = 0.0
        for m in range(-5, 6):
            th = th + np.exp(-(((x + m - 0.5) / w) ** 2)) * (
                amp[0] * np.cos(2.0 * np.pi * (z + m * y) + phs[0]))
        mod = (0.6 + 0.3 * amp[1] * np.cos(2.0 * np.pi * t / d + phs[1])
               + 0.2 * amp[2] * np.sin(2.0 * np.pi * y + phs[2]))
        smooth = (amp[3] * np.sin(2.0 * np.pi * x + phs[3])
                  * np.cos(2.0 * np.pi * y + phs[4])
                  + 0.5 * amp[4] * np.cos(2.0 * np.pi * (x + t / d) + phs[5])
                  + 0.4 * amp[5] * np.sin(2.0 * np.pi * y + phs[6])
                  + 0.3 * amp[6] * np.cos(2.0 * np.pi * t / d))
        return th * mod + smooth

    return f


def route_difference(n: int, variant: str = "kt", d: float = 1.0,
                     field: Optional[Callable] = None):
    """(max, L2) norms of (frame route - chart route) over all ten slots."""
    v = get_variant(variant)
    g = QuotientGrid(n, n, d, twisted=v.twisted)
    psi = g.sample(field if field is not None else theta_test_field(d))
    frame = hessian_ops_frame(g, v)
    chart = hessian_ops_chart(g, v)
    err_max, err_sq = 0.0, 0.0
    for key in frame:
        diff = frame[key] @ psi - chart[key] @ psi
        err_max = max(err_max, g.lmax(diff))
        err_sq += g.l2(diff) ** 2
    return err_max, math.sqrt(err_sq)


@dataclass(frozen=True)
class OrderFit:
    ns: tuple
    h: np.ndarray
    err_max: np.ndarray
    err_l2: np.ndarray
    order_max: float
    order_l2: float


def richardson_orders(ns=(8, 12, 16, 20), variant: str = "kt", d: float = 1.0,
                      field: Optional[Callable] = None) -> OrderFit:
    """Least-squares convergence orders of the two-route difference."""
    h = np.array([1.0 / n for n in ns])
    pairs = [route_difference(n, variant, d, field) for n in ns]
    err_max = np.array([p[0] for p in pairs])
    err_l2 = np.array([p[1] for p in pairs])
    order_max = float(np.polyfit(np.log(h), np.log(err_max), 1)[0])
    order_l2 = float(np.polyfit(np.log(h), np.log(err_l2), 1)[0])
    return OrderFit(tuple(ns), h, err_max, err_l2, order_max, order_l2)
