"""Finite differences on a 4-dimensional lattice with a sheared x-wrap.

The quotient identifies (x+1, y, z) with (x, y, z-y) — wrapping the first
index shears the third by the second — while y, z, t wrap cleanly (t has
circumference d).  Functions on the quotient are arrays over the fundamental
vertex grid; all operators below are sparse matrices acting on the flattened
array, so compositions, transposes, and permutation conjugations stay exact.

With twisted=False the same machinery produces the plain 4-torus.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

AXES = ("x", "y", "z", "t")


class QuotientGrid:
    """Vertex grid: node (i,j,k,l) at (i hx, j hy, k hz, l ht), C-order flat."""

    def __init__(self, n: int, nt: int | None = None, d: float = 1.0,
                 twisted: bool = True):
        if n < 4:
            raise ValueError("need n >= 4")
        self.n = int(n)
        self.nt = int(nt) if nt is not None else int(n)
        if self.nt < 4:
            raise ValueError("need nt >= 4")
        if d <= 0:
            raise ValueError("need d > 0")
        self.d = float(d)
        self.twisted = bool(twisted)
        self.hx = self.hy = self.hz = 1.0 / self.n
        self.ht = self.d / self.nt
        self.shape = (self.n, self.n, self.n, self.nt)
        self.size = self.n ** 3 * self.nt
        self.cell_volume = self.hx * self.hy * self.hz * self.ht
        self._shift_cache: dict[tuple[str, int], sp.csr_matrix] = {}

    def spacing(self, axis: str) -> float:
        return {"x": self.hx, "y": self.hy, "z": self.hz, "t": self.ht}[axis]

    def reduce_index(self, i, j, k, l):
        """Canonical representative of a (possibly out-of-range) index tuple."""
        i, j, k, l = (np.asarray(v) for v in (i, j, k, l))
        j = np.mod(j, self.n)
        l = np.mod(l, self.nt)
        q = np.floor_divide(i, self.n)
        i = i - q * self.n
        k = np.mod(k - q * j if self.twisted else k, self.n)
        return i, j, k, l

    def flat(self, i, j, k, l):
        i, j, k, l = self.reduce_index(i, j, k, l)
        return np.ravel_multi_index((i, j, k, l), self.shape)

    def node_coordinates(self):
        """Chart coordinates of every node, each shaped like the grid."""
        i, j, k, l = np.meshgrid(*(np.arange(s) for s in self.shape), indexing="ij")
        return i * self.hx, j * self.hy, k * self.hz, l * self.ht

    def sample(self, fn) -> np.ndarray:
        """Flattened samples of fn(x, y, z, t) over the nodes."""
        x, y, z, t = self.node_coordinates()
        return np.asarray(fn(x, y, z, t), dtype=complex if np.iscomplexobj(
            fn(x[:1, :1, :1, :1], y[:1, :1, :1, :1], z[:1, :1, :1, :1],
               t[:1, :1, :1, :1])) else float).ravel()

    # -- shifts and differences ---------------------------------------------

    def shift(self, axis: str, step: int = 1) -> sp.csr_matrix:
        """Permutation matrix of psi -> psi(. + step h_axis along axis)."""
        key = (axis, int(step))
        if key in self._shift_cache:
            return self._shift_cache[key]
        i, j, k, l = np.meshgrid(*(np.arange(s) for s in self.shape), indexing="ij")
        moved = {"x": (i + step, j, k, l), "y": (i, j + step, k, l),
                 "z": (i, j, k + step, l), "t": (i, j, k, l + step)}[axis]
        cols = self.flat(*moved).ravel()
        rows = np.arange(self.size)
        mat = sp.csr_matrix((np.ones(self.size), (rows, cols)),
                            shape=(self.size, self.size))
        self._shift_cache[key] = mat
        return mat

    def diff(self, axis: str) -> sp.csr_matrix:
        """Centered first difference along one axis (wrap per the quotient)."""
        h = self.spacing(axis)
        return ((self.shift(axis, 1) - self.shift(axis, -1)) * (0.5 / h)).tocsr()

    def diff2(self, axis: str) -> sp.csr_matrix:
        """Narrow (3-point) second difference along one axis."""
        h = self.spacing(axis)
        return ((self.shift(axis, 1) - 2.0 * sp.identity(self.size)
                 + self.shift(axis, -1)) * (1.0 / h ** 2)).tocsr()

    def x_matrix(self) -> sp.dia_matrix:
        """Multiplication by the chart coordinate x (values in [0, 1))."""
        x = self.node_coordinates()[0]
        return sp.diags(x.ravel())

    # -- quotient symmetries -------------------------------------------------

    def deck_z_shift(self) -> sp.csr_matrix:
        """One-step z translation: a symmetry of the quotient (z is central)."""
        return self.shift("z", 1)

    def deck_t_shift(self) -> sp.csr_matrix:
        return self.shift("t", 1)

    def x_holonomy_shear(self) -> sp.csr_matrix:
        """psi -> psi(x+1, ., .): the pure index shear k -> k - j."""
        i, j, k, l = np.meshgrid(*(np.arange(s) for s in self.shape), indexing="ij")
        kk = np.mod(k - j, self.n) if self.twisted else k
        cols = np.ravel_multi_index((i, j, kk, l), self.shape).ravel()
        mat = sp.csr_matrix((np.ones(self.size), (np.arange(self.size), cols)),
                            shape=(self.size, self.size))
        return mat

    # -- norms ----------------------------------------------------------------

    def l2(self, v) -> float:
        return float(np.sqrt(self.cell_volume) * np.linalg.norm(np.asarray(v).ravel()))

    def lmax(self, v) -> float:
        return float(np.max(np.abs(v)))


# ---------------------------------------------------------------------------
# one-axis stencils for the chart (non-wrapping) difference route


def d1_periodic(n: int, h: float) -> sp.csr_matrix:
    e = np.ones(n)
    m = sp.diags([e, -e], [1, -1], shape=(n, n)).tolil()
    m[0, n - 1] = -1.0
    m[n - 1, 0] = 1.0
    return (m * (0.5 / h)).tocsr()


def d2_periodic(n: int, h: float) -> sp.csr_matrix:
    e = np.ones(n)
    m = sp.diags([e, -2.0 * np.ones(n), e], [1, 0, -1], shape=(n, n)).tolil()
    m[0, n - 1] = 1.0
    m[n - 1, 0] = 1.0
    return (m * (1.0 / h ** 2)).tocsr()


def d1_sided(n: int, h: float) -> sp.csr_matrix:
    """Centered first difference with 2nd-order one-sided rows at both ends."""
    m = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        m[i, i - 1], m[i, i + 1] = -0.5, 0.5
    m[0, 0], m[0, 1], m[0, 2] = -1.5, 2.0, -0.5
    m[n - 1, n - 1], m[n - 1, n - 2], m[n - 1, n - 3] = 1.5, -2.0, 0.5
    return (m * (1.0 / h)).tocsr()


def d2_sided(n: int, h: float) -> sp.csr_matrix:
    """3-point second difference with 2nd-order one-sided rows at both ends."""
    m = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        m[i, i - 1], m[i, i], m[i, i + 1] = 1.0, -2.0, 1.0
    m[0, 0], m[0, 1], m[0, 2], m[0, 3] = 2.0, -5.0, 4.0, -1.0
    m[n - 1, n - 1], m[n - 1, n - 2], m[n - 1, n - 3], m[n - 1, n - 4] = \
        2.0, -5.0, 4.0, -1.0
    return (m * (1.0 / h ** 2)).tocsr()


def lift_axis(m1d: sp.spmatrix, axis: str, grid: QuotientGrid) -> sp.csr_matrix:
    """Promote a one-axis stencil to the full grid (C-order Kronecker lift)."""
    mats = []
    for ax, size in zip(AXES, grid.shape):
        mats.append(m1d if ax == axis else sp.identity(size))
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m)
    return out.tocsr()
