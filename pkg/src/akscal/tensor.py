"""Pointwise frame linear algebra for compatible triples (g, omega, J).

Everything here acts on orthonormal-frame component matrices (2n x 2n) rather
than coordinate tensors.  Metrics are symmetric positive-definite, symplectic
forms skew-symmetric, and an almost-complex structure J ties them together via
g(X, Y) = omega(X, JY).  Symmetric 2-tensors split into J-invariant and
J-anti-invariant parts; the anti-invariant ones parametrize the compatible
metrics for a fixed omega through the exponential map g -> g.exp(g^-1 h).

Rational inputs (int / Fraction object arrays) run exactly; everything else
runs in floating point with a fixed compatibility tolerance of 1e-10.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import exact

COMPAT_TOL = 1e-10
ACS_TOL = 1e-12


class CompatibilityError(ValueError):
    """Raised when (g, omega) admits no compatible J, with defect sizes."""


def _is_exact_pair(*mats) -> bool:
    return all(exact.is_exact(m) for m in mats)


def _check_square(a, name) -> int:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if a.shape[0] % 2:
        raise ValueError(f"{name} must be even-dimensional, got {a.shape[0]}")
    return a.shape[0]


def check_symmetric(a, name="tensor", tol=0.0):
    a = a if exact.is_exact(a) else np.asarray(a, dtype=float)
    _check_square(a, name)
    d = a - a.T
    if exact.is_exact(a):
        if any(v != 0 for v in d.flat):
            raise ValueError(f"{name} is not symmetric")
    elif np.max(np.abs(d)) > tol:
        raise ValueError(f"{name} is not symmetric (defect {np.max(np.abs(d)):.3g})")
    return a


def check_metric(g, name="metric"):
    """Symmetric positive-definite check; returns g as float array."""
    g = np.asarray(exact.to_float(g) if exact.is_exact(g) else g, dtype=float)
    check_symmetric(g, name, tol=1e-12 * (1 + np.max(np.abs(g))))
    w = np.linalg.eigvalsh(g)
    if w.min() <= 0:
        raise ValueError(f"{name} is not positive-definite (min eigenvalue {w.min():.3g})")
    return g


def check_acs(j, g=None, tol=ACS_TOL):
    """Verify J^2 = -I (and J^T g J = g when g is given)."""
    n = _check_square(np.asarray(j), "J")
    if exact.is_exact(j):
        if any(v != 0 for v in (j @ j + exact.eye(n)).flat):
            raise ValueError("J^2 != -I")
        if g is not None and any(v != 0 for v in (j.T @ g @ j - g).flat):
            raise ValueError("J is not a g-isometry")
        return j
    j = np.asarray(j, dtype=float)
    defect = np.max(np.abs(j @ j + np.eye(n)))
    if defect > tol:
        raise ValueError(f"J^2 != -I (defect {defect:.3g} > {tol:g})")
    if g is not None:
        g = np.asarray(g, dtype=float)
        iso = np.max(np.abs(j.T @ g @ j - g))
        if iso > max(tol, COMPAT_TOL * (1 + np.max(np.abs(g)))):
            raise ValueError(f"J is not a g-isometry (defect {iso:.3g})")
    return j


def _half_like(a):
    return Fraction(1, 2) if exact.is_exact(a) else 0.5


def anti_invariant_part(a, j):
    """J-anti-invariant part (1/2)(A - J^T A J) of a symmetric tensor.

    The result h satisfies h(J., J.) = -h, i.e. h + J^T h J = 0.
    """
    if exact.is_exact(a) != exact.is_exact(j):
        a, j = exact.to_float(a), exact.to_float(j)
    a = check_symmetric(a, "A", tol=1e-12 * (1 + float(np.max(np.abs(exact.to_float(a))))))
    j = check_acs(j)
    if np.asarray(a).shape != np.asarray(j).shape:
        raise ValueError("dimension mismatch between A and J")
    return _half_like(a) * (a - j.T @ a @ j)


def invariant_part(a, j):
    """J-invariant part (1/2)(A + J^T A J); complements anti_invariant_part."""
    if exact.is_exact(a) != exact.is_exact(j):
        a, j = exact.to_float(a), exact.to_float(j)
    a = check_symmetric(a, "A", tol=1e-12 * (1 + float(np.max(np.abs(exact.to_float(a))))))
    j = check_acs(j)
    if np.asarray(a).shape != np.asarray(j).shape:
        raise ValueError("dimension mismatch between A and J")
    return _half_like(a) * (a + j.T @ a @ j)


def _sym_sqrt(g):
    w, u = np.linalg.eigh(g)
    if w.min() <= 0:
        raise ValueError("matrix is not positive-definite")
    return (u * np.sqrt(w)) @ u.T, (u / np.sqrt(w)) @ u.T


def exp_metric(g, h):
    """g.exp(g^-1 h) for symmetric h: the exponential ray of metrics through g.

    Computed through the symmetric eigendecomposition of g^{-1/2} h g^{-1/2},
    which is exact up to floating error because g^-1 h is g-self-adjoint.
    """
    g = check_metric(g)
    h = np.asarray(exact.to_float(h) if exact.is_exact(h) else h, dtype=float)
    check_symmetric(h, "h", tol=1e-12 * (1 + np.max(np.abs(h))))
    g_half, g_ihalf = _sym_sqrt(g)
    m = g_ihalf @ h @ g_ihalf
    m = 0.5 * (m + m.T)
    w, v = np.linalg.eigh(m)
    em = (v * np.exp(w)) @ v.T
    out = g_half @ em @ g_half
    return 0.5 * (out + out.T)


def log_recover(g, g_tilde, omega=None):
    """The unique symmetric h with exp_metric(g, h) = g_tilde.

    When omega is supplied, both metrics must be omega-compatible (verified via
    check_compatibility) and the recovered h is verified J-anti-invariant to
    1e-10; without omega this is the plain g-relative matrix logarithm.
    """
    g = check_metric(g)
    gt = check_metric(g_tilde, "g_tilde")
    j = None
    if omega is not None:
        j = check_compatibility(g, omega)
        check_compatibility(gt, omega)
    g_half, g_ihalf = _sym_sqrt(g)
    m = g_ihalf @ gt @ g_ihalf
    m = 0.5 * (m + m.T)
    w, v = np.linalg.eigh(m)
    if w.min() <= 0:
        raise ValueError(f"logarithm undefined: non-positive eigenvalue {w.min():.3g}")
    lm = (v * np.log(w)) @ v.T
    h = g_half @ lm @ g_half
    h = 0.5 * (h + h.T)
    if j is not None:
        defect = np.max(np.abs(h + j.T @ h @ j))
        if defect > COMPAT_TOL * (1 + np.max(np.abs(h))):
            raise CompatibilityError(
                f"recovered h is not J-anti-invariant (defect {defect:.3g})"
            )
    return h


def check_compatibility(g, omega, tol=COMPAT_TOL):
    """The unique J with g(X, Y) = omega(X, JY), verified almost-complex.

    Returns J; raises CompatibilityError (with the J^2+I and isometry defect
    sizes) when the pair is not compatible.  Rational g, omega run exactly.
    """
    ex = _is_exact_pair(g, omega)
    if ex:
        n = _check_square(g, "g")
        if np.asarray(omega).shape != (n, n):
            raise ValueError("dimension mismatch between g and omega")
        if any(v != 0 for v in (omega + omega.T).flat):
            raise ValueError("omega is not skew-symmetric")
        try:
            j = exact.mat_inv(omega) @ g
        except ZeroDivisionError:
            raise CompatibilityError("omega is degenerate") from None
        d_acs = j @ j + exact.eye(n)
        d_iso = j.T @ g @ j - g
        if any(v != 0 for v in d_acs.flat) or any(v != 0 for v in d_iso.flat):
            raise CompatibilityError(
                "derived J fails compatibility: "
                f"max|J^2+I| = {np.max(np.abs(exact.to_float(d_acs)))}, "
                f"max|J^T g J - g| = {np.max(np.abs(exact.to_float(d_iso)))}"
            )
        return j
    g = check_metric(g)
    omega = np.asarray(exact.to_float(omega) if exact.is_exact(omega) else omega, dtype=float)
    n = _check_square(omega, "omega")
    if g.shape != omega.shape:
        raise ValueError("dimension mismatch between g and omega")
    if np.max(np.abs(omega + omega.T)) > tol:
        raise ValueError("omega is not skew-symmetric")
    try:
        j = np.linalg.solve(omega, g)
    except np.linalg.LinAlgError:
        raise CompatibilityError("omega is degenerate") from None
    if abs(np.linalg.det(omega)) < 1e-300:
        raise CompatibilityError("omega is degenerate")
    scale = 1 + np.max(np.abs(g))
    d_acs = np.max(np.abs(j @ j + np.eye(n)))
    d_iso = np.max(np.abs(j.T @ g @ j - g))
    if d_acs > tol * scale or d_iso > tol * scale:
        raise CompatibilityError(
            f"derived J fails compatibility: max|J^2+I| = {d_acs:.3g}, "
            f"max|J^T g J - g| = {d_iso:.3g} (tol {tol:g})"
        )
    return j


def cutoff_profile(r1: float, r2: float):
    """Smooth monotone profile: 0 below r1, 1 above r2, C-infinity between.

    Built from E(u) = exp(-1/u) (u > 0, else 0) as B(u) = E(u)/(E(u)+E(1-u)),
    evaluated at u = (r - r1)/(r2 - r1); every derivative vanishes at both ends.
    """
    if not r2 > r1:
        raise ValueError("need r2 > r1")

    def bump_e(u):
        out = np.zeros_like(u, dtype=float)
        pos = u > 0
        with np.errstate(over="ignore"):
            out[pos] = np.exp(-1.0 / u[pos])
        return out

    def eta(r):
        r = np.asarray(r, dtype=float)
        u = np.clip((r - r1) / (r2 - r1), 0.0, 1.0)
        e1, e2 = bump_e(u), bump_e(1.0 - u)
        with np.errstate(invalid="ignore"):
            val = np.where(u <= 0, 0.0, np.where(u >= 1, 1.0, e1 / (e1 + e2)))
        return val if val.ndim else float(val)

    return eta


def cutoff_blend(g_outer, g_inner, eta, r, omega=None):
    """Pointwise g_inner . exp(eta(r) h) with h = log_recover(g_inner, g_outer).

    Fields are arrays of shape batch + (2n, 2n); r has the batch shape.  The
    blend equals g_inner where eta = 0 and reconstructs g_outer where eta = 1,
    staying SPD (and omega-compatible when omega is given) in between.
    """
    g_outer = np.asarray(g_outer, dtype=float)
    g_inner = np.asarray(g_inner, dtype=float)
    if g_outer.shape != g_inner.shape:
        raise ValueError("field shapes differ")
    batch = g_outer.shape[:-2]
    r = np.broadcast_to(np.asarray(r, dtype=float), batch)
    eta_vals = np.broadcast_to(np.asarray(eta(r), dtype=float), batch)
    out = np.empty_like(g_inner)
    for idx in np.ndindex(*batch) if batch else [()]:
        gi, go = g_inner[idx], g_outer[idx]
        h_full = log_recover(gi, go, omega)
        e = eta_vals[idx] if batch else float(eta_vals)
        out[idx] = gi if e == 0.0 else (go if e == 1.0 else exp_metric(gi, e * h_full))
        check_metric(out[idx], "blended metric")
        if omega is not None:
            check_compatibility(out[idx], omega)
    return out
