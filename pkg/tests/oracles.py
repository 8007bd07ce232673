"""Independent oracles and samplers shared by the test suite.

Everything here is deliberately decoupled from the library code paths it
checks: finite differences instead of analytic gradients, matrix
exponentials instead of the ODE solver, explicit null-space formulas instead
of the SVD kernel, polygon areas instead of the lifted coordinates.
"""

import numpy as np
from scipy.linalg import expm

from carnot_extremals import Ellipsoid, LpBall, SkewMatrix, TranslatedEllipsoid


def fd_gradient(body, h, step=1e-6):
    """Central-difference gradient of the support function."""
    h = np.asarray(h, dtype=float)
    grad = np.empty_like(h)
    for i in range(h.size):
        e = np.zeros_like(h)
        e[i] = step
        grad[i] = (body.support(h + e) - body.support(h - e)) / (2.0 * step)
    return grad


def brute_force_support(body, h, n_theta=600, n_phi=1200):
    """Max of <v, h> over a dense sample of the body boundary (k = 3 only)."""
    h = np.asarray(h, dtype=float)
    th = np.linspace(0.0, np.pi, n_theta)
    ph = np.linspace(0.0, 2.0 * np.pi, n_phi)
    t, p = np.meshgrid(th, ph, indexing="ij")
    dirs = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)
    dirs = dirs.reshape(-1, 3)
    if isinstance(body, LpBall):
        scale = body.radius / np.linalg.norm(dirs, ord=body.p, axis=1)
        points = dirs * scale[:, None]
    elif isinstance(body, Ellipsoid):
        # v = A^(1/2) s for unit s sweeps the boundary v^T A^-1 v = 1
        w, q = np.linalg.eigh(body.shape_matrix)
        points = dirs @ (q * np.sqrt(w)) @ q.T
    elif isinstance(body, TranslatedEllipsoid):
        w, q = np.linalg.eigh(body.shape_matrix)
        points = body.center + dirs @ (q * np.sqrt(w)) @ q.T
    else:
        raise TypeError(type(body))
    return float((points @ h).max())


def so3_kernel_direction(matrix):
    """Unit kernel vector of a nonzero 3x3 skew matrix (its rotation axis)."""
    axis = np.array([-matrix[1, 2], matrix[0, 2], -matrix[0, 1]])
    return axis / np.linalg.norm(axis)


def linear_flow(matrix, h0, t):
    """exp(-t M) h0 via scaling-and-squaring, independent of the integrator."""
    return expm(-t * np.asarray(matrix)) @ np.asarray(h0, dtype=float)


def shoelace_area(xs, ys):
    """Absolute polygon area of a sampled closed curve."""
    return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))


def random_spd(rng, k, lo=0.3, hi=3.0):
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    return q @ np.diag(rng.uniform(lo, hi, k)) @ q.T


def random_skew(rng, k, sigma_lo=0.3, sigma_hi=3.0):
    """Random nonzero skew matrix with largest singular value in a sane band."""
    m = np.zeros((k, k))
    iu = np.triu_indices(k, 1)
    m[iu] = rng.standard_normal(len(iu[0]))
    m = m - m.T
    target = rng.uniform(sigma_lo, sigma_hi)
    m *= target / np.linalg.norm(m, 2)
    return SkewMatrix(m)


def random_body(rng, k, family):
    if family == "ellipsoid":
        return Ellipsoid(random_spd(rng, k))
    if family == "lp_ball":
        return LpBall(p=rng.uniform(1.3, 4.0), radius=rng.uniform(0.5, 2.0))
    if family == "translated_ellipsoid":
        a = random_spd(rng, k)
        c = rng.standard_normal(k)
        depth = c @ np.linalg.solve(a, c)
        c *= np.sqrt(rng.uniform(0.05, 0.5) / depth)
        return TranslatedEllipsoid(a, c)
    raise ValueError(family)


FAMILIES = ("ellipsoid", "lp_ball", "translated_ellipsoid")


def random_covector(rng, k, lo=0.1, hi=10.0, min_component=0.0):
    while True:
        d = rng.standard_normal(k)
        norm = np.linalg.norm(d)
        if norm > 0.0 and np.abs(d).min() / norm >= min_component:
            return d / norm * 10.0 ** rng.uniform(np.log10(lo), np.log10(hi))


def aligned_covector(body, a):
    """Initial covector with grad H parallel to a, rescaled to H = 1.

    For an ellipsoid grad H is parallel to a along A^-1 a; for an lp ball the
    dual-exponent power map inverts the gradient direction.
    """
    a = np.asarray(a, dtype=float)
    if isinstance(body, Ellipsoid):
        h = np.linalg.solve(body.shape_matrix, a)
    elif isinstance(body, LpBall):
        h = np.sign(a) * np.abs(a) ** (body.p - 1.0)
    else:
        raise TypeError(f"no closed-form aligned covector for {type(body).__name__}")
    return h / body.support(h)
