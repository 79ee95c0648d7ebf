"""Real spherical harmonics as exact Cartesian polynomials, plus sphere rules.

Harmonics are built once per (l, m) as homogeneous degree-l polynomials in
(x, y, z) with float coefficients assembled from exact integer/rational data,
so values, gradients and restrictions to the unit sphere are all evaluated
from the same tables.  Normalization is unit L2 norm on the sphere; the
"Racah" rescaling sqrt(4*pi/(2l+1)) used by the hydrogenic orbitals is exposed
separately.

Index convention: m in {-l, ..., l}; m > 0 pairs with cos(m*phi)-type
polynomials, m < 0 with sin(|m|*phi)-type, built from Re/Im of (x+iy)^m.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

# Coefficient growth in the closed-form tables is factorial in l; beyond this
# degree float64 accumulation starts to lose the last digits.
LMAX_SUPPORTED = 24


def _poly_mul(p, q):
    out = {}
    for (i1, j1, k1), c1 in p.items():
        for (i2, j2, k2), c2 in q.items():
            key = (i1 + i2, j1 + j2, k1 + k2)
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def _poly_scale(p, s):
    return {k: c * s for k, c in p.items()}


def _poly_add(p, q):
    out = dict(p)
    for k, c in q.items():
        out[k] = out.get(k, 0.0) + c
    return {k: c for k, c in out.items() if c != 0.0}


@lru_cache(maxsize=None)
def _sector(m):
    """Return (A_m, B_m) with A_m = Re (x+iy)^m, B_m = Im (x+iy)^m."""
    A = {(0, 0, 0): 1.0}
    B = {}
    x = {(1, 0, 0): 1.0}
    y = {(0, 1, 0): 1.0}
    for _ in range(m):
        A, B = (
            _poly_add(_poly_mul(x, A), _poly_scale(_poly_mul(y, B), -1.0)),
            _poly_add(_poly_mul(x, B), _poly_mul(y, A)),
        )
    return A, B


@lru_cache(maxsize=None)
def solid_harmonic(l, m):
    """Monomial table {(i,j,k): coeff} of the degree-l real solid harmonic.

    The polynomial equals r**l * Y_lm(omega) with Y_lm real and orthonormal
    in L2(S^2).
    """
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid harmonic indices (l={l}, m={m})")
    if l > LMAX_SUPPORTED:
        raise ValueError(f"l={l} exceeds supported maximum {LMAX_SUPPORTED}")
    ma = abs(m)
    r2 = {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0}
    # Pi_l^m(z, r^2) = sum_k gamma_lk r^{2k} z^{l-2k-m}
    pi_poly = {}
    for k in range((l - ma) // 2 + 1):
        gamma = (
            (-1) ** k
            * 2.0 ** (-l)
            * math.comb(l, k)
            * math.comb(2 * l - 2 * k, l)
            * math.factorial(l - 2 * k)
            / math.factorial(l - 2 * k - ma)
        )
        term = {(0, 0, l - 2 * k - ma): gamma}
        for _ in range(k):
            term = _poly_mul(term, r2)
        pi_poly = _poly_add(pi_poly, term)
    if ma == 0:
        norm = math.sqrt((2 * l + 1) / (4 * math.pi))
        return _poly_scale(pi_poly, norm)
    norm = math.sqrt(
        (2 * l + 1) / (2 * math.pi) * math.factorial(l - ma) / math.factorial(l + ma)
    )
    A, B = _sector(ma)
    sector = A if m > 0 else B
    return _poly_scale(_poly_mul(pi_poly, sector), norm)


@lru_cache(maxsize=None)
def _solid_harmonic_grad(l, m):
    p = solid_harmonic(l, m)
    grads = []
    for axis in range(3):
        g = {}
        for key, c in p.items():
            if key[axis] == 0:
                continue
            nk = list(key)
            nk[axis] -= 1
            g[tuple(nk)] = g.get(tuple(nk), 0.0) + c * key[axis]
        grads.append(g)
    return tuple(grads)


def _poly_eval(p, pts):
    pts = np.asarray(pts, dtype=float)
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
    out = np.zeros(np.broadcast(x, y, z).shape)
    for (i, j, k), c in p.items():
        out += c * x**i * y**j * z**k
    return out


def eval_solid_harmonic(l, m, points):
    """Evaluate r^l Y_lm at Cartesian points of shape (..., 3)."""
    return _poly_eval(solid_harmonic(l, m), points)


def eval_solid_harmonic_gradient(l, m, points):
    """Gradient of the solid harmonic polynomial, shape (..., 3)."""
    gx, gy, gz = _solid_harmonic_grad(l, m)
    return np.stack(
        [_poly_eval(gx, points), _poly_eval(gy, points), _poly_eval(gz, points)],
        axis=-1,
    )


def eval_sph_harmonic(l, m, unit_vectors):
    """Y_lm on unit vectors (shape (..., 3), assumed normalized)."""
    return eval_solid_harmonic(l, m, unit_vectors)


def racah_factor(l):
    """Rescaling from orthonormal Y_lm to the convention with C_00 = 1."""
    return math.sqrt(4.0 * math.pi / (2 * l + 1))


def lm_pairs(lmax):
    """All (l, m) with l <= lmax, m = -l..l, in row-major order."""
    return [(l, m) for l in range(lmax + 1) for m in range(-l, l + 1)]


def sphere_quadrature(lmax):
    """Gauss-Legendre x uniform-azimuth product rule on S^2.

    Exact for spherical polynomials of degree <= 2*lmax + 1, which makes
    analysis of band-limited functions of degree lmax exact (products
    Y_lm * Y_l'm' have degree <= 2*lmax).

    Returns (points, weights): points (n, 3) unit vectors, weights summing
    to 4*pi.
    """
    ntheta = lmax + 1
    nphi = 2 * lmax + 2
    ct, wt = leggauss(ntheta)
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    st = np.sqrt(1.0 - ct**2)
    pts = np.empty((ntheta * nphi, 3))
    w = np.empty(ntheta * nphi)
    idx = 0
    for i in range(ntheta):
        pts[idx : idx + nphi, 0] = st[i] * np.cos(phi)
        pts[idx : idx + nphi, 1] = st[i] * np.sin(phi)
        pts[idx : idx + nphi, 2] = ct[i]
        w[idx : idx + nphi] = wt[i] * (2.0 * np.pi / nphi)
        idx += nphi
    return pts, w


def sphere_rule_26():
    """Degree-7 octahedral 26-point rule on S^2 (weights sum to 4*pi).

    Node families: 6 vertices, 12 edge midpoints, 8 face centers of the
    octahedron, with weights 40/840, 32/840, 27/840 of the sphere area.
    """
    pts = []
    wts = []
    for s in (+1.0, -1.0):
        for axis in range(3):
            v = [0.0, 0.0, 0.0]
            v[axis] = s
            pts.append(v)
            wts.append(40.0 / 840.0)
    c = 1.0 / math.sqrt(2.0)
    for i in range(3):
        for j in range(i + 1, 3):
            for si in (+1.0, -1.0):
                for sj in (+1.0, -1.0):
                    v = [0.0, 0.0, 0.0]
                    v[i] = si * c
                    v[j] = sj * c
                    pts.append(v)
                    wts.append(32.0 / 840.0)
    d = 1.0 / math.sqrt(3.0)
    for sx in (+1.0, -1.0):
        for sy in (+1.0, -1.0):
            for sz in (+1.0, -1.0):
                pts.append([sx * d, sy * d, sz * d])
                wts.append(27.0 / 840.0)
    return np.asarray(pts), 4.0 * np.pi * np.asarray(wts)


def sphere_area(dim):
    """Surface area of the unit sphere S^{dim-1} in R^dim."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


def uniform_sphere_points(dim, count, rng):
    """Uniform points on S^{dim-1}, shape (count, dim)."""
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
