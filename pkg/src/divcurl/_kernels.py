"""Compiled direct-summation loops for the volume and surface potentials.

Every loop parallelizes over evaluation points only; the accumulation
order for one point is the source order, so results do not depend on the
thread count.
"""

import numpy as np
from numba import njit, prange

INV4PI = 1.0 / (4.0 * np.pi)


@njit(parallel=True, cache=True)
def newton_far(ex, ey, ez, sx, sy, sz, vals, scale):
    """``out[i] = sum_j -scale v_j / (4 pi |y_j - x_i|)``, skipping ``y_j == x_i``."""
    ne = ex.shape[0]
    ns = sx.shape[0]
    nc = vals.shape[1]
    out = np.zeros((ne, nc))
    for i in prange(ne):
        acc = np.zeros(nc)
        xi, yi, zi = ex[i], ey[i], ez[i]
        for j in range(ns):
            dx = sx[j] - xi
            dy = sy[j] - yi
            dz = sz[j] - zi
            r2 = dx * dx + dy * dy + dz * dz
            if r2 > 0.0:
                k = -scale * INV4PI / np.sqrt(r2)
                for c in range(nc):
                    acc[c] += k * vals[j, c]
        for c in range(nc):
            out[i, c] = acc[c]
    return out


@njit(parallel=True, cache=True)
def cauchy_far(ex, ey, ez, sx, sy, sz, q, scale):
    """Teodorescu sum ``-sum_j E(y_j - x_i) q_j scale`` for quaternion data ``q``.

    With ``e = E(r) = -r / (4 pi |r|^3)`` the summand ``-e q`` equals
    ``(e . q_vec, -q0 e - e x q_vec)``.
    """
    ne = ex.shape[0]
    ns = sx.shape[0]
    out = np.zeros((ne, 4))
    for i in prange(ne):
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        a3 = 0.0
        xi, yi, zi = ex[i], ey[i], ez[i]
        for j in range(ns):
            dx = sx[j] - xi
            dy = sy[j] - yi
            dz = sz[j] - zi
            r2 = dx * dx + dy * dy + dz * dz
            if r2 > 0.0:
                s = -scale * INV4PI / (r2 * np.sqrt(r2))
                e1 = s * dx
                e2 = s * dy
                e3 = s * dz
                q0 = q[j, 0]
                q1 = q[j, 1]
                q2 = q[j, 2]
                q3 = q[j, 3]
                a0 += e1 * q1 + e2 * q2 + e3 * q3
                a1 += -q0 * e1 - (e2 * q3 - e3 * q2)
                a2 += -q0 * e2 - (e3 * q1 - e1 * q3)
                a3 += -q0 * e3 - (e1 * q2 - e2 * q1)
        out[i, 0] = a0
        out[i, 1] = a1
        out[i, 2] = a2
        out[i, 3] = a3
    return out


@njit(parallel=True, cache=True)
def near_correction(eidx, lookup, vals, offsets, weights):
    """``out[i] += sum_o W_o v[lookup[eidx_i + o]]`` over near-field offsets.

    ``weights`` has shape ``(n_offsets, nc_out, nc_in)`` so that one table
    serves both scalar kernels and the quaternion Cauchy product.
    """
    ne = eidx.shape[0]
    no = offsets.shape[0]
    nco = weights.shape[1]
    nci = weights.shape[2]
    nx, ny, nz = lookup.shape
    out = np.zeros((ne, nco))
    for i in prange(ne):
        for o in range(no):
            a = eidx[i, 0] + offsets[o, 0]
            b = eidx[i, 1] + offsets[o, 1]
            c = eidx[i, 2] + offsets[o, 2]
            if a < 0 or b < 0 or c < 0 or a >= nx or b >= ny or c >= nz:
                continue
            j = lookup[a, b, c]
            if j < 0:
                continue
            for p in range(nco):
                acc = 0.0
                for m in range(nci):
                    acc += weights[o, p, m] * vals[j, m]
                out[i, p] += acc
    return out


@njit(parallel=True, cache=True)
def single_layer_sum(ex, ey, ez, bx, by, bz, dens):
    """``out[i] = sum_b dens_b / (4 pi |y_b - x_i|)`` (weights folded into ``dens``)."""
    ne = ex.shape[0]
    nb = bx.shape[0]
    nc = dens.shape[1]
    out = np.zeros((ne, nc))
    for i in prange(ne):
        acc = np.zeros(nc)
        xi, yi, zi = ex[i], ey[i], ez[i]
        for j in range(nb):
            dx = bx[j] - xi
            dy = by[j] - yi
            dz = bz[j] - zi
            k = INV4PI / np.sqrt(dx * dx + dy * dy + dz * dz)
            for c in range(nc):
                acc[c] += k * dens[j, c]
        for c in range(nc):
            out[i, c] = acc[c]
    return out
