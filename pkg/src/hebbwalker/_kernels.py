"""Optional numba-accelerated inner loops.

The per-step math (ABCD update, normalization, walker step geometry) is
call-overhead bound in numpy at these array sizes, so the hot paths use jitted
loops when numba is importable and fall back to the vectorized numpy
implementations otherwise. Both implementations compute the same expressions;
they may differ in the last ulp where reduction order differs (sums in the
std normalization and plane fit), which is far inside every contract
tolerance. Either path is individually deterministic, and a run never mixes
paths.
"""

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return wrap


@njit(cache=True)
def hebbian_update_inplace(w, a, b, c, d, eta, pre, post):
    rows, cols = w.shape
    for j in range(rows):
        pj = post[j]
        for i in range(cols):
            pi = pre[i]
            w[j, i] += eta[j, i] * (a[j, i] * pi * pj + b[j, i] * pi + c[j, i] * pj + d[j, i])


@njit(cache=True)
def normalize_max_inplace(w):
    rows, cols = w.shape
    m = 0.0
    for j in range(rows):
        for i in range(cols):
            v = abs(w[j, i])
            if v > m:
                m = v
    if m > 0.0:
        for j in range(rows):
            for i in range(cols):
                w[j, i] /= m


@njit(cache=True)
def normalize_std_inplace(w):
    rows, cols = w.shape
    n = rows * cols
    total = 0.0
    for j in range(rows):
        for i in range(cols):
            total += w[j, i]
    mean = total / n
    var = 0.0
    for j in range(rows):
        for i in range(cols):
            dv = w[j, i] - mean
            var += dv * dv
    sd = math.sqrt(var / n)
    if sd > 0.0:
        for j in range(rows):
            for i in range(cols):
                w[j, i] = (w[j, i] - mean) / sd
    else:
        for j in range(rows):
            for i in range(cols):
                w[j, i] = 0.0


@njit(cache=True)
def _fk_fill(hips, azimuths, yaw_signs, segments, gamma_base, q, out):
    legs, joints = q.shape
    for l in range(legs):
        az = azimuths[l] + yaw_signs[l] * q[l, 0]
        reach = segments[l, 0]
        drop = 0.0
        acc = 0.0
        for j in range(1, joints):
            acc += q[l, j]
            g = gamma_base[j - 1] + acc
            reach += segments[l, j] * math.cos(g)
            drop += segments[l, j] * math.sin(g)
        out[l, 0] = hips[l, 0] + reach * math.cos(az)
        out[l, 1] = hips[l, 1] + reach * math.sin(az)
        out[l, 2] = -drop


@njit(cache=True)
def _terrain_height(grid, ox, oy, block, has_grid, x, y):
    if not has_grid:
        return 0.0
    ix = int(math.floor((x - ox) / block))
    iy = int(math.floor((y - oy) / block))
    if ix < 0 or iy < 0 or ix >= grid.shape[0] or iy >= grid.shape[1]:
        return 0.0
    return grid[ix, iy]


@njit(cache=True)
def _wrap_clip(a):
    v = (a + math.pi) % (2.0 * math.pi) - math.pi
    if v > 3.14:
        v = 3.14
    elif v < -3.14:
        v = -3.14
    return v


@njit(cache=True)
def walker_step_core(q, targets, rates, frozen, position, orientation,
                     hips, azimuths, yaw_signs, segments, gamma_base,
                     grid, grid_ox, grid_oy, grid_block, has_grid,
                     tol, gravity_drop, clearance, relax,
                     q_new, pos_out, orient_out, contacts_out):
    """One control step after action clamping; fills the *_out arrays.

    Mirrors walker._step_core_py exactly; see there (and walker.step) for the
    model description.
    """
    legs, joints = q.shape

    for l in range(legs):
        if frozen[l]:
            for j in range(joints):
                q_new[l, j] = q[l, j]
        else:
            for j in range(joints):
                delta = targets[l, j] - q[l, j]
                if delta > rates[j]:
                    delta = rates[j]
                elif delta < -rates[j]:
                    delta = -rates[j]
                v = q[l, j] + delta
                if v > 1.0:
                    v = 1.0
                elif v < -1.0:
                    v = -1.0
                q_new[l, j] = v

    feet_old = np.empty((legs, 3))
    feet_new = np.empty((legs, 3))
    _fk_fill(hips, azimuths, yaw_signs, segments, gamma_base, q, feet_old)
    _fk_fill(hips, azimuths, yaw_signs, segments, gamma_base, q_new, feet_new)

    roll = orientation[0]
    pitch = orientation[1]
    yaw = orientation[2]
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    r00 = cy * cp
    r01 = cy * sp * sr - sy * cr
    r02 = cy * sp * cr + sy * sr
    r10 = sy * cp
    r11 = sy * sp * sr + cy * cr
    r12 = sy * sp * cr - cy * sr
    r20 = -sp
    r21 = cp * sr
    r22 = cp * cr

    stance_count = 0
    mean_dx = 0.0
    mean_dy = 0.0
    mean_dz = 0.0
    sweep_sum = 0.0
    ground_sum = 0.0
    ground_min = 0.0
    ground_max = 0.0
    # plane-fit accumulators over stance points (world xy, terrain height)
    sxx = 0.0
    sxy = 0.0
    sx = 0.0
    syy = 0.0
    sy_ = 0.0
    sn = 0.0
    sxh = 0.0
    syh = 0.0
    sh = 0.0
    for l in range(legs):
        bx, by, bz = feet_old[l, 0], feet_old[l, 1], feet_old[l, 2]
        wx = position[0] + r00 * bx + r01 * by + r02 * bz
        wy = position[1] + r10 * bx + r11 * by + r12 * bz
        wz = position[2] + r20 * bx + r21 * by + r22 * bz
        h = _terrain_height(grid, grid_ox, grid_oy, grid_block, has_grid, wx, wy)
        if wz <= h + tol:
            if stance_count == 0:
                ground_min = h
                ground_max = h
            elif h < ground_min:
                ground_min = h
            elif h > ground_max:
                ground_max = h
            stance_count += 1
            mean_dx += feet_new[l, 0] - bx
            mean_dy += feet_new[l, 1] - by
            mean_dz += feet_new[l, 2] - bz
            cross = bx * feet_new[l, 1] - by * feet_new[l, 0]
            dot = bx * feet_new[l, 0] + by * feet_new[l, 1]
            sweep_sum += math.atan2(cross, dot)
            ground_sum += h
            sxx += wx * wx
            sxy += wx * wy
            sx += wx
            syy += wy * wy
            sy_ += wy
            sn += 1.0
            sxh += wx * h
            syh += wy * h
            sh += h

    px, py, pz = position[0], position[1], position[2]
    slope_a = 0.0
    slope_b = 0.0
    if stance_count > 0:
        mean_dx /= stance_count
        mean_dy /= stance_count
        mean_dz /= stance_count
        px -= r00 * mean_dx + r01 * mean_dy + r02 * mean_dz
        py -= r10 * mean_dx + r11 * mean_dy + r12 * mean_dz
        pz -= r20 * mean_dx + r21 * mean_dy + r22 * mean_dz
        yaw += sweep_sum / stance_count
        if stance_count >= 3 and ground_max > ground_min:
            # Cramer solve of the 3x3 normal equations for z = a*x + b*y + c
            a11, a12, a13 = sxx, sxy, sx
            a21, a22, a23 = sxy, syy, sy_
            a31, a32, a33 = sx, sy_, sn
            det = (a11 * (a22 * a33 - a23 * a32)
                   - a12 * (a21 * a33 - a23 * a31)
                   + a13 * (a21 * a32 - a22 * a31))
            if abs(det) > 1e-18:
                slope_a = (sxh * (a22 * a33 - a23 * a32)
                           - a12 * (syh * a33 - a23 * sh)
                           + a13 * (syh * a32 - a22 * sh)) / det
                slope_b = (a11 * (syh * a33 - a23 * sh)
                           - sxh * (a21 * a33 - a23 * a31)
                           + a13 * (a21 * sh - syh * a31)) / det
    else:
        pz -= gravity_drop

    cy2, sy2 = math.cos(yaw), math.sin(yaw)
    pitch_target = -math.atan(slope_a * cy2 + slope_b * sy2)
    roll_target = math.atan(-slope_a * sy2 + slope_b * cy2)
    roll += relax * (roll_target - roll)
    pitch += relax * (pitch_target - pitch)

    if stance_count > 0:
        z_target = ground_sum / stance_count + clearance
        pz += relax * (z_target - pz)

    pos_out[0] = px
    pos_out[1] = py
    pos_out[2] = pz
    orient_out[0] = _wrap_clip(roll)
    orient_out[1] = _wrap_clip(pitch)
    orient_out[2] = _wrap_clip(yaw)

    cr, sr = math.cos(orient_out[0]), math.sin(orient_out[0])
    cp, sp = math.cos(orient_out[1]), math.sin(orient_out[1])
    cy, sy = math.cos(orient_out[2]), math.sin(orient_out[2])
    n00 = cy * cp
    n01 = cy * sp * sr - sy * cr
    n02 = cy * sp * cr + sy * sr
    n10 = sy * cp
    n11 = sy * sp * sr + cy * cr
    n12 = sy * sp * cr - cy * sr
    n20 = -sp
    n21 = cp * sr
    n22 = cp * cr
    for l in range(legs):
        bx, by, bz = feet_new[l, 0], feet_new[l, 1], feet_new[l, 2]
        wx = px + n00 * bx + n01 * by + n02 * bz
        wy = py + n10 * bx + n11 * by + n12 * bz
        wz = pz + n20 * bx + n21 * by + n22 * bz
        h = _terrain_height(grid, grid_ox, grid_oy, grid_block, has_grid, wx, wy)
        contacts_out[l] = 1 if wz <= h + tol else 0
