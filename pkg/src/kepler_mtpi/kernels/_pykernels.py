"""Pure-Python stepping kernels.

Reference arithmetic for every integrator in the package. The compiled
kernels in ``_ckernels.pyx`` evaluate the same expressions in the same order
and must agree bit for bit; keep the two files in sync.

Status codes: 0 ok, 1 step collapse, 2 singular (collision).
"""
from math import sqrt

OK = 0
COLLAPSE = 1
SINGULAR = 2

SINGULAR_RADIUS = 1e-100
COLLAPSE_GUARD = 1e-14

# output row layout: n, t, qx, qy, qz, px, py, pz, h
ROW_WIDTH = 9

METHOD_RK4 = 0
METHOD_LEAPFROG = 1
METHOD_COMPOSITION4 = 2


def mtpi_step(rx, ry, rz, px, py, pz, h, m, k, cos_d, cos_2d):
    """One MTPI step from (r_n, p_n, h_n).

    Returns ``(status, r1x, r1y, r1z, p1x, p1y, p1z, h1, qx, qy, qz)`` where
    ``q`` is the bisector position q_{n+1} built from r_{n+1} and r_{n+2}.
    """
    c = h / m
    r1x = rx + c * px
    r1y = ry + c * py
    r1z = rz + c * pz
    rn = sqrt(rx * rx + ry * ry + rz * rz)
    r1n = sqrt(r1x * r1x + r1y * r1y + r1z * r1z)
    if not (rn >= SINGULAR_RADIUS and r1n >= SINGULAR_RADIUS):
        return (SINGULAR,) + (0.0,) * 10
    lam = k * h / (r1n * r1n * rn * cos_d)
    p1x = px - lam * r1x
    p1y = py - lam * r1y
    p1z = pz - lam * r1z
    den = 2.0 * rn * cos_2d / r1n - 1.0 + lam * h / m
    if not den > COLLAPSE_GUARD:
        return (COLLAPSE,) + (0.0,) * 10
    h1 = h / den
    c1 = h1 / m
    r2x = r1x + c1 * p1x
    r2y = r1y + c1 * p1y
    r2z = r1z + c1 * p1z
    r2n = sqrt(r2x * r2x + r2y * r2y + r2z * r2z)
    s = r1n + r2n
    qx = (r2n * r1x + r1n * r2x) / s
    qy = (r2n * r1y + r1n * r2y) / s
    qz = (r2n * r1z + r1n * r2z) / s
    return (OK, r1x, r1y, r1z, p1x, p1y, p1z, h1, qx, qy, qz)


def two_sum_acc(t, tc, inc):
    """Compensated accumulation: returns (t + inc, updated correction)."""
    s = t + inc
    bp = s - t
    tc += (t - (s - bp)) + (inc - bp)
    return s, tc


def mtpi_propagate(r, p, clock, m, k, cos_d, cos_2d, n_steps, stride, out, row, n0):
    """Run ``n_steps`` MTPI steps in place.

    ``r``, ``p`` are length-3 buffers, ``clock`` holds ``(h, t, t_correction)``.
    Rows are written to ``out`` from index ``row`` whenever the global step
    index is a multiple of ``stride`` and after the last step.

    Returns ``(status, steps_done, rows_written)``.
    """
    rx, ry, rz = r[0], r[1], r[2]
    px, py, pz = p[0], p[1], p[2]
    h, t, tc = clock[0], clock[1], clock[2]
    done = 0
    status = OK
    start = row
    for j in range(1, n_steps + 1):
        res = mtpi_step(rx, ry, rz, px, py, pz, h, m, k, cos_d, cos_2d)
        status = res[0]
        if status != OK:
            break
        _, rx, ry, rz, px, py, pz, h1, qx, qy, qz = res
        t, tc = two_sum_acc(t, tc, 0.5 * (h + h1))
        h = h1
        done = j
        n = n0 + j
        if n % stride == 0 or j == n_steps:
            o = out[row]
            o[0] = n
            o[1] = t + tc
            o[2] = qx
            o[3] = qy
            o[4] = qz
            o[5] = px
            o[6] = py
            o[7] = pz
            o[8] = h
            row += 1
    r[0], r[1], r[2] = rx, ry, rz
    p[0], p[1], p[2] = px, py, pz
    clock[0], clock[1], clock[2] = h, t, tc
    return status, done, row - start


def rk4_step(qx, qy, qz, px, py, pz, dt, m, k):
    """Classical RK4 step. Returns ``(status, qx, qy, qz, px, py, pz)``."""
    hdt = 0.5 * dt
    r = sqrt(qx * qx + qy * qy + qz * qz)
    if not r >= SINGULAR_RADIUS:
        return (SINGULAR,) + (0.0,) * 6
    c = k / (r * r * r)
    k1qx = px / m
    k1qy = py / m
    k1qz = pz / m
    k1px = -c * qx
    k1py = -c * qy
    k1pz = -c * qz

    ax = qx + hdt * k1qx
    ay = qy + hdt * k1qy
    az = qz + hdt * k1qz
    bx = px + hdt * k1px
    by = py + hdt * k1py
    bz = pz + hdt * k1pz
    r = sqrt(ax * ax + ay * ay + az * az)
    if not r >= SINGULAR_RADIUS:
        return (SINGULAR,) + (0.0,) * 6
    c = k / (r * r * r)
    k2qx = bx / m
    k2qy = by / m
    k2qz = bz / m
    k2px = -c * ax
    k2py = -c * ay
    k2pz = -c * az

    ax = qx + hdt * k2qx
    ay = qy + hdt * k2qy
    az = qz + hdt * k2qz
    bx = px + hdt * k2px
    by = py + hdt * k2py
    bz = pz + hdt * k2pz
    r = sqrt(ax * ax + ay * ay + az * az)
    if not r >= SINGULAR_RADIUS:
        return (SINGULAR,) + (0.0,) * 6
    c = k / (r * r * r)
    k3qx = bx / m
    k3qy = by / m
    k3qz = bz / m
    k3px = -c * ax
    k3py = -c * ay
    k3pz = -c * az

    ax = qx + dt * k3qx
    ay = qy + dt * k3qy
    az = qz + dt * k3qz
    bx = px + dt * k3px
    by = py + dt * k3py
    bz = pz + dt * k3pz
    r = sqrt(ax * ax + ay * ay + az * az)
    if not r >= SINGULAR_RADIUS:
        return (SINGULAR,) + (0.0,) * 6
    c = k / (r * r * r)
    k4qx = bx / m
    k4qy = by / m
    k4qz = bz / m
    k4px = -c * ax
    k4py = -c * ay
    k4pz = -c * az

    w = dt / 6.0
    return (
        OK,
        qx + w * (k1qx + 2.0 * k2qx + 2.0 * k3qx + k4qx),
        qy + w * (k1qy + 2.0 * k2qy + 2.0 * k3qy + k4qy),
        qz + w * (k1qz + 2.0 * k2qz + 2.0 * k3qz + k4qz),
        px + w * (k1px + 2.0 * k2px + 2.0 * k3px + k4px),
        py + w * (k1py + 2.0 * k2py + 2.0 * k3py + k4py),
        pz + w * (k1pz + 2.0 * k2pz + 2.0 * k3pz + k4pz),
    )


def leapfrog_step(qx, qy, qz, px, py, pz, dt, m, k):
    """Kick-drift-kick leapfrog. Returns ``(status, qx, qy, qz, px, py, pz)``."""
    hdt = 0.5 * dt
    r = sqrt(qx * qx + qy * qy + qz * qz)
    if not r >= SINGULAR_RADIUS:
        return (SINGULAR,) + (0.0,) * 6
    c = k / (r * r * r)
    px = px - hdt * (c * qx)
    py = py - hdt * (c * qy)
    pz = pz - hdt * (c * qz)
    d = dt / m
    qx = qx + d * px
    qy = qy + d * py
    qz = qz + d * pz
    r = sqrt(qx * qx + qy * qy + qz * qz)
    if not r >= SINGULAR_RADIUS:
        return (SINGULAR,) + (0.0,) * 6
    c = k / (r * r * r)
    px = px - hdt * (c * qx)
    py = py - hdt * (c * qy)
    pz = pz - hdt * (c * qz)
    return (OK, qx, qy, qz, px, py, pz)


def composition4_step(qx, qy, qz, px, py, pz, dt, m, k, w0, w1):
    """Triple-jump composition of leapfrog with substeps w1 dt, w0 dt, w1 dt."""
    res = leapfrog_step(qx, qy, qz, px, py, pz, w1 * dt, m, k)
    if res[0] != OK:
        return res
    res = leapfrog_step(res[1], res[2], res[3], res[4], res[5], res[6], w0 * dt, m, k)
    if res[0] != OK:
        return res
    return leapfrog_step(res[1], res[2], res[3], res[4], res[5], res[6], w1 * dt, m, k)


def fixed_propagate(method, q, p, t0, dt, m, k, w0, w1, n_steps, stride, out, row, n0):
    """Run ``n_steps`` fixed steps in place; epoch of global step n is ``t0 + n*dt``.

    Same buffer and row conventions as :func:`mtpi_propagate`.
    """
    qx, qy, qz = q[0], q[1], q[2]
    px, py, pz = p[0], p[1], p[2]
    done = 0
    status = OK
    start = row
    for j in range(1, n_steps + 1):
        if method == METHOD_RK4:
            res = rk4_step(qx, qy, qz, px, py, pz, dt, m, k)
        elif method == METHOD_LEAPFROG:
            res = leapfrog_step(qx, qy, qz, px, py, pz, dt, m, k)
        else:
            res = composition4_step(qx, qy, qz, px, py, pz, dt, m, k, w0, w1)
        status = res[0]
        if status != OK:
            break
        _, qx, qy, qz, px, py, pz = res
        done = j
        n = n0 + j
        if n % stride == 0 or j == n_steps:
            o = out[row]
            o[0] = n
            o[1] = t0 + n * dt
            o[2] = qx
            o[3] = qy
            o[4] = qz
            o[5] = px
            o[6] = py
            o[7] = pz
            o[8] = dt
            row += 1
    q[0], q[1], q[2] = qx, qy, qz
    p[0], p[1], p[2] = px, py, pz
    return status, done, row - start
