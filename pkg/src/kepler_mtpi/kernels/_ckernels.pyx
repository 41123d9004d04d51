# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepping kernels.

Mirror of ``_pykernels.py``: identical expressions in identical order, so the
two backends agree bit for bit. Built without fast-math or FMA contraction.
"""
from libc.math cimport sqrt

cdef int OK = 0
cdef int COLLAPSE = 1
cdef int SINGULAR = 2
cdef double SINGULAR_RADIUS = 1e-100
cdef double COLLAPSE_GUARD = 1e-14

cdef int METHOD_RK4 = 0
cdef int METHOD_LEAPFROG = 1


cdef inline int _mtpi_step(double* r, double* p, double* h, double* q,
                           double m, double k, double cos_d, double cos_2d) noexcept nogil:
    cdef double hh = h[0]
    cdef double c = hh / m
    cdef double r1x = r[0] + c * p[0]
    cdef double r1y = r[1] + c * p[1]
    cdef double r1z = r[2] + c * p[2]
    cdef double rn = sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
    cdef double r1n = sqrt(r1x * r1x + r1y * r1y + r1z * r1z)
    if not (rn >= SINGULAR_RADIUS and r1n >= SINGULAR_RADIUS):
        return SINGULAR
    cdef double lam = k * hh / (r1n * r1n * rn * cos_d)
    cdef double p1x = p[0] - lam * r1x
    cdef double p1y = p[1] - lam * r1y
    cdef double p1z = p[2] - lam * r1z
    cdef double den = 2.0 * rn * cos_2d / r1n - 1.0 + lam * hh / m
    if not den > COLLAPSE_GUARD:
        return COLLAPSE
    cdef double h1 = hh / den
    cdef double c1 = h1 / m
    cdef double r2x = r1x + c1 * p1x
    cdef double r2y = r1y + c1 * p1y
    cdef double r2z = r1z + c1 * p1z
    cdef double r2n = sqrt(r2x * r2x + r2y * r2y + r2z * r2z)
    cdef double s = r1n + r2n
    q[0] = (r2n * r1x + r1n * r2x) / s
    q[1] = (r2n * r1y + r1n * r2y) / s
    q[2] = (r2n * r1z + r1n * r2z) / s
    r[0] = r1x
    r[1] = r1y
    r[2] = r1z
    p[0] = p1x
    p[1] = p1y
    p[2] = p1z
    h[0] = h1
    return OK


def mtpi_step(double rx, double ry, double rz, double px, double py, double pz,
              double h, double m, double k, double cos_d, double cos_2d):
    cdef double r[3]
    cdef double p[3]
    cdef double q[3]
    r[0] = rx; r[1] = ry; r[2] = rz
    p[0] = px; p[1] = py; p[2] = pz
    cdef int status = _mtpi_step(r, p, &h, q, m, k, cos_d, cos_2d)
    if status != OK:
        return (status,) + (0.0,) * 10
    return (OK, r[0], r[1], r[2], p[0], p[1], p[2], h, q[0], q[1], q[2])


cdef inline void _write_row(double[:, ::1] out, Py_ssize_t row, Py_ssize_t n, double t,
                            double* q, double* p, double h) noexcept nogil:
    out[row, 0] = <double>n
    out[row, 1] = t
    out[row, 2] = q[0]
    out[row, 3] = q[1]
    out[row, 4] = q[2]
    out[row, 5] = p[0]
    out[row, 6] = p[1]
    out[row, 7] = p[2]
    out[row, 8] = h


def mtpi_propagate(double[::1] rbuf, double[::1] pbuf, double[::1] clock,
                   double m, double k, double cos_d, double cos_2d,
                   Py_ssize_t n_steps, Py_ssize_t stride, double[:, ::1] out,
                   Py_ssize_t row, Py_ssize_t n0):
    cdef double r[3]
    cdef double p[3]
    cdef double q[3]
    cdef double h = clock[0]
    cdef double t = clock[1]
    cdef double tc = clock[2]
    cdef double h_prev, inc, s, bp
    cdef Py_ssize_t j, n, done = 0, start = row
    cdef int status = OK
    r[0] = rbuf[0]; r[1] = rbuf[1]; r[2] = rbuf[2]
    p[0] = pbuf[0]; p[1] = pbuf[1]; p[2] = pbuf[2]
    with nogil:
        for j in range(1, n_steps + 1):
            h_prev = h
            status = _mtpi_step(r, p, &h, q, m, k, cos_d, cos_2d)
            if status != OK:
                break
            inc = 0.5 * (h_prev + h)
            s = t + inc
            bp = s - t
            tc = tc + ((t - (s - bp)) + (inc - bp))
            t = s
            done = j
            n = n0 + j
            if n % stride == 0 or j == n_steps:
                _write_row(out, row, n, t + tc, q, p, h)
                row += 1
    rbuf[0] = r[0]; rbuf[1] = r[1]; rbuf[2] = r[2]
    pbuf[0] = p[0]; pbuf[1] = p[1]; pbuf[2] = p[2]
    clock[0] = h
    clock[1] = t
    clock[2] = tc
    return status, done, row - start


cdef inline int _rk4(double* q, double* p, double dt, double m, double k) noexcept nogil:
    cdef double hdt = 0.5 * dt
    cdef double qx = q[0], qy = q[1], qz = q[2]
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double r, c, ax, ay, az, bx, by, bz, w
    cdef double k1qx, k1qy, k1qz, k1px, k1py, k1pz
    cdef double k2qx, k2qy, k2qz, k2px, k2py, k2pz
    cdef double k3qx, k3qy, k3qz, k3px, k3py, k3pz
    cdef double k4qx, k4qy, k4qz, k4px, k4py, k4pz

    r = sqrt(qx * qx + qy * qy + qz * qz)
    if not r >= SINGULAR_RADIUS:
        return SINGULAR
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
        return SINGULAR
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
        return SINGULAR
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
        return SINGULAR
    c = k / (r * r * r)
    k4qx = bx / m
    k4qy = by / m
    k4qz = bz / m
    k4px = -c * ax
    k4py = -c * ay
    k4pz = -c * az

    w = dt / 6.0
    q[0] = qx + w * (k1qx + 2.0 * k2qx + 2.0 * k3qx + k4qx)
    q[1] = qy + w * (k1qy + 2.0 * k2qy + 2.0 * k3qy + k4qy)
    q[2] = qz + w * (k1qz + 2.0 * k2qz + 2.0 * k3qz + k4qz)
    p[0] = px + w * (k1px + 2.0 * k2px + 2.0 * k3px + k4px)
    p[1] = py + w * (k1py + 2.0 * k2py + 2.0 * k3py + k4py)
    p[2] = pz + w * (k1pz + 2.0 * k2pz + 2.0 * k3pz + k4pz)
    return OK


cdef inline int _leapfrog(double* q, double* p, double dt, double m, double k) noexcept nogil:
    cdef double hdt = 0.5 * dt
    cdef double qx = q[0], qy = q[1], qz = q[2]
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double r, c, d
    r = sqrt(qx * qx + qy * qy + qz * qz)
    if not r >= SINGULAR_RADIUS:
        return SINGULAR
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
        return SINGULAR
    c = k / (r * r * r)
    q[0] = qx
    q[1] = qy
    q[2] = qz
    p[0] = px - hdt * (c * qx)
    p[1] = py - hdt * (c * qy)
    p[2] = pz - hdt * (c * qz)
    return OK


cdef inline int _composition4(double* q, double* p, double dt, double m, double k,
                              double w0, double w1) noexcept nogil:
    cdef int status = _leapfrog(q, p, w1 * dt, m, k)
    if status != OK:
        return status
    status = _leapfrog(q, p, w0 * dt, m, k)
    if status != OK:
        return status
    return _leapfrog(q, p, w1 * dt, m, k)


cdef object _pack(int status, double* q, double* p):
    if status != OK:
        return (status,) + (0.0,) * 6
    return (OK, q[0], q[1], q[2], p[0], p[1], p[2])


def rk4_step(double qx, double qy, double qz, double px, double py, double pz,
             double dt, double m, double k):
    cdef double q[3]
    cdef double p[3]
    q[0] = qx; q[1] = qy; q[2] = qz
    p[0] = px; p[1] = py; p[2] = pz
    return _pack(_rk4(q, p, dt, m, k), q, p)


def leapfrog_step(double qx, double qy, double qz, double px, double py, double pz,
                  double dt, double m, double k):
    cdef double q[3]
    cdef double p[3]
    q[0] = qx; q[1] = qy; q[2] = qz
    p[0] = px; p[1] = py; p[2] = pz
    return _pack(_leapfrog(q, p, dt, m, k), q, p)


def composition4_step(double qx, double qy, double qz, double px, double py, double pz,
                      double dt, double m, double k, double w0, double w1):
    cdef double q[3]
    cdef double p[3]
    q[0] = qx; q[1] = qy; q[2] = qz
    p[0] = px; p[1] = py; p[2] = pz
    return _pack(_composition4(q, p, dt, m, k, w0, w1), q, p)


def fixed_propagate(int method, double[::1] qbuf, double[::1] pbuf, double t0, double dt,
                    double m, double k, double w0, double w1,
                    Py_ssize_t n_steps, Py_ssize_t stride, double[:, ::1] out,
                    Py_ssize_t row, Py_ssize_t n0):
    cdef double q[3]
    cdef double p[3]
    cdef Py_ssize_t j, n, done = 0, start = row
    cdef int status = OK
    q[0] = qbuf[0]; q[1] = qbuf[1]; q[2] = qbuf[2]
    p[0] = pbuf[0]; p[1] = pbuf[1]; p[2] = pbuf[2]
    with nogil:
        for j in range(1, n_steps + 1):
            if method == METHOD_RK4:
                status = _rk4(q, p, dt, m, k)
            elif method == METHOD_LEAPFROG:
                status = _leapfrog(q, p, dt, m, k)
            else:
                status = _composition4(q, p, dt, m, k, w0, w1)
            if status != OK:
                break
            done = j
            n = n0 + j
            if n % stride == 0 or j == n_steps:
                _write_row(out, row, n, t0 + <double>n * dt, q, p, dt)
                row += 1
    qbuf[0] = q[0]; qbuf[1] = q[1]; qbuf[2] = q[2]
    pbuf[0] = p[0]; pbuf[1] = p[1]; pbuf[2] = p[2]
    return status, done, row - start
