# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry backend.

Mirrors risray._geom_py statement-for-statement: identical arithmetic
association (plain a*b + c*d + e*f forms, no dot-product reductions) and
identical candidate ordering, compiled with contraction disabled, so both
backends return bit-identical results. Scalar loops replace the numpy
vectorization and exit early per candidate, which only skips work for
candidates the numpy mask would discard anyway.
"""

import numpy as np

from libc.math cimport sqrt

cdef double EDGE_EPS = 1e-9

# longest supported reflection tuple; the tracer's own cap is far lower
DEF MAX_K = 8


cdef class _View:
    cdef double[:, ::1] origin
    cdef double[:, ::1] eu
    cdef double[:, ::1] ev
    cdef double[:, ::1] nrm
    cdef double[::1] pld
    cdef double[::1] inv_uu
    cdef double[::1] inv_vv
    cdef double[::1] su_eps
    cdef double[::1] sv_eps
    cdef Py_ssize_t n


cdef _View _view(pack):
    cdef _View v = _View()
    v.origin = pack.origin
    v.eu = pack.eu
    v.ev = pack.ev
    v.nrm = pack.normal
    v.pld = pack.plane_d
    v.inv_uu = pack.inv_uu
    v.inv_vv = pack.inv_vv
    v.su_eps = pack.su_eps
    v.sv_eps = pack.sv_eps
    v.n = pack.n_surfaces
    return v


cdef bint _crossing(_View v, double ax, double ay, double az,
                    double bx, double by, double bz,
                    Py_ssize_t excl_a, Py_ssize_t excl_b):
    cdef Py_ssize_t i
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double dz = bz - az
    cdef double seg_len = sqrt(dx * dx + dy * dy + dz * dz)
    cdef double tmin = EDGE_EPS / seg_len
    cdef double da, db, t, px, py, pz, ex, ey, ez, s, tt
    for i in range(v.n):
        if i == excl_a or i == excl_b:
            continue
        da = ax * v.nrm[i, 0] + ay * v.nrm[i, 1] + az * v.nrm[i, 2] - v.pld[i]
        db = bx * v.nrm[i, 0] + by * v.nrm[i, 1] + bz * v.nrm[i, 2] - v.pld[i]
        if not (da * db < 0.0):
            continue
        t = da / (da - db)
        if not (t > tmin and t < 1.0 - tmin):
            continue
        px = ax + t * dx
        py = ay + t * dy
        pz = az + t * dz
        ex = px - v.origin[i, 0]
        ey = py - v.origin[i, 1]
        ez = pz - v.origin[i, 2]
        s = (ex * v.eu[i, 0] + ey * v.eu[i, 1] + ez * v.eu[i, 2]) * v.inv_uu[i]
        if not (s > v.su_eps[i] and s < 1.0 - v.su_eps[i]):
            continue
        tt = (ex * v.ev[i, 0] + ey * v.ev[i, 1] + ez * v.ev[i, 2]) * v.inv_vv[i]
        if not (tt > v.sv_eps[i] and tt < 1.0 - v.sv_eps[i]):
            continue
        return True
    return False


def any_crossing(pack, a, b, excl_a, excl_b):
    """True if segment (a, b) crosses some facet interior.

    Same contract as the numpy backend: excl_a/excl_b suppress endpoint
    facets, crossings within EDGE_EPS of an endpoint or a facet edge do
    not count.
    """
    if pack.n_surfaces == 0:
        return False
    cdef _View v = _view(pack)
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    return bool(_crossing(v, av[0], av[1], av[2], bv[0], bv[1], bv[2],
                          excl_a, excl_b))


cdef int _try_tuple(_View v, double txx, double txy, double txz,
                    double rxx, double rxy, double rxz,
                    Py_ssize_t* tup, Py_ssize_t k, bint check_blocking,
                    double* verts):
    """Validate one candidate tuple. On success fill verts with the
    k+2 polyline vertices (tx, reflections, rx) and return 1."""
    cdef double img[MAX_K * 3]
    cdef Py_ssize_t j, si, seg, ea, eb
    cdef double ix, iy, iz, nx, ny, nz, d, sd
    cdef double cx, cy, cz, gx, gy, gz, sa, sb, t
    cdef double px, py, pz, ex, ey, ez, s, tt, se, te

    # forward images of tx through the tuple's planes
    ix = txx
    iy = txy
    iz = txz
    for j in range(k):
        si = tup[j]
        nx = v.nrm[si, 0]
        ny = v.nrm[si, 1]
        nz = v.nrm[si, 2]
        d = v.pld[si]
        sd = ix * nx + iy * ny + iz * nz - d
        ix = ix - 2.0 * sd * nx
        iy = iy - 2.0 * sd * ny
        iz = iz - 2.0 * sd * nz
        img[j * 3 + 0] = ix
        img[j * 3 + 1] = iy
        img[j * 3 + 2] = iz

    # backward pass from rx: intersect (image -> current) with each plane,
    # require a proper crossing and the point inside the finite facet
    cx = rxx
    cy = rxy
    cz = rxz
    for j in range(k - 1, -1, -1):
        si = tup[j]
        nx = v.nrm[si, 0]
        ny = v.nrm[si, 1]
        nz = v.nrm[si, 2]
        d = v.pld[si]
        gx = img[j * 3 + 0]
        gy = img[j * 3 + 1]
        gz = img[j * 3 + 2]
        sa = gx * nx + gy * ny + gz * nz - d
        sb = cx * nx + cy * ny + cz * nz - d
        if not (sa * sb < 0.0):
            return 0
        t = sa / (sa - sb)
        px = gx + t * (cx - gx)
        py = gy + t * (cy - gy)
        pz = gz + t * (cz - gz)
        ex = px - v.origin[si, 0]
        ey = py - v.origin[si, 1]
        ez = pz - v.origin[si, 2]
        s = (ex * v.eu[si, 0] + ey * v.eu[si, 1] + ez * v.eu[si, 2]) * v.inv_uu[si]
        tt = (ex * v.ev[si, 0] + ey * v.ev[si, 1] + ez * v.ev[si, 2]) * v.inv_vv[si]
        se = v.su_eps[si]
        te = v.sv_eps[si]
        if not (s >= -se and s <= 1.0 + se and tt >= -te and tt <= 1.0 + te):
            return 0
        cx = px
        cy = py
        cz = pz
        verts[(j + 1) * 3 + 0] = px
        verts[(j + 1) * 3 + 1] = py
        verts[(j + 1) * 3 + 2] = pz

    verts[0] = txx
    verts[1] = txy
    verts[2] = txz
    verts[(k + 1) * 3 + 0] = rxx
    verts[(k + 1) * 3 + 1] = rxy
    verts[(k + 1) * 3 + 2] = rxz

    if check_blocking:
        for seg in range(k + 1):
            ea = tup[seg - 1] if seg >= 1 else -1
            eb = tup[seg] if seg < k else -1
            if _crossing(v, verts[seg * 3 + 0], verts[seg * 3 + 1],
                         verts[seg * 3 + 2], verts[(seg + 1) * 3 + 0],
                         verts[(seg + 1) * 3 + 1], verts[(seg + 1) * 3 + 2],
                         ea, eb):
                return 0
    return 1


def enumerate_specular(pack, tx, rx, max_order, check_blocking):
    """Image-method specular path enumeration; same output contract and
    candidate order (reflection count, then lexicographic tuple) as the
    numpy backend."""
    cdef Py_ssize_t max_k = max_order
    if max_k > MAX_K:
        raise ValueError(
            f"compiled backend supports at most {MAX_K} reflections, "
            f"got {max_order}")

    cdef double[::1] txv = np.ascontiguousarray(tx, dtype=np.float64)
    cdef double[::1] rxv = np.ascontiguousarray(rx, dtype=np.float64)
    cdef double txx = txv[0], txy = txv[1], txz = txv[2]
    cdef double rxx = rxv[0], rxy = rxv[1], rxz = rxv[2]
    cdef _View v = _view(pack)
    cdef Py_ssize_t n_surf = v.n

    orders = []
    surfs = []
    points = []

    cdef bint blocked = 0
    if check_blocking:
        blocked = _crossing(v, txx, txy, txz, rxx, rxy, rxz, -1, -1)
    if (not check_blocking) or (not blocked):
        orders.append(0)

    cdef Py_ssize_t tup[MAX_K]
    cdef double verts[(MAX_K + 2) * 3]
    cdef Py_ssize_t k, pos, j
    cdef bint cb = check_blocking

    # odometer over index tuples with adjacent repeats skipped, ascending
    # reflection count then lexicographic: matches the numpy candidate order
    if n_surf > 0:
        for k in range(1, max_k + 1):
            if k > 1 and n_surf == 1:
                break
            for j in range(k):
                tup[j] = 0
            for j in range(1, k):
                if tup[j] == tup[j - 1]:
                    tup[j] = 1
            while True:
                if _try_tuple(v, txx, txy, txz, rxx, rxy, rxz,
                              tup, k, cb, verts):
                    orders.append(k)
                    for j in range(k):
                        surfs.append(tup[j])
                    pts = np.empty((k, 3))
                    for j in range(k):
                        pts[j, 0] = verts[(j + 1) * 3 + 0]
                        pts[j, 1] = verts[(j + 1) * 3 + 1]
                        pts[j, 2] = verts[(j + 1) * 3 + 2]
                    points.append(pts)
                # advance to the next valid tuple
                pos = k - 1
                while pos >= 0:
                    tup[pos] += 1
                    if pos > 0 and tup[pos] == tup[pos - 1]:
                        tup[pos] += 1
                    if tup[pos] < n_surf:
                        break
                    pos -= 1
                if pos < 0:
                    break
                for j in range(pos + 1, k):
                    tup[j] = 0
                    if tup[j] == tup[j - 1]:
                        tup[j] = 1

    orders_arr = np.asarray(orders, dtype=np.int32)
    surfs_arr = np.asarray(surfs, dtype=np.int32)
    if points:
        points_arr = np.ascontiguousarray(np.concatenate(points, axis=0))
    else:
        points_arr = np.empty((0, 3))
    return orders_arr, surfs_arr, points_arr
