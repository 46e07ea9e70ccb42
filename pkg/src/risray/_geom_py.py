"""Vectorized numpy geometry backend.

The compiled backend (risray._geom_cy) mirrors these computations
statement-for-statement. Keep the arithmetic association identical in both
(plain a*b + c*d + e*f elementwise forms, no dot-product reductions, no
fused multiply-add), or the backend-equivalence guarantee breaks.
"""

from __future__ import annotations

import numpy as np

EDGE_EPS = 1e-9  # m; facet-edge inclusion and segment-endpoint clearance


def any_crossing(pack, a, b, excl_a, excl_b):
    """True if segment (a, b) crosses some facet interior.

    excl_a/excl_b suppress the facets holding the segment endpoints
    (adjacent reflection surfaces); pass -1 to disable. Crossings within
    EDGE_EPS of either endpoint, or within EDGE_EPS of a facet edge, do
    not count.
    """
    if pack.n_surfaces == 0:
        return False
    n = pack.normal
    da = a[0] * n[:, 0] + a[1] * n[:, 1] + a[2] * n[:, 2] - pack.plane_d
    db = b[0] * n[:, 0] + b[1] * n[:, 1] + b[2] * n[:, 2] - pack.plane_d
    hit = da * db < 0.0
    if excl_a >= 0:
        hit[excl_a] = False
    if excl_b >= 0:
        hit[excl_b] = False
    if not hit.any():
        return False
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    dz = b[2] - a[2]
    seg_len = np.sqrt(dx * dx + dy * dy + dz * dz)
    tmin = EDGE_EPS / seg_len
    denom = np.where(hit, da - db, 1.0)
    t = da / denom
    hit &= (t > tmin) & (t < 1.0 - tmin)
    px = a[0] + t * dx
    py = a[1] + t * dy
    pz = a[2] + t * dz
    ex = px - pack.origin[:, 0]
    ey = py - pack.origin[:, 1]
    ez = pz - pack.origin[:, 2]
    eu, ev = pack.eu, pack.ev
    s = (ex * eu[:, 0] + ey * eu[:, 1] + ez * eu[:, 2]) * pack.inv_uu
    tt = (ex * ev[:, 0] + ey * ev[:, 1] + ez * ev[:, 2]) * pack.inv_vv
    se, te = pack.su_eps, pack.sv_eps
    hit &= (s > se) & (s < 1.0 - se) & (tt > te) & (tt < 1.0 - te)
    return bool(hit.any())


def _collect_order(pack, tx, rx, tuples, check_blocking, orders, surfs, points):
    """Validate one reflection order's candidate tuples and append the
    survivors (in candidate order) to the accumulators."""
    n_cand, k = tuples.shape
    nrm = pack.normal
    pld = pack.plane_d

    # forward images of tx through the tuple's planes
    ix = np.full(n_cand, tx[0])
    iy = np.full(n_cand, tx[1])
    iz = np.full(n_cand, tx[2])
    imgs = np.empty((k, 3, n_cand))
    for j in range(k):
        si = tuples[:, j]
        nx, ny, nz = nrm[si, 0], nrm[si, 1], nrm[si, 2]
        d = pld[si]
        sd = ix * nx + iy * ny + iz * nz - d
        ix = ix - 2.0 * sd * nx
        iy = iy - 2.0 * sd * ny
        iz = iz - 2.0 * sd * nz
        imgs[j, 0] = ix
        imgs[j, 1] = iy
        imgs[j, 2] = iz

    # backward pass from rx: intersect (image -> current) with each plane,
    # require a proper crossing and the point inside the finite facet
    valid = np.ones(n_cand, dtype=bool)
    cx = np.full(n_cand, rx[0])
    cy = np.full(n_cand, rx[1])
    cz = np.full(n_cand, rx[2])
    pts = np.empty((k, 3, n_cand))
    for j in range(k - 1, -1, -1):
        si = tuples[:, j]
        nx, ny, nz = nrm[si, 0], nrm[si, 1], nrm[si, 2]
        d = pld[si]
        gx, gy, gz = imgs[j, 0], imgs[j, 1], imgs[j, 2]
        sa = gx * nx + gy * ny + gz * nz - d
        sb = cx * nx + cy * ny + cz * nz - d
        crossed = sa * sb < 0.0
        denom = np.where(crossed, sa - sb, 1.0)
        t = sa / denom
        px = gx + t * (cx - gx)
        py = gy + t * (cy - gy)
        pz = gz + t * (cz - gz)
        ex = px - pack.origin[si, 0]
        ey = py - pack.origin[si, 1]
        ez = pz - pack.origin[si, 2]
        ux, uy, uz = pack.eu[si, 0], pack.eu[si, 1], pack.eu[si, 2]
        vx, vy, vz = pack.ev[si, 0], pack.ev[si, 1], pack.ev[si, 2]
        s = (ex * ux + ey * uy + ez * uz) * pack.inv_uu[si]
        tt = (ex * vx + ey * vy + ez * vz) * pack.inv_vv[si]
        se = pack.su_eps[si]
        te = pack.sv_eps[si]
        on_facet = (s >= -se) & (s <= 1.0 + se) & (tt >= -te) & (tt <= 1.0 + te)
        valid &= crossed & on_facet
        cx = np.where(valid, px, cx)
        cy = np.where(valid, py, cy)
        cz = np.where(valid, pz, cz)
        pts[j, 0] = px
        pts[j, 1] = py
        pts[j, 2] = pz

    for row in np.nonzero(valid)[0]:
        tup = tuples[row]
        verts = np.empty((k + 2, 3))
        verts[0] = tx
        for j in range(k):
            verts[j + 1, 0] = pts[j, 0, row]
            verts[j + 1, 1] = pts[j, 1, row]
            verts[j + 1, 2] = pts[j, 2, row]
        verts[k + 1] = rx
        if check_blocking:
            ok = True
            for seg in range(k + 1):
                ea = tup[seg - 1] if seg >= 1 else -1
                eb = tup[seg] if seg < k else -1
                if any_crossing(pack, verts[seg], verts[seg + 1], ea, eb):
                    ok = False
                    break
            if not ok:
                continue
        orders.append(k)
        surfs.extend(int(v) for v in tup)
        points.append(verts[1:k + 1])


def enumerate_specular(pack, tx, rx, max_order, check_blocking):
    """Image-method specular path enumeration.

    Returns (orders, surfs, points): int32 (P,) reflection counts,
    int32 (R,) flattened surface tuples, float64 (R, 3) flattened
    reflection points, with R = sum(orders). Paths are ordered by
    reflection count, then lexicographically by surface tuple.
    """
    orders: list[int] = []
    surfs: list[int] = []
    points: list[np.ndarray] = []

    if (not check_blocking) or (not any_crossing(pack, tx, rx, -1, -1)):
        orders.append(0)

    n_surf = pack.n_surfaces
    if n_surf > 0 and max_order >= 1:
        tuples = np.arange(n_surf, dtype=np.intp).reshape(n_surf, 1)
        for k in range(1, max_order + 1):
            if k > 1:
                ext = np.repeat(tuples, n_surf, axis=0)
                nxt = np.tile(np.arange(n_surf, dtype=np.intp), tuples.shape[0])
                keep = nxt != ext[:, -1]
                tuples = np.concatenate([ext[keep], nxt[keep, None]], axis=1)
                if tuples.shape[0] == 0:
                    break
            _collect_order(pack, tx, rx, tuples, check_blocking,
                           orders, surfs, points)

    orders_arr = np.asarray(orders, dtype=np.int32)
    surfs_arr = np.asarray(surfs, dtype=np.int32)
    if points:
        points_arr = np.ascontiguousarray(np.concatenate(points, axis=0))
    else:
        points_arr = np.empty((0, 3))
    return orders_arr, surfs_arr, points_arr
