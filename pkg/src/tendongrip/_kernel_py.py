"""Pure-Python closure kernel.

Reference implementation of the quasi-static grasp-closing loop and its
geometric primitives.  ``_kernel.pyx`` is a compiled twin of this module;
keep the arithmetic (operations and their order) in sync so both backends
produce identical trajectories.  Scalar math only, no numpy inside the loop.
"""

from math import cos, pi, sin, sqrt

BACKEND_NAME = "python"

MODE_RIGID = 0
MODE_SPRING = 1
MODE_MOVABLE = 2

SHAPE_CIRCLE = 0
SHAPE_POLYGON = 1

TERM_STALL = 0
TERM_EJECT_RADIUS = 1
TERM_EJECT_LOSS = 2
TERM_MAX_STEPS = 3

_ARM_EPS = 1e-9


def fk_finger(kl, pl, dl, palm_w, q1, q2, finger):
    """Key points of one finger chain: base, knuckle tip, prox tip, distal tip.

    Finger 0 sits at -x, finger 1 at +x; both flex toward the centerline.
    Returns (bx, by, kx, ky, jx, jy, tx, ty) in the palm frame.
    """
    rot = 1.0 if finger == 1 else -1.0
    bx = rot * (palm_w * 0.5)
    by = 0.0
    kx = bx
    ky = kl
    a1 = pi * 0.5 + rot * q1
    c1 = cos(a1)
    s1 = sin(a1)
    jx = kx + pl * c1
    jy = ky + pl * s1
    a2 = a1 + rot * q2
    c2 = cos(a2)
    s2 = sin(a2)
    tx = jx + dl * c2
    ty = jy + dl * s2
    return bx, by, kx, ky, jx, jy, tx, ty


def closest_on_segment(ax, ay, bx, by, px, py):
    """Closest point of segment AB to P (degenerate segments act as points)."""
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 <= 0.0:
        return ax, ay
    t = ((px - ax) * dx + (py - ay) * dy) / l2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return ax + t * dx, ay + t * dy


def seg_seg_closest(ax, ay, bx, by, cx, cy, dx, dy):
    """Closest points between segments AB and CD.

    Returns (dist2, px, py, qx, qy) with P on AB and Q on CD.
    """
    ux = bx - ax
    uy = by - ay
    vx = dx - cx
    vy = dy - cy
    wx = ax - cx
    wy = ay - cy
    a = ux * ux + uy * uy
    b = ux * vx + uy * vy
    c = vx * vx + vy * vy
    d = ux * wx + uy * wy
    e = vx * wx + vy * wy
    den = a * c - b * b

    if den > 1e-14:
        s = (b * e - c * d) / den
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
    else:
        s = 0.0
    # t that is closest to the point at parameter s, then clamp and re-derive s
    if c > 1e-14:
        t = (b * s + e) / c
        if t < 0.0:
            t = 0.0
            if a > 1e-14:
                s = -d / a
                if s < 0.0:
                    s = 0.0
                elif s > 1.0:
                    s = 1.0
        elif t > 1.0:
            t = 1.0
            if a > 1e-14:
                s = (b - d) / a
                if s < 0.0:
                    s = 0.0
                elif s > 1.0:
                    s = 1.0
    else:
        t = 0.0
        if a > 1e-14:
            s = -d / a
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
    px = ax + s * ux
    py = ay + s * uy
    qx = cx + t * vx
    qy = cy + t * vy
    ex = px - qx
    ey = py - qy
    return ex * ex + ey * ey, px, py, qx, qy


def _point_in_convex(px, py, verts, nv):
    """True if P lies inside (or on) a CCW convex polygon."""
    for i in range(nv):
        x0 = verts[2 * i]
        y0 = verts[2 * i + 1]
        j = i + 1
        if j == nv:
            j = 0
        x1 = verts[2 * j]
        y1 = verts[2 * j + 1]
        if (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0) < 0.0:
            return False
    return True


def _segment_circle(ax, ay, bx, by, radius):
    """Axis-to-boundary separation of segment AB vs a circle at the origin.

    Returns (sep, px, py, nx, ny): boundary point P nearest the segment and
    the unit direction N from the segment into the circle.  sep < 0 means the
    segment axis is inside the circle.
    """
    cx, cy = closest_on_segment(ax, ay, bx, by, 0.0, 0.0)
    dcen = sqrt(cx * cx + cy * cy)
    if dcen > 1e-12:
        nx = -cx / dcen
        ny = -cy / dcen
    else:
        # segment axis passes through the center; push perpendicular, +y bias
        sx = bx - ax
        sy = by - ay
        sl = sqrt(sx * sx + sy * sy)
        if sl > 1e-12:
            nx = -sy / sl
            ny = sx / sl
        else:
            nx = 0.0
            ny = 1.0
        if ny < 0.0:
            nx = -nx
            ny = -ny
    sep = dcen - radius
    px = cx + sep * nx
    py = cy + sep * ny
    return sep, px, py, nx, ny


def _segment_polygon(ax, ay, bx, by, verts, nv):
    """Axis-to-boundary separation of segment AB vs a CCW convex polygon.

    Same contract as _segment_circle; the polygon is in its local frame.
    """
    best_d2 = 1e300
    best_px = best_py = best_qx = best_qy = 0.0
    for i in range(nv):
        x0 = verts[2 * i]
        y0 = verts[2 * i + 1]
        j = i + 1
        if j == nv:
            j = 0
        x1 = verts[2 * j]
        y1 = verts[2 * j + 1]
        d2, p1x, p1y, q1x, q1y = seg_seg_closest(ax, ay, bx, by, x0, y0, x1, y1)
        if d2 < best_d2:
            best_d2 = d2
            best_px = p1x
            best_py = p1y
            best_qx = q1x
            best_qy = q1y

    inside = (best_d2 <= 1e-18 or _point_in_convex(ax, ay, verts, nv)
              or _point_in_convex(bx, by, verts, nv))
    if not inside:
        sep = sqrt(best_d2)
        nx = (best_qx - best_px) / sep
        ny = (best_qy - best_py) / sep
        return sep, best_qx, best_qy, nx, ny

    # Penetrating: find the deepest axis point.  Interior depth along the
    # segment is a concave piecewise-linear function (min over edge planes),
    # so its maximum is at t=0, t=1 or a crossing of two edge depth lines.
    consts = []
    slopes = []
    for i in range(nv):
        x0 = verts[2 * i]
        y0 = verts[2 * i + 1]
        j = i + 1
        if j == nv:
            j = 0
        x1 = verts[2 * j]
        y1 = verts[2 * j + 1]
        ex = x1 - x0
        ey = y1 - y0
        el = sqrt(ex * ex + ey * ey)
        if el <= 1e-12:
            continue
        # outward normal of a CCW edge
        ox = ey / el
        oy = -ex / el
        consts.append(-((ax - x0) * ox + (ay - y0) * oy))
        slopes.append(-((bx - ax) * ox + (by - ay) * oy))
    ne = len(consts)

    def depth_at(t):
        dmin = 1e300
        for k in range(ne):
            dk = consts[k] + slopes[k] * t
            if dk < dmin:
                dmin = dk
        return dmin

    best_t = 0.0
    best_depth = depth_at(0.0)
    d1 = depth_at(1.0)
    if d1 > best_depth:
        best_depth = d1
        best_t = 1.0
    for i in range(ne):
        for j in range(i + 1, ne):
            dm = slopes[i] - slopes[j]
            if dm != 0.0:
                t = (consts[j] - consts[i]) / dm
                if 0.0 < t < 1.0:
                    dt = depth_at(t)
                    if dt > best_depth:
                        best_depth = dt
                        best_t = t

    px = ax + best_t * (bx - ax)
    py = ay + best_t * (by - ay)
    # binding edge at the deepest point
    kbest = 0
    dmin = 1e300
    for k in range(ne):
        dk = consts[k] + slopes[k] * best_t
        if dk < dmin:
            dmin = dk
            kbest = k
    # recover that edge's outward normal
    idx = 0
    kk = 0
    onx = 0.0
    ony = 1.0
    for i in range(nv):
        x0 = verts[2 * i]
        y0 = verts[2 * i + 1]
        j = i + 1
        if j == nv:
            j = 0
        x1 = verts[2 * j]
        y1 = verts[2 * j + 1]
        ex = x1 - x0
        ey = y1 - y0
        el = sqrt(ex * ex + ey * ey)
        if el <= 1e-12:
            continue
        if kk == kbest:
            onx = ey / el
            ony = -ex / el
            idx = i
            break
        kk += 1
    _ = idx
    qx = px + dmin * onx
    qy = py + dmin * ony
    return -dmin, qx, qy, -onx, -ony


def capsule_shape_contact(ax, ay, bx, by, kind, circ_r, verts,
                          ox, oy, oth):
    """Separation query of a capsule axis against a posed shape.

    The shape lives in its local frame (circle centered at the origin or a
    CCW convex polygon) and is placed at pose (ox, oy, oth).  Returns
    (sep, px, py, nx, ny) in the world frame: sep is the signed distance from
    the segment to the shape boundary, P the boundary point, N the unit
    normal from the segment into the shape interior.
    """
    ct = cos(oth)
    st = sin(oth)
    lax = ct * (ax - ox) + st * (ay - oy)
    lay = -st * (ax - ox) + ct * (ay - oy)
    lbx = ct * (bx - ox) + st * (by - oy)
    lby = -st * (bx - ox) + ct * (by - oy)
    if kind == SHAPE_CIRCLE:
        sep, px, py, nx, ny = _segment_circle(lax, lay, lbx, lby, circ_r)
    else:
        sep, px, py, nx, ny = _segment_polygon(lax, lay, lbx, lby,
                                               verts, len(verts) // 2)
    wx = ct * px - st * py + ox
    wy = st * px + ct * py + oy
    wnx = ct * nx - st * ny
    wny = st * nx + ct * ny
    return sep, wx, wy, wnx, wny


def finger_contact_forces(has_p, ppx, ppy, pnx, pny,
                          has_d, dpx, dpy, dnx, dny,
                          j1x, j1y, j2x, j2y, rot,
                          tau1, tau2, ks1, ks2, q1, q2):
    """Quasi-static normal force magnitudes (Np, Nd) for one finger.

    Torque balance about each joint: actuation torque minus spiral-spring
    torque equals moment arm times contact force.  The distal equation is
    solved first (the proximal contact has no moment about the distal joint),
    then substituted into the proximal one.  Negative solutions are clamped
    to zero (unilateral contacts); contacts acting through a joint axis are
    dropped.
    """
    t1 = tau1 - ks1 * q1
    t2 = tau2 - ks2 * q2
    nd = 0.0
    np_ = 0.0
    a1d = 0.0
    if has_d:
        a2d = rot * ((dpx - j2x) * dny - (dpy - j2y) * dnx)
        a1d = rot * ((dpx - j1x) * dny - (dpy - j1y) * dnx)
        if a2d > _ARM_EPS or a2d < -_ARM_EPS:
            nd = t2 / a2d
            if nd < 0.0:
                nd = 0.0
        else:
            a1d = 0.0
    if has_p:
        a1p = rot * ((ppx - j1x) * pny - (ppy - j1y) * pnx)
        if a1p > _ARM_EPS or a1p < -_ARM_EPS:
            np_ = (t1 - nd * a1d) / a1p
            if np_ < 0.0:
                np_ = 0.0
    return np_, nd


def run_closure(mode, r1p, r1d, r2p, r2d, ktp, ktd,
                kl, pl, dll, link_r, palm_w, qmax1, qmax2, ksp, ksd,
                shape_kind, circ_r, verts,
                ox, oy, oth, light,
                dl_step, max_steps, f_act, eject_r, bal_tol,
                push_gain, push_cap, c_tol, release_tol, loss_limit,
                record_traj):
    """Run the quasi-static closing loop; see closure.close_grasp for the API.

    The object pose (ox, oy, oth) is in the palm frame.  Returns a tuple
    (reason, steps, q, obj_x, obj_y, had_contact, loss_events,
     contacts, knuckle_contacts, disp, traj) where contacts are
    (finger, link, px, py, nx, ny, depth) for held moving links at the end.
    """
    q = [0.0, 0.0, 0.0, 0.0]
    stopped_limit = [False, False, False, False]
    stopped_contact = [False, False, False, False]
    # per link (finger*3 + link_id): hold flag and cached contact geometry
    held = [False] * 6
    csep = [0.0] * 6
    cpx = [0.0] * 6
    cpy = [0.0] * 6
    cnx = [0.0] * 6
    cny = [0.0] * 6

    # branch forces halve at each bifurcation; torques are constant per run
    tau1 = r1p * (f_act / 2.0) + r2p * (f_act / 2.0)
    tau2 = r1d * (f_act / 4.0) + r2d * (f_act / 4.0)

    had_contact = False
    loss_events = 0
    prev_any = False
    reason = TERM_MAX_STEPS
    steps = 0
    traj = [] if record_traj else None

    def update_contacts():
        for f in (0, 1):
            bx_, by_, kx_, ky_, jx_, jy_, tx_, ty_ = fk_finger(
                kl, pl, dll, palm_w, q[f * 2], q[f * 2 + 1], f)
            for link in (0, 1, 2):
                if link == 0:
                    sax, say, sbx, sby = bx_, by_, kx_, ky_
                elif link == 1:
                    sax, say, sbx, sby = kx_, ky_, jx_, jy_
                else:
                    sax, say, sbx, sby = jx_, jy_, tx_, ty_
                sep, px, py, nx, ny = capsule_shape_contact(
                    sax, say, sbx, sby, shape_kind, circ_r, verts,
                    ox, oy, oth)
                sep = sep - link_r
                li = f * 3 + link
                if sep <= c_tol:
                    held[li] = True
                elif held[li] and sep <= release_tol:
                    pass
                else:
                    held[li] = False
                if held[li]:
                    csep[li] = sep
                    cpx[li] = px
                    cpy[li] = py
                    cnx[li] = nx
                    cny[li] = ny
        stopped_contact[0] = held[1]
        stopped_contact[1] = held[2]
        stopped_contact[2] = held[4]
        stopped_contact[3] = held[5]

    update_contacts()

    for step in range(1, max_steps + 1):
        steps = step
        # 1. mechanism increments per finger
        for f in (0, 1):
            i1 = f * 2
            i2 = f * 2 + 1
            s1 = stopped_contact[i1] or stopped_limit[i1]
            s2 = stopped_contact[i2] or stopped_limit[i2]
            if mode == MODE_RIGID:
                raw1 = 0.0 if s1 else dl_step / r1p
                if s1 or s2:
                    raw2 = 0.0
                else:
                    raw2 = (r1p - r2p) / r1d * raw1
            elif mode == MODE_SPRING:
                raw1 = 0.0 if s1 else dl_step / r1p
                if s2:
                    raw2 = 0.0
                else:
                    elong = (f_act / 2.0) / ktp
                    raw2 = elong / r1d + (r1p - r2p) / r1d * raw1
            else:
                d = dl_step
                if s1:
                    raw1 = 0.0
                    d = 2.0 * d
                else:
                    raw1 = d / r1p
                raw2 = 0.0 if s2 else d / r1d
            cap = qmax1 - q[i1]
            if cap < 0.0:
                cap = 0.0
            if raw1 >= cap:
                raw1 = cap
                stopped_limit[i1] = True
            cap = qmax2 - q[i2]
            if cap < 0.0:
                cap = 0.0
            if raw2 >= cap:
                raw2 = cap
                stopped_limit[i2] = True
            q[i1] += raw1
            q[i2] += raw2

        # 2. contacts at the new configuration
        update_contacts()

        # 3. net contact force on the object, 4. push a light object
        if light:
            fx = 0.0
            fy = 0.0
            any_moving = held[1] or held[2] or held[4] or held[5]
            if any_moving:
                for f in (0, 1):
                    _, _, kx_, ky_, jx_, jy_, _, _ = fk_finger(
                        kl, pl, dll, palm_w, q[f * 2], q[f * 2 + 1], f)
                    rot = 1.0 if f == 1 else -1.0
                    lp = f * 3 + 1
                    ld = f * 3 + 2
                    np_, nd_ = finger_contact_forces(
                        held[lp], cpx[lp], cpy[lp], cnx[lp], cny[lp],
                        held[ld], cpx[ld], cpy[ld], cnx[ld], cny[ld],
                        kx_, ky_, jx_, jy_, rot,
                        tau1, tau2, ksp, ksd, q[f * 2], q[f * 2 + 1])
                    fx += np_ * cnx[lp] + nd_ * cnx[ld]
                    fy += np_ * cny[lp] + nd_ * cny[ld]
                fn = sqrt(fx * fx + fy * fy)
                if fn > bal_tol:
                    dx = push_gain * fx
                    dy = push_gain * fy
                    dn = sqrt(dx * dx + dy * dy)
                    if dn > push_cap:
                        dx = dx * (push_cap / dn)
                        dy = dy * (push_cap / dn)
                    # unilateral reactions: never push the object into a
                    # link it is already resting on (knuckles included)
                    for _ in (0, 1):
                        for li in range(6):
                            if held[li]:
                                dot = dx * cnx[li] + dy * cny[li]
                                if dot < 0.0:
                                    dx -= dot * cnx[li]
                                    dy -= dot * cny[li]
                    if dx != 0.0 or dy != 0.0:
                        ox += dx
                        oy += dy
                        update_contacts()

        # 5. bookkeeping
        any_now = held[1] or held[2] or held[4] or held[5]
        if any_now:
            had_contact = True
        if prev_any and not any_now:
            loss_events += 1
        prev_any = any_now
        if record_traj:
            ncont = (1 if held[1] else 0) + (1 if held[2] else 0) + \
                    (1 if held[4] else 0) + (1 if held[5] else 0)
            traj.append((q[0], q[1], q[2], q[3], ox, oy, float(ncont)))

        # 6. termination
        if light:
            if sqrt(ox * ox + oy * oy) >= eject_r:
                reason = TERM_EJECT_RADIUS
                break
            if loss_events >= loss_limit:
                reason = TERM_EJECT_LOSS
                break
        all_stopped = True
        for i in range(4):
            if not (stopped_contact[i] or stopped_limit[i]):
                all_stopped = False
                break
        if all_stopped:
            reason = TERM_STALL
            break

    contacts = []
    knuckles = []
    for f in (0, 1):
        for link in (0, 1, 2):
            li = f * 3 + link
            if held[li]:
                depth = -csep[li]
                if depth < 0.0:
                    depth = 0.0
                rec = (f, link, cpx[li], cpy[li], cnx[li], cny[li], depth)
                if link == 0:
                    knuckles.append(rec)
                else:
                    contacts.append(rec)

    return (reason, steps, (q[0], q[1], q[2], q[3]), ox, oy,
            1 if had_contact else 0, loss_events, contacts, knuckles, traj)
