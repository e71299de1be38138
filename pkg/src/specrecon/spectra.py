"""Characteristic function and eigenvalue localization in the lambda plane.

Zeros are located by the argument principle on rectangles (winding numbers
from adaptive boundary walks), subdivided until each cell isolates one
root cluster, then polished by Newton iteration.  Multiple zeros are
detected when refined roots coalesce and are re-verified by the winding
number of an enclosing circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entire import BoundaryPair, rho_of
from .errors import NewtonStall, RootCountMismatch
from .grids import Potential
from .propagate import endpoint_values

__all__ = ["SearchRegion", "EigenvalueList", "char_fn", "char_fn_batch",
           "find_zeros", "find_eigenvalues", "default_region"]

_PHASE_CAP = 1.8  # max phase jump per boundary segment, radians


@dataclass(frozen=True)
class SearchRegion:
    """Rectangle [re_min, re_max] x [-im_max, im_max] plus a root-count cap."""

    re_max: float
    re_min: float = -1.0
    im_max: float = 25.0
    max_roots: int = 200


def default_region(n_roots: int, interval: float = math.pi,
                   im_max: float = 25.0) -> SearchRegion:
    """Region sized from the counting-function estimate sqrt(L) ~ n pi / a.

    The right edge sits at a half-integer multiple of pi/a in the rho
    variable, i.e. halfway between consecutive asymptotic eigenvalue
    positions, so the boundary stays clear of the spectrum.
    """
    lam_max = ((n_roots + 5.5) * math.pi / interval) ** 2
    return SearchRegion(re_max=lam_max, im_max=im_max,
                        max_roots=n_roots + 11)


def char_fn_batch(bp: BoundaryPair, q: Potential, lams) -> np.ndarray:
    """Delta(lam) = f1(lam) S'(pi,lam) + f2(lam) S(pi,lam), vectorized."""
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    eta1, eta2 = endpoint_values(q, lams)
    return bp.f1(lams) * eta2 + bp.f2(lams) * eta1


def char_fn(bp: BoundaryPair, q: Potential, lam: complex) -> complex:
    return complex(char_fn_batch(bp, q, [lam])[0])


# ---------------------------------------------------------------------------
# boundary walks and winding numbers
# ---------------------------------------------------------------------------

def _rect_boundary(x0, x1, y0, y1, n_horiz, n_vert):
    """Closed counterclockwise polyline around the rectangle."""
    bottom = np.linspace(x0, x1, n_horiz, endpoint=False) + 1j * y0
    right = x1 + 1j * np.linspace(y0, y1, n_vert, endpoint=False)
    top = np.linspace(x1, x0, n_horiz, endpoint=False) + 1j * y1
    left = x0 + 1j * np.linspace(y1, y0, n_vert, endpoint=False)
    pts = np.concatenate([bottom, right, top, left])
    return np.append(pts, pts[0])


def _wrap_phase(d):
    return (d + np.pi) % (2 * np.pi) - np.pi


def _winding_on_loop(F, pts, max_rounds=14):
    """Winding number of F along a closed polyline, refining adaptively.

    Returns (winding, min |F| on the walk, local scale near the minimum).
    |F| can vary by many orders of magnitude around one loop, so the
    near-zero decision must be made against the neighborhood of the
    minimum, not a global scale.
    """
    vals = F(pts)
    for _ in range(max_rounds):
        dph = _wrap_phase(np.diff(np.angle(vals)))
        bad = np.abs(dph) > _PHASE_CAP
        if not bad.any():
            break
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (pts[idx] + pts[idx + 1])
        mvals = F(mids)
        pts = np.insert(pts, idx + 1, mids)
        vals = np.insert(vals, idx + 1, mvals)
    else:
        raise RootCountMismatch(
            "boundary phase did not settle; a zero may sit on the contour")
    dph = _wrap_phase(np.diff(np.angle(vals)))
    total = dph.sum() / (2 * np.pi)
    w = int(round(total))
    if abs(total - w) > 0.05:
        raise RootCountMismatch(f"non-integer winding {total:.3f}")
    absv = np.abs(vals)
    i = int(np.argmin(absv))
    local = float(np.max(absv[max(0, i - 10): i + 11]))
    return w, float(absv[i]), local


def _rect_winding(F, rect, spacing_hint):
    x0, x1, y0, y1 = rect
    dx, dy = 0.011 * (x1 - x0 + 1), 0.017 * (y1 - y0 + 1)
    for attempt in range(6):
        n_h = int(np.clip((x1 - x0) / max(spacing_hint, 1e-12), 16, 600))
        n_v = int(np.clip((y1 - y0) / max(spacing_hint, 1e-12), 8, 200))
        pts = _rect_boundary(x0, x1, y0, y1, n_h, n_v)
        try:
            w, vmin, local = _winding_on_loop(F, pts)
        except RootCountMismatch:
            vmin, local = 0.0, 1.0  # treat as boundary zero, dilate below
        if vmin > 1e-7 * local:
            return w, (x0, x1, y0, y1)
        # a zero sits (numerically) on the boundary: dilate and retry,
        # growing the step so repeated grazes cannot pin the contour
        x0, x1, y0, y1 = x0 - dx, x1 + dx, y0 - dy, y1 + dy
        dx, dy = 1.9 * dx, 1.9 * dy
    raise RootCountMismatch("could not move contour off a boundary zero")


def _circle_winding(F, center, radius):
    pts = center + radius * np.exp(2j * np.pi * np.linspace(0, 1, 129))
    w, vmin, scale = _winding_on_loop(F, pts)
    if vmin <= 1e-12 * scale:
        raise RootCountMismatch("zero on verification circle")
    return w


# ---------------------------------------------------------------------------
# Newton refinement
# ---------------------------------------------------------------------------

def _newton_batch(F, z0, tol=1e-12, max_iter=50):
    """Vector Newton with finite-difference derivatives.

    Returns (roots, converged, stalled): ``stalled`` marks iterates whose
    final step was small but above ``tol`` -- the signature of a multiple
    zero, where plain Newton bottoms out at the sqrt of the noise floor.
    """
    z = np.array(z0, dtype=complex)
    done = np.zeros(z.shape, dtype=bool)
    last_step = np.full(z.shape, np.inf)
    for _ in range(max_iter):
        act = ~done
        if not act.any():
            break
        za = z[act]
        eps = 1e-6 * (1.0 + np.abs(za))
        batch = np.concatenate([za, za - eps, za + eps])
        v = F(batch)
        n = za.size
        v0, vm, vp = v[:n], v[n:2 * n], v[2 * n:]
        deriv = (vp - vm) / (2 * eps)
        bad = (deriv == 0) | ~np.isfinite(deriv)
        deriv = np.where(bad, 1.0, deriv)
        step = np.where(bad, np.inf, v0 / deriv)
        za = za - np.where(np.isfinite(step), step, 0.0)
        z[act] = za
        last_step[act] = np.abs(step)
        newly = np.abs(step) <= tol * (1.0 + np.abs(za))
        idx = np.nonzero(act)[0]
        done[idx[newly]] = True
    stalled = ~done & (last_step <= 1e-5 * (1.0 + np.abs(z)))
    return z, done, stalled


def _cauchy_coeffs(F, center, radius, orders, n=64):
    """Normalized Taylor coefficients F^{<j>}(center) for several j at once."""
    phase = np.exp(2j * np.pi * np.arange(n) / n)
    vals = F(center + radius * phase)
    return {j: complex(np.sum(vals * phase ** (-j)) / (n * radius ** j))
            for j in orders}


def _polish_multiple(F, z0, m, tol=1e-9, max_iter=50):
    """Newton on F^{<m-1>} (quadratic near an m-fold zero).

    Location accuracy of an m-fold zero is limited to the 1/m-th power of
    the evaluation noise, so the tolerance is looser than for simple roots.
    """
    z = complex(z0)
    r = max(1e-5 * (1 + abs(z)), 1e-5)
    step = np.inf
    for _ in range(max_iter):
        co = _cauchy_coeffs(F, z, r, (m - 1, m), n=32)
        if co[m] == 0:
            break
        step = co[m - 1] / (m * co[m])
        z -= step
        if abs(step) <= tol * (1 + abs(z)):
            return z, True
    return z, abs(step) <= 1e-7 * (1 + abs(z))


# ---------------------------------------------------------------------------
# recursive cell resolution
# ---------------------------------------------------------------------------

def _resolve_cell(F, rect, w, coalesce, depth=0):
    """Return [(root, multiplicity)] for a rectangle with winding w."""
    x0, x1, y0, y1 = rect
    if w == 0:
        return []
    scale = 1.0 + max(abs(x0), abs(x1), abs(y1))
    if depth > 60:
        raise RootCountMismatch(f"cell recursion exhausted near {rect}")

    # Newton from a few starts; works immediately for well-separated roots.
    nx = max(2, int(math.ceil(math.sqrt(2 * w))))
    gx = np.linspace(x0, x1, nx + 2)[1:-1]
    gy = np.linspace(y0, y1, 3)[1:-1] if y1 - y0 < 1e-9 else \
        np.linspace(y0, y1, 4)[1:-1]
    starts = (gx[:, None] + 1j * gy[None, :]).ravel()
    roots, ok, stalled = _newton_batch(F, starts, tol=1e-13)
    cand = roots[ok | stalled]
    inside = ((cand.real > x0 - 1e-9 * scale) & (cand.real < x1 + 1e-9 * scale)
              & (cand.imag > y0 - 1e-9 * scale) & (cand.imag < y1 + 1e-9 * scale))
    cand = cand[inside]
    clusters = _cluster(cand, coalesce * scale)

    if clusters:
        out = []
        total = 0
        centers = [c.mean() for c in clusters]
        for i, c in enumerate(clusters):
            z = c.mean()
            gaps = [abs(z - other) for j, other in enumerate(centers) if j != i]
            radius = max(3 * coalesce * scale, 10 * np.ptp(np.abs(c - z)) if len(c) > 1 else 0)
            radius = min(min(gaps) / 3 if gaps else np.inf,
                         max(radius, 1e-5 * scale), 0.45 * (x1 - x0) + 1e-5)
            try:
                m = _circle_winding(F, z, radius)
            except RootCountMismatch:
                m = -1
            if m < 1:
                break
            if m > 1:
                z, polished = _polish_multiple(F, z, m)
                if not polished:
                    break
            out.append((z, m))
            total += m
        if total == w:
            return out

    # A tiny cell that still defeats refinement means the iteration is
    # genuinely stalling, not that more subdivision would help.
    if max(x1 - x0, y1 - y0) < 1e3 * coalesce * scale and not np.any(ok):
        raise NewtonStall(
            f"refinement exceeded its iteration budget near {rect}")

    # Otherwise subdivide along the longer side and recurse.
    if (x1 - x0) >= (y1 - y0):
        cuts = _good_cut(F, rect, axis=0)
        a = (x0, cuts, y0, y1)
        b = (cuts, x1, y0, y1)
    else:
        cuts = _good_cut(F, rect, axis=1)
        a = (x0, x1, y0, cuts)
        b = (x0, x1, cuts, y1)
    hint = _spacing_hint(rect, w)
    out = []
    for sub in (a, b):
        ws, adj = _rect_winding(F, sub, hint)
        out.extend(_resolve_cell(F, adj, ws, coalesce, depth + 1))
    # dilated sub-rectangles may overlap and report a root twice; the
    # caller deduplicates globally before checking the total count
    return out


def _cluster(points, tol):
    if points.size == 0:
        return []
    pts = sorted(points, key=lambda z: (z.real, z.imag))
    groups = [[pts[0]]]
    for z in pts[1:]:
        if abs(z - groups[-1][-1]) < max(tol, 1e-13):
            groups[-1].append(z)
        else:
            groups.append([z])
    return [np.array(g) for g in groups]


def _spacing_hint(rect, w):
    x0, x1, y0, y1 = rect
    return max((x1 - x0) / (8 * max(w, 1)), (x1 - x0) / 400, 1e-6)


def _good_cut(F, rect, axis):
    """Cut position near the middle where |F| on the cut line is largest.

    Falls back to a wider candidate band when every mid-band candidate
    grazes a zero (e.g. two roots compactly straddling the midline).
    """
    x0, x1, y0, y1 = rect
    best, val, typical = None, -1.0, 0.0
    for lo, hi, k in ((0.42, 0.58, 7), (0.25, 0.75, 17)):
        if axis == 0:
            cands = x0 + (x1 - x0) * np.linspace(lo, hi, k)
            samples = np.linspace(y0, y1, 9)
            lines = [c + 1j * samples for c in cands]
        else:
            cands = y0 + (y1 - y0) * np.linspace(lo, hi, k)
            samples = np.linspace(x0, x1, 17)
            lines = [samples + 1j * c for c in cands]
        vals = np.abs(F(np.concatenate(lines))).reshape(len(cands), -1)
        mins = vals.min(axis=1)
        typical = max(typical, float(np.median(vals)))
        i = int(np.argmax(mins))
        if mins[i] > val:
            best, val = cands[i], float(mins[i])
        if val > 1e-3 * typical:
            break
    return float(best)


def find_zeros(F, region: SearchRegion, coalesce: float = 1e-6):
    """All zeros of F in the region with multiplicities.

    The total boundary winding must match the sum of resolved
    multiplicities; a mismatch triggers one retry on a dilated rectangle
    (a zero grazing the boundary is the usual culprit) and then raises
    RootCountMismatch rather than guessing.
    """
    rect = (region.re_min, region.re_max, -region.im_max, region.im_max)
    try:
        return _find_zeros_in_rect(F, rect, region.max_roots, coalesce)
    except RootCountMismatch:
        width = region.re_max - region.re_min
        grown = (region.re_min - 0.017 * width - 0.1,
                 region.re_max + 0.023 * width + 0.1,
                 -region.im_max - 0.4, region.im_max + 0.4)
        roots = _find_zeros_in_rect(F, grown, region.max_roots + 4, coalesce)
        keep = [(z, m) for z, m in roots
                if region.re_min <= z.real <= region.re_max
                and abs(z.imag) <= region.im_max]
        return keep


def _find_zeros_in_rect(F, rect, max_roots, coalesce):
    w, rect = _rect_winding(F, rect, _spacing_hint(rect, max_roots))
    if w == 0:
        return []
    if w > max_roots:
        raise RootCountMismatch(
            f"{w} roots in region exceeds cap {max_roots}")
    raw = _resolve_cell(F, rect, w, coalesce)
    # overlapping (dilated) subcells can duplicate a root; merge globally
    # and drop anything a dilation dragged in from outside the region
    x0, x1, y0, y1 = rect
    scale = 1.0 + max(abs(x0), abs(x1), abs(y1))
    margin = 1e-9 * scale
    roots = []
    for z, m in sorted(raw, key=lambda zm: (zm[0].real, zm[0].imag)):
        if not (x0 - margin <= z.real <= x1 + margin
                and y0 - margin <= z.imag <= y1 + margin):
            continue
        if roots and abs(z - roots[-1][0]) < coalesce * scale:
            roots[-1] = (roots[-1][0], max(roots[-1][1], m))
        else:
            roots.append((z, m))
    total = sum(m for _, m in roots)
    if total != w:
        raise RootCountMismatch(
            f"winding {w} but resolved multiplicity sum {total}")
    return sorted(roots, key=lambda zm: (rho_of(zm[0]).real, zm[0].imag))


# ---------------------------------------------------------------------------
# eigenvalue lists
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenvalueList:
    """Subspectrum with the prepended lambda_0 = 0, repeats per multiplicity.

    ``values[0] == 0`` always; equal values are consecutive.  ``I`` indexes
    the distinct values and ``mult[n]`` is their multiplicity (the prepended
    zero merges with a genuine zero eigenvalue when present).
    """

    values: np.ndarray
    I: tuple
    mult: dict = field(compare=False)

    @classmethod
    def from_roots(cls, roots_with_mult, zero_tol: float = 1e-9):
        """Build from (root, multiplicity) pairs ordered by asymptotics."""
        vals = [0.0 + 0.0j]
        for z, m in roots_with_mult:
            if abs(z) < zero_tol:
                vals[0:1] = [0.0 + 0.0j] * (m + 1)
            else:
                vals.extend([complex(z)] * m)
        values = np.asarray(vals, dtype=complex)
        index_set = []
        mult = {}
        for n, lam in enumerate(values):
            if n == 0 or lam != values[n - 1]:
                index_set.append(n)
                mult[n] = 1
            else:
                mult[index_set[-1]] += 1
        return cls(values, tuple(index_set), mult)

    def __len__(self):
        return len(self.values)

    def distinct(self):
        """Yield (first index n, lambda_n, m_n) over the distinct values."""
        for n in self.I:
            yield n, complex(self.values[n]), self.mult[n]

    def rhos(self) -> np.ndarray:
        return np.asarray(rho_of(self.values), dtype=complex)

    def truncated(self, n_max: int) -> "EigenvalueList":
        """Keep entries with index <= n_max (whole multiplicity groups)."""
        values = self.values[:n_max + 1]
        index_set = [n for n in self.I if n <= n_max]
        mult = {n: min(self.mult[n], n_max + 1 - n) for n in index_set}
        return EigenvalueList(values, tuple(index_set), mult)


def find_eigenvalues(bp: BoundaryPair, q: Potential, region: SearchRegion,
                     residual_tol: float = 1e-7) -> EigenvalueList:
    """Zeros of the characteristic function in the region, as a subspectrum.

    Verifies the localization residuals |(lam Delta)^{<nu>}(lam_n)| <=
    residual_tol * max(1, |lam_n|) for nu < m_n before returning.
    """

    def F(lams):
        return char_fn_batch(bp, q, lams)

    roots = find_zeros(F, region)
    evs = EigenvalueList.from_roots(roots)

    def g(lams):  # lam * Delta(lam)
        lams = np.asarray(lams, dtype=complex)
        return lams * F(lams)

    positions = [z for z, _ in roots]
    for n, lam, m in evs.distinct():
        if lam == 0 and m == 1:
            continue  # prepended value only; g(0) = 0 identically
        gaps = [abs(lam - p) for p in positions if abs(lam - p) > 1e-8] or [1.0]
        radius = min(0.1 * (1 + abs(lam)), min(gaps) / 4)
        # nu = 0 at the prepended zero holds identically, skip it there
        orders = range(1 if lam == 0 else 0, m)
        co = _cauchy_coeffs(g, lam, radius, orders)
        for nu in orders:
            if abs(co[nu]) > residual_tol * max(1.0, abs(lam)):
                raise RootCountMismatch(
                    f"localization residual {abs(co[nu]):.2e} at lambda_{n}"
                    f" = {lam:.6g} (nu = {nu})")
    return evs
