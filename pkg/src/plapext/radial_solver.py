"""Quadrature-accurate radial solutions of the Dirichlet problem.

A radial solution on [R_in, R_out] satisfies the integrated identity

    phi(|u'|) sgn(u') r^(n-1) = C - F(r),   F(r) = integral of f s^(n-1),

so once the flux constant C is known, u is a single quadrature of the
signed inverse of phi.  C is pinned down by monotone shooting on the outer
boundary value; for the bounded exterior solution C equals the full
improper integral of f s^(n-1), which makes u' decay integrably.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .operator_core import (DomainError, NonConvergenceError,
                            phi_inverse_signed, phi_signed)
from .quadrature import integrate, tail_panel_sums


def _cumulative_spline(g, edges):
    """Antiderivative of g on a grid, as a C^1 spline with exact slopes."""
    edges = np.asarray(edges, dtype=float)
    x, w = np.polynomial.legendre.leggauss(8)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    panel = half * (g(nodes.ravel()).reshape(nodes.shape) @ w)
    F = np.concatenate(([0.0], np.cumsum(panel)))
    return CubicHermiteSpline(edges, F, g(edges))


@dataclass
class RadialSolution:
    spec: object
    f: object
    R_in: float
    R_out: float
    u_in: float
    C_flux: float
    _flux_num: object = None      # vectorized r -> C - F(r)
    _cache_r: list = field(default_factory=list, repr=False)
    _cache_v: list = field(default_factory=list, repr=False)

    def u_prime(self, r):
        r = np.asarray(r, dtype=float)
        return phi_inverse_signed(
            self.spec, self._flux_num(r) / r ** (self.spec.n - 1.0))

    def flux(self, r):
        """phi(|u'|) sgn(u') r^(n-1), which must equal C - F(r)."""
        r = np.asarray(r, dtype=float)
        return phi_signed(self.spec, self.u_prime(r)) \
            * r ** (self.spec.n - 1.0)

    def value(self, r):
        r = float(r)
        if r < self.R_in - 1e-12 or r > self.R_out * (1 + 1e-12):
            raise DomainError(f"radius {r} outside [{self.R_in}, {self.R_out}]")
        if not self._cache_r:
            self._cache_r.append(self.R_in)
            self._cache_v.append(self.u_in)
        i = bisect.bisect_right(self._cache_r, r) - 1
        r0, v0 = self._cache_r[i], self._cache_v[i]
        if r == r0:
            return v0
        val = v0 + integrate(self.u_prime, r0, r, rel_tol=1e-12)
        bisect.insort(self._cache_r, r)
        self._cache_v.insert(self._cache_r.index(r), val)
        return val

    def values(self, radii):
        order = np.argsort(radii)
        out = np.empty(len(radii))
        for i in order:
            out[i] = self.value(radii[i])
        return out


def _source_density(f, n):
    def g(r):
        r = np.asarray(r, dtype=float)
        return np.asarray(f(r), dtype=float) * r ** (n - 1.0)
    return g


def solve_radial_bvp(spec, f, R_in, R_out, u_in, u_out, tol=1e-12):
    """Radial two-point Dirichlet solve by monotone shooting on C.

    The outer value produced by a candidate flux constant C is strictly
    increasing in C (phi^{-1} is increasing), so a sign-changing bracket
    always exists; it is found by doubling expansion and closed by brentq.
    """
    if not (0 < R_in < R_out):
        raise DomainError("need 0 < R_in < R_out")
    n = spec.n
    g = _source_density(f, n)
    edges = np.geomspace(R_in, R_out, 1025)
    F = _cumulative_spline(g, edges)

    def outer_value(C):
        u_prime = lambda r: phi_inverse_signed(
            spec, (C - F(np.asarray(r, dtype=float))) / np.asarray(r) ** (n - 1.0))
        return u_in + integrate(u_prime, R_in, R_out, rel_tol=1e-12)

    # bracket expansion around the source scale
    scale = max(1.0, float(np.max(np.abs(F(edges)))),
                abs(phi_signed(spec, (u_out - u_in) / (R_out - R_in)))
                * R_out ** (n - 1.0))
    lo, hi = -scale, scale
    for _ in range(80):
        if outer_value(lo) <= u_out:
            break
        lo *= 2.0
    else:
        raise NonConvergenceError("shooting bracket expansion failed (low)")
    for _ in range(80):
        if outer_value(hi) >= u_out:
            break
        hi *= 2.0
    else:
        raise NonConvergenceError("shooting bracket expansion failed (high)")

    C = brentq(lambda c: outer_value(c) - u_out, lo, hi,
               xtol=1e-14 * scale, rtol=8.9e-16)
    sol = RadialSolution(spec=spec, f=f, R_in=R_in, R_out=R_out, u_in=u_in,
                         C_flux=float(C),
                         _flux_num=lambda r: C - F(np.asarray(r, dtype=float)))
    # endpoint match to tol
    if abs(sol.value(R_out) - u_out) > tol * max(1.0, abs(u_out)) * 100:
        raise NonConvergenceError("shooting failed to match the outer value")
    return sol


def solve_exterior_radial(spec, f, u_in, R_in=1.0):
    """The bounded radial solution on [R_in, inf).

    Boundedness forces the flux constant to equal the full improper
    integral of f s^(n-1); then C - F(r) is the tail integral of the
    source beyond r, and u' is absolutely integrable at infinity.
    """
    n = spec.n
    g = _source_density(f, n)
    edges, sums = tail_panel_sums(g, R_in, rel_tol=1e-12)
    far = float(edges[-1])
    # tail integral T(r) accumulated right-to-left (small terms first), so
    # its relative accuracy is uniform down to the far edge — no
    # cancellation against the full integral
    x, w = np.polynomial.legendre.leggauss(8)

    def panel_sums(edges_):
        mid = 0.5 * (edges_[:-1] + edges_[1:])
        half = 0.5 * (edges_[1:] - edges_[:-1])
        nodes = mid[:, None] + half[:, None] * x[None, :]
        return half * (g(nodes.ravel()).reshape(nodes.shape) @ w)

    # source tail left over beyond the far edge; tiny in absolute terms but
    # it sets the scale of T near the edge, where phi^{-1} is most sensitive
    beyond_edges = far * 2.0 ** np.arange(201)
    beyond_edges = beyond_edges[np.isfinite(beyond_edges)]
    beyond = float(np.sum(panel_sums(beyond_edges)[::-1]))

    dense = np.geomspace(R_in, far, 4097)
    panel = panel_sums(dense)
    tails = beyond + np.concatenate((np.cumsum(panel[::-1])[::-1], [0.0]))
    T = CubicHermiteSpline(dense, tails, -g(dense))
    total = float(tails[0])

    def flux_num(r):
        r = np.asarray(r, dtype=float)
        return T(np.minimum(r, far))

    sol = RadialSolution(spec=spec, f=f, R_in=R_in, R_out=np.inf,
                         u_in=u_in, C_flux=total, _flux_num=flux_num)
    sol._far_edge = far
    return sol


def _uprime_tail(spec, g, far, n, rel_tol=1e-12, max_panels=400):
    """Integral of u' = phi^{-1}(T(r)/r^{n-1}) over [far, inf).

    The source tail T is rebuilt locally on each doubling panel (summed
    small-to-large), because u' decays much more slowly than the source
    density g and remains significant long after g has settled.
    """
    edges = far * 2.0 ** np.arange(max_panels + 1)
    edges = edges[np.isfinite(edges)]
    x8, w8 = np.polynomial.legendre.leggauss(8)
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * x8[None, :]
    panel_g = half * (g(nodes.ravel()).reshape(nodes.shape) @ w8)
    T_edges = np.concatenate((np.cumsum(panel_g[::-1])[::-1], [0.0]))

    total = 0.0
    quiet = 0
    x16, w16 = np.polynomial.legendre.leggauss(16)
    for k in range(len(lo)):
        a, b = lo[k], hi[k]
        pts = 0.5 * (a + b) + 0.5 * (b - a) * x16
        # source tail at each node: T(edge right) plus the in-panel remainder
        rem = np.empty_like(pts)
        for i, s in enumerate(pts):
            m2, h2 = 0.5 * (s + b), 0.5 * (b - s)
            rem[i] = h2 * float(g(m2 + h2 * x8) @ w8)
        T_nodes = T_edges[k + 1] + rem
        up = phi_inverse_signed(spec, T_nodes / pts ** (n - 1.0))
        contrib = 0.5 * (b - a) * float(up @ w16)
        total += contrib
        quiet = quiet + 1 if abs(contrib) <= rel_tol * max(abs(total), 1e-300) \
            else 0
        if quiet >= 3:
            return total
    return total


def exterior_limit(sol):
    """Limit at infinity of a bounded exterior radial solution."""
    far = getattr(sol, "_far_edge", None)
    if far is None:
        raise DomainError("limit is defined for exterior solutions only")
    tail = getattr(sol, "_limit_tail", None)
    if tail is None:
        tail = _uprime_tail(sol.spec, _source_density(sol.f, sol.spec.n),
                            far, sol.spec.n)
        sol._limit_tail = tail
    return sol.value(far) + tail


def flux_residual(sol, radii):
    """Worst deviation of the integrated identity over the given radii."""
    radii = np.asarray(radii, dtype=float)
    lhs = sol.flux(radii)
    rhs = sol._flux_num(radii)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    return float(np.max(np.abs(lhs - rhs)) / scale)
