"""Discrete Dirichlet solver on annuli and the exterior exhaustion driver.

The discrete problem minimizes the variational energy

    J(u) = sum_cells Phi(|grad u|) |cell| - sum_nodes f u |node|,

with Phi the antiderivative of phi, over nodal values with fixed Dirichlet
traces.  Meshes are geometrically graded in radius (solutions vary on
power/log scales); 2D polar meshes use one-sided differences in radius and
forward differences in angle per cell.  The nonlinear solve is a damped
Picard iteration (freeze the coefficient phi(|g|)/|g|) with an energy
backtracking safeguard, so the energy is nonincreasing along iterations;
a plain Armijo descent method is available as the alternative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import spsolve

from .operator_core import DomainError, phi_eval, phi_prime, unit_ball_volume

_GRAD_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# meshes and grid functions

@dataclass
class AnnularMesh:
    n: int
    radii: np.ndarray
    theta: np.ndarray | None = None      # angular nodes (2D, periodic), n == 2

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        if np.any(np.diff(self.radii) <= 0):
            raise DomainError("radii must be strictly increasing")
        if np.any(self.radii[1:] / self.radii[:-1] > 2.0 + 1e-12):
            raise DomainError("geometric grading ratio must stay within [1, 2]")
        if self.theta is not None:
            self.theta = np.asarray(self.theta, dtype=float)
            if self.n != 2:
                raise DomainError("angular meshes are 2D only")

    @property
    def is_2d(self):
        return self.theta is not None

    @property
    def R_in(self):
        return float(self.radii[0])

    @property
    def R_out(self):
        return float(self.radii[-1])

    def cell_measures(self):
        """Measure of the radial shells (1D) or polar cells (2D)."""
        omega = unit_ball_volume(self.n)
        shells = omega * (self.radii[1:] ** self.n - self.radii[:-1] ** self.n)
        if not self.is_2d:
            return shells
        dth = self._dtheta()
        return shells[:, None] * dth[None, :] / (2.0 * np.pi)

    def _dtheta(self):
        th = self.theta
        return np.diff(np.concatenate((th, [th[0] + 2.0 * np.pi])))

    def node_measures(self):
        """Control measures per node (cell measures split over corners)."""
        cells = self.cell_measures()
        if not self.is_2d:
            mu = np.zeros(len(self.radii))
            mu[:-1] += 0.5 * cells
            mu[1:] += 0.5 * cells
            return mu
        M, T = cells.shape
        mu = np.zeros((M + 1, T))
        quarter = 0.25 * cells
        for di in (0, 1):
            mu[di:M + di, :] += quarter
            mu[di:M + di, :] += np.roll(quarter, -1, axis=1)
        return mu

    def points(self):
        """Cartesian node coordinates: radii (1D) or (x, y) pairs (2D)."""
        if not self.is_2d:
            return self.radii[:, None]
        r = self.radii[:, None]
        return np.stack((r * np.cos(self.theta)[None, :],
                         r * np.sin(self.theta)[None, :]), axis=-1)


def radial_mesh(n, R_in, R_out, num_cells):
    return AnnularMesh(n=n, radii=np.geomspace(R_in, R_out, num_cells + 1))


def polar_mesh(R_in, R_out, num_radial, num_angular, inner_layers=0,
               layer_ratio=0.5, theta_center=None):
    """2D polar mesh; optional graded layers toward the inner circle and,
    when theta_center is given, toward that angle (singularity resolution)."""
    radii = np.geomspace(R_in, R_out, num_radial + 1)
    if inner_layers:
        h0 = radii[1] - radii[0]
        extra = R_in + h0 * layer_ratio ** np.arange(1, inner_layers + 1)
        radii = np.unique(np.concatenate((radii, extra)))
    theta = np.linspace(0.0, 2.0 * np.pi, num_angular, endpoint=False)
    if theta_center is not None and inner_layers:
        dth = 2.0 * np.pi / num_angular
        extra = theta_center \
            + np.outer([-1.0, 1.0],
                       dth * layer_ratio ** np.arange(1, inner_layers + 1))
        theta = np.unique(np.concatenate((theta, extra.ravel())) % (2 * np.pi))
    return AnnularMesh(n=2, radii=radii, theta=theta)


@dataclass
class GridFunction:
    mesh: AnnularMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise DomainError("grid function values must be finite")
        expect = (len(self.mesh.radii),) if not self.mesh.is_2d else \
            (len(self.mesh.radii), len(self.mesh.theta))
        if self.values.shape != expect:
            raise DomainError(f"values shape {self.values.shape} != {expect}")

    def inner_trace(self):
        return self.values[0] if self.mesh.is_2d else float(self.values[0])

    def outer_trace(self):
        return self.values[-1] if self.mesh.is_2d else float(self.values[-1])

    def at_radius(self, R):
        """Values on the sphere of radius R (linear interpolation in r)."""
        r = self.mesh.radii
        if not (r[0] - 1e-12 <= R <= r[-1] + 1e-12):
            raise DomainError(f"radius {R} outside mesh range")
        i = np.clip(np.searchsorted(r, R) - 1, 0, len(r) - 2)
        t = (R - r[i]) / (r[i + 1] - r[i])
        t = min(max(t, 0.0), 1.0)
        return (1 - t) * self.values[i] + t * self.values[i + 1]


# ---------------------------------------------------------------------------
# energy and its gradient

def _Phi(spec, s):
    """Antiderivative of phi at s (vectorized)."""
    s = np.asarray(s, dtype=float)
    if spec.const_value is not None:
        return spec.const_value * s ** spec.p / spec.p
    x, w = np.polynomial.legendre.leggauss(24)
    nodes = 0.5 * s[..., None] * (x + 1.0)
    vals = phi_eval(spec, np.maximum(nodes, 0.0))
    return 0.5 * s * (vals @ w)


def _source_values(f, mesh):
    if f is None:
        shape = (len(mesh.radii),) if not mesh.is_2d else \
            (len(mesh.radii), len(mesh.theta))
        return np.zeros(shape)
    if getattr(f, "kind", None) == "grid_samples":
        return np.asarray(f.grid_values, dtype=float)
    vals = np.asarray(f(mesh.radii), dtype=float)
    if mesh.is_2d:
        vals = np.repeat(vals[:, None], len(mesh.theta), axis=1)
    return vals


def _cell_gradients(mesh, values):
    r = mesh.radii
    h = np.diff(r)
    if not mesh.is_2d:
        return (np.diff(values) / h,)
    dth = mesh._dtheta()
    rmid = 0.5 * (r[:-1] + r[1:])
    du_r = np.diff(values, axis=0) / h[:, None]
    du_t = (np.roll(values, -1, axis=1) - values)[:-1, :] \
        / (rmid[:, None] * dth[None, :])
    return du_r, du_t


def discrete_energy(u, spec, f=None):
    """J(u) = sum Phi(|grad u|) |cell| - sum f u |node|."""
    mesh = u.mesh
    cells = mesh.cell_measures()
    grads = _cell_gradients(mesh, u.values)
    mag = np.sqrt(sum(g ** 2 for g in grads))
    fvals = _source_values(f, mesh)
    return float(np.sum(_Phi(spec, mag) * cells)
                 - np.sum(fvals * u.values * mesh.node_measures()))


def energy_gradient(mesh, spec, values, fvals):
    """dJ/du at every node (boundary rows included; mask them outside)."""
    cells = mesh.cell_measures()
    grads = _cell_gradients(mesh, values)
    mag = np.sqrt(sum(g ** 2 for g in grads))
    mag_f = np.maximum(mag, _GRAD_FLOOR)
    w = phi_eval(spec, mag_f) / mag_f          # phi(|g|)/|g|, floored
    r = mesh.radii
    h = np.diff(r)
    grad = -fvals * mesh.node_measures()
    if not mesh.is_2d:
        flux = w * grads[0] * cells / h
        grad[:-1] -= flux
        grad[1:] += flux
        return grad
    dth = mesh._dtheta()
    rmid = 0.5 * (r[:-1] + r[1:])
    flux_r = w * grads[0] * cells / h[:, None]
    flux_t = w * grads[1] * cells / (rmid[:, None] * dth[None, :])
    grad[:-1, :] -= flux_r
    grad[1:, :] += flux_r
    grad[:-1, :] -= flux_t
    grad[:-1, :] += np.roll(flux_t, 1, axis=1)
    return grad


@dataclass
class EnergyReport:
    energy: float
    grad_norm: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# nonlinear solves

def _trace_values(data, theta):
    # constants, arrays over theta, or callables of theta are all accepted
    if callable(data):
        data = data(theta)
    return np.broadcast_to(np.asarray(data, dtype=float), theta.shape)


def _apply_boundary(mesh, values, boundary_data):
    inner = boundary_data["inner"]
    outer = boundary_data["outer"]
    if mesh.is_2d:
        values[0, :] = _trace_values(inner, mesh.theta)
        values[-1, :] = _trace_values(outer, mesh.theta)
    else:
        values[0] = float(inner)
        values[-1] = float(outer)


def _picard_matrix_1d(mesh, spec, values):
    r, h = mesh.radii, np.diff(mesh.radii)
    cells = mesh.cell_measures()
    g = np.diff(values) / h
    mag = np.maximum(np.abs(g), _GRAD_FLOOR)
    w = phi_eval(spec, mag) / mag
    return w * cells / h ** 2        # cell conductances c_i


def _solve_picard_1d(mesh, spec, values, fvals):
    c = _picard_matrix_1d(mesh, spec, values)
    M = len(mesh.radii) - 1
    mu = mesh.node_measures()
    rhs = fvals[1:M] * mu[1:M]
    rhs[0] += c[0] * values[0]
    rhs[-1] += c[M - 1] * values[M]
    ab = np.zeros((3, M - 1))
    ab[0, 1:] = -c[1:M - 1]
    ab[1, :] = c[:M - 1] + c[1:M]
    ab[2, :-1] = -c[1:M - 1]
    out = values.copy()
    out[1:M] = solve_banded((1, 1), ab, rhs)
    return out


def _solve_picard_2d(mesh, spec, values, fvals):
    r, h = mesh.radii, np.diff(mesh.radii)
    dth = mesh._dtheta()
    rmid = 0.5 * (r[:-1] + r[1:])
    cells = mesh.cell_measures()
    grads = _cell_gradients(mesh, values)
    mag = np.maximum(np.sqrt(grads[0] ** 2 + grads[1] ** 2), _GRAD_FLOOR)
    w = phi_eval(spec, mag) / mag
    cr = w * cells / h[:, None] ** 2                       # radial links
    ct = w * cells / (rmid[:, None] * dth[None, :]) ** 2   # angular links

    Mr, T = cells.shape
    N = (Mr + 1) * T
    idx = np.arange(N).reshape(Mr + 1, T)
    rows, cols, vals = [], [], []

    def add(i, j, v):
        rows.append(i.ravel())
        cols.append(j.ravel())
        vals.append(v.ravel())

    lo, hi = idx[:-1, :], idx[1:, :]
    add(lo, lo, cr); add(hi, hi, cr); add(lo, hi, -cr); add(hi, lo, -cr)
    left, right = idx[:-1, :], np.roll(idx[:-1, :], -1, axis=1)
    add(left, left, ct); add(right, right, ct)
    add(left, right, -ct); add(right, left, -ct)

    K = sparse.csr_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(N, N))
    b = (fvals * mesh.node_measures()).ravel()

    interior = idx[1:-1, :].ravel()
    fixed = np.concatenate((idx[0, :], idx[-1, :]))
    x_fixed = values.ravel()[fixed]
    b_int = b[interior] - K[interior][:, fixed] @ x_fixed
    x_int = spsolve(K[interior][:, interior].tocsc(), b_int)
    out = values.copy().ravel()
    out[interior] = x_int
    return out.reshape(values.shape)


def _newton_direction_1d(mesh, spec, values, grad):
    h = np.diff(mesh.radii)
    cells = mesh.cell_measures()
    g = np.diff(values) / h
    mag = np.maximum(np.abs(g), _GRAD_FLOOR)
    d = phi_prime(spec, mag) * cells / h ** 2     # local Hessian conductances
    M = len(mesh.radii) - 1
    ab = np.zeros((3, M - 1))
    ab[0, 1:] = -d[1:M - 1]
    ab[1, :] = d[:M - 1] + d[1:M]
    ab[2, :-1] = -d[1:M - 1]
    step = np.zeros_like(values)
    step[1:M] = solve_banded((1, 1), ab, -grad[1:M])
    return step


def _newton_direction_2d(mesh, spec, values, grad):
    r, h = mesh.radii, np.diff(mesh.radii)
    dth = mesh._dtheta()
    rmid = 0.5 * (r[:-1] + r[1:])
    cells = mesh.cell_measures()
    gr, gt = _cell_gradients(mesh, values)
    mag = np.maximum(np.sqrt(gr ** 2 + gt ** 2), _GRAD_FLOOR)
    w = phi_eval(spec, mag) / mag
    q = (phi_prime(spec, mag) - w) / mag ** 2
    # local Hessian of Phi(|g|): M = w I + q g g^T, SPD since phi' > 0
    Mrr = (w + q * gr ** 2) * cells
    Mtt = (w + q * gt ** 2) * cells
    Mrt = q * gr * gt * cells

    br = 1.0 / h[:, None] + np.zeros_like(cells)       # radial difference
    bt = 1.0 / (rmid[:, None] * dth[None, :])          # angular difference
    Mr_, T = cells.shape
    idx = np.arange((Mr_ + 1) * T).reshape(Mr_ + 1, T)
    a = idx[:-1, :]                        # (i, j)
    b = idx[1:, :]                         # (i+1, j)
    c = np.roll(idx[:-1, :], -1, axis=1)   # (i, j+1)
    # rows of B per node: a -> (-br, -bt), b -> (br, 0), c -> (0, bt)
    Ba = (-br, -bt)
    Bb = (br, np.zeros_like(bt))
    Bc = (np.zeros_like(br), bt)
    nodes = (a, Ba), (b, Bb), (c, Bc)
    rows, cols, vals = [], [], []
    for (ni, (sr, st)) in nodes:
        for (nj, (tr, tt)) in nodes:
            rows.append(ni.ravel())
            cols.append(nj.ravel())
            vals.append((Mrr * sr * tr + Mrt * (sr * tt + st * tr)
                         + Mtt * st * tt).ravel())
    N = (Mr_ + 1) * T
    H = sparse.csr_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(N, N))
    interior = idx[1:-1, :].ravel()
    delta = spsolve(H[interior][:, interior].tocsc(),
                    -grad[1:-1, :].ravel())
    step = np.zeros_like(values)
    step[1:-1, :] = delta.reshape(Mr_ - 1, T)
    return step


def solve_dirichlet(mesh, spec, f, boundary_data, method="newton",
                    tol=1e-10, max_iter=400, initial=None):
    """Discrete energy minimizer with Dirichlet data on both circles.

    Returns (GridFunction, EnergyReport).  Deterministic for fixed inputs.
    """
    fvals = _source_values(f, mesh)
    shape = fvals.shape
    values = np.zeros(shape) if initial is None \
        else np.array(initial, dtype=float)
    _apply_boundary(mesh, values, boundary_data)
    if initial is None:
        # linear-in-log-r initial guess between the boundary traces
        t = (np.log(mesh.radii) - np.log(mesh.R_in)) \
            / (np.log(mesh.R_out) - np.log(mesh.R_in))
        if mesh.is_2d:
            values = (1 - t)[:, None] * values[0][None, :] \
                + t[:, None] * values[-1][None, :]
        else:
            values = (1 - t) * values[0] + t * values[-1]
        _apply_boundary(mesh, values, boundary_data)

    def J(v):
        return discrete_energy(GridFunction(mesh, v), spec, f)

    def grad_interior(v):
        g = energy_gradient(mesh, spec, v, fvals)
        if mesh.is_2d:
            g[0, :] = 0.0
            g[-1, :] = 0.0
        else:
            g[0] = 0.0
            g[-1] = 0.0
        return g

    scale = max(1.0, float(np.max(np.abs(fvals))),
                float(np.max(np.abs(values))))
    energy = J(values)
    history = [energy]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if method == "newton":
            g = grad_interior(values)
            d = (_newton_direction_2d if mesh.is_2d
                 else _newton_direction_1d)(mesh, spec, values, g)
            gdot = float(np.sum(g * d))        # negative: descent direction
            step = 1.0
            new = values + d
            e_new = J(new)
            while e_new > energy + 1e-4 * step * gdot and step > 1e-12:
                step *= 0.5
                new = values + step * d
                e_new = J(new)
            if e_new > energy:
                new, e_new = values, energy
        elif method in ("damped_picard", "picard"):
            trial = (_solve_picard_2d if mesh.is_2d else _solve_picard_1d)(
                mesh, spec, values, fvals)
            d = trial - values
            e_full = J(trial)
            if e_full <= energy - 1e-13 * abs(energy):
                new, e_new = trial, e_full
            else:
                # the undamped step can cycle for p far from 2; damp it by
                # a bounded energy line search along the step direction
                res = minimize_scalar(lambda s: J(values + s * d),
                                      bounds=(0.0, 1.2), method="bounded",
                                      options={"xatol": 1e-4})
                new = values + res.x * d
                e_new = J(new)
                if e_new > energy:
                    new, e_new = values, energy
        elif method == "descent":
            g = grad_interior(values)
            mu = mesh.node_measures()
            direction = -g / np.maximum(mu, 1e-300)     # mass-preconditioned
            gdot = float(np.sum(g * direction))
            step = 1.0
            new = values + step * direction
            e_new = J(new)
            while e_new > energy + 1e-4 * step * gdot and step > 1e-14:
                step *= 0.5
                new = values + step * direction
                e_new = J(new)
        else:
            raise DomainError(f"unknown method {method!r}")

        delta = float(np.max(np.abs(new - values)))
        values, energy = new, e_new
        history.append(energy)
        gnorm = float(np.max(np.abs(grad_interior(values))))
        if gnorm <= tol * scale or delta <= 1e-14 * scale:
            converged = gnorm <= max(tol * scale, 1e-8 * scale) or delta <= 1e-13 * scale
            break

    report = EnergyReport(energy=energy,
                          grad_norm=float(np.max(np.abs(grad_interior(values)))),
                          iterations=it, converged=converged, history=history)
    return GridFunction(mesh, values), report


# ---------------------------------------------------------------------------
# exhaustion, Holder modulus, comparison

@dataclass
class ExhaustionResult:
    radii_schedule: list
    solutions: list
    sups: list
    deviations: list          # max over B_rho \ B_1 of |u_{m+1} - u_m|
    final: GridFunction


def exhaust_exterior(spec, f, inner_boundary_data, R0=2.0, m_max=8,
                     cells_per_doubling=16, tol=1e-10, rho=4.0,
                     mesh_factory=None, method="newton",
                     max_iter=400):
    """Truncated-domain sweep: solve on B_(R_m) minus the unit ball with the
    given inner trace and zero outer trace, for R_m = R0 2^m."""
    if not spec.p > spec.n and not np.isscalar(inner_boundary_data):
        raise DomainError("angular exhaustion data requires the p > n regime")
    sols, sups, devs, schedule = [], [], [], []
    compare_radii = np.geomspace(1.0, rho, 33)
    prev = None
    for m in range(m_max + 1):
        Rm = R0 * 2.0 ** m
        schedule.append(Rm)
        if mesh_factory is not None:
            mesh = mesh_factory(Rm)
        else:
            num = int(np.ceil(cells_per_doubling * np.log2(Rm)))
            mesh = radial_mesh(spec.n, 1.0, Rm, max(num, 8))
        u, rep = solve_dirichlet(mesh, spec, f,
                                 {"inner": inner_boundary_data, "outer": 0.0},
                                 method=method, tol=tol, max_iter=max_iter)
        sols.append(u)
        sups.append(float(np.max(u.values)))
        if prev is not None:
            top = min(rho, prev.mesh.R_out)
            d = max(float(np.max(np.abs(u.at_radius(R) - prev.at_radius(R))))
                    for R in compare_radii if R <= top)
            devs.append(d)
        prev = u
    return ExhaustionResult(radii_schedule=schedule, solutions=sols,
                            sups=sups, deviations=devs, final=prev)


def holder_modulus(u, alpha, max_pairs=400_000, seed=0, region=None):
    """Sampled Holder seminorm estimate: max |u(x)-u(y)| / |x-y|^alpha over
    node pairs with |x-y| <= diam/4.

    region: optional (r_max, theta_center, theta_halfwidth) restriction;
    pairs then keep at least one endpoint within the region.
    """
    if not (0 < alpha <= 1):
        raise DomainError("alpha must lie in (0, 1]")
    mesh = u.mesh
    pts = mesh.points().reshape(-1, mesh.points().shape[-1])
    vals = u.values.ravel()
    if region is not None and mesh.is_2d:
        r_max, th_c, th_h = region
        rr = np.repeat(mesh.radii, len(mesh.theta))
        tt = np.tile(mesh.theta, len(mesh.radii))
        ang = np.abs((tt - th_c + np.pi) % (2 * np.pi) - np.pi)
        mask = (rr <= r_max) & (ang <= th_h)
        pts, vals = pts[mask], vals[mask]
    N = len(vals)
    diam = float(np.max(np.linalg.norm(pts - pts.mean(axis=0), axis=1))) * 2.0
    cutoff = diam / 4.0
    best = 0.0
    if N * (N - 1) // 2 <= max_pairs:
        ii, jj = np.triu_indices(N, k=1)
    else:
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, N, size=max_pairs)
        jj = rng.integers(0, N, size=max_pairs)
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    dist = np.linalg.norm(pts[ii] - pts[jj], axis=1)
    ok = (dist > 0) & (dist <= cutoff)
    if np.any(ok):
        best = float(np.max(np.abs(vals[ii[ok]] - vals[jj[ok]])
                            / dist[ok] ** alpha))
    return best


def comparison_check(u, v, spec=None, f_u=None, f_v=None, tol=1e-9):
    """True iff u <= v + tol at every node (same mesh required).

    The caller is responsible for the ordering hypotheses (boundary traces
    and sources); this routine verifies the nodal conclusion.
    """
    if u.mesh is not v.mesh and not np.array_equal(u.mesh.radii, v.mesh.radii):
        raise DomainError("comparison requires a common mesh")
    return bool(np.all(u.values <= v.values + tol))
