"""Operator coefficient A, its structural conditions, and phi(t) = t^(p-1) A(t).

The coefficient must be bounded between the declared ellipticity constants
delta and L, and phi must be strictly increasing; under those conditions
phi has a generalized inverse on [0, inf) bracketed by

    (s/L)^(1/(p-1)) <= phi^{-1}(s) <= (s/delta)^(1/(p-1)).

The bracket makes the inverse solvable by unconditional bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expressions import compile_expression


class DomainError(ValueError):
    pass


class NonConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OperatorSpec:
    """Exponent p, dimension n, coefficient A with window [delta, L_up]."""

    p: float
    n: int
    A: object = None            # vectorized callable on [0, inf); None means A == 1
    delta: float = 1.0
    L_up: float = 1.0
    delta_prime: float | None = None
    L_prime: float | None = None
    const_value: float | None = field(default=None)
    name: str = "plap"

    def __post_init__(self):
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p}")
        if not (isinstance(self.n, int) and self.n >= 2):
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if not (0 < self.delta <= self.L_up):
            raise DomainError("need 0 < delta <= L_up")
        if self.A is None:
            object.__setattr__(self, "A", _const_coeff(1.0))
            object.__setattr__(self, "const_value", 1.0)

    @property
    def alpha(self):
        """Natural radial growth exponent (p - n)/(p - 1), positive for p > n."""
        return (self.p - self.n) / (self.p - 1.0)

    def coeff(self, t):
        return np.asarray(self.A(np.asarray(t, dtype=float)), dtype=float)


def _const_coeff(c):
    def A(t):
        t = np.asarray(t, dtype=float)
        return np.full_like(t, c)
    A.expression = f"const:{c}"
    return A


def _smooth_bump_coeff():
    # 1 + 0.25 exp(-(t-1)^2): window [1, 1.25], phi increasing for p > 1.4
    def A(t):
        t = np.asarray(t, dtype=float)
        return 1.0 + 0.25 * np.exp(-((t - 1.0) ** 2))
    A.expression = "smooth-bump"
    return A


def coefficient_from_name(name):
    """Resolve a catalog name to (A, delta, L_up).

    Names: "plap", "const:c", "smooth-bump", "expr:<expression in t>".
    Expression coefficients get their window estimated by sampling; declare
    delta/L_up explicitly in the OperatorSpec if tighter values are known.
    """
    if name == "plap":
        return _const_coeff(1.0), 1.0, 1.0
    if name.startswith("const:"):
        c = float(name.split(":", 1)[1])
        if c <= 0:
            raise DomainError("constant coefficient must be positive")
        return _const_coeff(c), c, c
    if name == "smooth-bump":
        return _smooth_bump_coeff(), 1.0, 1.25
    if name.startswith("expr:"):
        A = compile_expression(name.split(":", 1)[1], var="t")
        ts = np.geomspace(1e-6, 1e6, 4001)
        ts = np.concatenate(([0.0], ts))
        vals = A(ts)
        if not np.all(np.isfinite(vals)) or np.min(vals) <= 0:
            raise DomainError(f"coefficient {name!r} is not positive and finite")
        return A, float(np.min(vals)), float(np.max(vals))
    raise DomainError(f"unknown coefficient name {name!r}")


def make_spec(p, n, coeff_name="plap", delta=None, L_up=None,
              delta_prime=None, L_prime=None):
    A, d, L = coefficient_from_name(coeff_name)
    const = None
    if coeff_name == "plap":
        const = 1.0
    elif coeff_name.startswith("const:"):
        const = d
    return OperatorSpec(p=float(p), n=int(n), A=A,
                        delta=float(delta if delta is not None else d),
                        L_up=float(L_up if L_up is not None else L),
                        delta_prime=delta_prime, L_prime=L_prime,
                        const_value=const, name=coeff_name)


def phi_eval(spec, t):
    """phi(t) = t^(p-1) A(t); accepts scalars or arrays, t >= 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("phi is defined for t >= 0")
    out = np.where(t_arr > 0, t_arr, 1.0) ** (spec.p - 1.0) * spec.coeff(t_arr)
    out = np.where(t_arr > 0, out, 0.0)
    return float(out) if np.isscalar(t) or np.ndim(t) == 0 else out


def phi_prime(spec, t, rel_step=1e-6):
    """Derivative of phi at t > 0 (central difference for general A)."""
    t = np.asarray(t, dtype=float)
    if spec.const_value is not None:
        return spec.const_value * (spec.p - 1.0) * t ** (spec.p - 2.0)
    h = rel_step * t
    return (phi_eval(spec, t + h) - phi_eval(spec, t - h)) / (2.0 * h)


def phi_inverse_bracket(spec, s):
    """The guaranteed containment interval for phi^{-1}(s)."""
    s = np.asarray(s, dtype=float)
    e = 1.0 / (spec.p - 1.0)
    return (s / spec.L_up) ** e, (s / spec.delta) ** e


def phi_inverse_array(spec, s, tol=1e-12):
    """Vectorized phi^{-1} by bracketed bisection; s is a nonnegative array."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("phi^{-1} is defined for s >= 0")
    if spec.const_value is not None:
        return (s / spec.const_value) ** (1.0 / (spec.p - 1.0))
    lo, hi = phi_inverse_bracket(spec, s)
    pm1 = spec.p - 1.0
    A = spec.A

    def f_raw(t):
        # phi without the argument checks of phi_eval; t >= 0 by bracket
        # construction and t^(p-1) vanishes at 0 for every p > 1
        return t ** pm1 * np.asarray(A(t), dtype=float)

    flo = f_raw(lo) - s
    fhi = f_raw(hi) - s
    if np.any(flo > tol * np.maximum(1.0, s)) or \
       np.any(fhi < -tol * np.maximum(1.0, s)):
        raise NonConvergenceError(
            "phi bracket does not contain a root; the declared delta/L window "
            "does not bound A")
    # safeguarded false position (Illinois): the secant point stays inside
    # the bracket and the stagnant endpoint's residual is halved, so both
    # endpoints converge; stop on the residual, which is what the contract
    # |phi(t) - s| <= tol max(1, s) asks for
    mid = 0.5 * (lo + hi)
    side = np.zeros_like(mid)
    target = tol * np.maximum(s, 1e-300)
    for _ in range(100):
        denom = fhi - flo
        with np.errstate(divide="ignore", invalid="ignore"):
            sec = (lo * fhi - hi * flo) / denom
        mid = np.where((denom > 0) & (sec > lo) & (sec < hi),
                       sec, 0.5 * (lo + hi))
        fm = f_raw(mid) - s
        if np.all(np.abs(fm) <= target):
            break
        go_lo = fm > 0            # root lies in [lo, mid]
        fhi = np.where(go_lo, fm, np.where(side < 0, 0.5 * fhi, fhi))
        flo = np.where(go_lo, np.where(side > 0, 0.5 * flo, flo), fm)
        hi = np.where(go_lo, mid, hi)
        lo = np.where(go_lo, lo, mid)
        side = np.where(go_lo, 1.0, -1.0)
    return mid


def phi_inverse(spec, s, tol=1e-12):
    """Scalar phi^{-1}(s) with |phi(t) - s| <= tol max(1, s)."""
    out = phi_inverse_array(spec, np.asarray([float(s)]), tol=tol)
    return float(out[0])


def phi_inverse_signed(spec, s, tol=1e-12):
    """Odd extension t = sgn(s) phi^{-1}(|s|), vectorized."""
    s = np.asarray(s, dtype=float)
    return np.sign(s) * phi_inverse_array(spec, np.abs(s), tol=tol)


def phi_signed(spec, t):
    """Odd extension of phi: sgn(t) phi(|t|), vectorized."""
    t = np.asarray(t, dtype=float)
    return np.sign(t) * phi_eval(spec, np.abs(t))


@dataclass
class ConditionEntry:
    label: str
    passed: bool
    detail: str = ""


@dataclass
class ConditionReport:
    entries: list

    @property
    def all_passed(self):
        return all(e.passed for e in self.entries)

    def __str__(self):
        return "\n".join(
            f"[{'PASS' if e.passed else 'FAIL'}] {e.label}: {e.detail}"
            for e in self.entries)


def validate_conditions(spec, sample_count=2001, t_min=1e-6, t_max=1e6):
    """Sampled check of the structural conditions on A over a geometric grid.

    Checks, in order: finiteness/continuity proxy (i), the window
    delta <= A <= L (ii), strict monotonicity of phi (iii), and, when
    delta_prime/L_prime are declared, the finite-difference derivative
    window delta' t^(p-2) <= phi' <= L' t^(p-2).
    """
    if sample_count < 2:
        raise DomainError("sample_count must be at least 2")
    ts = np.concatenate(([0.0], np.geomspace(t_min, t_max, sample_count)))
    vals = spec.coeff(ts)
    entries = []

    finite = bool(np.all(np.isfinite(vals)))
    entries.append(ConditionEntry(
        "(i) A finite on sampled grid", finite,
        f"sampled {len(ts)} points in [0, {t_max:g}]"))

    tol = 1e-12 * max(1.0, spec.L_up)
    in_window = bool(np.all(vals >= spec.delta - tol) and
                     np.all(vals <= spec.L_up + tol))
    entries.append(ConditionEntry(
        "(ii) delta <= A <= L", in_window,
        f"range [{vals.min():.6g}, {vals.max():.6g}] vs "
        f"[{spec.delta:g}, {spec.L_up:g}]"))

    phis = phi_eval(spec, ts)
    increasing = bool(np.all(np.diff(phis) > 0))
    entries.append(ConditionEntry(
        "(iii) phi strictly increasing", increasing,
        "pairwise on the sample grid"))

    if spec.delta_prime is not None and spec.L_prime is not None:
        mid = 0.5 * (ts[1:] + ts[:-1])
        dphi = np.diff(phis) / np.diff(ts)
        ref = mid ** (spec.p - 2.0)
        ok = bool(np.all(dphi >= spec.delta_prime * ref * (1 - 1e-3)) and
                  np.all(dphi <= spec.L_prime * ref * (1 + 1e-3)))
        entries.append(ConditionEntry(
            "(iii') delta' t^(p-2) <= dphi/dt <= L' t^(p-2)", ok,
            "finite differences on the sample grid"))

    return ConditionReport(entries)


def unit_ball_volume(n):
    """Measure of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
