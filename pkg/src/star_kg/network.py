"""Star network geometry, function representations, inner product and operator.

Branches are numbered ``0 .. n-1``. Functions are complex valued. Two
representations are provided:

* :class:`AnalyticFunction` holds per-branch vectorized rules, optionally with
  first and second derivative rules.
* :class:`GridFunction` holds samples on a uniform grid ``[0, L_k]`` per branch
  and is zero beyond ``L_k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (MissingDerivativeRule, NonIntegrable, NonPositiveSpeed,
                     TooFewBranches, UnsortedPotentials)
from .quadrature import QuadratureSpec, integrate


@dataclass(frozen=True)
class StarNetwork:
    """``n`` half-lines glued at one vertex, with speeds ``c`` and potentials ``a``.

    The operator acts as ``-c_k u'' + a_k u`` on branch ``k``.
    """

    c: tuple
    a: tuple

    def __init__(self, c: Sequence[float], a: Sequence[float]):
        object.__setattr__(self, "c", tuple(float(v) for v in c))
        object.__setattr__(self, "a", tuple(float(v) for v in a))
        validate_network(self)

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def c_arr(self) -> np.ndarray:
        return np.asarray(self.c)

    @property
    def a_arr(self) -> np.ndarray:
        return np.asarray(self.a)

    def a_upper(self, p: int) -> float:
        """Potential ``a_p`` with ``a_n = +inf`` (0-based index ``p``)."""
        return np.inf if p >= self.n else self.a[p]

    def band_index(self, lam: float) -> int:
        """Number of branches with ``a_k < lam``."""
        return int(np.sum(self.a_arr < float(np.real(lam))))

    def is_threshold(self, lam, rtol: float = 0.0) -> bool:
        lam = complex(lam)
        if lam.imag != 0.0:
            return False
        return bool(np.any(np.abs(self.a_arr - lam.real) <= rtol * max(1.0, abs(lam.real))))

    def to_dict(self) -> dict:
        return {"c": list(self.c), "a": list(self.a)}


def validate_network(net) -> None:
    """Raise if ``net`` violates the network invariants.

    Raises
    ------
    TooFewBranches, NonPositiveSpeed, UnsortedPotentials
    """
    c = list(net.c)
    a = list(net.a)
    if len(c) < 2:
        raise TooFewBranches(f"need at least 2 branches, got {len(c)}")
    if len(a) != len(c):
        raise TooFewBranches(f"c has {len(c)} entries but a has {len(a)}")
    if not all(np.isfinite(v) for v in c + a):
        raise NonPositiveSpeed("coefficients must be finite")
    bad = [k for k, v in enumerate(c) if not v > 0]
    if bad:
        raise NonPositiveSpeed(f"speeds must be positive; offending branches {bad}")
    if any(a[k + 1] < a[k] for k in range(len(a) - 1)):
        raise UnsortedPotentials(f"potentials must be non-decreasing, got {a}")


class NetworkPoint:
    """A point ``(branch, x)``; all points with ``x = 0`` are the vertex."""

    __slots__ = ("branch", "x")

    def __init__(self, branch: int, x: float):
        if x < 0:
            raise ValueError("coordinate must be non-negative")
        self.branch = int(branch)
        self.x = float(x)

    @property
    def is_vertex(self) -> bool:
        return self.x == 0.0

    def __eq__(self, other):
        if not isinstance(other, NetworkPoint):
            return NotImplemented
        if self.is_vertex and other.is_vertex:
            return True
        return self.branch == other.branch and self.x == other.x

    def __hash__(self):
        return hash((-1, 0.0)) if self.is_vertex else hash((self.branch, self.x))

    def __repr__(self):
        return f"NetworkPoint({self.branch}, {self.x})"


class NetworkFunction:
    """Common interface of function representations.

    Subclasses implement ``__call__(k, x, deriv=0)`` returning a complex array
    and ``interval(k)`` returning the support interval on branch ``k`` (``None``
    when the branch component vanishes identically, ``(0, inf)`` when there is
    no support bound).
    """

    n: int
    decaying: bool = False

    def __call__(self, k: int, x, deriv: int = 0) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def interval(self, k: int):  # pragma: no cover
        raise NotImplementedError

    @property
    def compact(self) -> bool:
        return all(self.interval(k) is None or np.isfinite(self.interval(k)[1])
                   for k in range(self.n))

    @property
    def support_radius(self) -> float:
        his = [self.interval(k)[1] for k in range(self.n) if self.interval(k) is not None]
        return max(his, default=0.0)

    def values_at(self, pt: NetworkPoint, deriv: int = 0) -> complex:
        return complex(self(pt.branch, np.array([pt.x]), deriv)[0])


Rule = Optional[Callable[[np.ndarray], np.ndarray]]


class AnalyticFunction(NetworkFunction):
    """Per-branch vectorized rules.

    Parameters
    ----------
    rules : sequence of callables or None
        ``rules[k](x)`` for branch ``k``; ``None`` marks an identically zero
        branch.
    d1, d2 : sequences of callables, optional
        First and second derivative rules, same layout as ``rules``.
    support : float, or sequence of (lo, hi) / None, optional
        Support radius (same on every branch) or per-branch intervals. Values
        outside are returned as exact zeros.
    decaying : bool
        Certificate that the rules are square integrable without a support
        bound (used for inner products on ``[0, inf)``).
    """

    def __init__(self, rules: Sequence[Rule], d1: Sequence[Rule] | None = None,
                 d2: Sequence[Rule] | None = None, support=None, decaying: bool = False):
        self.rules = tuple(rules)
        self.n = len(self.rules)
        self.d1 = None if d1 is None else tuple(d1)
        self.d2 = None if d2 is None else tuple(d2)
        for d in (self.d1, self.d2):
            if d is not None and len(d) != self.n:
                raise ValueError("derivative rules must have one entry per branch")
        self.decaying = bool(decaying)
        if support is None:
            iv = [None if r is None else (0.0, np.inf) for r in self.rules]
        elif np.isscalar(support):
            iv = [None if r is None else (0.0, float(support)) for r in self.rules]
        else:
            iv = [None if (r is None or s is None) else (float(s[0]), float(s[1]))
                  for r, s in zip(self.rules, support)]
        self._intervals = tuple(iv)

    def interval(self, k: int):
        return self._intervals[k]

    def _table(self, deriv):
        if deriv == 0:
            return self.rules
        table = self.d1 if deriv == 1 else self.d2 if deriv == 2 else None
        if table is None:
            raise MissingDerivativeRule(f"no rule for derivative order {deriv}")
        return table

    def __call__(self, k: int, x, deriv: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        iv = self._intervals[k]
        if iv is None:
            return np.zeros(x.shape, dtype=complex)
        rule = self._table(deriv)[k]
        if rule is None:
            raise MissingDerivativeRule(f"branch {k} lacks a derivative-{deriv} rule")
        out = np.zeros(x.shape, dtype=complex)
        inside = (x >= iv[0]) & (x <= iv[1])
        if np.all(inside):
            return np.asarray(rule(x), dtype=complex) * np.ones(x.shape)
        if np.any(inside):
            out[inside] = rule(x[inside])
        return out

    @classmethod
    def zero(cls, n: int) -> "AnalyticFunction":
        return cls([None] * n, [None] * n, [None] * n, support=0.0)

    @classmethod
    def same_on_all(cls, n, rule, d1=None, d2=None, support=None, decaying=False):
        return cls([rule] * n, None if d1 is None else [d1] * n,
                   None if d2 is None else [d2] * n, support=support, decaying=decaying)


class GridFunction(NetworkFunction):
    """Samples on uniform per-branch grids ``x = 0, h_k, ..., L_k``.

    Between samples the function is linear; beyond ``L_k`` it is zero.
    """

    def __init__(self, h: Sequence[float], L: Sequence[float], samples: Sequence[np.ndarray]):
        self.h = tuple(float(v) for v in h)
        self.L = tuple(float(v) for v in L)
        self.samples = tuple(np.asarray(s, dtype=complex) for s in samples)
        self.n = len(self.samples)
        if not (len(self.h) == len(self.L) == self.n):
            raise ValueError("h, L and samples must have one entry per branch")
        for hk, Lk, s in zip(self.h, self.L, self.samples):
            expected = int(np.floor(Lk / hk + 1e-9)) + 1
            if s.shape != (expected,):
                raise ValueError(f"branch grid needs {expected} samples, got {s.shape}")
        self.decaying = False

    def nodes(self, k: int) -> np.ndarray:
        return self.h[k] * np.arange(self.samples[k].size)

    def interval(self, k: int):
        return (0.0, self.L[k])

    def _derivative_samples(self, k, deriv):
        s, h = self.samples[k], self.h[k]
        if deriv == 0:
            return s
        if s.size < 3:
            raise MissingDerivativeRule("grid derivatives need at least 3 samples")
        if deriv == 1:
            return np.gradient(s, h, edge_order=2)
        if deriv == 2:
            d = np.empty_like(s)
            d[1:-1] = (s[2:] - 2 * s[1:-1] + s[:-2]) / h**2
            d[0] = (s[0] - 2 * s[1] + s[2]) / h**2
            d[-1] = (s[-1] - 2 * s[-2] + s[-3]) / h**2
            return d
        raise MissingDerivativeRule(f"no grid rule for derivative order {deriv}")

    def __call__(self, k: int, x, deriv: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        vals = self._derivative_samples(k, deriv)
        xs = self.nodes(k)
        out = np.interp(x, xs, vals.real, right=0.0) + 1j * np.interp(x, xs, vals.imag, right=0.0)
        out[x > xs[-1]] = 0.0
        return out

    @classmethod
    def sample(cls, f: NetworkFunction, h, L) -> "GridFunction":
        n = f.n
        h = [h] * n if np.isscalar(h) else list(h)
        L = [L] * n if np.isscalar(L) else list(L)
        samples = []
        for k in range(n):
            m = int(np.floor(L[k] / h[k] + 1e-9)) + 1
            samples.append(f(k, h[k] * np.arange(m)))
        return cls(h, L, samples)


def _trapezoid(y, h):
    return h * (y.sum() - 0.5 * (y[0] + y[-1]))


def _branch_product(u, v, k, spec):
    iu, iv = u.interval(k), v.interval(k)
    if iu is None or iv is None:
        return 0j
    lo, hi = max(iu[0], iv[0]), min(iu[1], iv[1])
    if hi <= lo:
        return 0j
    grids = [g for g in (u, v) if isinstance(g, GridFunction)]
    if grids:
        g = min(grids, key=lambda gf: gf.h[k])
        xs = g.nodes(k)
        xs = xs[(xs >= lo) & (xs <= hi)]
        if xs.size < 2:
            return 0j
        return complex(_trapezoid(u(k, xs) * np.conj(v(k, xs)), g.h[k]))
    if np.isinf(hi) and not (u.decaying or v.decaying):
        raise NonIntegrable(f"branch {k}: no support bound and no decay certificate")
    res = integrate(lambda x: u(k, x) * np.conj(v(k, x)), lo, hi, spec)
    return res.value


def inner_product_H(u: NetworkFunction, v: NetworkFunction, net: StarNetwork | None = None,
                    spec: QuadratureSpec | None = None) -> complex:
    """``Σ_k ∫ u_k conj(v_k) dx``.

    Grid functions are integrated with the trapezoid rule on the finer grid,
    analytic pairs with :func:`~star_kg.quadrature.integrate`.
    """
    if u.n != v.n or (net is not None and u.n != net.n):
        raise ValueError("functions live on networks with different branch counts")
    spec = spec or QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15)
    return complex(sum(_branch_product(u, v, k, spec) for k in range(u.n)))


def norm_H(u: NetworkFunction, net: StarNetwork | None = None, spec=None) -> float:
    return float(np.sqrt(max(inner_product_H(u, u, net, spec).real, 0.0)))


def apply_A(u: NetworkFunction, net: StarNetwork) -> NetworkFunction:
    """Apply ``-c_k d²/dx² + a_k`` branchwise.

    Raises
    ------
    MissingDerivativeRule
        If ``u`` is analytic without a second-derivative rule.
    """
    if isinstance(u, GridFunction):
        samples = [-net.c[k] * u._derivative_samples(k, 2) + net.a[k] * u.samples[k]
                   for k in range(u.n)]
        return GridFunction(u.h, u.L, samples)
    if not isinstance(u, AnalyticFunction):
        raise MissingDerivativeRule("apply_A needs an analytic or grid function")
    rules = []
    for k in range(u.n):
        if u.interval(k) is None:
            rules.append(None)
            continue
        if u.d2 is None or u.d2[k] is None:
            raise MissingDerivativeRule(f"branch {k} lacks a second-derivative rule")
        ck, ak, r0, r2 = net.c[k], net.a[k], u.rules[k], u.d2[k]
        rules.append(lambda x, ck=ck, ak=ak, r0=r0, r2=r2: -ck * r2(x) + ak * r0(x))
    support = [u.interval(k) for k in range(u.n)]
    return AnalyticFunction(rules, support=support, decaying=u.decaying)


@dataclass(frozen=True)
class TransmissionDefects:
    t0_defect: float
    t1_defect: float

    def ok(self, tol: float) -> bool:
        return self.t0_defect <= tol and self.t1_defect <= tol


def _one_sided_slope(u, k, h=1e-4):
    # fourth-order one-sided difference for rules lacking a derivative
    x = h * np.arange(5)
    f = u(k, x)
    return (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)


def check_transmission(u: NetworkFunction, net: StarNetwork, tol: float | None = None):
    """Vertex defects: continuity spread and weighted flux sum.

    ``tol`` is accepted for interface symmetry; comparison is left to callers
    via :meth:`TransmissionDefects.ok`.
    """
    zero = np.zeros(1)
    vals = np.array([u(k, zero)[0] for k in range(u.n)])
    t0 = float(np.max(np.abs(vals[:, None] - vals[None, :])))
    slopes = []
    for k in range(u.n):
        if isinstance(u, AnalyticFunction) and u.interval(k) is None:
            slopes.append(0j)
        elif isinstance(u, AnalyticFunction) and u.d1 is not None and u.d1[k] is not None:
            slopes.append(u(k, zero, 1)[0])
        elif isinstance(u, GridFunction):
            slopes.append(u._derivative_samples(k, 1)[0])
        else:
            slopes.append(_one_sided_slope(u, k))
    t1 = float(abs(np.dot(net.c_arr, np.array(slopes))))
    return TransmissionDefects(t0, t1)
