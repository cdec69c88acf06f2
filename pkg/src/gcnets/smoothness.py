"""Smoothness classes and the oracles through which functions and curves enter.

Two families of objects live here.  Functions f: [0,1]^k -> [0,1] whose
derivatives up to a given order are bounded by beta and whose top-order
derivatives are Holder continuous with the same constant; and curves
gamma: [0, length] -> [0,1]^d parametrized by arclength whose first-order
Taylor remainder is controlled by kappa * |t - s|^alpha.

Oracles supply derivatives in closed form.  The quantization machinery in
:mod:`gcnets.poly_net` needs exact derivative values at cell centers, so no
numerical differentiation happens anywhere in the library.  Conformance to a
declared class is checked by sampled falsification (:func:`validate_function_oracle`,
:func:`validate_curve_oracle`), never assumed.

All objects are immutable after construction and safe to evaluate from
multiple threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product as _cartesian
from math import comb, factorial
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "HolderParams",
    "DerivedConstants",
    "smoothness_degree",
    "multi_indices",
    "compute_constants",
    "FunctionOracle",
    "TrigOracle",
    "PolyOracle",
    "oracle_from_json",
    "oracle_to_json",
    "TaylorPolynomial",
    "taylor_polynomial",
    "scale_link",
    "scale_for_class",
    "ScaleError",
    "OracleReport",
    "validate_function_oracle",
    "CurveOracle",
    "LineCurve",
    "ParametricCurve",
    "validate_curve_oracle",
]


class ScaleError(ValueError):
    """Raised when a requested dyadic scale cannot honor the class parameters."""


def smoothness_degree(alpha: float) -> int:
    """Polynomial degree attached to smoothness exponent ``alpha``.

    Non-integer exponents use ``floor(alpha)``.  Integer exponents use
    ``alpha - 1``: the class with exponent 2 consists of once-differentiable
    functions with a Lipschitz derivative, matching the convention that a
    curve with exponent 2 has curvature bounded by twice its constant.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return math.ceil(alpha) - 1


def multi_indices(k: int, max_order: int) -> list[tuple[int, ...]]:
    """All s in N^k with |s| <= max_order, ordered by |s| then lexicographically."""
    out: list[tuple[int, ...]] = []
    for order in range(max_order + 1):
        block = [s for s in _cartesian(range(order + 1), repeat=k) if sum(s) == order]
        out.extend(sorted(block))
    return out


@dataclass(frozen=True)
class HolderParams:
    """Class parameters: intrinsic dimension k, ambient dimension d, exponent, bound."""

    k: int
    d: int
    alpha: float
    beta: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.d < self.k:
            raise ValueError("d must be >= k")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")

    @property
    def degree(self) -> int:
        return smoothness_degree(self.alpha)

    @property
    def codim(self) -> int:
        """Number of transverse coordinates when the class parametrizes a graph in R^d."""
        return self.d - self.k


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from (k, d, alpha); pure combinatorics of multi-indices.

    c1 sums 1/s! over top-order multi-indices, c2 sums 2^-|s|/s! over all
    admissible ones.  c3 counts admissible multi-indices, c4 their total order.
    c0 = 2^-alpha + c2/2 is the slab half-thickness in units of the value
    quantum, and rho = k / (k + alpha (d - k)) is the detection-rate exponent.
    """

    c1: float
    c2: float
    c3: int
    c4: int
    c0: float
    rho: float


def compute_constants(params: HolderParams) -> DerivedConstants:
    """Evaluate all derived constants for a parameter set.

    Pure function of (k, d, alpha).  ``c1 <= exp(k)`` and ``c2 <= exp(k/2)``
    always hold.
    """
    k, alpha = params.k, params.alpha
    q = params.degree
    indices = multi_indices(k, q)
    c1 = sum(
        1.0 / math.prod(factorial(si) for si in s) for s in indices if sum(s) == q
    )
    c2 = sum(
        2.0 ** -sum(s) / math.prod(factorial(si) for si in s) for s in indices
    )
    c3 = sum(comb(order + k - 1, k - 1) for order in range(q + 1))
    c4 = sum(order * comb(order + k - 1, k - 1) for order in range(q + 1))
    c0 = 2.0**-alpha + c2 / 2.0
    rho = k / (k + alpha * (params.d - k))
    return DerivedConstants(c1=c1, c2=c2, c3=c3, c4=c4, c0=c0, rho=rho)


def scale_link(Delta: float, alpha: float, beta: float, k: int = 1) -> float:
    """Value quantum delta implied by a cell width Delta: c1 * beta * Delta^alpha."""
    if not 0 < Delta <= 1:
        raise ValueError("Delta must lie in (0, 1]")
    c1 = compute_constants(HolderParams(k=k, d=k + 1, alpha=alpha, beta=beta)).c1
    return c1 * beta * Delta**alpha


def scale_for_class(
    alpha: float, beta: float, J: int, k: int = 1, a_J: float | None = None
) -> int:
    """Dyadic scale j at which the scale-indexed network covers the class.

    j = ceil((J + log2(c1 beta)) / (1 + alpha)).  Raises :class:`ScaleError`
    when J is too small, i.e. j > J, or when the coefficient cap a_J
    (default a_J = J) falls below beta.
    """
    c1 = compute_constants(HolderParams(k=k, d=k + 1, alpha=alpha, beta=beta)).c1
    cap = float(J) if a_J is None else float(a_J)
    raw = (J + math.log2(c1 * beta)) / (1.0 + alpha)
    j = math.ceil(raw - 1e-12)
    if j > J:
        raise ScaleError(f"J too small: scale j({alpha}, {beta}) = {j} exceeds J = {J}")
    if cap < beta:
        raise ScaleError(f"J too small: coefficient cap a_J = {cap} below beta = {beta}")
    return max(j, 0)


# ---------------------------------------------------------------------------
# Function oracles


class FunctionOracle:
    """A function together with its derivatives up to the class degree.

    Subclasses implement :meth:`deriv`, evaluating the s-th partial
    derivative at points ``x`` of shape (k,) or (m, k).  Evaluation must be
    a pure function of its inputs.
    """

    params: HolderParams

    def deriv(self, x: np.ndarray, s: tuple[int, ...]) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.deriv(np.asarray(x, dtype=float), (0,) * self.params.k)

    def components(self) -> tuple["FunctionOracle", ...]:
        """Scalar components; the base oracle is its own single component."""
        return (self,)


def _as_points(x, k: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0 and k == 1:
        pts = pts.reshape(1, 1)
        return pts, True
    if pts.ndim == 1:
        if k == 1:
            return pts.reshape(-1, 1), False
        if pts.shape[0] != k:
            raise ValueError(f"expected point of dimension {k}")
        return pts.reshape(1, k), True
    if pts.shape[-1] != k:
        raise ValueError(f"expected points of dimension {k}")
    return pts, False


class TrigOracle(FunctionOracle):
    """offset + amp * sin(freq * <w, x> + phase), with closed-form derivatives.

    The ridge weights ``w`` default to all ones.  Every derivative is again a
    sinusoid, so conformance bounds are available analytically via
    :meth:`min_beta`.
    """

    def __init__(self, params, offset, amp, freq, phase, weights=None):
        self.params = params
        self.offset = float(offset)
        self.amp = float(amp)
        self.freq = float(freq)
        self.phase = float(phase)
        w = np.ones(params.k) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (params.k,):
            raise ValueError("weights must have length k")
        self.weights = w

    def deriv(self, x, s):
        pts, scalar = _as_points(x, self.params.k)
        order = sum(s)
        u = self.freq * pts @ self.weights + self.phase
        # d^n/du^n sin(u) = sin(u + n pi/2)
        val = self.amp * self.freq**order * math.prod(
            self.weights[i] ** s[i] for i in range(len(s))
        ) * np.sin(u + order * math.pi / 2.0)
        if order == 0:
            val = val + self.offset
        return val[0] if scalar else val

    def min_beta(self) -> float:
        """Smallest beta for which this oracle provably sits in its class."""
        q = self.params.degree
        alpha = self.params.alpha
        wmax = float(np.max(np.abs(self.weights)))
        a = abs(self.amp)
        lam = self.freq * wmax * self.params.k  # sup-norm Lipschitz factor of the phase
        bounds = [abs(self.offset) + a]
        for order in range(1, q + 1):
            bounds.append(a * self.freq**order * wmax**order)
        # Holder modulus of the top derivatives: |delta sin| <= min(2, lam h)
        # <= 2^(1 - e) lam^e h^e for e = alpha - q in (0, 1].
        e = alpha - q
        bounds.append(a * self.freq**q * wmax**q * 2 ** (1 - e) * lam**e)
        return max(bounds)


class PolyOracle(FunctionOracle):
    """Polynomial in k variables given by a multi-index coefficient map."""

    def __init__(self, params, coeffs):
        self.params = params
        if isinstance(coeffs, (list, tuple, np.ndarray)):
            if params.k != 1:
                raise ValueError("flat coefficient lists require k = 1")
            coeffs = {(i,): float(c) for i, c in enumerate(coeffs)}
        self.coeffs = {tuple(int(i) for i in s): float(c) for s, c in coeffs.items()}
        for s in self.coeffs:
            if len(s) != params.k:
                raise ValueError("coefficient multi-index has wrong length")

    def deriv(self, x, s):
        pts, scalar = _as_points(x, self.params.k)
        total = np.zeros(pts.shape[0])
        for mono, c in self.coeffs.items():
            if any(mono[i] < s[i] for i in range(len(s))):
                continue
            term = np.full(pts.shape[0], c)
            for i, (mi, si) in enumerate(zip(mono, s)):
                term *= factorial(mi) / factorial(mi - si)
                term *= pts[:, i] ** (mi - si)
            total += term
        return total[0] if scalar else total


def oracle_from_json(descriptor) -> FunctionOracle | tuple[FunctionOracle, ...]:
    """Build an oracle (or a tuple of transverse components) from a descriptor.

    ``{"family": "trig", "k": 1, "d": 2, "amp": ..., "freq": ..., "phase": ...}``
    with scalar entries gives one oracle; list entries give one component per
    transverse coordinate.  ``{"family": "poly", "coeffs": [...]}`` gives a
    univariate polynomial.
    """
    if isinstance(descriptor, str):
        descriptor = json.loads(descriptor)
    family = descriptor["family"]
    k = int(descriptor.get("k", 1))
    d = int(descriptor.get("d", k + 1))
    alpha = float(descriptor.get("alpha", 2.0))
    beta = float(descriptor.get("beta", 1.0))
    params = HolderParams(k=k, d=d, alpha=alpha, beta=beta)
    if family == "trig":
        fields = [descriptor.get(name, 0.0) for name in ("amp", "freq", "phase", "offset")]
        if any(isinstance(f, (list, tuple)) for f in fields):
            n = max(len(f) for f in fields if isinstance(f, (list, tuple)))
            listed = [list(f) if isinstance(f, (list, tuple)) else [f] * n for f in fields]
            comps = tuple(
                TrigOracle(params, offset=o, amp=a, freq=f, phase=p)
                for a, f, p, o in zip(*listed)
            )
            return comps if len(comps) > 1 else comps[0]
        amp, freq, phase, offset = (float(f) for f in fields)
        return TrigOracle(params, offset=offset, amp=amp, freq=freq, phase=phase)
    if family == "poly":
        coeffs = descriptor["coeffs"]
        if isinstance(coeffs, dict):
            coeffs = {tuple(int(t) for t in s.split(",")): float(v) for s, v in coeffs.items()}
        return PolyOracle(params, coeffs)
    raise ValueError(f"unknown oracle family {family!r}")


def oracle_to_json(oracle: FunctionOracle) -> dict:
    p = oracle.params
    base = {"k": p.k, "d": p.d, "alpha": p.alpha, "beta": p.beta}
    if isinstance(oracle, TrigOracle):
        return {
            "family": "trig",
            **base,
            "amp": oracle.amp,
            "freq": oracle.freq,
            "phase": oracle.phase,
            "offset": oracle.offset,
        }
    if isinstance(oracle, PolyOracle):
        return {
            "family": "poly",
            **base,
            "coeffs": {",".join(map(str, s)): c for s, c in oracle.coeffs.items()},
        }
    raise TypeError(f"cannot serialize oracle of type {type(oracle).__name__}")


# ---------------------------------------------------------------------------
# Taylor expansion


@dataclass(frozen=True)
class TaylorPolynomial:
    """Taylor expansion of a class function at a center point.

    ``coeffs`` maps each multi-index s to f^(s)(center)/s!.  The residual at
    any y in the cube is bounded by c1 * beta * ||y - center||^alpha in the
    sup norm.
    """

    center: tuple[float, ...]
    coeffs: dict

    def __call__(self, y) -> np.ndarray:
        pts, scalar = _as_points(y, len(self.center))
        diff = pts - np.asarray(self.center)
        total = np.zeros(pts.shape[0])
        for s, c in self.coeffs.items():
            total += c * np.prod(diff ** np.asarray(s), axis=1)
        return total[0] if scalar else total


def taylor_polynomial(f: FunctionOracle, x) -> TaylorPolynomial:
    """Degree-``f.params.degree`` Taylor expansion of ``f`` at ``x``."""
    k = f.params.k
    center = np.asarray(x, dtype=float).reshape(k)
    coeffs = {}
    for s in multi_indices(k, f.params.degree):
        fac = math.prod(factorial(si) for si in s)
        coeffs[s] = float(f.deriv(center, s)) / fac
    return TaylorPolynomial(center=tuple(center), coeffs=coeffs)


# ---------------------------------------------------------------------------
# Oracle validation (sampled falsification, never silent clipping)


@dataclass(frozen=True)
class OracleReport:
    ok: bool
    n_checked: int
    max_excess: float
    violations: tuple[str, ...]


def _sup_norm(a: np.ndarray) -> np.ndarray:
    return np.max(np.abs(a), axis=-1)


def validate_function_oracle(
    f: FunctionOracle, n_samples: int = 10_000, seed: int = 0, tol: float = 1e-9
) -> OracleReport:
    """Check derivative bounds, the top-order Holder modulus, and the range.

    Samples ``n_samples`` points and point pairs.  Violations beyond ``tol``
    are reported with a short description; nothing is clipped.
    """
    p = f.params
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.random((n_samples, p.k))
    y = rng.random((n_samples, p.k))
    q = p.degree
    violations: list[str] = []
    max_excess = 0.0

    vals = np.asarray(f.deriv(x, (0,) * p.k))
    range_excess = float(max(np.max(vals) - 1.0, np.max(-vals), 0.0))
    if range_excess > tol:
        violations.append(f"range outside [0,1] by {range_excess:.3g}")
    max_excess = max(max_excess, range_excess)

    for s in multi_indices(p.k, q):
        ds = np.asarray(f.deriv(x, s))
        excess = float(np.max(np.abs(ds)) - p.beta)
        max_excess = max(max_excess, excess)
        if excess > tol:
            violations.append(f"|f^({s})| exceeds beta by {excess:.3g}")
        if sum(s) == q:
            dy = np.asarray(f.deriv(y, s))
            h = _sup_norm(y - x)
            ok_pairs = h > 0
            bound = p.beta * h[ok_pairs] ** (p.alpha - q)
            excess = float(np.max(np.abs(dy - ds)[ok_pairs] - bound, initial=0.0))
            max_excess = max(max_excess, excess)
            if excess > tol:
                violations.append(f"Holder modulus of f^({s}) exceeded by {excess:.3g}")

    return OracleReport(
        ok=not violations,
        n_checked=n_samples,
        max_excess=max_excess,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Curves


class CurveOracle:
    """A curve in [0,1]^d parametrized by arclength, with tangents.

    Subclasses provide :meth:`point` and :meth:`tangent`, both accepting a
    scalar arclength or an array of arclengths in [0, length].  The declared
    class parameters promise

        || gamma(t) - gamma(s) - (t - s) gamma'(s) ||  <=  kappa |t - s|^alpha

    in the sup norm, together with length <= lam.
    """

    d: int
    length: float
    alpha: float
    lam: float
    kappa: float

    def point(self, s) -> np.ndarray:
        raise NotImplementedError

    def tangent(self, s) -> np.ndarray:
        raise NotImplementedError


class LineCurve(CurveOracle):
    """Straight segment from a to b, exactly unit speed."""

    def __init__(self, a, b, alpha: float = 2.0, lam: float | None = None, kappa: float = 1e-12):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.d = self.a.shape[0]
        self.length = float(np.linalg.norm(self.b - self.a))
        if self.length == 0:
            raise ValueError("degenerate segment")
        self._dir = (self.b - self.a) / self.length
        self.alpha = alpha
        self.lam = self.length if lam is None else lam
        self.kappa = kappa

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return self.a + np.multiply.outer(s, self._dir)

    def tangent(self, s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(self._dir, s.shape + (self.d,)).copy()


_GAUSS5_NODES = np.array(
    [-0.906179845938664, -0.538469310105683, 0.0, 0.538469310105683, 0.906179845938664]
)
_GAUSS5_WEIGHTS = np.array(
    [0.236926885056189, 0.478628670499366, 0.568888888888889, 0.478628670499366, 0.236926885056189]
)


class ParametricCurve(CurveOracle):
    """Arclength reparametrization of a smooth parametric curve.

    Takes position and velocity callables on a parameter interval.  The
    arclength map is tabulated with per-interval 5-point Gauss quadrature on
    a dense grid and inverted by vectorized Newton iterations, so point and
    tangent queries are accurate to near machine precision.
    """

    def __init__(
        self,
        position: Callable[[np.ndarray], np.ndarray],
        velocity: Callable[[np.ndarray], np.ndarray],
        u_span: tuple[float, float],
        alpha: float = 2.0,
        lam: float | None = None,
        kappa: float | None = None,
        grid: int = 2048,
    ):
        self._pos = position
        self._vel = velocity
        self.u0, self.u1 = float(u_span[0]), float(u_span[1])
        us = np.linspace(self.u0, self.u1, grid + 1)
        mid = 0.5 * (us[:-1] + us[1:])
        half = 0.5 * (us[1:] - us[:-1])
        nodes = mid[:, None] + half[:, None] * _GAUSS5_NODES[None, :]
        speeds = np.linalg.norm(self._vel(nodes.ravel()), axis=-1).reshape(nodes.shape)
        seg = (speeds * _GAUSS5_WEIGHTS[None, :]).sum(axis=1) * half
        self._u_grid = us
        self._s_grid = np.concatenate([[0.0], np.cumsum(seg)])
        self.length = float(self._s_grid[-1])
        self.d = int(np.asarray(self._pos(np.array([self.u0]))).shape[-1])
        self.alpha = alpha
        self.lam = self.length if lam is None else lam
        self.kappa = self._estimate_kappa() if kappa is None else kappa

    def _u_of_s(self, s: np.ndarray) -> np.ndarray:
        s = np.clip(s, 0.0, self.length)
        idx = np.clip(np.searchsorted(self._s_grid, s, side="right") - 1, 0, len(self._u_grid) - 2)
        u_lo = self._u_grid[idx]
        s_lo = self._s_grid[idx]
        speed_lo = np.linalg.norm(self._vel(u_lo), axis=-1)
        u = u_lo + (s - s_lo) / speed_lo
        for _ in range(4):
            # residual arclength from u_lo to u via fixed Gauss rule
            mid = 0.5 * (u_lo + u)
            half = 0.5 * (u - u_lo)
            nodes = mid[..., None] + half[..., None] * _GAUSS5_NODES
            sp = np.linalg.norm(self._vel(nodes.ravel()), axis=-1).reshape(nodes.shape)
            arc = (sp * _GAUSS5_WEIGHTS).sum(axis=-1) * half
            speed_u = np.linalg.norm(self._vel(u), axis=-1)
            u = u - (arc - (s - s_lo)) / speed_u
        return u

    def point(self, s):
        s_arr = np.asarray(s, dtype=float)
        u = self._u_of_s(s_arr.ravel())
        pts = np.asarray(self._pos(u))
        return pts.reshape(s_arr.shape + (self.d,)) if s_arr.shape else pts[0]

    def tangent(self, s):
        s_arr = np.asarray(s, dtype=float)
        u = self._u_of_s(s_arr.ravel())
        v = np.asarray(self._vel(u))
        t = v / np.linalg.norm(v, axis=-1, keepdims=True)
        return t.reshape(s_arr.shape + (self.d,)) if s_arr.shape else t[0]

    def _estimate_kappa(self) -> float:
        # dense sup estimate of the Taylor-remainder ratio, with 10% headroom
        s = np.linspace(0.0, self.length, 257)
        pts = self.point(s)
        tans = self.tangent(s)
        best = 0.0
        for i in range(0, len(s) - 1, 4):
            dt = s[i + 1 :] - s[i]
            resid = np.max(
                np.abs(pts[i + 1 :] - pts[i] - dt[:, None] * tans[i]), axis=1
            )
            best = max(best, float(np.max(resid / dt**self.alpha)))
        return 1.1 * best + 1e-12


def validate_curve_oracle(
    gamma: CurveOracle, n_samples: int = 10_000, seed: int = 0, tol: float = 1e-9
) -> OracleReport:
    """Check unit speed, cube membership, length cap, and the Taylor bound."""
    rng = np.random.Generator(np.random.Philox(seed))
    s = rng.random(n_samples) * gamma.length
    t = rng.random(n_samples) * gamma.length
    violations: list[str] = []
    max_excess = 0.0

    pts = gamma.point(s)
    cube_excess = float(max(np.max(pts) - 1.0, np.max(-pts), 0.0))
    if cube_excess > tol:
        violations.append(f"curve leaves [0,1]^d by {cube_excess:.3g}")
    max_excess = max(max_excess, cube_excess)

    speeds = np.linalg.norm(gamma.tangent(s), axis=-1)
    speed_excess = float(np.max(np.abs(speeds - 1.0)))
    if speed_excess > 1e-7:
        violations.append(f"tangent not unit speed, off by {speed_excess:.3g}")
    max_excess = max(max_excess, speed_excess)

    if gamma.length > gamma.lam + tol:
        violations.append(f"length {gamma.length:.6g} exceeds lambda {gamma.lam:.6g}")

    resid = np.max(
        np.abs(gamma.point(t) - pts - (t - s)[:, None] * gamma.tangent(s)), axis=1
    )
    bound = gamma.kappa * np.abs(t - s) ** gamma.alpha
    taylor_excess = float(np.max(resid - bound, initial=0.0))
    max_excess = max(max_excess, taylor_excess)
    if taylor_excess > tol:
        violations.append(f"Taylor bound exceeded by {taylor_excess:.3g}")

    return OracleReport(
        ok=not violations,
        n_checked=n_samples,
        max_excess=max_excess,
        violations=tuple(violations),
    )
