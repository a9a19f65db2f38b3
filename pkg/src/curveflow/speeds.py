"""Admissible speed functions and their eigenvalue derivative calculus.

A speed is a smooth, symmetric, one-homogeneous, monotone f defined on an
open symmetric cone.  Besides pointwise evaluation the package needs

* the eigenvalue gradient f_i and Hessian f_ij,
* the difference quotients (f_i - f_j)/(kappa_i - kappa_j) with their
  smooth limit f_ii - f_ij at coincident eigenvalues,
* the full matrix second derivative assembled from these, evaluated at a
  diagonal matrix,

which together drive the pinching-function quadratic forms.  Catalog
entries carry analytic gradients; eigenvalue Hessians are analytic where
the closed form is short (sums, norms, power means) and one central
difference of the analytic gradient otherwise.

All evaluators are vectorised over a leading batch axis: tuples are rows
of a (m, n) array.  Rows need not be sorted; every formula is symmetric.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize

from .cones import SymmetricCone
from .errors import (
    ConeViolationError,
    CylinderConstantError,
    DegenerateEigenvaluesError,
    DimensionMismatchError,
    UnboundedRatioError,
)

__all__ = [
    "SpeedFunction",
    "DerivativeBundle",
    "CertificationReport",
    "mean_curvature",
    "power_mean",
    "norm_speed",
    "es_ratio",
    "two_harmonic",
    "combination",
    "speed_from_config",
    "cylinder_constant",
    "theta_constant",
    "second_derivative_form",
    "certify",
    "GAP_TOLERANCE",
]

# relative eigenvalue gap below which difference quotients switch to the
# analytic limit f_ii - f_ij
GAP_TOLERANCE = 1e-7

_FD_HESS_STEP = 1e-5


@dataclass(frozen=True)
class DerivativeBundle:
    """First and second eigenvalue derivatives of a symmetric function."""

    value: float
    gradient: np.ndarray
    eigen_hessian: np.ndarray
    off_diagonal_quotients: np.ndarray


class SpeedFunction:
    """An admissible speed with analytic evaluators.

    ``value_fn`` and ``grad_fn`` map a (m, n) batch to (m,) and (m, n);
    ``hess_fn`` maps to (m, n, n) and may be None, in which case the
    Hessian is one central finite difference of the analytic gradient.
    """

    def __init__(self, name, cone, value_fn, grad_fn, hess_fn=None, params=None, convexity="unknown"):
        self.name = name
        self.cone = cone
        self.params = dict(params or {})
        self.convexity = convexity
        self._value_fn = value_fn
        self._grad_fn = grad_fn
        self._hess_fn = hess_fn

    @property
    def n(self) -> int:
        return self.cone.n

    def __repr__(self):
        ps = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"SpeedFunction({self.name}{', ' + ps if ps else ''}, n={self.n})"

    # -- raw (closure-safe, no cone check) evaluators -------------------------

    def value_raw(self, kappas):
        K = self._batch(kappas)
        with np.errstate(all="ignore"):
            return self._value_fn(K)

    def gradient_raw(self, kappas):
        K = self._batch(kappas)
        with np.errstate(all="ignore"):
            return self._grad_fn(K)

    def hessian_raw(self, kappas):
        K = self._batch(kappas)
        with np.errstate(all="ignore"):
            if self._hess_fn is not None:
                return self._hess_fn(K)
            return self._fd_hessian(K)

    def _fd_hessian(self, K):
        n = K.shape[1]
        scale = np.linalg.norm(K, axis=1, keepdims=True)
        h = _FD_HESS_STEP * np.where(scale > 0, scale, 1.0)
        H = np.empty(K.shape + (n,))
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            gp = self._grad_fn(K + h * e)
            gm = self._grad_fn(K - h * e)
            H[:, i, :] = (gp - gm) / (2.0 * h)
        return 0.5 * (H + np.transpose(H, (0, 2, 1)))

    # -- checked evaluators ----------------------------------------------------

    def _batch(self, kappas):
        K = np.asarray(kappas, dtype=float)
        if K.ndim == 1:
            K = K[None, :]
        if K.shape[-1] != self.n:
            raise DimensionMismatchError(f"speed {self.name} has n={self.n}, tuple has n={K.shape[-1]}")
        return K

    def _check_cone(self, K):
        inside = self.cone.contains(K)
        if not np.all(inside):
            bad = K[~np.atleast_1d(inside)][0]
            raise ConeViolationError(
                f"type-0 hazard: tuple {bad.tolist()} outside the cone of speed {self.name}"
            )

    def evaluate(self, kappa) -> float:
        K = self._batch(np.asarray(kappa))
        self._check_cone(K)
        return float(self._value_fn(K)[0])

    def value_batch(self, kappas, check=True):
        K = self._batch(kappas)
        if check:
            self._check_cone(K)
        return self._value_fn(K)

    def gradient_batch(self, kappas, check=True):
        K = self._batch(kappas)
        if check:
            self._check_cone(K)
        return self._grad_fn(K)

    def derivative_batch(self, kappas, check=True):
        """Return (value, gradient, hessian, quotients) arrays for a batch."""
        K = self._batch(kappas)
        if check:
            self._check_cone(K)
        val = self._value_fn(K)
        grad = self._grad_fn(K)
        if self._hess_fn is not None:
            hess = self._hess_fn(K)
        else:
            hess = self._fd_hessian(K)
        quot = _quotients(K, grad, hess)
        return val, grad, hess, quot

    def derivatives(self, kappa) -> DerivativeBundle:
        val, grad, hess, quot = self.derivative_batch(np.asarray(kappa))
        return DerivativeBundle(float(val[0]), grad[0], hess[0], quot[0])

    derivative_bundle = derivative_batch  # protocol shared with pinching functions

    def value_at_ones(self) -> float:
        return float(self.value_raw(np.ones(self.n))[0])

    def dual(self) -> "SpeedFunction":
        """The inverse speed f_*(z) = 1/f(1/z_1, ..., 1/z_n) on the positive cone."""

        def val(K):
            return 1.0 / self._value_fn(1.0 / K)

        def grad(K):
            W = 1.0 / K
            fs = 1.0 / self._value_fn(W)
            return (fs**2)[:, None] * self._grad_fn(W) * W**2

        return SpeedFunction(
            f"{self.name}_dual", SymmetricCone.positive(self.n), val, grad, None, self.params
        )


def _quotients(K, grad, hess):
    """Difference quotients (f_i - f_j)/(k_i - k_j) with the smooth limit."""
    dk = K[:, :, None] - K[:, None, :]
    dg = grad[:, :, None] - grad[:, None, :]
    scale = np.linalg.norm(K, axis=1)[:, None, None]
    tiny = np.abs(dk) < GAP_TOLERANCE * np.where(scale > 0, scale, 1.0)
    if hess is None:
        if np.any(tiny & ~np.eye(K.shape[1], dtype=bool)):
            raise DegenerateEigenvaluesError(
                "coincident eigenvalues and no Hessian available for the quotient limit"
            )
        limit = np.zeros_like(dk)
    else:
        diag = np.einsum("sii->si", hess)
        limit = diag[:, :, None] - hess
    return np.where(tiny, limit, dg / np.where(tiny, 1.0, dk))


# -- catalog ---------------------------------------------------------------------


def mean_curvature(n: int) -> SpeedFunction:
    """f = kappa_1 + ... + kappa_n on the half space {H > 0}."""

    def val(K):
        return K.sum(axis=1)

    def grad(K):
        return np.ones_like(K)

    def hess(K):
        return np.zeros(K.shape + (K.shape[1],))

    return SpeedFunction("mean", SymmetricCone.half_space(n), val, grad, hess, convexity="linear")


def power_mean(n: int, r: float) -> SpeedFunction:
    """f = (mean(kappa^r))^(1/r) on the positive cone; r = -1 is the harmonic mean."""
    if r == 0:
        raise ValueError("power mean exponent must be nonzero")

    def val(K):
        return (np.mean(K**r, axis=1)) ** (1.0 / r)

    def grad(K):
        f = val(K)
        return (f ** (1.0 - r))[:, None] * K ** (r - 1.0) / K.shape[1]

    def hess(K):
        f = val(K)
        g = grad(K)
        diag_part = np.einsum("si,ij->sij", g / K, np.eye(K.shape[1]))
        outer = np.einsum("si,sj->sij", g, g) / f[:, None, None]
        return (r - 1.0) * (diag_part - outer)

    convexity = "linear" if r == 1 else ("convex" if r > 1 else "concave")
    return SpeedFunction(
        "power_mean", SymmetricCone.positive(n), val, grad, hess, {"r": r}, convexity
    )


def norm_speed(n: int) -> SpeedFunction:
    """f = |kappa| (the norm of the second fundamental form) on the positive cone."""

    def val(K):
        return np.linalg.norm(K, axis=1)

    def grad(K):
        return K / val(K)[:, None]

    def hess(K):
        f = val(K)
        u = K / f[:, None]
        eye = np.eye(K.shape[1])
        return (eye[None, :, :] - np.einsum("si,sj->sij", u, u)) / f[:, None, None]

    return SpeedFunction("norm", SymmetricCone.positive(n), val, grad, hess, convexity="convex")


def _elementary_symmetric(K, kmax):
    """E_0..E_kmax of each row, shape (m, kmax+1)."""
    m, n = K.shape
    e = np.zeros((m, kmax + 1))
    e[:, 0] = 1.0
    for a in range(n):
        upto = min(a + 1, kmax)
        for j in range(upto, 0, -1):
            e[:, j] += K[:, a] * e[:, j - 1]
    return e


def _elementary_symmetric_without(K, kmax):
    """E_j(row without entry a), shape (m, n, kmax+1)."""
    m, n = K.shape
    out = np.empty((m, n, kmax + 1))
    for a in range(n):
        sub = np.delete(K, a, axis=1)
        out[:, a, :] = _elementary_symmetric(sub, kmax)
    return out


def es_ratio(n: int, k: int, l: int) -> SpeedFunction:
    """f = (E_k/E_l)^(1/(k-l)) on the positive cone (concave)."""
    if not (0 <= l < k <= n):
        raise ValueError(f"es_ratio needs 0 <= l < k <= n, got k={k}, l={l}")

    def val(K):
        e = _elementary_symmetric(K, k)
        return (e[:, k] / e[:, l]) ** (1.0 / (k - l))

    def grad(K):
        e = _elementary_symmetric(K, k)
        ew = _elementary_symmetric_without(K, k)
        f = (e[:, k] / e[:, l]) ** (1.0 / (k - l))
        term = ew[:, :, k - 1] / e[:, k, None]
        if l >= 1:
            term = term - ew[:, :, l - 1] / e[:, l, None]
        return f[:, None] * term / (k - l)

    return SpeedFunction(
        "es_ratio", SymmetricCone.positive(n), val, grad, None, {"k": k, "l": l}, "concave"
    )


def two_harmonic(n: int) -> SpeedFunction:
    """f = (sum_{i<j} (kappa_i + kappa_j)^-1)^-1 on the two-convex cone."""

    def _pair_sums(K):
        return K[:, :, None] + K[:, None, :]

    iu = np.triu_indices(n, k=1)

    def val(K):
        P = _pair_sums(K)
        return 1.0 / (1.0 / P[:, iu[0], iu[1]]).sum(axis=1)

    def grad(K):
        P = _pair_sums(K)
        f = val(K)
        inv2 = 1.0 / P**2
        off = inv2 - np.einsum("sij,ij->sij", inv2, np.eye(n))
        return (f**2)[:, None] * off.sum(axis=2)

    return SpeedFunction(
        "two_harmonic", SymmetricCone.m_convex(n, 2), val, grad, None, convexity="concave"
    )


def combination(a: float, first: SpeedFunction, b: float, second: SpeedFunction) -> SpeedFunction:
    """One-homogeneous combination a*first + b*second with a, b >= 0."""
    if first.n != second.n:
        raise DimensionMismatchError("combination of speeds with different n")
    if a < 0 or b < 0:
        raise ValueError("combination weights must be nonnegative")

    def _order(c):
        if c.kind == "shrunken":
            c = c.base
        return {"positive": 1, "m_convex": c.order, "half_space": c.n}[c.kind]

    cone = min((first.cone, second.cone), key=_order)

    def val(K):
        return a * first._value_fn(K) + b * second._value_fn(K)

    def grad(K):
        return a * first._grad_fn(K) + b * second._grad_fn(K)

    def hess(K):
        return a * first.hessian_raw(K) + b * second.hessian_raw(K)

    kinds = {first.convexity, second.convexity}
    if kinds <= {"concave", "linear"}:
        convexity = "concave"
    elif kinds <= {"convex", "linear"}:
        convexity = "convex"
    elif kinds == {"linear"}:
        convexity = "linear"
    else:
        convexity = "unknown"
    return SpeedFunction(
        "combination",
        cone,
        val,
        grad,
        hess,
        {"a": a, "first": first.name, "b": b, "second": second.name},
        convexity,
    )


_CATALOG_NAMES = ("mean", "power_mean", "norm", "es_ratio", "two_harmonic", "combination")


def speed_from_config(cfg: dict, n: int | None = None) -> SpeedFunction:
    """Build a catalog speed from its JSON form, e.g. {"speed": "power_mean", "r": -1}."""
    name = cfg.get("speed")
    n = cfg.get("n", n)
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"speed config needs integer n >= 2, got {n!r}")
    if name == "mean":
        return mean_curvature(n)
    if name == "power_mean":
        return power_mean(n, float(cfg["r"]))
    if name == "norm":
        return norm_speed(n)
    if name == "es_ratio":
        return es_ratio(n, int(cfg["k"]), int(cfg["l"]))
    if name == "two_harmonic":
        return two_harmonic(n)
    if name == "combination":
        return combination(
            float(cfg["a"]),
            speed_from_config(cfg["first"], n),
            float(cfg["b"]),
            speed_from_config(cfg["second"], n),
        )
    raise ValueError(f"unknown speed {name!r}; catalog: {', '.join(_CATALOG_NAMES)}")


# -- derived quantities ------------------------------------------------------------


def second_derivative_form(speed: SpeedFunction, kappa, V) -> float:
    """Matrix second derivative f''(diag(kappa))[V, V] via the eigenvalue form."""
    V = np.asarray(V, dtype=float)
    V = 0.5 * (V + V.T)
    _, _, hess, quot = speed.derivative_batch(np.asarray(kappa))
    return float(_form_batch(hess, quot, V[None, :, :])[0])


def _form_batch(hess, quot, V):
    """Batched eigenvalue form: hess_ij V_ii V_jj + 2 sum_{i>j} quot_ij V_ij^2."""
    n = V.shape[-1]
    Vd = np.einsum("sii->si", V)
    term1 = np.einsum("sij,si,sj->s", hess, Vd, Vd)
    lower = np.tril(np.ones((n, n)), k=-1)
    term2 = 2.0 * np.einsum("sij,sij,ij->s", quot, V**2, lower)
    return term1 + term2


def cylinder_constant(speed: SpeedFunction, m: int) -> float:
    """c_m = 1/f(0,...,0,1,...,1) with m zeros; errors if f degenerates there."""
    n = speed.n
    if not 0 <= m <= n - 1:
        raise ValueError(f"cylinder index must satisfy 0 <= m <= n-1, got {m}")
    tup = np.zeros(n)
    tup[m:] = 1.0
    if not speed.cone.contains(tup, strict=False):
        raise CylinderConstantError(
            f"cylinder tuple with m={m} lies outside the closure of the {speed.name} cone"
        )
    value = float(speed.value_raw(tup)[0])
    if not math.isfinite(value) or value <= 1e-12:
        raise CylinderConstantError(
            f"speed {speed.name} degenerates on the cylinder tuple with m={m} (f={value!r})"
        )
    return 1.0 / value


def _slice_candidates(cone, samples, seed):
    rng = np.random.default_rng(seed)
    n = cone.n
    pts = rng.standard_normal((samples, n))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts = np.sort(pts, axis=1)
    keep = pts[cone.contains(pts, strict=False)]
    corners = []
    for m in range(n):
        c = np.zeros(n)
        c[m:] = 1.0 / math.sqrt(n - m)
        if cone.contains(c, strict=False):
            corners.append(c)
    if corners:
        keep = np.concatenate([keep, np.array(corners)], axis=0)
    if keep.shape[0] == 0:
        raise RuntimeError("no slice candidates landed in the cone; margin too large?")
    return keep


def theta_constant(
    speed: SpeedFunction,
    cone: SymmetricCone,
    variant: str = "concave",
    extra_lower_bounds=(),
    samples: int = 8192,
    seed: int = 0,
    polish: bool = True,
) -> float:
    """Maximum of a trace/norm numerator over f on the closed cone slice.

    variant "concave" maximises (tr z + |z|)/f(z) (so that 2*Theta*F - H - |A|
    is sandwiched between Theta*F and 2*Theta*F); variant "convex" maximises
    (|z| - tr z)/f(z).  The result is raised to satisfy every extra lower
    bound.
    """
    if variant not in ("concave", "convex"):
        raise ValueError(f"unknown theta variant {variant!r}")
    sign = 1.0 if variant == "concave" else -1.0

    def ratio(pts):
        tr = pts.sum(axis=1)
        nrm = np.linalg.norm(pts, axis=1)
        f = speed.value_raw(pts)
        num = sign * tr + nrm
        bad = ~np.isfinite(f) | (f <= 1e-12 * np.maximum(np.abs(num), 1.0))
        if np.any(bad & (num > 1e-12)):
            direction = pts[bad & (num > 1e-12)][0]
            raise UnboundedRatioError(
                f"speed {speed.name} vanishes toward boundary direction "
                f"{np.round(direction, 6).tolist()}; Theta is unbounded"
            )
        return np.where(bad, -np.inf, num / f)

    pts = _slice_candidates(cone, samples, seed)
    vals = ratio(pts)
    best = float(np.max(vals))
    if polish:
        order = np.argsort(vals)[::-1][:4]

        def neg(x):
            nx = np.linalg.norm(x)
            if nx == 0:
                return np.inf
            u = np.sort(x / nx)
            if not cone.contains(u, strict=False):
                return np.inf
            return -float(ratio(u[None, :])[0])

        for i in order:
            res = minimize(neg, pts[i], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
            if np.isfinite(res.fun):
                best = max(best, -float(res.fun))
    for bound in extra_lower_bounds:
        best = max(best, float(bound))
    return best


# -- sampling-based certification ----------------------------------------------------

_PROPERTIES = ("one_homogeneous", "monotone", "concave", "convex", "inverse_concave")


@dataclass
class CertificationReport:
    speed: str
    property: str
    samples: int
    seed: int
    tolerance: float
    worst_margin: float
    passed: bool
    witness: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "speed": self.speed,
            "property": self.property,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "worst_margin": self.worst_margin,
            "passed": self.passed,
            "witness": self.witness,
        }


def _random_symmetric(rng, count, n):
    V = rng.standard_normal((count, n, n))
    V = 0.5 * (V + np.transpose(V, (0, 2, 1)))
    return V / np.linalg.norm(V.reshape(count, -1), axis=1)[:, None, None]


def certify(
    speed: SpeedFunction,
    cone: SymmetricCone,
    property: str,
    samples: int = 2000,
    seed: int = 0,
    tolerance: float | None = None,
) -> CertificationReport:
    """Spot-check an analytic property of the speed on seeded cone samples.

    The verdict is a sampling certificate, not a proof: the report carries
    the worst margin seen and the witnessing tuple (and matrix direction,
    for the curvature-form properties).
    """
    if property not in _PROPERTIES:
        raise ValueError(f"unknown property {property!r}; expected one of {_PROPERTIES}")
    rng = np.random.default_rng(seed)
    target = speed
    sample_cone = cone
    if property == "inverse_concave":
        target = speed.dual()
        sample_cone = SymmetricCone.positive(speed.n).shrunken(1e-3)
    pts = sample_cone.sample_slice(rng, samples)

    witness = {}
    if property == "one_homogeneous":
        lam = rng.uniform(0.1, 10.0, samples)
        f1 = target.value_batch(pts, check=False)
        f2 = target.value_batch(lam[:, None] * pts, check=False)
        resid = np.abs(f2 - lam * f1) / np.abs(lam * f1)
        worst = float(np.max(resid))
        tol = 1e-10 if tolerance is None else tolerance
        passed = worst <= tol
        idx = int(np.argmax(resid))
        witness = {"kappa": pts[idx].tolist(), "lambda": float(lam[idx])}
    elif property == "monotone":
        grad = target.gradient_batch(pts, check=False)
        worst = float(np.min(grad))
        tol = 1e-12 if tolerance is None else tolerance
        passed = worst > tol
        idx = int(np.argmin(grad.min(axis=1)))
        witness = {"kappa": pts[idx].tolist()}
    else:  # curvature-form properties via the full matrix second derivative
        V = _random_symmetric(rng, samples, speed.n)
        _, _, hess, quot = target.derivative_batch(pts, check=False)
        form = _form_batch(hess, quot, V)
        tol = 1e-9 if tolerance is None else tolerance
        if property == "convex":
            worst = float(np.min(form))
            passed = worst >= -tol
            idx = int(np.argmin(form))
        else:  # concave, inverse_concave
            worst = float(np.max(form))
            passed = worst <= tol
            idx = int(np.argmax(form))
        witness = {"kappa": pts[idx].tolist(), "V": V[idx].tolist()}

    return CertificationReport(
        speed=speed.name,
        property=property,
        samples=samples,
        seed=seed,
        tolerance=tol,
        worst_margin=worst,
        passed=bool(passed),
        witness=witness,
    )
