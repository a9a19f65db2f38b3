"""Symmetric cones of principal-curvature tuples.

Conventions used throughout the package:

* a curvature tuple is an n-vector (n >= 2) stored sorted ascending,
  kappa_1 <= ... <= kappa_n;
* Gamma_m (``m_convex`` of order m) is the open symmetric cone of tuples
  whose every m-element partial sum is positive; Gamma_1 is the positive
  cone and Gamma_n the half space {kappa_1 + ... + kappa_n > 0};
* ``Cyl_m`` is the ray of cylindrical tuples (0,...,0,k,...,k) with m
  zeros and k > 0.

All membership and distance computations are permutation- and
scale-invariant; distances are evaluated on the normalized tuple
kappa/|kappa|.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DimensionMismatchError, ZeroTupleError

__all__ = [
    "CurvatureTuple",
    "SymmetricCone",
    "contains",
    "normalized_boundary_distance",
    "cyl_distance",
    "cone_from_config",
    "cone_to_config",
]


@dataclass(frozen=True)
class CurvatureTuple:
    """Ordered principal-curvature n-tuple, stored ascending."""

    values: np.ndarray

    def __init__(self, values):
        arr = np.sort(np.asarray(values, dtype=float))
        if arr.ndim != 1 or arr.size < 2:
            raise DimensionMismatchError(
                f"curvature tuple needs n >= 2 entries, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("curvature tuple entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def smallest(self) -> float:
        return float(self.values[0])

    @property
    def largest(self) -> float:
        return float(self.values[-1])

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _as_batch(kappa, n=None):
    """Return (batch, squeeze) with batch of shape (m, n), rows sorted."""
    arr = np.asarray(kappa, dtype=float)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimensionMismatchError(f"expected tuples of shape (n,) or (m, n), got {arr.shape}")
    if n is not None and arr.shape[1] != n:
        raise DimensionMismatchError(f"dimension mismatch: cone has n={n}, tuple has n={arr.shape[1]}")
    return np.sort(arr, axis=1), squeeze


@dataclass(frozen=True)
class SymmetricCone:
    """Open symmetric cone in R^n.

    ``kind`` is one of ``positive``, ``m_convex`` (with ``order`` the
    subscript of Gamma), ``half_space`` or ``shrunken``.  A shrunken cone
    is an inner cone Gamma_0 of its ``base``: tuples whose normalized
    boundary distance to the base cone is at least ``margin``.
    """

    kind: str
    n: int
    order: int = 0
    base: "SymmetricCone | None" = None
    margin: float = 0.0

    @staticmethod
    def positive(n: int) -> "SymmetricCone":
        return SymmetricCone("positive", n)

    @staticmethod
    def m_convex(n: int, order: int) -> "SymmetricCone":
        if not 1 <= order <= n:
            raise ValueError(f"Gamma_m order must satisfy 1 <= m <= n, got {order}")
        return SymmetricCone("m_convex", n, order=order)

    @staticmethod
    def half_space(n: int) -> "SymmetricCone":
        return SymmetricCone("half_space", n)

    def shrunken(self, margin: float) -> "SymmetricCone":
        if margin <= 0:
            raise ValueError("shrink margin must be positive")
        if self.kind == "shrunken":
            return SymmetricCone("shrunken", self.n, base=self.base, margin=self.margin + margin)
        return SymmetricCone("shrunken", self.n, base=self, margin=margin)

    # -- membership / distance ------------------------------------------------

    def contains(self, kappa, strict=True):
        batch, squeeze = _as_batch(kappa, self.n)
        out = self._contains_batch(batch, strict)
        return bool(out[0]) if squeeze else out

    def _contains_batch(self, batch, strict):
        if self.kind == "shrunken":
            d = self.base._distance_batch(batch)
            return d > self.margin if strict else d >= self.margin
        d = self._distance_batch(batch)
        return d > 0.0 if strict else d >= 0.0

    def normalized_boundary_distance(self, kappa):
        batch, squeeze = _as_batch(kappa, self.n)
        norms = np.linalg.norm(batch, axis=1)
        if np.any(norms == 0.0):
            raise ZeroTupleError("boundary distance undefined for the zero tuple")
        out = self._distance_batch(batch)
        if self.kind == "shrunken":
            out = out - self.margin
        return float(out[0]) if squeeze else out

    def _distance_batch(self, batch):
        """Signed distance of kappa/|kappa| to the cone boundary.

        Exact for interior points of polyhedral cones (minimum over facet
        hyperplanes); for exterior points the magnitude is a lower bound
        but the sign is always correct.
        """
        norms = np.linalg.norm(batch, axis=1)
        unit = np.divide(batch, norms[:, None], out=np.zeros_like(batch), where=norms[:, None] > 0)
        if self.kind == "positive":
            return unit[:, 0]
        if self.kind == "half_space":
            return unit.sum(axis=1) / math.sqrt(self.n)
        if self.kind == "m_convex":
            # rows sorted ascending: the minimal facet functional over all
            # order-element subsets is the sum of the `order` smallest entries
            return unit[:, : self.order].sum(axis=1) / math.sqrt(self.order)
        if self.kind == "shrunken":
            return self.base._distance_batch(batch)
        raise ValueError(f"unknown cone kind {self.kind!r}")

    # -- sampling ---------------------------------------------------------------

    def sample_slice(self, rng, size, max_tries=2000):
        """Uniform samples on (cone intersect unit sphere), shape (size, n).

        Rows are sorted ascending.  Raises if the acceptance rate is too
        low to fill the request.
        """
        out = np.empty((size, self.n))
        filled = 0
        for _ in range(max_tries):
            cand = rng.standard_normal((max(2 * size, 64), self.n))
            cand /= np.linalg.norm(cand, axis=1, keepdims=True)
            cand = np.sort(cand, axis=1)
            keep = cand[self._contains_batch(cand, strict=True)]
            take = min(keep.shape[0], size - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
            if filled == size:
                return out
        raise RuntimeError(
            f"cone slice sampling stalled after {max_tries} rounds "
            f"({filled}/{size} accepted); margin too large?"
        )


# -- module-level operation wrappers (the spec's operation signatures) ----------


def contains(cone: SymmetricCone, kappa) -> bool:
    return cone.contains(np.asarray(kappa))


def normalized_boundary_distance(cone: SymmetricCone, kappa) -> float:
    return cone.normalized_boundary_distance(np.asarray(kappa))


def _cyl_unit(n: int, m: int):
    c = np.zeros(n)
    c[m:] = 1.0 / math.sqrt(n - m)
    return c


def cyl_distance(kappa, m=None) -> float:
    """Distance from kappa/|kappa| to the normalized cylindrical rays.

    ``Cyl_m`` has m leading zeros; the distance is measured to its unit
    representative (0,..,0,1,..,1)/sqrt(n-m), minimised over m when m is
    None.  Sorted storage makes the ascending representative the nearest
    permutation.
    """
    batch, squeeze = _as_batch(kappa)
    n = batch.shape[1]
    norms = np.linalg.norm(batch, axis=1)
    if np.any(norms == 0.0):
        raise ZeroTupleError("cyl distance undefined for the zero tuple")
    unit = batch / norms[:, None]
    if m is None:
        ms = range(n)
    else:
        if not 0 <= m <= n - 1:
            raise ValueError(f"cylinder index must satisfy 0 <= m <= n-1, got {m}")
        ms = [m]
    dists = np.min(
        [np.linalg.norm(unit - _cyl_unit(n, mm)[None, :], axis=1) for mm in ms], axis=0
    )
    return float(dists[0]) if squeeze else dists


# -- config (de)serialization ----------------------------------------------------

_KIND_NAMES = {"positive": "positive", "m_convex": "gamma_m", "half_space": "half_space"}


def cone_from_config(cfg: dict) -> SymmetricCone:
    """Build a cone from its JSON form, e.g. {"kind": "gamma_m", "m": 2, "n": 3, "margin": 0.05}."""
    kind = cfg.get("kind")
    n = cfg.get("n")
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"cone config needs integer n >= 2, got {n!r}")
    if kind == "positive":
        cone = SymmetricCone.positive(n)
    elif kind == "gamma_m":
        cone = SymmetricCone.m_convex(n, cfg["m"])
    elif kind == "half_space":
        cone = SymmetricCone.half_space(n)
    else:
        raise ValueError(f"unknown cone kind {kind!r}; expected positive | gamma_m | half_space")
    margin = cfg.get("margin", 0.0)
    if margin:
        cone = cone.shrunken(float(margin))
    return cone


def cone_to_config(cone: SymmetricCone) -> dict:
    margin = 0.0
    if cone.kind == "shrunken":
        margin = cone.margin
        cone = cone.base
    cfg = {"kind": _KIND_NAMES[cone.kind], "n": cone.n}
    if cone.kind == "m_convex":
        cfg["m"] = cone.order
    if margin:
        cfg["margin"] = margin
    return cfg
