"""Reference gauges for positive unit spheres.

Angular measures live on the positive unit sphere of a reference gauge.  The
supported family is the weighted l_p scale

    tau(x) = (sum_i w_i x_i^p)^(1/p),   0 < p <= inf,  w_i > 0,

which contains every plain l_p gauge (w = 1).  For p >= 1 and unit weights
these are norms; for p < 1 they are quasi-norms, which is all that is needed
downstream: only positivity away from 0 and 1-homogeneity are ever used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["NormSpec"]


@dataclass(frozen=True)
class NormSpec:
    """A 1-homogeneous gauge on the nonnegative orthant.

    Use the constructors :meth:`lp` and :meth:`weighted_lp`.  Instances are
    immutable and hashable; two specs compare equal iff kind, exponent and
    weights match exactly.
    """

    kind: str
    p: float
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("lp", "weighted_lp"):
            raise ValidationError(f"unknown norm kind {self.kind!r}")
        if not (self.p > 0):
            raise ValidationError(f"norm exponent must be positive, got {self.p}")
        if self.kind == "weighted_lp":
            if self.weights is None or len(self.weights) == 0:
                raise ValidationError("weighted_lp requires a weight vector")
            if any(not (w > 0) or not math.isfinite(w) for w in self.weights):
                raise ValidationError("weighted_lp weights must be strictly positive and finite")
        elif self.weights is not None:
            raise ValidationError("plain lp norm must not carry weights")

    @classmethod
    def lp(cls, p: float) -> "NormSpec":
        return cls(kind="lp", p=float(p))

    @classmethod
    def weighted_lp(cls, p: float, weights) -> "NormSpec":
        return cls(kind="weighted_lp", p=float(p),
                   weights=tuple(float(w) for w in np.asarray(weights, dtype=float)))

    @property
    def is_plain_lp(self) -> bool:
        return self.kind == "lp"

    def weight_array(self, dim: int) -> np.ndarray:
        if self.kind == "lp":
            return np.ones(dim)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (dim,):
            raise ValidationError(
                f"weight vector has length {w.size}, expected {dim}")
        return w

    def evaluate(self, x) -> np.ndarray | float:
        """tau(x) for one point (d,) or a stack (..., d) of points."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValidationError("gauge is defined on the nonnegative orthant")
        w = self.weight_array(x.shape[-1]) if self.kind == "weighted_lp" else None
        if math.isinf(self.p):
            wx = x if w is None else w * x
            out = wx.max(axis=-1)
        else:
            wx = x ** self.p if w is None else w * x ** self.p
            out = wx.sum(axis=-1) ** (1.0 / self.p)
        return float(out) if out.ndim == 0 else out

    def scale_to_sphere(self, x) -> np.ndarray:
        """Project nonzero points radially onto the unit sphere of this gauge."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(self.evaluate(x))
        if np.any(t <= 0):
            raise ValidationError("cannot project the zero vector onto the sphere")
        return x / t[..., None]

    def to_dict(self) -> dict:
        doc: dict = {"kind": self.kind, "p": "inf" if math.isinf(self.p) else self.p}
        if self.weights is not None:
            doc["weights"] = list(self.weights)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "NormSpec":
        p = doc.get("p")
        if isinstance(p, str):
            if p != "inf":
                raise ValidationError(f"bad norm exponent {p!r}")
            p = math.inf
        if p is None:
            raise ValidationError("norm document is missing the exponent field 'p'")
        if doc.get("kind") == "weighted_lp":
            return cls.weighted_lp(p, doc["weights"])
        if doc.get("kind") == "lp":
            return cls.lp(p)
        raise ValidationError(f"unknown norm kind {doc.get('kind')!r}")

    def __str__(self) -> str:
        ps = "inf" if math.isinf(self.p) else f"{self.p:g}"
        if self.kind == "lp":
            return f"l{ps}"
        return f"weighted-l{ps}{list(self.weights)}"
