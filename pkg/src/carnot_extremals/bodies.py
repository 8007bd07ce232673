"""Strictly convex control sets and their support functions.

A control set U is a compact, strictly convex subset of R^k with the origin
in its interior.  It enters the extremal equations only through its support
function H(h) = max_{v in U} <v, h> and the gradient of H, which is the
maximizing control.  Three closed-form families are supported: centered
ellipsoids, lp balls with 1 < p < inf, and translated ellipsoids.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import AbnormalCovectorError, InputError

# Covectors with max-norm below this are treated as zero.  On the level set
# H = 1 legitimate states are bounded away from the origin, so the guard only
# fires on genuinely degenerate input.
ZERO_GUARD = 1e-300


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a body validation: empty ``violations`` means pass."""

    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


class ControlBody(abc.ABC):
    """Base class for control sets exposed through their support function."""

    kind: ClassVar[str]

    @property
    @abc.abstractmethod
    def dim(self) -> int | None:
        """Ambient dimension, or None when the family is dimension-free."""

    @abc.abstractmethod
    def violations(self) -> list[str]:
        """Messages for every violated construction invariant."""

    @abc.abstractmethod
    def to_config(self) -> dict:
        """JSON-ready description matching the CLI config schema."""

    @abc.abstractmethod
    def _support(self, h: np.ndarray) -> float: ...

    @abc.abstractmethod
    def _gradient(self, h: np.ndarray) -> np.ndarray: ...

    def validate(self) -> ValidationReport:
        return ValidationReport(tuple(self.violations()))

    def support(self, h) -> float:
        """Evaluate H(h) = max_{v in U} <v, h>.

        Nonnegative, convex and positively homogeneous of degree one;
        H(0) = 0 and H(h) > 0 for h != 0 because 0 is interior to U.
        """
        h = self._covector(h)
        if not h.any():
            return 0.0
        return float(self._support(h))

    def support_gradient(self, h) -> np.ndarray:
        """Evaluate grad H(h), the unique maximizing control on the boundary of U.

        H is differentiable only away from the origin; h = 0 is rejected.
        """
        h = self._covector(h)
        self._require_nonzero(h, "support gradient")
        return self._gradient(h)

    def normalize_to_level(self, h0) -> np.ndarray:
        """Rescale h0 to the level set H = 1, preserving its direction.

        Raises AbnormalCovectorError for h0 = 0: the vanishing covector is
        the abnormal case and is excluded throughout.
        """
        h0 = self._covector(h0)
        self._require_nonzero(h0, "level normalization")
        return h0 / self._support(h0)

    def _covector(self, h) -> np.ndarray:
        arr = np.asarray(h, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError(f"covector must be a nonempty 1-d vector, got shape {arr.shape}")
        if self.dim is not None and arr.size != self.dim:
            raise InputError(f"covector has length {arr.size}, body expects {self.dim}")
        if not np.all(np.isfinite(arr)):
            raise InputError("covector has non-finite entries")
        return arr

    def _require_nonzero(self, h: np.ndarray, what: str) -> None:
        if float(np.abs(h).max()) < ZERO_GUARD:
            raise AbnormalCovectorError(
                f"{what} requires a nonzero covector; h = 0 is the excluded abnormal case"
            )


def _as_matrix(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _matrix_violations(a: np.ndarray, name: str) -> list[str]:
    out = []
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        out.append(f"{name} must be a square matrix, got shape {a.shape}")
        return out
    if not np.all(np.isfinite(a)):
        out.append(f"{name} has non-finite entries")
        return out
    if float(np.abs(a - a.T).max(initial=0.0)) > 1e-12:
        out.append(f"{name} is not symmetric within 1e-12")
    elif float(np.linalg.eigvalsh(a).min()) <= 0.0:
        out.append(f"{name} must have strictly positive eigenvalues")
    return out


@dataclass(frozen=True, eq=False)
class Ellipsoid(ControlBody):
    """Centered ellipsoid {v : v^T A^-1 v <= 1} with H(h) = sqrt(h^T A h)."""

    shape_matrix: np.ndarray

    kind: ClassVar[str] = "ellipsoid"

    def __post_init__(self):
        object.__setattr__(self, "shape_matrix", _as_matrix(self.shape_matrix))

    @property
    def dim(self) -> int:
        return self.shape_matrix.shape[0]

    def violations(self) -> list[str]:
        return _matrix_violations(self.shape_matrix, "shape matrix A")

    def to_config(self) -> dict:
        return {"type": self.kind, "A": self.shape_matrix.tolist()}

    def _support(self, h):
        return float(np.sqrt(h @ self.shape_matrix @ h))

    def _gradient(self, h):
        ah = self.shape_matrix @ h
        return ah / np.sqrt(h @ ah)


@dataclass(frozen=True, eq=False)
class LpBall(ControlBody):
    """lp ball of radius r with H(h) = r * ||h||_q, 1/p + 1/q = 1.

    Strict convexity requires p strictly between 1 and infinity.  Works in
    any ambient dimension.
    """

    p: float
    radius: float = 1.0

    kind: ClassVar[str] = "lp_ball"

    @property
    def dim(self) -> None:
        return None

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def violations(self) -> list[str]:
        out = []
        if not (np.isfinite(self.p) and self.p > 1.0):
            out.append(f"exponent p must lie strictly in (1, inf), got {self.p}")
        if not (np.isfinite(self.radius) and self.radius > 0.0):
            out.append(f"radius must be positive, got {self.radius}")
        return out

    def to_config(self) -> dict:
        return {"type": self.kind, "p": self.p, "r": self.radius}

    def _support(self, h):
        # Scale by the max component so powers stay in [0, 1]; exact for the
        # dual-norm formula by homogeneity.
        a = np.abs(h)
        m = a.max()
        w = a / m
        return float(self.radius * m * (w**self.q).sum() ** (1.0 / self.q))

    def _gradient(self, h):
        # Components at zero use the limit value 0^(q-1) = 0 for q > 1.
        q = self.q
        a = np.abs(h)
        w = a / a.max()
        s = float((w**q).sum())
        return self.radius * np.sign(h) * w ** (q - 1.0) / s ** ((q - 1.0) / q)


@dataclass(frozen=True, eq=False)
class TranslatedEllipsoid(ControlBody):
    """Ellipsoid shifted to center c: H(h) = <c, h> + sqrt(h^T A h).

    The origin must stay interior, i.e. c^T A^-1 c < 1.
    """

    shape_matrix: np.ndarray
    center: np.ndarray

    kind: ClassVar[str] = "translated_ellipsoid"

    def __post_init__(self):
        object.__setattr__(self, "shape_matrix", _as_matrix(self.shape_matrix))
        object.__setattr__(self, "center", _as_matrix(self.center))

    @property
    def dim(self) -> int:
        return self.shape_matrix.shape[0]

    def violations(self) -> list[str]:
        out = _matrix_violations(self.shape_matrix, "shape matrix A")
        c = self.center
        if c.ndim != 1 or c.size != self.shape_matrix.shape[0]:
            out.append(f"center must be a vector of length {self.shape_matrix.shape[0]}")
            return out
        if not np.all(np.isfinite(c)):
            out.append("center has non-finite entries")
            return out
        if not out:
            depth = float(c @ np.linalg.solve(self.shape_matrix, c))
            if depth >= 1.0:
                out.append(
                    f"origin is not interior: c^T A^-1 c = {depth:.6g} must be < 1"
                )
        return out

    def to_config(self) -> dict:
        return {"type": self.kind, "A": self.shape_matrix.tolist(), "c": self.center.tolist()}

    def _support(self, h):
        return float(self.center @ h + np.sqrt(h @ self.shape_matrix @ h))

    def _gradient(self, h):
        ah = self.shape_matrix @ h
        return self.center + ah / np.sqrt(h @ ah)


BODY_KINDS = {cls.kind: cls for cls in (Ellipsoid, LpBall, TranslatedEllipsoid)}
