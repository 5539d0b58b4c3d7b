"""Continuous and discrete Wronskians of ordered function families."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EvaluationError, UsageError
from .numeric import jet as jm
from .numeric.interval import Interval
from .numeric.jet import Jet
from .numeric.linalg import det

MAX_FAMILY = 12


@dataclass(frozen=True)
class FunctionFamily:
    """An ordered list of jet-evaluable scalar functions on an interval.

    Members must accept floats, numpy arrays and :class:`Jet` objects, which
    is automatic when they are written with :mod:`chebmel.numeric.jet`
    functions and ordinary arithmetic.
    """

    members: tuple
    domain: Interval
    labels: tuple = ()
    name: str = ""
    # optional evaluator of all members at once: float/array/Jet -> (n, *shape)
    batch: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise UsageError("a function family needs at least one member")
        if len(members) > MAX_FAMILY:
            raise UsageError(f"families larger than {MAX_FAMILY} are not supported")
        object.__setattr__(self, "members", members)
        labels = tuple(self.labels) or tuple(f"f{i}" for i in range(len(members)))
        if len(labels) != len(members):
            raise UsageError("labels and members differ in length")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.members)

    def prefix(self, k: int) -> "FunctionFamily":
        """The sub-family of the first ``k + 1`` members."""
        batch = None
        if self.batch is not None:
            batch = _select(self.batch, list(range(k + 1)))
        return FunctionFamily(self.members[:k + 1], self.domain, self.labels[:k + 1], self.name,
                              batch)

    def reordered(self, perm: Sequence[int]) -> "FunctionFamily":
        perm = list(perm)
        batch = _select(self.batch, perm) if self.batch is not None else None
        return FunctionFamily(tuple(self.members[i] for i in perm), self.domain,
                              tuple(self.labels[i] for i in perm), self.name, batch)

    def values(self, t) -> np.ndarray:
        """Member values, shape ``(len(self), *shape(t))``."""
        t = np.asarray(t, dtype=float)
        if self.batch is not None:
            return np.broadcast_to(np.asarray(self.batch(t), dtype=float),
                                   (len(self),) + t.shape).copy()
        out = np.empty((len(self),) + t.shape)
        for j, f in enumerate(self.members):
            out[j] = np.broadcast_to(np.asarray(jm.value(f(t)), dtype=float), t.shape)
        return out

    def derivative_matrix(self, t, order: int | None = None) -> np.ndarray:
        """``D[..., i, j] = f_j^(i)(t)`` for ``i = 0..order``; batch axes first."""
        t = np.asarray(t, dtype=float)
        order = len(self) - 1 if order is None else order
        if self.batch is not None:
            r = self.batch(Jet.variable(t, order))
            D = np.moveaxis(r.coeffs, 1, -1)        # (order+1, *batch, n)
        else:
            cols = []
            for f in self.members:
                try:
                    cols.append(jm.jet_lift(f, t, order).coeffs)
                except EvaluationError:
                    raise
                except (ZeroDivisionError, FloatingPointError) as exc:
                    raise EvaluationError(str(exc), point=float(np.ravel(t)[0])) from exc
            D = np.stack(cols, axis=-1)             # (order+1, *batch, n)
        D = np.moveaxis(D, 0, -2)               # (*batch, order+1, n)
        if not np.all(np.isfinite(D)):
            bad = np.ravel(t)[np.argmax(~np.isfinite(D.reshape(-1, D.shape[-2] * D.shape[-1])).any(axis=1))] \
                if t.ndim else float(t)
            raise EvaluationError("family member not finite", point=float(bad))
        return D


def _select(batch: Callable, idx: list) -> Callable:
    def sub(t):
        r = batch(t)
        if isinstance(r, Jet):
            return Jet(r.tc[:, idx], r.base)
        return np.asarray(r)[idx]
    return sub


def wronskian_continuous(fam: FunctionFamily, t):
    """Determinant of ``[f_j^(i)(t)]``; ``t`` may be a scalar or an array."""
    n = len(fam)
    return det(fam.derivative_matrix(t, n - 1))


def wronskian_prefixes(fam: FunctionFamily, t) -> np.ndarray:
    """All leading continuous Wronskians ``W_0, ..., W_n`` from one jet pass.

    Returns shape ``(len(fam), *shape(t))``.
    """
    n = len(fam)
    D = fam.derivative_matrix(t, n - 1)
    return np.stack([det(D[..., :k + 1, :k + 1]) * np.ones(D.shape[:-2]) for k in range(n)])


def wronskian_discrete(fam: FunctionFamily, nodes) -> float:
    """Determinant of the evaluation matrix ``[f_j(t_i)]``."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.shape[-1] != len(fam):
        raise UsageError(f"need {len(fam)} nodes, got {nodes.shape[-1]}")
    V = np.moveaxis(fam.values(nodes), 0, -1)   # (..., node, member)
    return det(V)


# -- the kernel (1 - y g(t))^(-alpha) -------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """Kernel ``G(t, y) = (1 - y g(t))^(-alpha)`` on ``E x U``."""

    g: Callable
    alpha: float
    E: Interval
    U: Interval
    check_points: int = field(default=64, compare=False)

    def __post_init__(self):
        t = self.E.grid(self.check_points)
        lo, hi = max(self.U.lo, -1e3), min(self.U.hi, 1e3)
        y = np.linspace(lo, hi, self.check_points)[1:-1] if lo < hi else np.array([lo])
        gt = np.asarray(jm.value(self.g(t)), dtype=float)
        s = 1.0 - y[:, None] * gt[None, :]
        if np.any(s <= 0):
            i, j = np.unravel_index(np.argmin(s), s.shape)
            raise DomainError("1 - y*g(t) must stay positive on E x U",
                              point=(float(t[j]), float(y[i])))

    def G(self, t, y):
        return jm.power(1.0 - y * self.g(t), -self.alpha)


def kernel_wronskian_closed(spec: KernelSpec, y: float, nodes) -> float:
    """Closed form of the discrete Wronskian of ``G, dG/dy, ..., d^K G/dy^K`` at nodes.

    ``prod_{i<K} (alpha+i)^(K-i) * prod_{j<i} (g_i - g_j) / prod_i (1 - y g_i)^(alpha+K)``.
    """
    nodes = np.asarray(nodes, dtype=float)
    K = nodes.size - 1
    g = np.asarray(jm.value(spec.g(nodes)), dtype=float)
    s = 1.0 - y * g
    if np.any(s <= 0):
        raise DomainError("1 - y*g(t) must be positive", point=float(nodes[np.argmin(s)]))
    poch = 1.0
    for i in range(K):
        poch *= (spec.alpha + i) ** (K - i)
    vdm = 1.0
    for i in range(K + 1):
        for j in range(i):
            vdm *= g[i] - g[j]
    return float(poch * vdm / np.prod(s ** (spec.alpha + K)))


def kernel_wronskian_jet(spec: KernelSpec, y: float, nodes) -> float:
    """Same determinant assembled from jets in ``y`` (independent route)."""
    nodes = np.asarray(nodes, dtype=float)
    K = nodes.size - 1
    yj = Jet.variable(y, K)
    rows = [spec.G(float(t), yj).coeffs for t in nodes]
    return det(np.array(rows))


def pochhammer(a: float, i: int) -> float:
    return math.prod(a + j for j in range(i))
