"""Concrete function families: trigonometric, C/S integrals, power, T-polynomials.

Every member is jet-evaluable, so the families plug straight into the
Wronskian machinery.  Integral families additionally carry a batched
evaluator that computes all members from one shared quadrature.
"""
from __future__ import annotations

import ast
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AdmissibilityError, PoleError, UsageError
from .numeric import jet as jm
from .numeric.interval import Interval, as_pieces, hull, interval
from .numeric.jet import Jet
from .numeric.quadrature import DEFAULT_TOL, integrate, integrate_weighted
from .wronskian import FunctionFamily, KernelSpec

PI = math.pi


# -- general integral family ----------------------------------------------------

@dataclass(frozen=True)
class IntegralPiece:
    """One block ``{int_E f_j(t) G(t, y) dt : j = 0..m}``."""

    E: Interval
    weights: tuple
    kernel: Callable
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if not self.weights:
            raise UsageError("an integral piece needs at least one weight")
        labels = tuple(self.labels) or tuple(f"w{j}" for j in range(len(self.weights)))
        object.__setattr__(self, "labels", labels)

    def weight_matrix(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack([np.broadcast_to(np.asarray(jm.value(f(t)), dtype=float), t.shape)
                         for f in self.weights])


@dataclass(frozen=True)
class IntegralFamilySpec:
    """The ordered family ``I_{i,j}(y) = int_{E_i} f_{i,j}(t) G_i(t, y) dt``.

    ``kernel`` optionally records a shared :class:`KernelSpec` of the form
    ``(1 - y g(t))^(-alpha)``; hypothesis checks that need a common kernel
    use it.
    """

    pieces: tuple
    U: Interval
    kernel: KernelSpec | None = None
    name: str = ""
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise UsageError("an integral family needs at least one piece")

    @property
    def sizes(self) -> tuple:
        return tuple(len(p.weights) for p in self.pieces)

    def __len__(self):
        return sum(self.sizes)

    def index(self, i: int, j: int) -> int:
        return sum(self.sizes[:i]) + j

    def piece_values(self, i: int, y):
        p = self.pieces[i]
        return integrate_weighted(p.weight_matrix, p.kernel, p.E, y, self.tol).value

    def evaluate(self, y):
        """All members at ``y``; shape ``(len(self), *shape(y))`` or a batched jet."""
        parts = [self.piece_values(i, y) for i in range(len(self.pieces))]
        if isinstance(y, Jet):
            return Jet(np.concatenate([p.tc for p in parts], axis=1), y.base)
        return np.concatenate(parts, axis=0)


def eval_integral_family(spec: IntegralFamilySpec, i: int, j: int, y: float,
                         deriv: int = 0) -> float:
    """``I_{i,j}^(deriv)(y)``: the weight times ``d^deriv G / dy^deriv``, integrated."""
    if not 0 <= i < len(spec.pieces) or not 0 <= j < spec.sizes[i]:
        raise UsageError(f"no member ({i}, {j}) in this family")
    if deriv < 0:
        raise UsageError("derivative order must be nonnegative")
    p = spec.pieces[i]
    f = p.weights[j]
    yj = Jet.variable(float(y), deriv)
    res = integrate_weighted(lambda t: np.asarray(jm.value(f(t)), float)[None], p.kernel,
                             p.E, yj, spec.tol).value
    return float(res.coeffs[deriv, 0])


def integral_family(spec: IntegralFamilySpec) -> FunctionFamily:
    """The members of ``spec`` as a :class:`FunctionFamily` on ``U``."""
    members, labels = [], []
    for i, p in enumerate(spec.pieces):
        for j in range(len(p.weights)):
            members.append(_member(spec, spec.index(i, j)))
            labels.append(f"I[{i},{j}]" if not p.labels else f"I[{i}]({p.labels[j]})")
    return FunctionFamily(tuple(members), spec.U, tuple(labels), spec.name, spec.evaluate)


def _member(spec, idx):
    def f(y):
        r = spec.evaluate(y)
        if isinstance(r, Jet):
            return Jet(r.tc[:, idx], r.base)
        return r[idx]
    return f


def kernel_family(E, weights: Sequence[Callable], g: Callable, alpha: float, U,
                  labels: Sequence[str] = (), name: str = "") -> IntegralFamilySpec:
    """Single-piece family ``{int_E f_j (1 - y g)^(-alpha)}`` with its kernel recorded."""
    E = interval(*E) if isinstance(E, (tuple, list)) else E
    U = interval(*U) if isinstance(U, (tuple, list)) else U
    ks = KernelSpec(g, alpha, E, U)
    piece = IntegralPiece(E, tuple(weights), ks.G, tuple(labels))
    return IntegralFamilySpec((piece,), U, ks, name)


def family18(g: Callable, alpha: float, m: int, E, U, name: str = "") -> IntegralFamilySpec:
    """``{int_E g^j (1 - y g)^(-alpha) dt : j = 0..m}``."""
    if m < 0:
        raise UsageError("family needs m >= 0")
    weights = tuple(_power_of(g, j) for j in range(m + 1))
    return kernel_family(E, weights, g, alpha, U, tuple(f"g^{j}" for j in range(m + 1)),
                         name or f"family18(alpha={alpha}, m={m})")


def _power_of(g, j):
    return lambda t: jm.power(g(t), j) if j else 1.0 + 0.0 * jm.value(t)


# -- trigonometric integrals ----------------------------------------------------

@dataclass(frozen=True)
class TrigIntegralSpec:
    """``int_E xi(t) {cos,sin}(k t) (1 - y cos(nu t))^(-alpha) dt``."""

    E: object
    k: int
    alpha: float = 1.0
    nu: int = 1
    xi: Callable | None = None

    def __post_init__(self):
        if self.k < 0 or int(self.k) != self.k:
            raise UsageError("k must be a nonnegative integer")
        if self.nu < 1 or int(self.nu) != self.nu:
            raise UsageError("nu must be a positive integer")
        if self.xi is not None:
            for piece in as_pieces(self.E):
                v = np.asarray(jm.value(self.xi(piece.grid(64))), dtype=float)
                if np.any(v == 0) or (v.min() < 0 < v.max()):
                    raise UsageError("xi must not vanish on E")


def _xi_values(xi, t):
    if xi is None:
        return np.ones_like(t)
    return np.broadcast_to(np.asarray(jm.value(xi(t)), dtype=float), t.shape)


def cs_trig_many(E, ks: Sequence[int], which: Sequence[str], y, alpha: float = 1.0,
                 nu: int = 1, xi: Callable | None = None, tol: float = DEFAULT_TOL):
    """Several ``C^E_k`` / ``S^E_k`` at once; leading axis indexes ``zip(ks, which)``."""
    ks = list(ks)
    which = list(which) if not isinstance(which, str) else [which] * len(ks)
    for w in which:
        if w not in ("cos", "sin"):
            raise UsageError(f"which must be 'cos' or 'sin', got {w!r}")
    kk = np.array(ks, dtype=float)[:, None]
    is_cos = np.array([w == "cos" for w in which])[:, None]

    def weights(t):
        ang = kk * t[None, :]
        return np.where(is_cos, np.cos(ang), np.sin(ang)) * _xi_values(xi, t)[None, :]

    def kernel(t, yy):
        return jm.power(1.0 - yy * np.cos(nu * t), -alpha)

    return integrate_weighted(weights, kernel, E, y, tol).value


def cs_trig(spec: TrigIntegralSpec, y, which: str = "cos"):
    r = cs_trig_many(spec.E, [spec.k], [which], y, spec.alpha, spec.nu, spec.xi)
    if isinstance(r, Jet):
        return Jet(r.tc[:, 0], r.base)
    r = r[0]
    return float(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class CSAlphaSpec:
    """``int_E cos^k / (y - cos)^alpha`` and the variant with an extra ``sin``."""

    E: object
    k: int
    alpha: float
    override: bool = False

    def __post_init__(self):
        if self.k < 0 or int(self.k) != self.k:
            raise UsageError("k must be a nonnegative integer")
        for p in as_pieces(self.E):
            if p.lo < -PI - 1e-12 or p.hi > PI + 1e-12:
                raise UsageError("E must lie inside [-pi, pi]")


def cos_range(E) -> tuple:
    """``(min, max)`` of ``cos`` over the closure of ``E``."""
    lo, hi = np.inf, -np.inf
    for p in as_pieces(E):
        vals = [math.cos(p.lo), math.cos(p.hi)]
        if p.lo <= 0 <= p.hi:
            vals.append(1.0)
        if p.lo <= -PI or p.hi >= PI:
            vals.append(-1.0)
        lo, hi = min(lo, *vals), max(hi, *vals)
    return lo, hi


def cs_alpha_many(E, ks: Sequence[int], which, alpha: float, y, override: bool = False,
                  tol: float = DEFAULT_TOL):
    """Several ``C^E_{k,alpha}`` / ``S^E_{k,alpha}``; leading axis indexes the list."""
    ks = list(ks)
    which = [which] * len(ks) if isinstance(which, str) else list(which)
    yv = np.atleast_1d(np.asarray(jm.value(y), dtype=float))
    if alpha != 0:
        clo, chi = cos_range(E)
        inside = (yv >= clo) & (yv <= chi)
        if np.any(inside) and not override:
            raise PoleError("y - cos(t) vanishes on E", point=float(yv[inside][0]))
        if alpha > 1 and np.any(np.abs(np.abs(yv) - 1) < 1e-6):
            warnings.warn("cs_alpha is ill-conditioned for |y| within 1e-6 of 1 when alpha > 1",
                          RuntimeWarning, stacklevel=2)
    kk = np.array(ks, dtype=float)[:, None]
    has_sin = np.array([w == "sin" for w in which])[:, None]

    def weights(t):
        c = np.cos(t)[None, :]
        return c ** kk * np.where(has_sin, np.sin(t)[None, :], 1.0)

    def kernel(t, yy):
        return jm.power(yy - np.cos(t), -alpha)

    return integrate_weighted(weights, kernel, E, y, tol).value


def cs_alpha(spec: CSAlphaSpec, y, which: str = "cos"):
    if which not in ("cos", "sin"):
        raise UsageError(f"which must be 'cos' or 'sin', got {which!r}")
    r = cs_alpha_many(spec.E, [spec.k], [which], spec.alpha, y, spec.override)
    if isinstance(r, Jet):
        return Jet(r.tc[:, 0], r.base)
    r = r[0]
    return float(r) if r.ndim == 0 else r


# -- T-polynomials ----------------------------------------------------------------

_moment_cache: dict = {}
_moment_lock = threading.Lock()


def _moment(E, kappa: int, r: int) -> float:
    """``int_E sin^kappa cos^r``, memoized."""
    key = (tuple(as_pieces(E)), kappa, r)
    with _moment_lock:
        hit = _moment_cache.get(key)
    if hit is not None:
        return hit
    v = integrate(lambda t: np.sin(t) ** kappa * np.cos(t) ** r, E, 1e-13).value
    with _moment_lock:
        return _moment_cache.setdefault(key, float(v))


def t_polynomial(E, kappa: int, q: int, y):
    """``T^E_{kappa,q}(y) = sum_i C(q+1,i) (-1)^i y^(q+1-i) int_E sin^kappa (y - cos)^(i-1)``.

    ``y`` may be a float, an array or a jet.
    """
    if kappa not in (0, 1):
        raise UsageError("kappa must be 0 or 1")
    if q < -1:
        raise UsageError("q must be >= -1")
    total = 0.0 * y
    for i in range(1, q + 2):
        inner = 0.0 * y
        for r in range(i):
            inner = inner + math.comb(i - 1, r) * (-1) ** r * _moment(E, kappa, r) \
                * jm.power(y, i - 1 - r)
        total = total + math.comb(q + 1, i) * (-1) ** i * jm.power(y, q + 1 - i) * inner
    return total


def chebpoly_expand(k: int) -> tuple:
    """Integer coefficients ``c`` with ``cos(k t) = sum_i c[i] cos(t)^i``."""
    if k < 0:
        raise UsageError("k must be nonnegative")
    prev, cur = [1], [0, 1]
    if k == 0:
        return (1,)
    for _ in range(k - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return tuple(cur)


# -- trigonometric families -------------------------------------------------------

TRIG_KINDS = ("cos-full", "sin-full", "mixed-full", "cos-parity", "sin-parity", "mixed-parity")


def _cos(n):
    if n == 0:
        return lambda t: 1.0 + 0.0 * t
    return lambda t: jm.cos(n * t)


def _sin(n):
    return lambda t: jm.sin(n * t)


def make_trig_family(kind: str, m: int, k: int = 0, domain=None) -> FunctionFamily:
    """Ordered trigonometric families.

    Full kinds live on ``(0, pi)``; parity kinds default to ``(0, pi/2)``
    (pass ``domain=(pi/2, pi)`` for the other half).
    """
    if kind not in TRIG_KINDS:
        raise UsageError(f"unknown trig family kind {kind!r}; expected one of {TRIG_KINDS}")
    if m < 1:
        raise UsageError("m must be >= 1")
    if kind.endswith("parity") and k not in (0, 1):
        raise UsageError("parity families need k in {0, 1}")
    if kind == "cos-full":
        freqs = [("cos", j) for j in range(m + 1)]
    elif kind == "sin-full":
        freqs = [("sin", j) for j in range(1, m + 1)]
    elif kind == "mixed-full":
        freqs = [("cos", j) for j in range(m + 1)] + [("sin", j) for j in range(m, 0, -1)]
    else:
        l0 = (1 + (-1) ** k) // 2
        if kind == "cos-parity":
            freqs = [("cos", k + 2 * j) for j in range(m + 1)]
        elif kind == "sin-parity":
            freqs = [("sin", k + 2 * j) for j in range(l0, m + 1)]
        else:
            freqs = [("cos", k + 2 * j) for j in range(m + 1)] + \
                    [("sin", k + 2 * j) for j in range(m, l0 - 1, -1)]
    if domain is None:
        domain = (0.0, PI) if kind.endswith("full") else (0.0, PI / 2)
    dom = interval(*domain) if isinstance(domain, (tuple, list)) else domain
    members = tuple(_cos(n) if w == "cos" else _sin(n) for w, n in freqs)
    labels = tuple(("1" if n == 0 else f"cos({n}t)") if w == "cos" else f"sin({n}t)"
                   for w, n in freqs)
    return FunctionFamily(members, dom, labels, f"{kind}(m={m}" + (f", k={k})" if
                                                                 kind.endswith("parity") else ")"))


# -- C/S integral families ----------------------------------------------------------

CS_SETS = ("eq5-sin", "eq5-mixed", "eq6-sin", "eq6-mixed")


@dataclass(frozen=True)
class CSPiece:
    E: Interval
    m: int
    k: int = 0
    a: int = 1
    b: int = 1


def make_cs_family(kind: str, pieces: Sequence[CSPiece], alpha: float = 1.0, nu: int = 1,
                   xi: Callable | None = None, U=(-1.0, 1.0)) -> FunctionFamily:
    """Ordered unions of ``C^{E_i}_k`` / ``S^{E_i}_k`` blocks on ``(-1, 1)``.

    Members switched off by the 0/1 selectors are dropped; labels keep the
    original frequencies so gaps stay visible.
    """
    if kind not in CS_SETS:
        raise UsageError(f"unknown C/S family {kind!r}; expected one of {CS_SETS}")
    if float(alpha).is_integer() and alpha <= 0:
        raise AdmissibilityError("alpha must not be a nonpositive integer")
    entries = []    # (piece index, 'cos'|'sin', frequency)
    for i, p in enumerate(pieces):
        if p.a not in (0, 1) or p.b not in (0, 1) or p.a < p.b:
            raise AdmissibilityError("selectors need a, b in {0, 1} and a >= b")
        lim = PI / nu
        if p.E.lo < 0 or p.E.hi > lim + 1e-12:
            raise AdmissibilityError(f"E_{i} must lie in (0, pi/nu)")
        if kind.startswith("eq6") and nu == 1 and p.E.lo < PI / 2 < p.E.hi:
            raise AdmissibilityError(f"E_{i} must not straddle pi/2")
        if kind == "eq5-sin":
            entries += [(i, "sin", j) for j in range(1, p.m + 1)]
        elif kind == "eq5-mixed":
            entries += [(i, "cos", j) for j in range(p.m + 1) if p.a]
            entries += [(i, "sin", j) for j in range(p.m, 0, -1) if p.b]
        else:
            l0 = (1 + (-1) ** p.k) // 2
            if kind == "eq6-sin":
                entries += [(i, "sin", p.k + 2 * j) for j in range(l0, p.m + 1)]
            else:
                entries += [(i, "cos", p.k + 2 * j) for j in range(p.m + 1) if p.a]
                entries += [(i, "sin", p.k + 2 * j) for j in range(p.m, l0 - 1, -1) if p.b]
    if not entries:
        raise AdmissibilityError("all members were switched off")
    pieces = list(pieces)

    def batch(y):
        out = [None] * len(entries)
        for i, p in enumerate(pieces):
            idx = [n for n, e in enumerate(entries) if e[0] == i]
            if not idx:
                continue
            r = cs_trig_many(p.E, [entries[n][2] for n in idx], [entries[n][1] for n in idx],
                             y, alpha, nu, xi)
            for pos, n in enumerate(idx):
                out[n] = Jet(r.tc[:, pos], r.base) if isinstance(r, Jet) else r[pos]
        if isinstance(y, Jet):
            return Jet(np.stack([o.tc for o in out], axis=1), y.base)
        return np.stack(out)

    members = tuple(_member_of(batch, n) for n in range(len(entries)))
    labels = tuple(f"{'C' if w == 'cos' else 'S'}[E{i}]_{j}" for i, w, j in entries)
    U = interval(*U) if isinstance(U, (tuple, list)) else U
    return FunctionFamily(members, U, labels, f"{kind}(alpha={alpha}, nu={nu})", batch)


def _member_of(batch, n):
    def f(y):
        r = batch(y)
        return Jet(r.tc[:, n], r.base) if isinstance(r, Jet) else r[n]
    return f


# -- power families ---------------------------------------------------------------

@dataclass(frozen=True)
class PowerFamilySpec:
    """``{1..y^m0} + union_i {(y+a_i)^beta, ..., y^m_i (y+a_i)^beta}``."""

    a: tuple
    m: tuple
    m0: int
    beta: float
    negative_test: bool = False
    domain: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        if len(self.a) != len(self.m) or not self.a:
            raise UsageError("a and m must be nonempty and of equal length")
        if any(x <= y for x, y in zip(self.a, self.a[1:])):
            raise UsageError("a must be strictly decreasing")
        if any(x < y for x, y in zip(self.m, self.m[1:])) or min(self.m) < 0:
            raise UsageError("m must be nonincreasing and nonnegative")
        if self.m0 < -1:
            raise UsageError("m0 must be >= -1")
        if not self.negative_test:
            problems = self.admissibility_problems()
            if problems:
                raise AdmissibilityError("; ".join(problems))

    def admissibility_problems(self) -> list:
        out = []
        if float(self.beta).is_integer() and self.beta >= 0:
            out.append("beta must not be a nonnegative integer")
        if not self.beta < self.m0 - self.m[0] + 1:
            out.append(f"beta must be < m0 - m1 + 1 = {self.m0 - self.m[0] + 1}")
        return out


def make_power_family(spec: PowerFamilySpec) -> FunctionFamily:
    members, labels = [], []
    for j in range(spec.m0 + 1):
        members.append(_mono(j))
        labels.append(f"y^{j}")
    for a, mi in zip(spec.a, spec.m):
        for j in range(mi + 1):
            members.append(_shifted(a, j, spec.beta))
            labels.append(f"y^{j}(y+{a:g})^{spec.beta:g}")
    if spec.domain is not None:
        dom = interval(*spec.domain)
    else:
        dom = Interval(-spec.a[-1], math.inf, singular_lo=spec.beta < 0)
    name = f"power(a={list(spec.a)}, m={list(spec.m)}, m0={spec.m0}, beta={spec.beta:g})"
    return FunctionFamily(tuple(members), dom, tuple(labels), name)


def _mono(j):
    if j == 0:
        return lambda y: 1.0 + 0.0 * y
    return lambda y: jm.power(y, j)


def _shifted(a, j, beta):
    if j == 0:
        return lambda y: jm.power(y + a, beta)
    return lambda y: jm.power(y, j) * jm.power(y + a, beta)


def remark1_families() -> tuple:
    """The two power families with indefinite Wronskian signs on ``(-1, oo)``."""
    f1 = make_power_family(PowerFamilySpec((4, 1), (3, 0), -1, 1.5, negative_test=True))
    f2 = make_power_family(PowerFamilySpec((5, 1), (3, 0), -1, 2.5, negative_test=True))
    return f1, f2


# -- expressions and the family mini-language ---------------------------------------

_FUNCS = {"sin": jm.sin, "cos": jm.cos, "exp": jm.exp, "log": jm.log, "sqrt": jm.sqrt}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b,
           ast.Mult: lambda a, b: a * b, ast.Div: lambda a, b: a / b,
           ast.Pow: lambda a, b: jm.power(a, b) if isinstance(b, (int, float)) else a ** b}


def compile_expr(src: str, var: str = "t") -> Callable:
    """Turn an arithmetic expression in one variable into a jet-evaluable function.

    Only numbers, the variable, ``pi``, ``e``, ``+ - * / **`` and the
    functions ``sin cos exp log sqrt`` are accepted.
    """
    try:
        tree = ast.parse(str(src), mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"cannot parse expression {src!r}: {exc.msg}") from None

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            c = node.value
            return lambda x: c
        if isinstance(node, ast.Name):
            if node.id == var:
                return lambda x: x
            if node.id in _CONSTS:
                c = _CONSTS[node.id]
                return lambda x: c
            raise UsageError(f"unknown name {node.id!r} in {src!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            f = build(node.operand)
            return (lambda x: -f(x)) if isinstance(node.op, ast.USub) else f
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            lhs, rhs = build(node.left), build(node.right)
            if isinstance(node.op, ast.Pow) and _is_const(node.right):
                c = _const_value(node.right)
                return lambda x: jm.power(lhs(x), c)
            return lambda x: op(lhs(x), rhs(x))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            fn, arg = _FUNCS[node.func.id], build(node.args[0])
            return lambda x: fn(arg(x))
        raise UsageError(f"unsupported construct in expression {src!r}")

    body = build(tree)

    def f(x):
        r = body(x)
        if not isinstance(r, Jet) and np.ndim(r) == 0 and np.ndim(x):
            r = np.full(np.shape(x), float(r))
        return r

    f.__name__ = f"expr[{src}]"
    return f


def _is_const(node) -> bool:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return True
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return _is_const(node.operand)
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Div, ast.Mult, ast.Add, ast.Sub)):
        return _is_const(node.left) and _is_const(node.right)
    return False


def _const_value(node) -> float:
    return float(eval(compile(ast.Expression(node), "<const>", "eval"), {"__builtins__": {}}))


def _interval_of(v, default=None) -> Interval:
    if v is None:
        if default is None:
            raise UsageError("missing interval")
        return default
    if isinstance(v, dict):
        return interval(float(v["lo"]), float(v["hi"]))
    if len(v) != 2:
        raise UsageError(f"interval needs two endpoints, got {v!r}")
    return interval(float(v[0]), float(v[1]))


def parse_integral_family(doc: dict) -> IntegralFamilySpec:
    """Integral families: kinds ``family18`` and ``integral``."""
    kind = doc.get("kind")
    if kind == "family18":
        g = compile_expr(doc.get("g", "t"))
        return family18(g, float(doc["alpha"]), int(doc["m"]), _interval_of(doc.get("E")),
                        _interval_of(doc.get("U")), name=doc.get("name", ""))
    if kind == "integral":
        U = _interval_of(doc.get("U"))
        pieces_doc = doc.get("pieces") or []
        if "g" in doc:
            g = compile_expr(doc["g"])
            alpha = float(doc["alpha"])
            Es = [_interval_of(p["E"]) for p in pieces_doc]
            ks = KernelSpec(g, alpha, hull(Es), U)
            kern = ks.G
        else:
            G = doc.get("kernel")
            if G is None:
                raise UsageError("integral family needs 'g' and 'alpha' or a 'kernel'")
            ks = None
            kern = _compile_kernel(G)
        pieces = []
        for p in pieces_doc:
            ws = p.get("weights") or []
            pieces.append(IntegralPiece(_interval_of(p["E"]), tuple(compile_expr(w) for w in ws),
                                        kern, tuple(ws)))
        return IntegralFamilySpec(tuple(pieces), U, ks, doc.get("name", ""))
    raise UsageError(f"not an integral family kind: {kind!r}")


def _compile_kernel(src: str) -> Callable:
    """Kernels in two variables ``t`` and ``y``; ``y`` may be a jet."""
    tree = ast.parse(src, mode="eval")
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id not in ("t", "y") and node.id not in _CONSTS \
                and node.id not in _FUNCS:
            raise UsageError(f"unknown name {node.id!r} in kernel {src!r}")
        if isinstance(node, (ast.Attribute, ast.Subscript, ast.Lambda, ast.ListComp)):
            raise UsageError(f"unsupported construct in kernel {src!r}")
    code = compile(tree, "<kernel>", "eval")
    env = {"__builtins__": {}, **_FUNCS, **_CONSTS}

    def G(t, y):
        return eval(code, env, {"t": t, "y": y})
    return G


def parse_family(doc: dict) -> FunctionFamily:
    """Build a family from a tagged record such as ``{"kind": "trig", ...}``."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise UsageError("family spec must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "trig":
        dom = doc.get("domain")
        return make_trig_family(doc["variant"], int(doc["m"]), int(doc.get("k", 0)),
                                tuple(dom) if dom is not None else None)
    if kind == "power":
        dom = doc.get("domain")
        return make_power_family(PowerFamilySpec(
            tuple(doc["a"]), tuple(doc["m"]), int(doc.get("m0", -1)), float(doc["beta"]),
            bool(doc.get("negative_test", False)), tuple(dom) if dom is not None else None))
    if kind in ("family18", "integral"):
        return integral_family(parse_integral_family(doc))
    if kind == "cs":
        xi = compile_expr(doc["xi"]) if doc.get("xi") not in (None, "1") else None
        pieces = [CSPiece(_interval_of(p["E"]), int(p["m"]), int(p.get("k", 0)),
                          int(p.get("a", 1)), int(p.get("b", 1))) for p in doc["pieces"]]
        return make_cs_family(doc["set"], pieces, float(doc.get("alpha", 1.0)),
                              int(doc.get("nu", 1)), xi)
    if kind == "expr":
        var = doc.get("var", "t")
        srcs = list(doc["members"])
        return FunctionFamily(tuple(compile_expr(s, var) for s in srcs),
                              _interval_of(doc.get("domain")), tuple(srcs), doc.get("name", ""))
    raise UsageError(f"unknown family kind {kind!r}")
