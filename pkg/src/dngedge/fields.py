"""Scalar fields on worldsheet coordinates with value, gradient and Hessian."""
import numpy as np
import sympy

from . import _numdiff
from .errors import InputError

FIELD_STEP = 2e-3


class ScalarField:
    """A smooth function of xi. ``jet(xi)`` returns ``(value, grad[a], hess[a, b])``.

    If ``grad``/``hess`` callables are omitted the missing derivatives come from
    fourth-order central stencils.
    """

    def __init__(self, func, grad=None, hess=None, name="field"):
        self.func, self.grad, self.hess, self.name = func, grad, hess, name

    def __call__(self, xi):
        return float(self.func(np.asarray(xi, dtype=float)))

    def jet(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.grad is not None and self.hess is not None:
            return self(xi), np.asarray(self.grad(xi), dtype=float), np.asarray(self.hess(xi), dtype=float)
        h = FIELD_STEP * max(1.0, float(np.max(np.abs(xi))))
        f0, d1, d2 = _numdiff.jet2(lambda y: np.atleast_1d(self.func(y)), xi, h)
        return float(f0[0]), d1[0], d2[0]

    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, other)])

    def __rmul__(self, c):
        return LinearCombination([(float(c), self)])

    def __repr__(self):
        return f"ScalarField({self.name})"


class LinearCombination(ScalarField):
    def __init__(self, terms):
        self.terms = list(terms)
        super().__init__(lambda xi: sum(c * f(xi) for c, f in self.terms),
                         name=" + ".join(f"{c:g}*{f.name}" for c, f in self.terms))

    def jet(self, xi):
        parts = [(c, f.jet(xi)) for c, f in self.terms]
        return (sum(c * j[0] for c, j in parts), sum(c * j[1] for c, j in parts),
                sum(c * j[2] for c, j in parts))


class Constant(ScalarField):
    def __init__(self, value, dim=2):
        self.value, self.dim = float(value), dim
        super().__init__(lambda xi: self.value, name=f"{value:g}")

    def jet(self, xi):
        return self.value, np.zeros(self.dim), np.zeros((self.dim, self.dim))


def zero(dim=2):
    return Constant(0.0, dim)


class TrigField(ScalarField):
    """sum_k A_k cos(w_k . xi + p_k) with analytic derivatives."""

    def __init__(self, amplitudes, frequencies, phases, name="trig"):
        self.A = np.asarray(amplitudes, dtype=float)
        self.W = np.atleast_2d(np.asarray(frequencies, dtype=float))
        self.P = np.asarray(phases, dtype=float)
        super().__init__(self._value, name=name)

    def _value(self, xi):
        return float(self.A @ np.cos(self.W @ xi + self.P))

    def jet(self, xi):
        xi = np.asarray(xi, dtype=float)
        arg = self.W @ xi + self.P
        c, s = self.A * np.cos(arg), self.A * np.sin(arg)
        return float(c.sum()), -(s @ self.W), -np.einsum("k,ka,kb->ab", c, self.W, self.W)

    @classmethod
    def random(cls, rng, dim=2, terms=3, amplitude=1.0, max_frequency=2.0):
        """Seeded random smooth field; ``rng`` is a numpy Generator."""
        A = rng.normal(scale=amplitude / np.sqrt(terms), size=terms)
        W = rng.uniform(-max_frequency, max_frequency, size=(terms, dim))
        P = rng.uniform(0.0, 2 * np.pi, size=terms)
        return cls(A, W, P, name="random-trig")


def from_sympy(expr, symbols, name=None):
    """ScalarField from a sympy expression (or string) in ``symbols``."""
    syms = [sympy.Symbol(s) if isinstance(s, str) else s for s in symbols]
    try:
        ex = sympy.sympify(expr, locals={str(s): s for s in syms})
    except (sympy.SympifyError, TypeError) as err:
        raise InputError(f"cannot parse field expression {expr!r}: {err}") from None
    stray = ex.free_symbols - set(syms)
    if stray:
        raise InputError(f"field expression has unknown symbols {sorted(map(str, stray))}")
    grad = [sympy.diff(ex, s) for s in syms]
    hess = [[sympy.diff(g, s) for s in syms] for g in grad]
    f = sympy.lambdify(syms, ex, "numpy")
    fg = sympy.lambdify(syms, grad, "numpy")
    fh = sympy.lambdify(syms, hess, "numpy")
    return ScalarField(lambda xi: f(*xi), lambda xi: fg(*xi), lambda xi: fh(*xi), name=name or str(ex))
