"""Finite-difference stencils used wherever no analytic derivative is available."""
import numpy as np

EPS = np.finfo(float).eps


def default_step(x):
    """Central-difference step ``eps**(1/3) * max(1, |x|)``."""
    return EPS ** (1.0 / 3.0) * max(1.0, abs(float(x)))


def central(f, x, axis, h):
    x = np.asarray(x, dtype=float)
    dx = np.zeros_like(x)
    dx[axis] = h
    return (np.asarray(f(x + dx)) - np.asarray(f(x - dx))) / (2.0 * h)


def richardson_partial(f, x, axis, h):
    """Central difference along ``axis`` with one Richardson level (error O(h^4))."""
    coarse = central(f, x, axis, h)
    fine = central(f, x, axis, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def gradient(f, x, h=None, richardson=True):
    """Stack of partial derivatives, new leading axis indexes the coordinate."""
    x = np.asarray(x, dtype=float)
    out = []
    for a in range(x.size):
        step = default_step(x[a]) if h is None else h
        if richardson:
            out.append(richardson_partial(f, x, a, step))
        else:
            out.append(central(f, x, a, step))
    return np.stack(out)


_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFSETS = np.arange(-2, 3)


def jet2(f, x, h):
    """Value, first and second partials of ``f`` at ``x`` by fourth-order stencils.

    Returns ``(value, d1, d2)`` with ``d1[..., a]`` and ``d2[..., a, b]`` appended
    as trailing axes to the shape of ``f(x)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    cache = {}

    def ev(shift):
        key = tuple(shift)
        if key not in cache:
            cache[key] = np.asarray(f(x + h * np.asarray(shift, dtype=float)), dtype=float)
        return cache[key]

    zero = [0] * n
    f0 = ev(zero)
    d1 = np.zeros(f0.shape + (n,))
    d2 = np.zeros(f0.shape + (n, n))
    for a in range(n):
        acc1 = np.zeros(f0.shape)
        acc2 = np.zeros(f0.shape)
        for c1, c2, k in zip(_D1, _D2, _OFFSETS):
            s = list(zero)
            s[a] = int(k)
            val = ev(s)
            acc1 = acc1 + c1 * val
            acc2 = acc2 + c2 * val
        d1[..., a] = acc1 / h
        d2[..., a, a] = acc2 / h ** 2
        for b in range(a):
            acc = np.zeros(f0.shape)
            for ca, ka in zip(_D1, _OFFSETS):
                if ca == 0.0:
                    continue
                for cb, kb in zip(_D1, _OFFSETS):
                    if cb == 0.0:
                        continue
                    s = list(zero)
                    s[a] = int(ka)
                    s[b] = int(kb)
                    acc = acc + ca * cb * ev(s)
            d2[..., a, b] = d2[..., b, a] = acc / h ** 2
    return f0, d1, d2
