"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written by a different route than the code
under test: containment via summed winding angles, areas via triangle fans,
the 1-D slab temperature profile in closed form.
"""

import math

import numpy as np


def winding_contains(point, vertices) -> bool:
    """Containment by total subtended angle (~2*pi inside, ~0 outside)."""
    d = np.asarray(vertices, dtype=float) - np.asarray(point, dtype=float)
    ang = np.arctan2(d[:, 1], d[:, 0])
    dang = np.diff(np.concatenate([ang, ang[:1]]))
    dang = (dang + np.pi) % (2.0 * np.pi) - np.pi
    return abs(float(dang.sum())) > np.pi


def fan_area(vertices) -> float:
    """Polygon area via a triangle fan from the vertex mean."""
    v = np.asarray(vertices, dtype=float)
    c = v.mean(axis=0)
    total = 0.0
    for i in range(len(v)):
        a = v[i] - c
        b = v[(i + 1) % len(v)] - c
        total += 0.5 * (a[0] * b[1] - a[1] * b[0])
    return abs(total)


def slab_temperature(z, *, length, k, h, q, t_bottom, t_ambient):
    """Steady 1-D conduction through a slab with uniform volumetric source.

    Bottom face (z=0) held at t_bottom; top face (z=length) cooled by
    convection with coefficient h into t_ambient; q generated everywhere.
    Solves k*T'' + q = 0 directly:

        T(z) = t_bottom + a*z - q/(2k) * z^2
        a = [q*length + h*q*length^2/(2k) + h*(t_ambient - t_bottom)] / (k + h*length)

    SI units throughout (z and length in meters).
    """
    a = (q * length + h * q * length**2 / (2.0 * k) + h * (t_ambient - t_bottom)) / (
        k + h * length
    )
    z = np.asarray(z, dtype=float)
    return t_bottom + a * z - q / (2.0 * k) * z**2


def fourier4_eval(u, coeffs):
    """Evaluate a0 + sum_i a_i cos(i w u) + b_i sin(i w u) from a dict."""
    u = np.asarray(u, dtype=float)
    w = coeffs["w"]
    out = np.full_like(u, coeffs["a0"])
    for i in range(1, 5):
        out += coeffs[f"a{i}"] * np.cos(i * w * u)
        out += coeffs[f"b{i}"] * np.sin(i * w * u)
    return out


def quartiles_linear(values):
    """Median and quartiles with linear interpolation (independent of numpy)."""
    xs = sorted(float(v) for v in values)
    n = len(xs)

    def at(p):
        pos = p * (n - 1)
        lo = math.floor(pos)
        hi = math.ceil(pos)
        frac = pos - lo
        return xs[lo] * (1.0 - frac) + xs[hi] * frac

    return at(0.25), at(0.5), at(0.75)
