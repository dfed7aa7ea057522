"""Hot numeric kernels for the oscillatory response quadrature.

The detector response integral reduces to panel sums of
sin(A(t)) * exp(i*omega*t) where A is the mode phase along the worldline:

    A(t) = phi0                              (static)
    A(t) = phi0 + rate*t                     (inertial, rate = mode-crossing frequency)
    A(t) = phi0 + cc*(cosh(rate*t) - 1)      (accelerated, rate = a, cc = k*pi/(L*a))

Each panel is evaluated with 15-point Gauss-Legendre; the deviation from
the embedded 7-point rule serves as a conservative absolute error estimate.

Two interchangeable backends exist: a numba-compiled loop (default when
numba imports) and a vectorized pure-numpy path. Set UDWITNESS_NO_NUMBA=1
to force the numpy fallback; benchmarks/bench_kernels.py compares the two.
"""

from __future__ import annotations

import math
import os

import numpy as np

_GL15_X, _GL15_W = np.polynomial.legendre.leggauss(15)
_GL7_X, _GL7_W = np.polynomial.legendre.leggauss(7)

KIND_STATIC = 0
KIND_INERTIAL = 1
KIND_ACCELERATED = 2

_NUMBA_DISABLED = os.environ.get("UDWITNESS_NO_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
}


def _gl_numpy(kind, phi0, rate, cc, omega, mid, half, nodes, weights):
    t = mid[:, None] + half[:, None] * nodes[None, :]
    if kind == KIND_STATIC:
        amp = math.sin(phi0) * np.ones_like(t)
    elif kind == KIND_INERTIAL:
        amp = np.sin(phi0 + rate * t)
    else:
        amp = np.sin(phi0 + cc * (np.cosh(rate * t) - 1.0))
    vals = amp * np.exp(1j * omega * t)
    return half * (vals @ weights)


def panel_integrals_numpy(kind, phi0, rate, cc, omega, lo, hi):
    """Vectorized per-panel integrals with embedded error estimates.

    Returns (values, errors): GL15 value of each panel [lo[p], hi[p]] and
    |GL15 - GL7| as an absolute error estimate.
    """
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    i15 = _gl_numpy(kind, phi0, rate, cc, omega, mid, half, _GL15_X, _GL15_W)
    i7 = _gl_numpy(kind, phi0, rate, cc, omega, mid, half, _GL7_X, _GL7_W)
    return i15, np.abs(i15 - i7)


panel_integrals_numba = None

if not _NUMBA_DISABLED:
    try:
        from numba import njit
    except ImportError:
        njit = None

    if njit is not None:

        @njit(cache=True, nogil=True)
        def _panel_integrals_jit(kind, phi0, rate, cc, omega, lo, hi, x15, w15, x7, w7):
            n = lo.shape[0]
            out = np.empty(n, np.complex128)
            err = np.empty(n, np.float64)
            for p in range(n):
                mid = 0.5 * (lo[p] + hi[p])
                half = 0.5 * (hi[p] - lo[p])
                sr15 = 0.0
                si15 = 0.0
                for j in range(15):
                    t = mid + half * x15[j]
                    if kind == 0:
                        amp = math.sin(phi0)
                    elif kind == 1:
                        amp = math.sin(phi0 + rate * t)
                    else:
                        amp = math.sin(phi0 + cc * (math.cosh(rate * t) - 1.0))
                    sr15 += w15[j] * amp * math.cos(omega * t)
                    si15 += w15[j] * amp * math.sin(omega * t)
                sr7 = 0.0
                si7 = 0.0
                for j in range(7):
                    t = mid + half * x7[j]
                    if kind == 0:
                        amp = math.sin(phi0)
                    elif kind == 1:
                        amp = math.sin(phi0 + rate * t)
                    else:
                        amp = math.sin(phi0 + cc * (math.cosh(rate * t) - 1.0))
                    sr7 += w7[j] * amp * math.cos(omega * t)
                    si7 += w7[j] * amp * math.sin(omega * t)
                out[p] = complex(half * sr15, half * si15)
                err[p] = abs(complex(half * (sr15 - sr7), half * (si15 - si7)))
            return out, err

        def panel_integrals_numba(kind, phi0, rate, cc, omega, lo, hi):
            """numba-compiled counterpart of panel_integrals_numpy."""
            return _panel_integrals_jit(
                int(kind),
                float(phi0),
                float(rate),
                float(cc),
                float(omega),
                np.ascontiguousarray(lo, dtype=np.float64),
                np.ascontiguousarray(hi, dtype=np.float64),
                _GL15_X,
                _GL15_W,
                _GL7_X,
                _GL7_W,
            )


if panel_integrals_numba is not None:
    panel_integrals = panel_integrals_numba
else:
    panel_integrals = panel_integrals_numpy


def active_backend() -> str:
    """Name of the backend bound to panel_integrals: 'numba' or 'numpy'."""
    return "numba" if panel_integrals is panel_integrals_numba else "numpy"
