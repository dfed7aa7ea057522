import math
import os
import subprocess
import sys

import numpy as np
import pytest

from udwitness import kernels


def _panels(n, t_end):
    edges = np.linspace(0.0, t_end, n + 1)
    return edges[:-1], edges[1:]


CASES = [
    (kernels.KIND_STATIC, 0.7, 0.0, 0.0, 1.3, 2.0),
    (kernels.KIND_INERTIAL, 0.4, 2.1, 0.0, 1.86, 5.0),
    (kernels.KIND_ACCELERATED, 1.5708, 0.8, 1.9635, 1.86, 4.0),
]


class TestNumpyBackend:
    def test_static_panel_sum_is_analytic(self):
        # integral of sin(phi0)*exp(i*omega*t) over [0, T]
        phi0, omega, t_end = 0.7, 1.3, 2.0
        lo, hi = _panels(40, t_end)
        vals, errs = kernels.panel_integrals_numpy(
            kernels.KIND_STATIC, phi0, 0.0, 0.0, omega, lo, hi
        )
        total = vals.sum()
        expected = math.sin(phi0) * (np.exp(1j * omega * t_end) - 1.0) / (1j * omega)
        assert total == pytest.approx(expected, abs=1e-13)
        assert errs.sum() < 1e-12

    def test_error_estimate_drops_with_panel_size(self):
        kind, phi0, rate, cc, omega, t_end = CASES[2]
        _, err_coarse = kernels.panel_integrals_numpy(kind, phi0, rate, cc, omega, *_panels(20, t_end))
        _, err_fine = kernels.panel_integrals_numpy(kind, phi0, rate, cc, omega, *_panels(200, t_end))
        assert err_fine.sum() < err_coarse.sum()


@pytest.mark.skipif(kernels.panel_integrals_numba is None, reason="numba unavailable")
class TestBackendEquivalence:
    @pytest.mark.parametrize("case", CASES, ids=["static", "inertial", "accelerated"])
    def test_backends_agree(self, case):
        kind, phi0, rate, cc, omega, t_end = case
        lo, hi = _panels(137, t_end)
        v_np, e_np = kernels.panel_integrals_numpy(kind, phi0, rate, cc, omega, lo, hi)
        v_nb, e_nb = kernels.panel_integrals_numba(kind, phi0, rate, cc, omega, lo, hi)
        np.testing.assert_allclose(v_nb, v_np, atol=1e-13)
        np.testing.assert_allclose(e_nb, e_np, atol=1e-13)


class TestBackendSelection:
    def test_active_backend_name(self):
        assert kernels.active_backend() in ("numba", "numpy")

    def test_env_flag_forces_numpy(self):
        code = (
            "import udwitness.kernels as k; "
            "print(k.active_backend(), k.panel_integrals_numba is None)"
        )
        env = dict(os.environ, UDWITNESS_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
        )
        assert out.stdout.split() == ["numpy", "True"]
