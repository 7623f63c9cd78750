import math

import numpy as np
import pytest

from kbae.engine import Tensor
from kbae.errors import ConfigError, NumericError
from kbae.optim import Adam, cosine_lr


class TestAdam:
    def test_zero_gradient_leaves_params_unchanged(self):
        p = Tensor(np.array([1.0, -2.0, 3.0]), name="p")
        opt = Adam([p])
        opt.step(lr=0.01)
        assert np.array_equal(p.data, [1.0, -2.0, 3.0])

    def test_first_step_hand_values(self):
        # m_hat = 1, v_hat = 1 after one step with unit gradient, so the
        # update is lr / (1 + eps).
        p = Tensor(np.array([1.0]), name="p")
        opt = Adam([p])
        p.grad[:] = 1.0
        opt.step(lr=0.002)
        expected = 1.0 - 0.002 / (1.0 + 1e-8)
        assert abs(p.data[0] - expected) < 1e-15
        assert abs(p.data[0] - 0.998) < 1e-8
        assert opt.t == 1

    def test_two_steps_match_manual_unroll(self):
        p = Tensor(np.array([0.5]), name="p")
        opt = Adam([p])
        # manual unroll with constant gradient 1.0
        b1, b2, eps, lr = 0.9, 0.999, 1e-8, 0.01
        theta, m, v = 0.5, 0.0, 0.0
        for t in (1, 2):
            m = b1 * m + (1 - b1) * 1.0
            v = b2 * v + (1 - b2) * 1.0
            mh = m / (1 - b1**t)
            vh = v / (1 - b2**t)
            theta -= lr * mh / (math.sqrt(vh) + eps)
        for _ in range(2):
            p.grad[:] = 1.0
            opt.step(lr=lr)
            p.zero_grad()
        assert abs(p.data[0] - theta) < 1e-12

    def test_moment_invariants(self):
        rng = np.random.default_rng(0)
        p = Tensor(rng.uniform(-1, 1, (4, 3)), name="p")
        opt = Adam([p])
        assert opt.t == 0
        assert not opt.m[0].any() and not opt.v[0].any()
        for _ in range(5):
            p.grad[:] = rng.uniform(-1, 1, p.data.shape)
            opt.step(lr=1e-3)
        assert np.all(opt.v[0] >= 0.0)

    def test_non_finite_gradient_identifies_parameter(self):
        p = Tensor(np.array([1.0]), name="enc.conv1.weight")
        opt = Adam([p])
        p.grad[:] = np.nan
        with pytest.raises(NumericError) as err:
            opt.step(lr=0.01)
        assert "enc.conv1.weight" in str(err.value)


class TestCosineLr:
    def test_start_at_eta_max(self):
        assert cosine_lr(0, 0.002, 0.0, 20) == 0.002

    def test_midpoint(self):
        assert abs(cosine_lr(10, 0.002, 0.0, 20) - 0.001) < 1e-18

    def test_endpoint_reaches_zero_without_wraparound(self):
        assert cosine_lr(20, 0.002, 0.0, 20, cyclic=False) == 0.0

    def test_cyclic_restart(self):
        assert cosine_lr(20, 0.002, 0.0, 20) == 0.002
        for t in range(0, 60):
            assert cosine_lr(t, 0.002, 0.0, 20) == cosine_lr(t + 20, 0.002, 0.0, 20)

    def test_bounded(self):
        for t in range(100):
            lr = cosine_lr(t, 0.003, 0.0005, 7)
            assert 0.0005 <= lr <= 0.003

    def test_literal_form_without_pi(self):
        want = 0.0 + 0.5 * 0.002 * (1.0 + math.cos(1.0))
        assert cosine_lr(20, 0.002, 0.0, 20, with_pi=False, cyclic=False) == want

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            cosine_lr(0, 0.001, 0.002, 20)
        with pytest.raises(ConfigError):
            cosine_lr(0, 0.002, 0.0, 0)
