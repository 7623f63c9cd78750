"""Adam optimizer and the cosine-annealing learning-rate schedule."""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, NumericError


class Adam:
    """Bias-corrected Adam over a fixed list of parameter tensors.

    Moment arrays start at zero and the step counter at t = 0; ``step``
    increments t and applies the standard update using each parameter's
    accumulated ``grad``.
    """

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self, lr):
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            if not np.all(np.isfinite(g)):
                raise NumericError(
                    f"non-finite gradient for parameter {p.name or '<unnamed>'}"
                )
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def cosine_lr(t, eta_max, eta_min, t_max, with_pi=True, cyclic=True):
    """Cosine-annealed learning rate at epoch ``t``.

    eta = eta_min + (eta_max - eta_min)/2 * (1 + cos(pi * (t mod t_max)/t_max)).

    ``with_pi=False`` drops the pi factor (the raw cos(t/t_max) form);
    ``cyclic=False`` uses t directly instead of t mod t_max, so the schedule
    reaches eta_min exactly at t = t_max instead of restarting.
    """
    if t_max < 1:
        raise ConfigError(f"t_max must be >= 1, got {t_max}")
    if eta_max < eta_min:
        raise ConfigError(f"eta_max ({eta_max}) must be >= eta_min ({eta_min})")
    tc = t % t_max if cyclic else t
    angle = (math.pi if with_pi else 1.0) * tc / t_max
    return eta_min + 0.5 * (eta_max - eta_min) * (1.0 + math.cos(angle))
