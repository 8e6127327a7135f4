"""Toy-scale diffusion math: noise schedules, the DDIM update, zero-initialized
control branches, and the composite auxiliary loss.

Everything here runs on plain vectors and is verified against analytic
Gaussian data; no image-scale training is involved. The schedule's
``alphas_cum`` are cumulative products of (1 - beta_t), and the DDIM update
reads its alpha symbols as those cumulative values (the only reading under
which a single step at t=1 inverts the forward noising exactly). The
per-step noise scale is sigma_t^2 = eta * beta_t; if that makes
1 - alpha_cum_prev - sigma^2 negative, the coefficient is clamped to zero
and a warning is emitted.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .image import ImageRGB
from .metrics import angular_color_loss, ssim
from .reward import RewardModel, score

Denoiser = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Forward-process betas and their cumulative alpha products (1-based t)."""

    betas: np.ndarray       # (T,), each in (0, 1)
    alphas_cum: np.ndarray  # (T,), strictly decreasing, in (0, 1)

    def __post_init__(self):
        betas = np.ascontiguousarray(np.asarray(self.betas, dtype=np.float64))
        acum = np.ascontiguousarray(np.asarray(self.alphas_cum, dtype=np.float64))
        if betas.ndim != 1 or betas.shape != acum.shape or betas.size < 1:
            raise ValueError("betas and alphas_cum must be equal-length 1-D arrays")
        if np.any(betas <= 0) or np.any(betas >= 1):
            raise ValueError("betas must lie in (0, 1)")
        if np.any(acum <= 0) or np.any(acum >= 1):
            raise ValueError("alphas_cum must lie in (0, 1)")
        if np.any(np.diff(acum) >= 0):
            raise ValueError("alphas_cum must be strictly decreasing")
        betas.flags.writeable = False
        acum.flags.writeable = False
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphas_cum", acum)

    @property
    def steps(self) -> int:
        return len(self.betas)

    def beta(self, t: int) -> float:
        self._check_t(t)
        return float(self.betas[t - 1])

    def alpha_cum(self, t: int) -> float:
        self._check_t(t)
        return float(self.alphas_cum[t - 1])

    def alpha_cum_prev(self, t: int) -> float:
        """alpha_cum at t-1, with the convention alpha_cum(0) = 1."""
        self._check_t(t)
        return 1.0 if t == 1 else float(self.alphas_cum[t - 2])

    def _check_t(self, t: int) -> None:
        if not 1 <= t <= self.steps:
            raise ValueError(f"t must be in [1, {self.steps}], got {t}")


def linear_schedule(steps: int, beta_min: float, beta_max: float) -> NoiseSchedule:
    """Linearly interpolated betas with running-product alphas."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if not 0.0 < beta_min <= beta_max < 1.0:
        raise ValueError(
            f"need 0 < beta_min <= beta_max < 1, got {beta_min}, {beta_max}"
        )
    betas = np.linspace(beta_min, beta_max, steps)
    return NoiseSchedule(betas=betas, alphas_cum=np.cumprod(1.0 - betas))


def predict_x0(
    y_t: np.ndarray, t: int, eps: np.ndarray, sched: NoiseSchedule
) -> np.ndarray:
    """Shortcut estimate of the clean signal from the noisy state at step t:

        x0' = (y_t - sqrt(1 - alpha_cum_t) * eps) / sqrt(alpha_cum_t)
    """
    a = sched.alpha_cum(t)
    return (y_t - np.sqrt(1.0 - a) * eps) / np.sqrt(a)


def ddim_step(
    y_t: np.ndarray,
    t: int,
    denoiser: Denoiser,
    sched: NoiseSchedule,
    eta: float = 0.0,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """One reverse update y_t -> y_{t-1}:

        y_{t-1} = sqrt(a_prev) * x0'
                + sqrt(1 - a_prev - sigma_t^2) * eps_hat
                + sigma_t * noise,          sigma_t^2 = eta * beta_t.

    With eta = 0 the step is deterministic and `noise` is ignored.
    """
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if eta > 0 and noise is None:
        raise ValueError("eta > 0 requires a noise vector")
    eps_hat = np.asarray(denoiser(y_t, t), dtype=np.float64)
    if eps_hat.shape != np.shape(y_t):
        raise ValueError(
            f"denoiser output shape {eps_hat.shape} != input {np.shape(y_t)}"
        )
    a_prev = sched.alpha_cum_prev(t)
    sigma_sq = eta * sched.beta(t)
    coef = 1.0 - a_prev - sigma_sq
    if coef < 0.0:
        warnings.warn(
            f"clamped direction coefficient at t={t}: "
            f"1 - alpha_prev - sigma^2 = {coef:.3g} < 0",
            RuntimeWarning,
            stacklevel=2,
        )
        coef = 0.0
    out = np.sqrt(a_prev) * predict_x0(y_t, t, eps_hat, sched) + np.sqrt(coef) * eps_hat
    if eta > 0:
        out = out + np.sqrt(sigma_sq) * np.asarray(noise, dtype=np.float64)
    return out


def ddim_sample(
    y_init: np.ndarray,
    denoiser: Denoiser,
    sched: NoiseSchedule,
    eta: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Run the full reverse chain t = T..1 from an initial noisy state."""
    if eta > 0 and rng is None:
        raise ValueError("eta > 0 requires an rng for the per-step noise")
    y = np.asarray(y_init, dtype=np.float64)
    for t in range(sched.steps, 0, -1):
        noise = rng.standard_normal(y.shape) if eta > 0 else None
        y = ddim_step(y, t, denoiser, sched, eta, noise)
    return y


@dataclass(frozen=True)
class GaussianDenoiser:
    """Posterior-mean noise predictor for scalar Gaussian data N(mean, var).

    For y_t = sqrt(a) x0 + sqrt(1-a) eps with x0 ~ N(mean, var):

        E[eps | y_t] = sqrt(1-a) (y_t - sqrt(a) mean) / (a var + 1 - a)

    This is the closed-form optimal denoiser used to validate the sampler.
    """

    sched: NoiseSchedule
    mean: float = 0.0
    var: float = 1.0

    def __call__(self, y_t: np.ndarray, t: int) -> np.ndarray:
        a = self.sched.alpha_cum(t)
        return (
            np.sqrt(1.0 - a)
            * (y_t - np.sqrt(a) * self.mean)
            / (a * self.var + 1.0 - a)
        )


# ---------------------------------------------------------------------------
# zero-initialized control branch
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwoLayerMap:
    """Small nonlinear map: w2 @ tanh(w1 @ x + b1) + b2."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.w2 @ np.tanh(self.w1 @ x + self.b1) + self.b2


@dataclass(frozen=True, eq=False)
class AffineProjection:
    """Projection w @ v + b; the zero-initialized branches start as all-zero."""

    w: np.ndarray
    b: np.ndarray

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.w @ v + self.b

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.w) or np.any(self.b))


@dataclass(frozen=True, eq=False)
class ControlledDenoiser:
    """A base map plus a control branch injected through two projections.

    Output: base(x) + project(control(x + inject(c))). With `inject` and
    `project` all-zero (the initial state), the output equals base(x) for
    every condition c.
    """

    base: TwoLayerMap
    control: TwoLayerMap
    inject: AffineProjection   # condition dim -> signal dim
    project: AffineProjection  # signal dim -> signal dim


def init_controlled(
    rng: np.random.Generator, x_dim: int, c_dim: int, hidden: int = 16
) -> ControlledDenoiser:
    """Random base/control parameters; both projections exactly zero."""

    def two_layer() -> TwoLayerMap:
        return TwoLayerMap(
            w1=rng.standard_normal((hidden, x_dim)) / np.sqrt(x_dim),
            b1=rng.standard_normal(hidden) * 0.1,
            w2=rng.standard_normal((x_dim, hidden)) / np.sqrt(hidden),
            b2=rng.standard_normal(x_dim) * 0.1,
        )

    return ControlledDenoiser(
        base=two_layer(),
        control=two_layer(),
        inject=AffineProjection(np.zeros((x_dim, c_dim)), np.zeros(x_dim)),
        project=AffineProjection(np.zeros((x_dim, x_dim)), np.zeros(x_dim)),
    )


def controlnet_forward(
    x: np.ndarray, c: np.ndarray, m: ControlledDenoiser
) -> np.ndarray:
    """base(x) + project(control(x + inject(c)))."""
    return m.base(x) + m.project(m.control(x + m.inject(c)))


# ---------------------------------------------------------------------------
# composite auxiliary loss
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AuxWeights:
    color: float = 0.0
    ssim: float = 0.0
    reward: float = 0.0

    def __post_init__(self):
        if min(self.color, self.ssim, self.reward) < 0:
            raise ValueError("aux-loss weights must be >= 0")


def aux_loss(
    pred,
    target,
    weights: AuxWeights,
    base_loss: float,
    reward_model: Optional[RewardModel] = None,
) -> float:
    """base + w_col * angular color loss + w_ssim * (1 - SSIM)
    + w_reward * (-score).

    Zero-weighted terms are skipped entirely, so plain vectors work when all
    image-based weights are zero. The reward term needs a model.
    """
    total = float(base_loss)
    needs_images = weights.color > 0 or weights.ssim > 0 or weights.reward > 0
    if needs_images and not isinstance(pred, ImageRGB):
        raise TypeError("image-based loss terms require ImageRGB inputs")
    if weights.color > 0:
        total += weights.color * angular_color_loss(pred, target)
    if weights.ssim > 0:
        total += weights.ssim * (1.0 - ssim(pred, target))
    if weights.reward > 0:
        if reward_model is None:
            raise ValueError("reward-weighted loss requires a reward model")
        total += weights.reward * (-score(reward_model, pred))
    return total
