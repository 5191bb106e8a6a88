"""Oracle cross-learning scores: closed forms and Monte Carlo.

Two settings admit closed forms. For probit-style labels on standard
Gaussian features the score is (arccos(rho1) + arccos(rho2)) / (2 pi),
where rho1 and rho2 correlate each domain's noisy decision statistic
with the other domain's noiseless one; in the noise-free limit this
degenerates to theta/pi with theta the angle between the two parameter
vectors. For the symmetric two-Gaussian setting with identity covariance
the score is [Phi(-|mu_s| cos theta) + Phi(-|mu_t| cos theta)] / 2.
Everything else is estimated by Monte Carlo using the settings' exact
predictors on freshly sampled data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ValidationError
from .score import ClsEstimate
from .synth import GeneratorSpec, OracleModel, sample_dataset


def _phi(x: float) -> float:
    """Standard normal CDF via erfc, accurate to full double precision."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _clip_unit(value: float) -> float:
    return min(1.0, max(-1.0, value))


@dataclass(frozen=True)
class ProbitOracleParams:
    """Parameter vectors of the two probit tasks plus the label-noise variance."""

    beta_t: np.ndarray
    beta_s: np.ndarray
    sigma2: float = 1.0

    def __post_init__(self):
        bt = np.asarray(self.beta_t, dtype=np.float64)
        bs = np.asarray(self.beta_s, dtype=np.float64)
        if bt.shape != bs.shape or bt.ndim != 1:
            raise ValidationError("parameter vectors must share one shape")
        if np.linalg.norm(bt) == 0 or np.linalg.norm(bs) == 0:
            raise ValidationError("parameter vectors must be nonzero")
        if self.sigma2 < 0:
            raise ValidationError("sigma2 must be >= 0")
        object.__setattr__(self, "beta_t", bt)
        object.__setattr__(self, "beta_s", bs)

    @property
    def rho1(self) -> float:
        dot = float(self.beta_t @ self.beta_s)
        nt2 = float(self.beta_t @ self.beta_t)
        ns2 = float(self.beta_s @ self.beta_s)
        return _clip_unit(dot / math.sqrt((nt2 + self.sigma2) * ns2))

    @property
    def rho2(self) -> float:
        dot = float(self.beta_t @ self.beta_s)
        nt2 = float(self.beta_t @ self.beta_t)
        ns2 = float(self.beta_s @ self.beta_s)
        return _clip_unit(dot / math.sqrt(nt2 * (ns2 + self.sigma2)))

    @property
    def theta_beta(self) -> float:
        dot = float(self.beta_t @ self.beta_s)
        nt2 = float(self.beta_t @ self.beta_t)
        ns2 = float(self.beta_s @ self.beta_s)
        return math.acos(_clip_unit(dot / math.sqrt(nt2 * ns2)))


def oracle_probit(params: ProbitOracleParams) -> float:
    """Exact score of the probit setting: (arccos rho1 + arccos rho2) / (2 pi)."""
    return (math.acos(params.rho1) + math.acos(params.rho2)) / (2.0 * math.pi)


def oracle_probit_directional(params: ProbitOracleParams) -> tuple[float, float]:
    """The two directional errors (arccos(rho)/pi each)."""
    return (math.acos(params.rho1) / math.pi, math.acos(params.rho2) / math.pi)


def oracle_probit_smallnoise(theta_beta: float) -> float:
    """Low-noise limit: the score is the angle over pi."""
    if not 0.0 <= theta_beta <= math.pi:
        raise ValidationError("angle must lie in [0, pi]")
    return theta_beta / math.pi


@dataclass(frozen=True)
class LdaOracleParams:
    """Class-1 mean vectors of the two symmetric Gaussian tasks."""

    mu_t: np.ndarray
    mu_s: np.ndarray

    def __post_init__(self):
        mt = np.asarray(self.mu_t, dtype=np.float64)
        ms = np.asarray(self.mu_s, dtype=np.float64)
        if mt.shape != ms.shape or mt.ndim != 1:
            raise ValidationError("mean vectors must share one shape")
        if np.linalg.norm(mt) == 0 or np.linalg.norm(ms) == 0:
            raise ValidationError("mean vectors must be nonzero")
        object.__setattr__(self, "mu_t", mt)
        object.__setattr__(self, "mu_s", ms)

    @property
    def cos_theta_mu(self) -> float:
        dot = float(self.mu_t @ self.mu_s)
        return _clip_unit(dot / float(np.linalg.norm(self.mu_t)
                                      * np.linalg.norm(self.mu_s)))


def oracle_lda_directional(params: LdaOracleParams) -> tuple[float, float]:
    c = params.cos_theta_mu
    e_t = _phi(-float(np.linalg.norm(params.mu_s)) * c)
    e_s = _phi(-float(np.linalg.norm(params.mu_t)) * c)
    return e_t, e_s


def oracle_lda(params: LdaOracleParams) -> float:
    """Exact score of the symmetric Gaussian setting (identity covariance)."""
    e_t, e_s = oracle_lda_directional(params)
    return 0.5 * (e_t + e_s)


def oracle_monte_carlo(target_oracle: OracleModel, source_oracle: OracleModel,
                       target_spec: GeneratorSpec, source_spec: GeneratorSpec,
                       samples: int = 200_000, seed: int = 0) -> ClsEstimate:
    """Monte Carlo score of the two exact predictors, with its standard error.

    Each direction draws fresh data from one domain and evaluates the
    other domain's optimal predictor on it.
    """
    if samples < 10_000:
        raise ValidationError("need at least 1e4 Monte Carlo samples")
    if target_spec.p != source_spec.p or target_spec.task != source_spec.task:
        raise ValidationError("incompatible target/source specifications")
    if (target_oracle.spec is not target_spec
            and target_oracle.spec.to_dict() != target_spec.to_dict()):
        raise ValidationError("target oracle does not match target spec")
    if (source_oracle.spec is not source_spec
            and source_oracle.spec.to_dict() != source_spec.to_dict()):
        raise ValidationError("source oracle does not match source spec")
    if samples % 2:
        samples += 1
    loss = target_spec.task.default_loss()
    e, se = [], []
    for oracle, spec, tag in ((target_oracle, source_spec, 0),
                              (source_oracle, target_spec, 1)):
        data = sample_dataset(spec, samples, rng.derive(seed, rng.MC, tag))
        pred = oracle.predict(data.features)
        losses = ((pred != data.labels).astype(np.float64)
                  if target_spec.task.is_classification
                  else (pred - data.labels) ** 2)
        e.append(float(losses.mean()))
        se.append(float(losses.std(ddof=1) / math.sqrt(samples)))
    mc_se = 0.5 * math.hypot(se[0], se[1])
    return ClsEstimate(score=0.5 * (e[0] + e[1]), e_t=e[0], e_s=e[1],
                       scheme="mc-oracle", loss=loss, seed=seed, mc_se=mc_se)


def oracle_score(target_spec: GeneratorSpec, source_spec: GeneratorSpec,
                 mc_samples: int = 200_000, seed: int = 0) -> ClsEstimate:
    """Oracle score for a spec pair: closed form where available, else MC."""
    setting = target_spec.setting
    loss = target_spec.task.default_loss()
    if setting == "probit":
        params = ProbitOracleParams(target_spec.beta, source_spec.beta,
                                    target_spec.sigma2)
        e_t, e_s = oracle_probit_directional(params)
        return ClsEstimate(score=0.5 * (e_t + e_s), e_t=e_t, e_s=e_s,
                           scheme="oracle", loss=loss)
    if setting == "lda":
        params = LdaOracleParams(target_spec.mu, source_spec.mu)
        e_t, e_s = oracle_lda_directional(params)
        return ClsEstimate(score=0.5 * (e_t + e_s), e_t=e_t, e_s=e_s,
                           scheme="oracle", loss=loss)
    return oracle_monte_carlo(OracleModel(target_spec), OracleModel(source_spec),
                              target_spec, source_spec, mc_samples, seed)
