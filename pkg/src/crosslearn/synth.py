"""Synthetic benchmark settings with controlled target/source similarity.

Eight generative settings are supported, each producing a (target, source)
pair of datasets whose similarity is controlled by a single knob: the
cosine between the target and source parameter vectors, or a mixture
weight for the `mixture` setting. Every setting also exposes its exact
optimal predictor (argmax posterior for classification, conditional mean
for regression), which the oracle score computations rely on.

The source parameter vector is produced by an exact rotation of the
target vector in hyperspherical coordinates: the leading angle is shifted
by arccos(c) while the radius and all remaining angles are kept, which
preserves the norm and yields a cosine of exactly c with the original
vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import rng
from .data import Dataset, TaskKind
from .errors import ValidationError

SETTINGS = (
    "logistic", "probit", "lda", "qda", "mixture",
    "fourclass", "linreg", "nonlinreg",
)

# Settings that force exact class balance in every sample.
_BALANCED = ("lda", "qda", "mixture")


def ar_covariance(p: int, decay: float) -> np.ndarray:
    """Auto-regressive covariance matrix decay^|i-j|."""
    idx = np.arange(p)
    return decay ** np.abs(idx[:, None] - idx[None, :])


def _clamp_cosine(c: float) -> float:
    if not np.isfinite(c) or abs(c) > 1.0 + 1e-12:
        raise ValidationError(f"cosine must lie in [-1, 1], got {c}")
    return float(min(1.0, max(-1.0, c)))


def rotate_to_cosine(base_vector: np.ndarray, target_cosine: float) -> np.ndarray:
    """Rotate `base_vector` so the result has cosine `target_cosine` with it.

    Converts to hyperspherical coordinates (radius plus p-1 angles),
    subtracts arccos(target_cosine) from the leading angle and converts
    back. The result has the same norm as the input, and its cosine with
    the input equals the request to machine precision.
    """
    v = np.asarray(base_vector, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise ValidationError("base vector must be 1-D with p >= 2")
    c = _clamp_cosine(target_cosine)
    r = float(np.linalg.norm(v))
    if r == 0.0:
        raise ValidationError("base vector must be nonzero")
    p = v.size
    # tail[j] = sqrt(v_j^2 + ... + v_{p-1}^2); atan2(tail[j+1], v[j]) equals
    # the arccos form of the angles but stays defined when a tail vanishes.
    tail = np.sqrt(np.cumsum(v[::-1] ** 2))[::-1]
    phi = np.empty(p - 1)
    for j in range(p - 2):
        phi[j] = np.arctan2(tail[j + 1], v[j])
    phi[p - 2] = np.arctan2(v[p - 1], v[p - 2])
    phi[0] -= np.arccos(c)
    out = np.empty(p)
    scale = r
    for j in range(p - 1):
        out[j] = scale * np.cos(phi[j])
        scale *= np.sin(phi[j])
    out[p - 1] = scale
    return out


def orthogonal_complement(beta1: np.ndarray, seed: int) -> np.ndarray:
    """Equal-norm vector orthogonal to beta1, via one Gram-Schmidt step.

    A seeded Gaussian draw is projected out of beta1's span and rescaled
    to match its norm; deterministic given the seed.
    """
    b = np.asarray(beta1, dtype=np.float64)
    if b.ndim != 1 or b.size < 2:
        raise ValidationError("beta1 must be 1-D with p >= 2")
    nb = np.linalg.norm(b)
    if nb == 0.0:
        raise ValidationError("beta1 must be nonzero")
    g = rng.stream(seed, rng.COMPLEMENT)
    for _ in range(16):
        cand = g.standard_normal(b.size)
        u = cand - (cand @ b) / (nb * nb) * b
        nu = np.linalg.norm(u)
        if nu > 1e-9 * np.linalg.norm(cand):
            return u * (nb / nu)
    raise ValidationError("could not find an orthogonal complement")


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one synthetic setting for one domain (target or source).

    Field usage by setting:
      logistic / probit / linreg: `beta` (length p), `sigma2` for noise
      nonlinreg: `beta` (length 4), features stay p-dimensional
      lda / qda: `mu` class-1 mean (class 0 mirrored at -mu)
      mixture: `mu` plus shifted component `mu_shift` mixed with weight `alpha`
      fourclass: orthogonal equal-norm pair `beta`, `beta2`, projection
        noise `proj_noise`
    """

    setting: str
    role: str = "target"
    p: int = 10
    seed: int = 0
    beta: np.ndarray | None = None
    beta2: np.ndarray | None = None
    mu: np.ndarray | None = None
    mu_shift: np.ndarray | None = None
    alpha: float | None = None
    sigma2: float = 1.0
    proj_noise: float = 0.3

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ValidationError(f"unknown setting {self.setting!r}")
        if self.role not in ("target", "source"):
            raise ValidationError("role must be 'target' or 'source'")
        if self.p < 2:
            raise ValidationError("p must be >= 2")
        for name in ("beta", "beta2", "mu", "mu_shift"):
            v = getattr(self, name)
            if v is not None:
                arr = np.asarray(v, dtype=np.float64)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)
        if self.setting in ("logistic", "probit", "linreg"):
            self._need("beta", self.p)
        elif self.setting == "nonlinreg":
            self._need("beta", 4)
            if self.p < 5:
                raise ValidationError("nonlinreg needs p >= 5")
        elif self.setting in ("lda", "qda"):
            self._need("mu", self.p)
        elif self.setting == "mixture":
            self._need("mu", self.p)
            self._need("mu_shift", self.p)
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ValidationError("mixture weight alpha must lie in [0, 1]")
        elif self.setting == "fourclass":
            self._need("beta", self.p)
            self._need("beta2", self.p)
            dot = abs(float(self.beta @ self.beta2))
            norms = abs(np.linalg.norm(self.beta) - np.linalg.norm(self.beta2))
            if dot > 1e-10 or norms > 1e-10:
                raise ValidationError("fourclass directions must be orthogonal with equal norms")
        if self.sigma2 < 0:
            raise ValidationError("sigma2 must be >= 0")

    def _need(self, name: str, length: int):
        v = getattr(self, name)
        if v is None or v.shape != (length,):
            raise ValidationError(f"{self.setting} needs {name} of length {length}")

    @property
    def task(self) -> TaskKind:
        if self.setting == "fourclass":
            return TaskKind.multiclass(4)
        if self.setting in ("linreg", "nonlinreg"):
            return TaskKind.regression()
        return TaskKind.binary()

    @property
    def balanced(self) -> bool:
        return self.setting in _BALANCED

    def to_dict(self) -> dict:
        out = {"setting": self.setting, "role": self.role, "p": self.p,
               "seed": self.seed, "sigma2": self.sigma2, "proj_noise": self.proj_noise,
               "alpha": self.alpha}
        for name in ("beta", "beta2", "mu", "mu_shift"):
            v = getattr(self, name)
            out[name] = None if v is None else [float(x) for x in v]
        return out

    @staticmethod
    def from_dict(d: dict) -> "GeneratorSpec":
        kw = dict(d)
        for name in ("beta", "beta2", "mu", "mu_shift"):
            if kw.get(name) is not None:
                kw[name] = np.asarray(kw[name], dtype=np.float64)
        return GeneratorSpec(**kw)


def similarity_grid(setting: str) -> np.ndarray:
    """Default similarity grid: cosine -1..1 or mixture weight 0..1, step 0.1."""
    if setting == "mixture":
        return np.round(np.arange(0, 11) * 0.1, 10)
    return np.round(np.arange(-10, 11) * 0.1, 10)


def spec_pair(setting: str, similarity: float, seed: int, p: int = 10
              ) -> tuple[GeneratorSpec, GeneratorSpec]:
    """Build a (target, source) spec pair at the given similarity level.

    Random parameter vectors are drawn once from the replicate seed; the
    source parameters are then derived from the target's, so the pair is
    coupled exactly as the similarity knob dictates.
    """
    if setting not in SETTINGS:
        raise ValidationError(f"unknown setting {setting!r}")
    g = rng.stream(seed, rng.PARAMS)
    common = dict(setting=setting, p=p, seed=seed)
    if setting in ("logistic", "probit", "linreg", "nonlinreg"):
        dim = 4 if setting == "nonlinreg" else p
        beta_t = g.normal(0.25, 0.25, dim)
        beta_s = rotate_to_cosine(beta_t, similarity)
        t = GeneratorSpec(role="target", beta=beta_t, **common)
        s = GeneratorSpec(role="source", beta=beta_s, **common)
    elif setting in ("lda", "qda"):
        level = 0.3 if setting == "lda" else 0.4
        mu_t = np.full(p, level)
        mu_s = rotate_to_cosine(mu_t, similarity)
        t = GeneratorSpec(role="target", mu=mu_t, **common)
        s = GeneratorSpec(role="source", mu=mu_s, **common)
    elif setting == "mixture":
        if not 0.0 <= similarity <= 1.0:
            raise ValidationError("mixture similarity knob is alpha in [0, 1]")
        mu_t = np.full(p, 0.3)
        mu_shift = g.normal(-0.3, 0.5, p)
        t = GeneratorSpec(role="target", mu=mu_t, mu_shift=mu_shift, alpha=0.0, **common)
        s = GeneratorSpec(role="source", mu=mu_t, mu_shift=mu_shift,
                          alpha=float(similarity), **common)
    else:  # fourclass
        b1_t = g.normal(0.25, 0.25, p)
        comp_seed = rng.derive(seed, rng.COMPLEMENT)
        b2_t = orthogonal_complement(b1_t, comp_seed)
        b1_s = rotate_to_cosine(b1_t, similarity)
        b2_s = orthogonal_complement(b1_s, comp_seed)
        t = GeneratorSpec(role="target", beta=b1_t, beta2=b2_t, **common)
        s = GeneratorSpec(role="source", beta=b1_s, beta2=b2_s, **common)
    return t, s


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sample_dataset(spec: GeneratorSpec, n: int, seed: int) -> Dataset:
    """Draw n samples from the setting; balanced settings need n even."""
    if n < 2:
        raise ValidationError("need n >= 2")
    g = rng.stream(seed, rng.DATA)
    if spec.balanced:
        if n % 2:
            raise ValidationError(f"{spec.setting} needs an even sample count")
        return _sample_balanced(spec, n, g)
    p = spec.p
    X = g.standard_normal((n, p))
    if spec.setting == "logistic":
        X = X @ np.linalg.cholesky(ar_covariance(p, 0.5)).T
        y = (g.random(n) < _sigmoid(X @ spec.beta)).astype(np.int64)
    elif spec.setting == "probit":
        noise = g.normal(0.0, np.sqrt(spec.sigma2), n)
        y = (X @ spec.beta + noise >= 0).astype(np.int64)
    elif spec.setting == "fourclass":
        e = g.normal(0.0, spec.proj_noise, (2, n))
        z1 = X @ spec.beta + e[0]
        z2 = X @ spec.beta2 + e[1]
        y = 2 * (z1 >= 0).astype(np.int64) + (z2 >= 0).astype(np.int64)
    elif spec.setting == "linreg":
        y = X @ spec.beta + g.normal(0.0, np.sqrt(spec.sigma2), n)
    else:  # nonlinreg
        y = _nonlinear_mean(spec.beta, X) + g.normal(0.0, np.sqrt(spec.sigma2), n)
    return Dataset(X, y, spec.task)


def _sample_balanced(spec: GeneratorSpec, n: int, g: np.random.Generator) -> Dataset:
    p, half = spec.p, n // 2
    X = np.empty((n, p))
    y = np.concatenate([np.zeros(half, np.int64), np.ones(half, np.int64)])
    for cls, rows in ((0, slice(0, half)), (1, slice(half, n))):
        sign = 1.0 if cls == 1 else -1.0
        z = g.standard_normal((half, p))
        if spec.setting == "qda":
            cov = ar_covariance(p, 0.3 if cls == 1 else 0.7)
            z = z @ np.linalg.cholesky(cov).T
        means = np.tile(sign * spec.mu, (half, 1))
        if spec.setting == "mixture" and spec.alpha > 0:
            shifted = g.random(half) < spec.alpha
            means[shifted] = sign * spec.mu_shift
        X[rows] = means + z
    perm = g.permutation(n)
    return Dataset(X[perm], y[perm], spec.task)


def _nonlinear_mean(beta: np.ndarray, X: np.ndarray) -> np.ndarray:
    return (beta[0] * np.sin(X[:, 0]) + beta[1] * X[:, 1] ** 2
            + beta[2] * X[:, 2] * X[:, 3] + beta[3] * np.exp(X[:, 4]))


def _gauss_logpdf_identity(X: np.ndarray, mean: np.ndarray) -> np.ndarray:
    d = X - mean
    return -0.5 * np.einsum("ij,ij->i", d, d)


@dataclass(frozen=True)
class OracleModel:
    """The exact optimal predictor of a generative setting.

    Classification settings expose the posterior P(Y=k | x); prediction
    takes its argmax (with the >= 0 half-space convention on decision
    boundaries). Regression settings predict the noiseless conditional
    mean.
    """

    spec: GeneratorSpec

    @staticmethod
    def from_spec(spec: GeneratorSpec) -> "OracleModel":
        return OracleModel(spec)

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.spec.p:
            raise ValidationError(f"expected (m, {self.spec.p}) query matrix")
        return X

    def posterior(self, X: np.ndarray) -> np.ndarray:
        """Class posterior probabilities, shape (m, K)."""
        s = self.spec
        X = self._check(X)
        if s.setting == "logistic":
            p1 = _sigmoid(X @ s.beta)
        elif s.setting == "probit":
            z = X @ s.beta
            p1 = ndtr(z / np.sqrt(s.sigma2)) if s.sigma2 > 0 else (z >= 0).astype(float)
        elif s.setting == "lda":
            p1 = _sigmoid(2.0 * (X @ s.mu))
        elif s.setting == "qda":
            p1 = _qda_posterior(s, X)
        elif s.setting == "mixture":
            p1 = _mixture_posterior(s, X)
        elif s.setting == "fourclass":
            u = ndtr((X @ s.beta) / s.proj_noise)
            v = ndtr((X @ s.beta2) / s.proj_noise)
            return np.stack([(1 - u) * (1 - v), (1 - u) * v, u * (1 - v), u * v], axis=1)
        else:
            raise ValidationError(f"{s.setting} has no class posterior")
        return np.stack([1.0 - p1, p1], axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        s = self.spec
        X = self._check(X)
        if s.setting in ("logistic", "probit"):
            return (X @ s.beta >= 0).astype(np.int64)
        if s.setting == "lda":
            return (X @ s.mu >= 0).astype(np.int64)
        if s.setting == "fourclass":
            return (2 * (X @ s.beta >= 0).astype(np.int64)
                    + (X @ s.beta2 >= 0).astype(np.int64))
        if s.setting in ("qda", "mixture"):
            return np.argmax(self.posterior(X), axis=1).astype(np.int64)
        if s.setting == "linreg":
            return X @ s.beta
        return _nonlinear_mean(s.beta, X)

    def class_log_density(self, X: np.ndarray, cls: int) -> np.ndarray:
        """log p(x | y=cls), up to the shared Gaussian normalizer, for the
        Gaussian-family settings (lda, qda, mixture)."""
        s = self.spec
        X = self._check(X)
        sign = 1.0 if cls == 1 else -1.0
        if s.setting == "lda":
            return _gauss_logpdf_identity(X, sign * s.mu)
        if s.setting == "qda":
            cov = ar_covariance(s.p, 0.3 if cls == 1 else 0.7)
            L = np.linalg.cholesky(cov)
            sol = np.linalg.solve(L, (X - sign * s.mu).T)
            return (-0.5 * np.einsum("ij,ij->j", sol, sol)
                    - np.log(np.diag(L)).sum())
        if s.setting == "mixture":
            a = float(s.alpha)
            base = _gauss_logpdf_identity(X, sign * s.mu)
            shift = _gauss_logpdf_identity(X, sign * s.mu_shift)
            if a == 0.0:
                return base
            if a == 1.0:
                return shift
            return np.logaddexp(np.log1p(-a) + base, np.log(a) + shift)
        raise ValidationError(f"{s.setting} has no class-conditional density")


def _qda_posterior(s: GeneratorSpec, X: np.ndarray) -> np.ndarray:
    oracle = OracleModel(s)
    d1 = oracle.class_log_density(X, 1)
    d0 = oracle.class_log_density(X, 0)
    return _sigmoid(d1 - d0)


def _mixture_posterior(s: GeneratorSpec, X: np.ndarray) -> np.ndarray:
    oracle = OracleModel(s)
    d1 = oracle.class_log_density(X, 1)
    d0 = oracle.class_log_density(X, 0)
    return _sigmoid(d1 - d0)


def bayes_predict(oracle: OracleModel, X: np.ndarray) -> np.ndarray:
    """Evaluate the setting's optimal predictor on a query matrix."""
    return oracle.predict(X)
