"""Z-score normalisation and PCA, as functions and as scikit-learn transformers."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, OneToOneFeatureMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import InsufficientDataError, InvalidInputError

# a column is constant when sigma < max(CONSTANT_SIGMA, CONSTANT_RTOL * max|x|);
# the relative term absorbs round-off left by projections and interpolation
CONSTANT_SIGMA = 1e-12
CONSTANT_RTOL = 1e-9
ZSCORE_DDOF = 1
PCA_DDOF = 0


class ConstantColumnWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows of named real-valued features, one row per scenario."""

    values: np.ndarray
    columns: tuple[str, ...]
    row_ids: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            values = values.reshape(len(self.row_ids) or 0, len(self.columns))
        columns = tuple(self.columns)
        row_ids = tuple(self.row_ids) or tuple(str(i) for i in range(values.shape[0]))
        if values.shape != (len(row_ids), len(columns)):
            raise InvalidInputError(
                f"matrix shape {values.shape} does not match {len(row_ids)} rows x {len(columns)} columns"
            )
        if len(set(columns)) != len(columns):
            raise InvalidInputError("column names must be unique")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("feature matrix contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "row_ids", row_ids)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def with_values(self, values, columns: Optional[Sequence[str]] = None) -> "FeatureMatrix":
        return FeatureMatrix(values, tuple(columns) if columns is not None else self.columns, self.row_ids)


def _values(m) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError("expected a 2-D feature matrix")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("feature matrix contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class ZScoreParams:
    mu: np.ndarray
    sigma: np.ndarray
    columns: tuple[str, ...] = ()
    floor: Optional[np.ndarray] = None

    @property
    def constant(self) -> np.ndarray:
        floor = CONSTANT_SIGMA if self.floor is None else self.floor
        return self.sigma < floor


def zscore_fit(m) -> ZScoreParams:
    x = _values(m)
    if x.shape[0] < 2:
        raise InsufficientDataError("z-score needs at least 2 rows")
    columns = getattr(m, "columns", ())
    scale = np.max(np.abs(x), axis=0)
    return ZScoreParams(
        x.mean(axis=0),
        x.std(axis=0, ddof=ZSCORE_DDOF),
        tuple(columns),
        np.maximum(CONSTANT_SIGMA, CONSTANT_RTOL * scale),
    )


def zscore_apply(m, params: ZScoreParams):
    """Standardise columns; constant columns become zeros (with a warning)."""
    x = _values(m)
    if x.shape[1] != params.mu.shape[0]:
        raise InvalidInputError("column count differs from fitted z-score parameters")
    constant = params.constant
    if np.any(constant):
        names = [params.columns[i] if params.columns else str(i) for i in np.flatnonzero(constant)]
        warnings.warn(f"constant column(s) mapped to zero: {', '.join(names)}", ConstantColumnWarning, stacklevel=2)
    scale = np.where(constant, 1.0, params.sigma)
    out = np.where(constant, 0.0, (x - params.mu) / scale)
    if isinstance(m, FeatureMatrix):
        return m.with_values(out)
    return out


@dataclass(frozen=True, eq=False)
class PcaModel:
    """``components`` is (n_features, n_components) with orthonormal columns."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    total_variance: float


def pca_fit(m, components: int = 2) -> PcaModel:
    """Top eigenvectors of the (population) covariance matrix.

    Each component is signed so that its largest-magnitude coordinate is
    positive.
    """
    x = _values(m)
    n, d = x.shape
    if n < 2:
        raise InsufficientDataError("PCA needs at least 2 rows")
    if not 1 <= components <= d:
        raise InvalidInputError(f"components must lie in [1, {d}]")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - PCA_DDOF)
    cov = (cov + cov.T) / 2
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals, kind="stable")[::-1][:components]
    vecs = evecs[:, order]
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(components)])
    vecs = vecs * np.where(signs == 0, 1.0, signs)
    return PcaModel(mean, vecs, np.clip(evals[order], 0.0, None), float(np.trace(cov)))


def pca_transform(m, model: PcaModel):
    x = _values(m)
    out = (x - model.mean) @ model.components
    if isinstance(m, FeatureMatrix):
        return m.with_values(out, [f"pc{i}" for i in range(out.shape[1])])
    return out


class ZScoreScaler(OneToOneFeatureMixin, TransformerMixin, BaseEstimator):
    """Column standardisation with sample (ddof=1) standard deviation."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.params_ = zscore_fit(X)
        self.mean_ = self.params_.mu
        self.scale_ = self.params_.sigma
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        return zscore_apply(check_array(X, dtype=float), self.params_)


class PCA(TransformerMixin, BaseEstimator):
    """Eigen-decomposition PCA with a deterministic sign convention.

    ``components_`` follows the scikit-learn layout (n_components, n_features).
    """

    def __init__(self, n_components: int = 2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.model_ = pca_fit(X, self.n_components)
        self.mean_ = self.model_.mean
        self.components_ = self.model_.components.T
        self.explained_variance_ = self.model_.explained_variance
        self.explained_variance_ratio_ = (
            self.explained_variance_ / self.model_.total_variance
            if self.model_.total_variance > 0
            else np.zeros_like(self.explained_variance_)
        )
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        return pca_transform(check_array(X, dtype=float), self.model_)

    def get_feature_names_out(self, input_features=None):
        return np.array([f"pc{i}" for i in range(self.n_components)], dtype=object)
