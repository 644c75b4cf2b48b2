"""Level 3 generator: Gaussian copula over empirical marginals.

The model couples per-column empirical marginals (sorted value tables for
numerics, frequency tables for categoricals) with a latent multivariate-normal
dependence structure estimated from normal scores. Sampling draws latent
normals, pushes each coordinate through the normal CDF, and inverts the stored
marginal; numeric inversion interpolates between adjacent order statistics, so
generated values are new points within the training range rather than replays
of training cells.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from .data import CATEGORICAL, IDENTIFIER, NUMERIC_INTEGER, ColumnSpec, Dataset, validate_schema
from .rng import generator

_MIN_EIGENVALUE = 1e-9


@dataclass(frozen=True)
class CopulaModel:
    """Fitted copula: empirical marginals plus a repaired latent correlation.

    Parameters
    ----------
    schema : tuple of ColumnSpec
        Column layout of the fitted (and generated) data.
    numeric_marginals : dict
        Column name -> sorted float array of training values.
    categorical_marginals : dict
        Column name -> probability vector over the schema's categories.
    correlation : ndarray
        Symmetric PSD latent correlation over all columns, in schema order.
    shrinkage : float
        Identity-shrinkage weight applied to make the matrix PSD.
    n_fit : int
        Number of training rows.
    """

    schema: tuple[ColumnSpec, ...]
    numeric_marginals: dict[str, np.ndarray]
    categorical_marginals: dict[str, np.ndarray]
    correlation: np.ndarray
    shrinkage: float
    n_fit: int

    def __post_init__(self):
        corr = np.asarray(self.correlation, dtype=np.float64)
        d = len(self.schema)
        if corr.shape != (d, d):
            raise ValueError(f"correlation must be {d}x{d}, got {corr.shape}")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise ValueError("correlation diagonal must be 1.0")
        if np.linalg.eigvalsh(corr).min() < -_MIN_EIGENVALUE:
            raise ValueError("correlation matrix is not PSD")
        for name, probs in self.categorical_marginals.items():
            if abs(float(np.sum(probs)) - 1.0) > 1e-9:
                raise ValueError(f"column {name!r}: marginal frequencies must sum to 1")
        for name, vals in self.numeric_marginals.items():
            if np.asarray(vals).size == 0:
                raise ValueError(f"column {name!r}: empty marginal table")

    def to_json_dict(self) -> dict:
        return {
            "format": "privlevels-copula",
            "version": 1,
            "schema": [c.to_json_dict() for c in self.schema],
            "numeric_marginals": {k: np.asarray(v).tolist() for k, v in
                                  self.numeric_marginals.items()},
            "categorical_marginals": {k: np.asarray(v).tolist() for k, v in
                                      self.categorical_marginals.items()},
            "correlation": np.asarray(self.correlation).tolist(),
            "shrinkage": self.shrinkage,
            "n_fit": self.n_fit,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CopulaModel":
        if d.get("format") != "privlevels-copula":
            raise ValueError(f"not a copula model file (format={d.get('format')!r})")
        schema = validate_schema([ColumnSpec.from_json_dict(e) for e in d["schema"]])
        return cls(
            schema=schema,
            numeric_marginals={
                k: np.asarray(v, dtype=np.float64) for k, v in d["numeric_marginals"].items()
            },
            categorical_marginals={
                k: np.asarray(v, dtype=np.float64) for k, v in d["categorical_marginals"].items()
            },
            correlation=np.asarray(d["correlation"], dtype=np.float64),
            shrinkage=float(d["shrinkage"]),
            n_fit=int(d["n_fit"]),
        )


def save_copula(model: CopulaModel, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(model.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_copula(path: str | Path) -> CopulaModel:
    with Path(path).open("r", encoding="utf-8") as fh:
        return CopulaModel.from_json_dict(json.load(fh))


def normal_scores(values: np.ndarray) -> np.ndarray:
    """Rank-based normal scores: rank -> standard normal quantile."""
    ranks = rankdata(values, method="average")
    return ndtri(ranks / (values.shape[0] + 1))


def shrink_to_psd(corr: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest lambda in {0, 0.01, 0.02, ...} with eigenvalues of
    lambda*I + (1-lambda)*corr all >= 1e-9."""
    eye = np.eye(corr.shape[0])
    for step in range(0, 101):
        lam = step / 100.0
        candidate = lam * eye + (1.0 - lam) * corr
        if np.linalg.eigvalsh(candidate).min() >= _MIN_EIGENVALUE:
            return candidate, lam
    return eye, 1.0


def fit_copula(dataset: Dataset) -> CopulaModel:
    """Fit marginals and a latent correlation to ``dataset``.

    Parameters
    ----------
    dataset : Dataset
        At least 10 rows; identifier columns are rejected (drop or obscure
        them first — there is no geometry to model in opaque tokens).

    Returns
    -------
    CopulaModel

    Notes
    -----
    Constant columns leave the latent correlation undefined; their
    off-diagonal entries are set to 0 and a warning is emitted.
    """
    if any(c.kind == IDENTIFIER for c in dataset.schema):
        names = [c.name for c in dataset.schema if c.kind == IDENTIFIER]
        raise ValueError(f"identifier columns cannot be modeled: {names}; drop them first")
    if dataset.n_rows < 10:
        raise ValueError(f"need at least 10 rows to fit, have {dataset.n_rows}")
    if dataset.n_columns < 1:
        raise ValueError("need at least one column")

    n = dataset.n_rows
    scores = np.empty((n, dataset.n_columns), dtype=np.float64)
    constant = []
    for j, spec in enumerate(dataset.schema):
        col = dataset.columns[j].astype(np.float64)
        if float(col.max() - col.min()) == 0.0:
            constant.append(j)
            scores[:, j] = 0.0
        else:
            scores[:, j] = normal_scores(col)

    if constant:
        names = [dataset.schema[j].name for j in constant]
        warnings.warn(f"constant columns {names}: latent correlations set to 0")

    corr = np.eye(dataset.n_columns)
    varying = [j for j in range(dataset.n_columns) if j not in constant]
    if len(varying) >= 2:
        sub = np.corrcoef(scores[:, varying], rowvar=False)
        sub = np.atleast_2d(sub)
        for a, ja in enumerate(varying):
            for b, jb in enumerate(varying):
                corr[ja, jb] = sub[a, b]
    np.fill_diagonal(corr, 1.0)
    corr = (corr + corr.T) / 2.0
    corr, shrinkage = shrink_to_psd(corr)

    numeric_marginals = {}
    categorical_marginals = {}
    for spec, col in zip(dataset.schema, dataset.columns):
        if spec.kind == CATEGORICAL:
            counts = np.bincount(col, minlength=len(spec.categories)).astype(np.float64)
            categorical_marginals[spec.name] = counts / counts.sum()
        else:
            numeric_marginals[spec.name] = np.sort(col.astype(np.float64))

    return CopulaModel(
        schema=dataset.schema,
        numeric_marginals=numeric_marginals,
        categorical_marginals=categorical_marginals,
        correlation=corr,
        shrinkage=shrinkage,
        n_fit=n,
    )


def _correlation_factor(corr: np.ndarray) -> np.ndarray:
    """A with A @ A.T == corr, via eigendecomposition (robust to near-singular input)."""
    w, v = np.linalg.eigh(corr)
    return v * np.sqrt(np.clip(w, 0.0, None))


def _invert_numeric(spec: ColumnSpec, table: np.ndarray, u: np.ndarray) -> np.ndarray:
    positions = u * (table.shape[0] - 1)
    vals = np.interp(positions, np.arange(table.shape[0]), table)
    if spec.kind == NUMERIC_INTEGER:
        vals = np.rint(vals).astype(np.int64)
    return vals


def _invert_categorical(spec: ColumnSpec, probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs)
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, len(spec.categories) - 1).astype(np.int64)


def sample_copula(model: CopulaModel, n: int, seed: int) -> Dataset:
    """Draw ``n`` new records from the fitted model, deterministically per seed.

    Each column consumes its own derived substream, so for a fixed seed the
    first n1 rows of an n2-row sample (n1 <= n2) are identical to an n1-row
    sample: nested draws are true subsets.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    d = len(model.schema)
    latent = np.empty((n, d), dtype=np.float64)
    for j, spec in enumerate(model.schema):
        latent[:, j] = generator(seed, f"copula-latent:{spec.name}").standard_normal(n)
    factor = _correlation_factor(model.correlation)
    z = latent @ factor.T
    u = ndtr(z)

    columns = []
    for j, spec in enumerate(model.schema):
        if spec.kind == CATEGORICAL:
            columns.append(
                _invert_categorical(spec, model.categorical_marginals[spec.name], u[:, j])
            )
        else:
            columns.append(_invert_numeric(spec, model.numeric_marginals[spec.name], u[:, j]))

    return Dataset(
        model.schema,
        tuple(columns),
        np.arange(n, dtype=np.int64),
        provenance="level3-copula",
    )
