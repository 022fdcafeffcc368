"""K-means abstraction of encoded prefixes into cluster ids."""

import json
import logging
import os
from collections.abc import Iterable
from typing import Optional

import numpy as np
import numpy.typing as npt
import pandas as pd
from sklearn.cluster import KMeans
from sklearn.exceptions import NotFittedError
from sklearn.metrics import silhouette_score

from processaction import config as pacfg
from processaction.exceptions import DimensionMismatch, KTooLarge, SingleCluster

logger = logging.getLogger(__name__)

_CHUNK = 2048  # rows per block in the nearest-centroid search


def _relative_tol(tol: float, data: npt.NDArray[np.float64]) -> float:
    variance = float(np.mean(np.var(data, axis=0)))
    return tol / variance if variance > 0 else tol


class KMeansModel:
    """A k-means model over encoded prefixes.

    The centroids are fit with Lloyd's algorithm and k-means++ seeding (see
    :class:`sklearn.cluster.KMeans`). New vectors are assigned to the nearest
    centroid under the Euclidean distance; ties go to the lowest index.

    Parameters
    ----------
    k : int
        The number of clusters.
    seed : int
        Seed of the k-means++ initialization.
    max_iter : int
        Maximum number of Lloyd iterations.
    tol : float
        Convergence threshold on the summed squared shift of the centroids
        between two iterations. scikit-learn scales its `tol` by the mean
        variance of the features; the threshold passed to it is divided by
        that variance so that `tol` stays absolute.
    deduplicate : bool
        Whether to fit on the distinct vectors only. By default duplicated
        prefixes weigh on the centroids.

    Attributes
    ----------
    centroids : np.ndarray, shape(k, dim)
        The cluster centers. None until fitted.
    inertia : float
        Sum of squared distances of the training vectors to their centroid.
    n_iter : int
        Number of Lloyd iterations run.
    alphabet_hash : str, optional
        Fingerprint of the encoding the model was fit on.
    """

    def __init__(
        self,
        k: int = pacfg.n_clusters,
        seed: int = 0,
        max_iter: int = pacfg.kmeans_max_iter,
        tol: float = pacfg.kmeans_tol,
        deduplicate: bool = False,
    ) -> None:
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        self.k = k
        self.seed = seed
        self.max_iter = max_iter
        self.tol = tol
        self.deduplicate = deduplicate
        self.centroids: Optional[npt.NDArray[np.float64]] = None
        self.inertia: float = 0.0
        self.n_iter: int = 0
        self.alphabet_hash: Optional[str] = None

    @property
    def dim(self) -> int:
        """The dimension of the vectors."""
        if self.centroids is None:
            raise NotFittedError()
        return int(self.centroids.shape[1])

    def fit(
        self, vectors: npt.ArrayLike, alphabet_hash: Optional[str] = None
    ) -> "KMeansModel":
        """Fit the centroids.

        Parameters
        ----------
        vectors : array-like, shape(n, dim)
            The encoded training prefixes.
        alphabet_hash : str, optional
            Fingerprint of the encoding, stored with the model.

        Raises
        ------
        ValueError
            If no vectors are given.
        KTooLarge
            If there are fewer distinct vectors than clusters.

        Returns
        -------
        self
            Fitted k-means model.
        """
        X = np.asarray(vectors, dtype=np.float64)
        if X.ndim != 2 or len(X) == 0:
            raise ValueError("Expected a non-empty 2D array of vectors")
        distinct = np.unique(X, axis=0)
        if len(distinct) < self.k:
            raise KTooLarge(f"k={self.k} exceeds the {len(distinct)} distinct vectors")
        data = distinct if self.deduplicate else X
        km = KMeans(
            n_clusters=self.k,
            init="k-means++",
            n_init=1,
            max_iter=self.max_iter,
            tol=_relative_tol(self.tol, data),
            random_state=self.seed,
            algorithm="lloyd",
        ).fit(data)
        self.centroids = km.cluster_centers_.astype(np.float64)
        self.inertia = float(km.inertia_)
        self.n_iter = int(km.n_iter_)
        self.alphabet_hash = alphabet_hash
        logger.info(
            "Fit %d clusters on %d vectors in %d iterations (inertia %.4f)",
            self.k,
            len(data),
            self.n_iter,
            self.inertia,
        )
        return self

    def assign(self, vectors: npt.ArrayLike) -> npt.NDArray[np.int64]:
        """Assign vectors to their nearest centroid.

        Parameters
        ----------
        vectors : array-like, shape(n, dim)
            The encoded prefixes.

        Raises
        ------
        NotFittedError
            If the model has not been fitted yet.
        DimensionMismatch
            If the vectors do not have the dimension of the centroids.

        Returns
        -------
        np.ndarray, shape(n,)
            The cluster id of each vector.
        """
        if self.centroids is None:
            raise NotFittedError()
        X = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        if X.shape[1] != self.centroids.shape[1]:
            raise DimensionMismatch(
                f"Vectors of dimension {X.shape[1]}, "
                f"centroids of dimension {self.centroids.shape[1]}"
            )
        labels = np.empty(len(X), dtype=np.int64)
        for start in range(0, len(X), _CHUNK):
            block = X[start : start + _CHUNK]
            d2 = ((block[:, None, :] - self.centroids[None, :, :]) ** 2).sum(axis=2)
            labels[start : start + _CHUNK] = np.argmin(d2, axis=1)
        return labels

    def assign_one(self, vector: npt.ArrayLike) -> int:
        """Assign a single vector to its nearest centroid.

        Parameters
        ----------
        vector : array-like, shape(dim,)
            The encoded prefix.

        Returns
        -------
        int
            The cluster id.
        """
        return int(self.assign(np.asarray(vector, dtype=np.float64)[None, :])[0])

    def silhouette(self, vectors: npt.ArrayLike, sample_cap: int = 10000) -> float:
        """Compute the mean silhouette coefficient of the clustering.

        Parameters
        ----------
        vectors : array-like, shape(n, dim)
            The encoded prefixes.
        sample_cap : int
            Maximum number of vectors used. Larger sets are subsampled with
            the seed of the model.

        Raises
        ------
        SingleCluster
            If fewer than two clusters are populated.

        Returns
        -------
        float
            The silhouette, in [-1, 1].
        """
        X = np.asarray(vectors, dtype=np.float64)
        labels = self.assign(X)
        if len(np.unique(labels)) < 2:
            raise SingleCluster("The silhouette needs at least two populated clusters")
        sample_size = sample_cap if len(X) > sample_cap else None
        return float(silhouette_score(X, labels, sample_size=sample_size, random_state=self.seed))

    def save_model(self, filepath: str, overwrite: bool = True) -> None:
        """Save the centroids in JSON format.

        Parameters
        ----------
        filepath : str
            Path to the file to save the model to.
        overwrite : bool
            Whether to silently overwrite any existing file at the target
            location.

        Raises
        ------
        NotFittedError
            If the model has not been fitted yet.
        ValueError
            If the specified output file already exists and "overwrite" is set
            to False.
        """
        if self.centroids is None:
            raise NotFittedError()
        if not overwrite and os.path.isfile(filepath):
            raise ValueError(
                'save_model got overwrite="False", but a file '
                f"({filepath}) exists already. No data was saved."
            )
        with open(filepath, "w") as f:
            json.dump(self.to_dict(), f, sort_keys=True)

    def to_dict(self) -> dict[str, object]:
        """Convert the fitted model to a JSON-serializable dict."""
        if self.centroids is None:
            raise NotFittedError()
        return {
            "k": self.k,
            "seed": self.seed,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "deduplicate": self.deduplicate,
            "inertia": self.inertia,
            "n_iter": self.n_iter,
            "alphabet_hash": self.alphabet_hash,
            "centroids": self.centroids.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, object]) -> "KMeansModel":
        """Create a fitted model from a dict produced by :meth:`to_dict`."""
        model = cls(
            k=int(d["k"]),  # type: ignore[call-overload]
            seed=int(d["seed"]),  # type: ignore[call-overload]
            max_iter=int(d["max_iter"]),  # type: ignore[call-overload]
            tol=float(d["tol"]),  # type: ignore[arg-type]
            deduplicate=bool(d["deduplicate"]),
        )
        model.centroids = np.asarray(d["centroids"], dtype=np.float64)
        model.inertia = float(d["inertia"])  # type: ignore[arg-type]
        model.n_iter = int(d["n_iter"])  # type: ignore[call-overload]
        model.alphabet_hash = d["alphabet_hash"]  # type: ignore[assignment]
        return model


def load_model(path: str) -> KMeansModel:
    """Load a k-means model saved with :meth:`KMeansModel.save_model`.

    Parameters
    ----------
    path : str
        Path of the JSON file.

    Returns
    -------
    KMeansModel
        The fitted model.
    """
    with open(path) as f:
        return KMeansModel.from_dict(json.load(f))


def silhouette(vectors: npt.ArrayLike, model: KMeansModel, sample_cap: int = 10000) -> float:
    """Compute the mean silhouette coefficient of a clustering.

    See :meth:`KMeansModel.silhouette`.

    Parameters
    ----------
    vectors : array-like, shape(n, dim)
        The encoded prefixes.
    model : KMeansModel
        The fitted model.
    sample_cap : int
        Maximum number of vectors used.

    Returns
    -------
    float
        The silhouette, in [-1, 1].
    """
    return model.silhouette(vectors, sample_cap)


def silhouette_analysis(
    vectors: npt.ArrayLike, ks: Iterable[int], seed: int = 0, sample_cap: int = 10000
) -> pd.DataFrame:
    """Fit one model per candidate k and report its silhouette.

    Parameters
    ----------
    vectors : array-like, shape(n, dim)
        The encoded prefixes.
    ks : iterable(int)
        The candidate numbers of clusters.
    seed : int
        Seed used for fitting and for subsampling.
    sample_cap : int
        Maximum number of vectors used to compute each silhouette.

    Returns
    -------
    pd.DataFrame
        One row per k with the silhouette and the inertia. Candidates that
        cannot be fit have a NaN silhouette.
    """
    rows = []
    for k in ks:
        try:
            model = KMeansModel(k=k, seed=seed).fit(vectors)
            score = model.silhouette(vectors, sample_cap)
            rows.append({"k": k, "silhouette": score, "inertia": model.inertia})
        except (KTooLarge, SingleCluster) as e:
            logger.warning("Skipping k=%d: %s", k, e)
            rows.append({"k": k, "silhouette": np.nan, "inertia": np.nan})
    return pd.DataFrame(rows, columns=["k", "silhouette", "inertia"])
