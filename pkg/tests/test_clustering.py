from pathlib import Path

import numpy as np
import pytest
from processaction.clustering import KMeansModel, load_model, silhouette_analysis
from processaction.exceptions import DimensionMismatch, KTooLarge, SingleCluster
from pytest_mock import MockerFixture
from sklearn.cluster import KMeans
from sklearn.exceptions import NotFittedError


@pytest.fixture
def blobs() -> np.ndarray:
    rng = np.random.default_rng(0)
    centers = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return np.vstack([c + 0.02 * rng.standard_normal((30, 2)) for c in centers])


class TestKMeansModel:
    """Tests for the k-means model over encoded prefixes."""

    def test_fit_assign(self, blobs: np.ndarray) -> None:
        """It should put the points of one blob in the same cluster."""
        model = KMeansModel(k=3, seed=0).fit(blobs)
        labels = model.assign(blobs)
        assert len(set(labels[:30])) == 1
        assert len(set(labels)) == 3
        assert model.assign_one([1.0, 1.0]) == labels[30]

    def test_deterministic(self, blobs: np.ndarray) -> None:
        """It should find the same centroids with the same seed."""
        a = KMeansModel(k=3, seed=5).fit(blobs)
        b = KMeansModel(k=3, seed=5).fit(blobs)
        np.testing.assert_array_equal(a.centroids, b.centroids)

    def test_absolute_tol(self, blobs: np.ndarray, mocker: MockerFixture) -> None:
        """It should hand scikit-learn a tolerance that undoes its variance scaling."""
        spy = mocker.patch("processaction.clustering.KMeans", wraps=KMeans)
        KMeansModel(k=3, seed=0, tol=1e-3).fit(blobs)
        variance = np.mean(np.var(blobs, axis=0))
        assert spy.call_args.kwargs["tol"] == pytest.approx(1e-3 / variance)

    def test_nearest_centroid(self) -> None:
        """It should assign a vector to the nearest centroid, ties to the lowest id."""
        model = KMeansModel(k=2)
        model.centroids = np.array([[0.0, 0.0], [2.0, 0.0]])
        np.testing.assert_array_equal(model.assign([[0.4, 0], [1.6, 0], [1.0, 0]]), [0, 1, 0])

    def test_k_too_large(self) -> None:
        """It should refuse more clusters than distinct vectors."""
        with pytest.raises(KTooLarge):
            KMeansModel(k=3).fit(np.array([[0.0], [0.0], [1.0]]))

    def test_not_fitted(self) -> None:
        """It should raise when used before fitting."""
        with pytest.raises(NotFittedError):
            KMeansModel(k=2).assign([[0.0]])

    def test_dimension_mismatch(self, blobs: np.ndarray) -> None:
        """It should refuse vectors of another dimension."""
        model = KMeansModel(k=3).fit(blobs)
        with pytest.raises(DimensionMismatch):
            model.assign([[0.0, 0.0, 0.0]])

    def test_deduplicate(self) -> None:
        """It should let duplicated vectors pull the centroid unless deduplicating."""
        X = np.array([[0.0]] * 9 + [[1.0], [10.0]])
        weighted = KMeansModel(k=2, seed=0).fit(X)
        distinct = KMeansModel(k=2, seed=0, deduplicate=True).fit(X)
        assert sorted(weighted.centroids[:, 0])[0] == pytest.approx(0.1)
        assert sorted(distinct.centroids[:, 0])[0] == pytest.approx(0.5)

    def test_silhouette(self, blobs: np.ndarray) -> None:
        """It should report a high silhouette for well separated blobs."""
        model = KMeansModel(k=3, seed=0).fit(blobs)
        assert model.silhouette(blobs) > 0.9

    def test_single_cluster(self, blobs: np.ndarray) -> None:
        """It should refuse the silhouette of a single populated cluster."""
        model = KMeansModel(k=2)
        model.centroids = np.array([[0.5, 0.5], [50.0, 50.0]])
        with pytest.raises(SingleCluster):
            model.silhouette(blobs)


class TestModelPersistency:
    """Tests for saving and loading a k-means model."""

    def test_save_load(self, tmp_path: Path, blobs: np.ndarray) -> None:
        """It should restore the centroids and the fingerprint."""
        model = KMeansModel(k=3, seed=0).fit(blobs, alphabet_hash="abc")
        path = str(tmp_path / "kmeans.json")
        model.save_model(path)
        restored = load_model(path)
        np.testing.assert_array_equal(restored.centroids, model.centroids)
        assert restored.alphabet_hash == "abc"
        np.testing.assert_array_equal(restored.assign(blobs), model.assign(blobs))

    def test_no_overwrite(self, tmp_path: Path, blobs: np.ndarray) -> None:
        """It should not overwrite an existing file unless asked to."""
        model = KMeansModel(k=3, seed=0).fit(blobs)
        path = str(tmp_path / "kmeans.json")
        model.save_model(path)
        with pytest.raises(ValueError):
            model.save_model(path, overwrite=False)

    def test_save_unfitted(self, tmp_path: Path) -> None:
        """It should refuse to save a model that was not fitted."""
        with pytest.raises(NotFittedError):
            KMeansModel(k=3).save_model(str(tmp_path / "kmeans.json"))


class TestSilhouetteAnalysis:
    """Tests for comparing candidate numbers of clusters."""

    def test_candidates(self, blobs: np.ndarray) -> None:
        """It should prefer the true number of blobs and skip infeasible k."""
        scores = silhouette_analysis(blobs, [2, 3, 500], seed=0)
        assert list(scores["k"]) == [2, 3, 500]
        assert scores["silhouette"].iloc[1] > scores["silhouette"].iloc[0]
        assert np.isnan(scores["silhouette"].iloc[2])
