import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from _toy import toy_layout, toy_scheme
from mvgt.eegsig import EEGRecording
from mvgt.errors import DataError, DimensionError
from mvgt.estimator import DEFeatureExtractor, MVGTClassifier
from mvgt.utils import check_labels, check_segments

TINY = dict(d=8, K=4, L=1, M=2, R=2, T=2, epochs=3, dropout_p=0.0)


def _clf(**kw):
    return MVGTClassifier(layout=toy_layout(), scheme=toy_scheme(), **{**TINY, **kw})


def _data(n=24, seed=0):
    rng = np.random.default_rng(seed)
    y = np.array(["calm", "happy", "sad"])[np.arange(n) % 3]
    X = rng.normal(size=(n, 6, 10))
    X[:, 0] += 3.0 * (y == "happy")[:, None]
    X[:, 3] += 3.0 * (y == "sad")[:, None]
    return X, y


class TestParams:
    def test_get_set_params_and_clone(self):
        clf = _clf(lr=5e-4)
        params = clf.get_params()
        assert params["lr"] == 5e-4 and params["R"] == 2
        clf.set_params(R=1)
        assert clone(clf).get_params()["R"] == 1

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            _clf().predict(np.zeros((1, 6, 10)))


@pytest.fixture(scope="module")
def fitted():
    X, y = _data()
    return _clf().fit(X, y), X, y


class TestFitPredict:
    def test_classes_and_predictions(self, fitted):
        clf, X, y = fitted
        assert clf.classes_.tolist() == ["calm", "happy", "sad"]
        assert set(clf.predict(X)) <= set(clf.classes_)
        assert len(clf.loss_curve_) == 3

    def test_proba(self, fitted):
        clf, X, _ = fitted
        p = clf.predict_proba(X)
        np.testing.assert_allclose(p.sum(1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(clf.classes_[p.argmax(1)], clf.predict(X))

    def test_score_is_accuracy(self, fitted):
        clf, X, y = fitted
        assert clf.score(X, y) == np.mean(clf.predict(X) == y)

    def test_attention_maps(self, fitted):
        clf, X, _ = fitted
        att = clf.attention_maps(X[:4])
        assert att.shape == (2, 1, 4, 2, 6, 6)
        np.testing.assert_allclose(att.sum(-1), 1.0, atol=1e-9)

    def test_deterministic(self):
        X, y = _data()
        a = _clf().fit(X, y).decision_function(X)
        b = _clf().fit(X, y).decision_function(X)
        assert a.tobytes() == b.tobytes()

    def test_wrong_channel_count(self, fitted):
        clf, _, _ = fitted
        with pytest.raises(DimensionError):
            clf.predict(np.zeros((2, 5, 10)))

    def test_single_class(self):
        X, _ = _data(6)
        with pytest.raises(DataError):
            _clf().fit(X, np.zeros(6))


class TestValidation:
    def test_nan_rejected(self):
        X = np.zeros((2, 3, 4))
        X[0, 1, 2] = np.nan
        with pytest.raises(DataError):
            check_segments(X)

    def test_rank(self):
        with pytest.raises(DimensionError):
            check_segments(np.zeros((2, 3)))

    def test_label_count(self):
        with pytest.raises(DataError):
            check_labels([0, 1], 3)


class TestFeatureExtractor:
    def test_transform_shapes(self):
        rng = np.random.default_rng(0)
        recs = [EEGRecording([f"c{i}" for i in range(3)], 200.0, rng.normal(size=(3, 1600)),
                             label=k % 2, trial=k) for k in range(2)]
        ext = DEFeatureExtractor(T=5).fit(recs)
        X = ext.transform(recs)
        assert X.shape == (8, 3, 25)
        batch = ext.transform_batch(recs)
        assert batch.labels.tolist() == [0] * 4 + [1] * 4
        assert batch.trial_ids.tolist() == [0] * 4 + [1] * 4

    def test_rejects_non_recordings(self):
        with pytest.raises(DataError):
            DEFeatureExtractor().fit([np.zeros((3, 100))])
