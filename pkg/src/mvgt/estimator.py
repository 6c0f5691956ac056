"""scikit-learn style wrappers around the feature pipeline and the classifier."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import numkit as nk
from .eegsig import BANDS, SegmentBatch, extract_features, segment
from .errors import DataError
from .model import MVGT, ModelConfig
from .spatial import ElectrodeLayout, RegionScheme, bundled_layout, load_scheme
from .train import TrainSpec, fit
from .utils import check_labels, check_recordings, check_segments


class DEFeatureExtractor(TransformerMixin, BaseEstimator):
    """Recordings to flattened differential-entropy segments.

    Stateless: ``fit`` only validates. ``transform`` returns the
    ``[segments, channels, T*f]`` array; ``transform_batch`` also keeps labels
    and trial ids.
    """

    def __init__(self, window_seconds=1.0, T=5, stride=1):
        self.window_seconds = window_seconds
        self.T = T
        self.stride = stride

    def fit(self, X, y=None):
        check_recordings(X)
        return self

    def transform_batch(self, X) -> SegmentBatch:
        batches = [segment(extract_features(r, self.window_seconds), self.T, self.stride)
                   for r in check_recordings(X)]
        return SegmentBatch.concatenate(batches)

    def transform(self, X):
        return self.transform_batch(X).segments


class MVGTClassifier(ClassifierMixin, BaseEstimator):
    """Graph transformer classifier on ``[segments, channels, T*f]`` input.

    ``layout`` defaults to the bundled 62-channel montage and ``scheme`` may be
    a built-in scheme name, a path to a scheme file or a ``RegionScheme``.
    Labels may be any sortable values; they are mapped through ``classes_``.
    """

    def __init__(self, layout=None, scheme="frontal", d=64, K=32, L=4, M=2, R=3,
                 ffn_multiplier=4, dropout_p=0.1, T=5, use_centrality=True, use_bre=True,
                 use_gse=True, use_inverted=True, graph_norm_mode="standard", lr=1e-3,
                 epochs=30, batch_size=32, weight_decay=0.1, random_state=0):
        self.layout = layout
        self.scheme = scheme
        self.d = d
        self.K = K
        self.L = L
        self.M = M
        self.R = R
        self.ffn_multiplier = ffn_multiplier
        self.dropout_p = dropout_p
        self.T = T
        self.use_centrality = use_centrality
        self.use_bre = use_bre
        self.use_gse = use_gse
        self.use_inverted = use_inverted
        self.graph_norm_mode = graph_norm_mode
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.weight_decay = weight_decay
        self.random_state = random_state

    def _resolve_layout(self) -> ElectrodeLayout:
        return bundled_layout() if self.layout is None else self.layout

    def _resolve_scheme(self) -> RegionScheme:
        return self.scheme if isinstance(self.scheme, RegionScheme) else load_scheme(self.scheme)

    def fit(self, X, y):
        layout = self._resolve_layout()
        X = check_segments(X, len(layout), self.T * len(BANDS))
        y = check_labels(y, len(X))
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise DataError("need at least two classes to fit")
        config = ModelConfig(
            d=self.d, K=self.K, L=self.L, M=self.M, R=self.R, ffn_multiplier=self.ffn_multiplier,
            dropout_p=self.dropout_p, n_classes=len(self.classes_), T=self.T,
            use_centrality=self.use_centrality, use_bre=self.use_bre, use_gse=self.use_gse,
            use_inverted=self.use_inverted, graph_norm_mode=self.graph_norm_mode,
        )
        spec = TrainSpec(batch_size=self.batch_size, lr=self.lr, epochs=self.epochs,
                         seed=self.random_state, weight_decay=self.weight_decay)
        self.model_ = MVGT(config, layout, self._resolve_scheme(), seed=self.random_state)
        self.loss_curve_, _ = fit(self.model_, X, y_idx, spec)
        return self

    def _checked(self, X):
        check_is_fitted(self, "model_")
        return check_segments(X, self.model_.n_nodes, self.T * len(BANDS))

    def decision_function(self, X):
        X = self._checked(X)
        return self.model_.predict_logits(X)

    def predict_proba(self, X):
        logits = self.decision_function(X)
        return nk.softmax(nk.Tensor(logits), axis=-1).data

    def predict(self, X):
        scores = self.decision_function(X)
        # argmax keeps the lowest index on ties
        return self.classes_[np.argmax(scores, axis=1)]

    def attention_maps(self, X) -> np.ndarray:
        """Post-softmax weights ``[R, L, segments, M, tokens, tokens]`` in eval mode."""
        X = self._checked(X)
        model = self.model_
        was_training = model.training
        model.eval()
        try:
            with nk.no_grad():
                return model.forward(X, return_attention=True).attention
        finally:
            model.train(was_training)
