import json
import struct

import numpy as np
import pytest

from _toy import toy_config, toy_layout, toy_model, toy_scheme
from mvgt import numkit as nk
from mvgt.errors import ConfigError, DimensionError, FormatError, NumericError
from mvgt.model import (
    MVGT,
    BiasedMultiHeadAttention,
    GraphNorm,
    ModelConfig,
    PreLNBlock,
    biased_mha,
    decode_checkpoint,
    encode_checkpoint,
    graph_norm,
    load_checkpoint,
    pre_ln_block,
    save_checkpoint,
    tokenize,
)
from mvgt.spatial import bundled_layout, load_scheme
from mvgt.train import cross_entropy


def _inputs(model, batch=3, seed=0):
    cfg = model.config
    return np.random.default_rng(seed).normal(size=(batch, model.n_nodes, cfg.T * cfg.f))


class TestConfig:
    def test_defaults(self):
        cfg = ModelConfig()
        assert (cfg.d, cfg.K, cfg.L, cfg.M, cfg.R) == (64, 32, 4, 2, 3)
        assert cfg.use_centrality and cfg.use_bre and cfg.use_gse and cfg.use_inverted

    def test_heads_must_divide_width(self):
        with pytest.raises(ConfigError, match="divisible"):
            ModelConfig(d=10, M=3)

    def test_spatial_in_pointwise_mode(self):
        with pytest.raises(ConfigError):
            ModelConfig(use_inverted=False)
        ModelConfig(use_inverted=False, use_centrality=False, use_bre=False, use_gse=False)

    def test_round_trip(self):
        cfg = ModelConfig(d=16, R=1, use_gse=False)
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            ModelConfig.from_dict({"width": 3})


class TestGraphNorm:
    def test_constant_column_maps_to_zero(self):
        X = np.random.default_rng(0).normal(size=(2, 5, 3))
        X[:, :, 1] = 7.0
        out = graph_norm(X, GraphNorm(3)).data
        assert np.all(out[:, :, 1] == 0.0)

    def test_moments(self):
        # a spread of 10 keeps the eps bias in the variance below 1e-6
        X = np.random.default_rng(1).normal(size=(4, 62, 25)) * 10 + 3
        out = graph_norm(X, GraphNorm(25)).data
        np.testing.assert_allclose(out.mean(axis=1), 0.0, atol=1e-9)
        np.testing.assert_allclose(out.var(axis=1), 1.0, atol=1e-6)

    def test_per_sample_statistics(self):
        X = np.random.default_rng(2).normal(size=(2, 5, 3))
        gn = GraphNorm(3)
        both = graph_norm(X, gn).data
        np.testing.assert_array_equal(both[1], graph_norm(X[1:], gn).data[0])

    @pytest.mark.parametrize("seed", range(3))
    def test_gradients(self, seed):
        rng = np.random.default_rng(seed)
        gn = GraphNorm(4)
        for p in (gn.alpha, gn.gamma, gn.beta):
            p.data = p.data + 0.3 * rng.normal(size=4)
        X = nk.Tensor(rng.normal(size=(2, 5, 4)), requires_grad=True)
        w = nk.Tensor(rng.normal(size=(2, 5, 4)))
        params = {"X": X, **gn.parameters()}
        errs = nk.check_gradients(lambda: (graph_norm(X, gn) * w).sum(), params)
        assert max(errs.values()) < 1e-5

    def test_minmax_mode(self):
        X = np.random.default_rng(3).normal(size=(2, 6, 4))
        out = graph_norm(X, GraphNorm(4, mode="minmax")).data
        assert out.min() >= 0.0 and out.max() <= 1.0
        np.testing.assert_allclose(out.min(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.max(axis=1), 1.0, atol=1e-4)


class TestTokenize:
    def test_inverted_shape(self):
        X = np.zeros((1, 62, 25))
        assert tokenize(X, ModelConfig()).shape == (1, 62, 25)

    def test_pointwise_shape(self):
        cfg = ModelConfig(use_inverted=False, use_centrality=False, use_bre=False, use_gse=False)
        assert tokenize(np.zeros((1, 62, 25)), cfg).shape == (1, 5, 310)

    def test_pointwise_layout(self):
        cfg = ModelConfig(use_inverted=False, use_centrality=False, use_bre=False, use_gse=False)
        X = np.random.default_rng(0).normal(size=(2, 4, 25))
        tok = tokenize(X, cfg)
        for b in range(2):
            for t in range(5):
                for c in range(4):
                    np.testing.assert_array_equal(tok[b, t, c * 5:(c + 1) * 5], X[b, c, t * 5:(t + 1) * 5])

    def test_single_step_same_information(self):
        inv = ModelConfig(T=1)
        pw = ModelConfig(T=1, use_inverted=False, use_centrality=False, use_bre=False, use_gse=False)
        X = np.random.default_rng(1).normal(size=(3, 62, 5))
        np.testing.assert_array_equal(tokenize(X, pw).reshape(3, -1), tokenize(X, inv).reshape(3, -1))

    def test_wrong_width(self):
        with pytest.raises(DimensionError):
            tokenize(np.zeros((1, 62, 24)), ModelConfig())


class TestEncodeNodes:
    def test_flags_off_is_projection_only(self):
        m = toy_model(use_centrality=False, use_bre=False)
        tokens = nk.Tensor(_inputs(m))
        H, _ = m.encode(tokens)
        expected = nk.matmul(graph_norm(tokens, m.graph_norm), m.W_X).data
        np.testing.assert_array_equal(H.data, expected)

    def test_zero_input_gives_encodings(self):
        m = toy_model()
        m.graph_norm.beta.data[:] = 0.0
        H, _ = m.encode(nk.Tensor(np.zeros((1, 6, 10))))
        B = m.structure_encoding().data
        c = B.sum(axis=1) / 6 @ m.W_E.data
        r = m.region_table.data[np.arange(6) % 2]
        np.testing.assert_allclose(H.data[0], c + r, rtol=0, atol=1e-12)

    def test_brute_force_sum(self):
        m = toy_model()
        X = _inputs(m, batch=2)
        H, _ = m.encode(nk.Tensor(X))
        xw = graph_norm(X, m.graph_norm).data @ m.W_X.data
        B = m.structure_encoding().data
        c = np.zeros((6, 8))
        for i in range(6):
            for k in range(4):
                c[i] += B[i, :, k].sum() / 6 * m.W_E.data[k]
        r = np.stack([m.region_table.data[i % 2] for i in range(6)])
        np.testing.assert_allclose(H.data, xw + c + r, rtol=0, atol=1e-12)


class TestAblationIdentity:
    """Switching a component off must equal zeroing its contribution."""

    @pytest.mark.parametrize("flag,zero", [
        ("use_centrality", ["W_E"]),
        ("use_bre", ["region_table"]),
        ("use_gse", ["bias_proj.W2", "bias_proj.b2"]),
    ])
    def test_flag_equals_zeroed_term(self, flag, zero):
        on = toy_model()
        off = toy_model(**{flag: False})
        for name in zero:
            on.parameters()[name].data[:] = 0.0
        X = _inputs(on)
        np.testing.assert_array_equal(on.predict_logits(X), off.predict_logits(X))


class TestAttention:
    def _attn(self, seed=0, d=8, M=2):
        return BiasedMultiHeadAttention(d, M, np.random.default_rng(seed))

    def test_zero_bias_equals_unbiased(self):
        attn = self._attn()
        H = nk.Tensor(np.random.default_rng(1).normal(size=(2, 5, 8)))
        a, wa = biased_mha(H, None, attn)
        b, wb = biased_mha(H, nk.Tensor(np.zeros((2, 5, 5))), attn)
        np.testing.assert_array_equal(a.data, b.data)
        np.testing.assert_array_equal(wa, wb)

    def test_saturating_bias_concentrates(self):
        attn = self._attn()
        H = nk.Tensor(np.random.default_rng(2).normal(size=(5, 8)))
        bias = np.full((2, 5, 5), -1e9)
        bias[:, :, 3] = 0.0
        _, w = biased_mha(H, nk.Tensor(bias), attn)
        assert np.all(w[:, :, 3] > 0.999)

    def test_rows_sum_to_one(self):
        attn = self._attn(seed=3)
        rng = np.random.default_rng(3)
        _, w = biased_mha(nk.Tensor(rng.normal(size=(4, 7, 8))), nk.Tensor(rng.normal(size=(2, 7, 7)) * 5), attn)
        np.testing.assert_allclose(w.sum(-1), 1.0, atol=1e-9)

    def test_nan_logits_name_layer_and_head(self):
        attn = BiasedMultiHeadAttention(8, 2, np.random.default_rng(0), layer=3)
        bias = np.zeros((2, 4, 4))
        bias[1, 0, 0] = np.nan
        with pytest.raises(NumericError, match=r"layer 3.*\[1\]"):
            biased_mha(nk.Tensor(np.ones((4, 8))), nk.Tensor(bias), attn)

    def test_gradients(self):
        rng = np.random.default_rng(4)
        attn = self._attn(seed=4)
        H = nk.Tensor(rng.normal(size=(2, 4, 8)), requires_grad=True)
        bias = nk.Tensor(rng.normal(size=(2, 4, 4)), requires_grad=True)
        w = nk.Tensor(rng.normal(size=(2, 4, 8)))
        params = {"H": H, "bias": bias, **attn.parameters()}
        errs = nk.check_gradients(lambda: (biased_mha(H, bias, attn)[0] * w).sum(), params)
        assert max(errs.values()) < 1e-5


class TestPreLNBlock:
    def _block(self, seed=0, p=0.0):
        return PreLNBlock(8, 2, 4, p, np.random.default_rng(seed))

    def test_zeroed_outputs_make_identity(self):
        block = self._block()
        block.attn.W_O.data[:] = 0.0
        block.ffn_W2.data[:] = 0.0
        H = nk.Tensor(np.random.default_rng(1).normal(size=(2, 4, 8)))
        out, _ = pre_ln_block(H, None, block)
        np.testing.assert_array_equal(out.data, H.data)

    def test_eval_mode_deterministic(self):
        block = self._block(p=0.5)
        block.eval()
        H = nk.Tensor(np.random.default_rng(2).normal(size=(2, 4, 8)))
        rng = np.random.default_rng(0)
        a, _ = pre_ln_block(H, None, block, rng)
        b, _ = pre_ln_block(H, None, block, rng)
        np.testing.assert_array_equal(a.data, b.data)

    def test_dropout_active_in_training(self):
        block = self._block(p=0.5)
        H = nk.Tensor(np.random.default_rng(2).normal(size=(2, 4, 8)))
        rng = np.random.default_rng(0)
        a, _ = pre_ln_block(H, None, block, rng)
        b, _ = pre_ln_block(H, None, block, rng)
        assert not np.array_equal(a.data, b.data)

    def test_gradients(self):
        rng = np.random.default_rng(5)
        block = self._block(seed=5)
        for p in block.parameters().values():
            p.data = p.data + 0.2 * rng.normal(size=p.shape)
        H = nk.Tensor(rng.normal(size=(4, 8)), requires_grad=True)
        bias = nk.Tensor(rng.normal(size=(2, 4, 4)))
        w = nk.Tensor(rng.normal(size=(4, 8)))
        params = {"H": H, **block.parameters()}
        errs = nk.check_gradients(lambda: (pre_ln_block(H, bias, block)[0] * w).sum(), params)
        assert max(errs.values()) < 1e-4


class TestForward:
    @pytest.mark.parametrize("n,batch", [(3, 1), (6, 4), (9, 2)])
    def test_output_shape(self, n, batch):
        m = MVGT(toy_config(), toy_layout(n), toy_scheme(n), seed=0)
        res = m(np.zeros((batch, n, 10)), return_attention=True)
        assert res.logits.shape == (batch, 3)
        assert res.hidden.shape == (batch, n, 8)
        assert res.attention.shape == (2, 2, batch, 2, n, n)

    def test_single_pass_equals_plain_stack(self):
        m = toy_model(R=1)
        X = _inputs(m)
        H, bias = m.encode(nk.Tensor(X))
        for block in m.blocks:
            H, _ = pre_ln_block(H, bias, block)
        pooled = nk.mean_axis(nk.layer_norm(H, m.final_gain, m.final_bias), 1)
        expected = nk.matmul(pooled, m.head_W) + m.head_b
        np.testing.assert_array_equal(m(X).logits.data, expected.data)

    def test_recycling_feeds_hidden_state_back(self):
        m = toy_model(R=3)
        X = _inputs(m)
        H, bias = m.encode(nk.Tensor(X))
        for _ in range(3):
            for block in m.blocks:
                H, _ = pre_ln_block(H, bias, block)
        np.testing.assert_array_equal(m(X).hidden.data, H.data)

    def test_attention_rows_normalised_every_pass(self):
        m = toy_model(R=3)
        att = m(_inputs(m), return_attention=True).attention
        np.testing.assert_allclose(att.sum(-1), 1.0, atol=1e-9)

    def test_layout_mismatch(self):
        m = toy_model()
        with pytest.raises(DimensionError):
            m(np.zeros((1, 5, 10)))

    def test_deterministic_logits(self):
        X = _inputs(toy_model())
        a = toy_model().predict_logits(X)
        b = toy_model().predict_logits(X)
        assert a.tobytes() == b.tobytes()

    def test_predict_logits_batches_agree(self):
        m = toy_model()
        X = _inputs(m, batch=7)
        before = len(nk.get_tape())
        np.testing.assert_allclose(m.predict_logits(X, batch_size=3), m.predict_logits(X), atol=1e-12)
        assert len(nk.get_tape()) == before

    def test_pointwise_mode_runs(self):
        m = toy_model(use_inverted=False, use_centrality=False, use_bre=False, use_gse=False)
        res = m(_inputs(m), return_attention=True)
        assert res.logits.shape == (3, 3)
        assert res.attention.shape[-2:] == (2, 2)

    def test_minmax_mode_runs(self):
        m = toy_model(graph_norm_mode="minmax")
        assert np.all(np.isfinite(m.predict_logits(_inputs(m))))


def _end_to_end_errors(model, X, y):
    return nk.check_gradients(lambda: cross_entropy(model(X).logits, y), model.parameters())


class TestEndToEndGradients:
    def test_toy_model_r2(self):
        m = toy_model()
        errs = _end_to_end_errors(m, _inputs(m), np.array([0, 1, 2]))
        assert len(errs) == len(m.parameters())
        worst = max(errs, key=errs.get)
        assert errs[worst] < 1e-4, worst

    @pytest.mark.slow
    def test_toy_model_r3_through_all_passes(self):
        m = toy_model(R=3, L=1)
        errs = _end_to_end_errors(m, _inputs(m, batch=2), np.array([0, 2]))
        assert max(errs.values()) < 1e-4

    def test_detached_recycling_cuts_earlier_passes(self):
        X, y = _inputs(toy_model(), batch=2), np.array([1, 2])
        grads = []
        for detach in (False, True):
            m = toy_model(recycle_detach=detach)
            cross_entropy(m(X).logits, y).backward()
            grads.append((m.W_X.grad, m.blocks[0].ffn_W1.grad.copy()))
        assert grads[0][0] is not None and grads[1][0] is None
        assert not np.allclose(grads[0][1], grads[1][1])


class TestCheckpoint:
    def test_round_trip_bit_identical(self, tmp_path):
        m = toy_model()
        X = _inputs(m)
        save_checkpoint(m, tmp_path / "m.mvgt", extra={"T": 2})
        back, extra = load_checkpoint(tmp_path / "m.mvgt")
        assert extra == {"T": 2}
        assert back.predict_logits(X).tobytes() == m.predict_logits(X).tobytes()
        assert encode_checkpoint(back, extra) == (tmp_path / "m.mvgt").read_bytes()

    def test_full_size_round_trip(self):
        m = MVGT(ModelConfig(), bundled_layout(), load_scheme("frontal"), seed=3)
        X = np.random.default_rng(0).normal(size=(2, 62, 25))
        back, _ = decode_checkpoint(encode_checkpoint(m))
        assert back.predict_logits(X).tobytes() == m.predict_logits(X).tobytes()

    def test_header_layout(self):
        m = toy_model()
        buf = encode_checkpoint(m)
        assert buf[:4] == b"MVGT"
        (hlen,) = struct.unpack("<I", buf[4:8])
        header = json.loads(buf[8:8 + hlen])
        assert header["config"] == m.config.to_dict()
        total = 0
        for entry in header["tensors"]:
            assert entry["offset"] == total
            arr = m.parameters()[entry["name"]].data
            assert entry["shape"] == list(arr.shape)
            blob = buf[8 + hlen + entry["offset"]:8 + hlen + entry["offset"] + arr.nbytes]
            assert blob == arr.astype("<f8").tobytes()
            total += arr.nbytes
        assert len(buf) == 8 + hlen + total

    def test_bad_magic(self):
        buf = b"XXXX" + encode_checkpoint(toy_model())[4:]
        with pytest.raises(FormatError):
            decode_checkpoint(buf)

    def test_truncated(self):
        with pytest.raises(FormatError):
            decode_checkpoint(encode_checkpoint(toy_model())[:-8])
