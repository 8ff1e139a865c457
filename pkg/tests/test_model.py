import numpy as np
import pytest

from pairsim import model as md
from pairsim import numcore as nc
from pairsim import objectives as obj
from pairsim.errors import ConfigError
from pairsim.evaldata import SentencePairExample

from toys import toy_lexicon


@pytest.fixture(scope="module")
def lex():
    return toy_lexicon(seed=7, dims=(5, 3))


def sts_spec(**over):
    base = dict(task="sts", encoder="maxlstm", comparison="multi",
                total_dim=8, H=6, l=4, L=3, d_neu=2, C=5, dropout_p=0.0,
                score=obj.ScoreSpec(5, 0, 5))
    base.update(over)
    return md.ModelSpec(**base)


def test_spec_validation():
    with pytest.raises(ConfigError):
        sts_spec(encoder="word_avg")  # no word features for multi comparison
    with pytest.raises(ConfigError):
        sts_spec(score=None)
    sts_spec(encoder="word_avg", comparison="sent")  # fine


def test_named_parameters_order_and_shapes(lex):
    params = md.build_model(sts_spec(), seed=1)
    names = [n for n, _ in md.named_parameters(params)]
    assert names == [
        "encoder.R", "encoder.b_r",
        "encoder.lstm.W_i", "encoder.lstm.W_f", "encoder.lstm.W_o",
        "encoder.lstm.W_u", "encoder.lstm.U_i", "encoder.lstm.U_f",
        "encoder.lstm.U_o", "encoder.lstm.U_u", "encoder.lstm.b_i",
        "encoder.lstm.b_f", "encoder.lstm.b_o", "encoder.lstm.b_u",
        "comparison.W_word", "comparison.b_word", "comparison.W_neu",
        "comparison.b_neu", "comparison.W_sent", "comparison.b_sent",
        "comparison.W_ws", "comparison.b_ws", "comparison.W_ws2",
        "comparison.b_ws2", "head.W_l1", "head.b_l1", "head.W_l2", "head.b_l2",
    ]
    arrays = md.leaf_arrays(params)
    assert arrays["comparison.W_word"].shape == (50, 9)        # L*L = 9
    assert arrays["comparison.W_neu"].shape == (2, 20)         # 2 * (H + l)
    assert arrays["comparison.W_sent"].shape == (5, 23)        # 1 + 2*10 + 2
    assert arrays["comparison.W_ws"].shape == (5, 16)          # (H + l) + H
    assert arrays["comparison.W_ws2"].shape == (100, 30)       # 2 * L * 5
    assert arrays["head.W_l1"].shape == (250, 155)
    assert arrays["head.W_l2"].shape == (5, 250)
    assert arrays["encoder.lstm.W_i"].shape == (4, 6)


def test_forget_gate_bias_is_one(lex):
    params = md.build_model(sts_spec(), seed=1)
    np.testing.assert_array_equal(params.encoder.lstm.b_f, np.ones(4))
    np.testing.assert_array_equal(params.encoder.lstm.b_i, np.zeros(4))


def test_build_model_deterministic(lex):
    a = md.leaf_arrays(md.build_model(sts_spec(), seed=5))
    b = md.leaf_arrays(md.build_model(sts_spec(), seed=5))
    c = md.leaf_arrays(md.build_model(sts_spec(), seed=6))
    for k in a:
        np.testing.assert_array_equal(a[k], b[k])
    assert any(np.any(a[k] != c[k]) for k in a)


def test_with_leaves_roundtrip(lex):
    params = md.build_model(sts_spec(), seed=1)
    arrays = md.leaf_arrays(params)
    clone = md.with_leaves(params, {k: v.copy() for k, v in arrays.items()})
    for (n1, a1), (n2, a2) in zip(md.named_parameters(params),
                                  md.named_parameters(clone)):
        assert n1 == n2
        np.testing.assert_array_equal(a1, a2)
        assert a1 is not a2


def test_pair_logits_shape_and_determinism(lex):
    params = md.build_model(sts_spec(), seed=2)
    z1 = md.pair_logits(params, lex, ["bob", "likes", "mary"], ["cats", "runs"])
    z2 = md.pair_logits(params, lex, ["bob", "likes", "mary"], ["cats", "runs"])
    assert np.asarray(z1).shape == (5,)
    np.testing.assert_array_equal(z1, z2)


def test_sent_mode_ignores_word_level(lex):
    spec = sts_spec(comparison="sent")
    params = md.build_model(spec, seed=2)
    assert params.comparison.W_word is None
    assert params.head.W_l1.shape == (250, 5)
    z = md.pair_logits(params, lex, ["bob", "likes"], ["mary", "hates"])
    assert np.asarray(z).shape == (5,)


def test_example_loss_sts_uses_mapped_target(lex):
    params = md.build_model(sts_spec(), seed=3)
    ex = SentencePairExample(["bob"], ["mary"], gold_score=2.5)
    loss = md.example_loss(params, lex, ex)
    assert float(nc._value(loss)) > 0


def test_batch_loss_is_mean(lex):
    params = md.build_model(sts_spec(), seed=3)
    exs = [SentencePairExample(["bob"], ["mary"], gold_score=1.0),
           SentencePairExample(["dogs", "likes"], ["cats"], gold_score=4.0)]
    parts = [float(nc._value(md.example_loss(params, lex, e))) for e in exs]
    total = float(nc._value(md.batch_loss(params, lex, exs)))
    assert abs(total - np.mean(parts)) < 1e-12


def test_predict_example_range(lex):
    params = md.build_model(sts_spec(), seed=4)
    s = md.predict_example(params, lex, ["bob", "likes", "mary"], ["bob", "likes"])
    assert 0.0 <= s <= 5.0
    cls_spec = md.ModelSpec(task="entailment", encoder="maxlstm", comparison="multi",
                            total_dim=8, H=6, l=4, L=3, d_neu=2, C=3, dropout_p=0.0,
                            label_names=["entailment", "contradiction", "neutral"])
    cls = md.build_model(cls_spec, seed=4)
    label = md.predict_example(cls, lex, ["bob"], ["mary"])
    assert label in (0, 1, 2)


def test_training_flag_engages_dropout(lex):
    from pairsim.rng import stream
    spec = sts_spec(dropout_p=0.5)
    params = md.build_model(spec, seed=5)
    t1 = ["bob", "likes", "mary"]
    t2 = ["cats"]
    plain = md.pair_logits(params, lex, t1, t2, training=False)
    dropped = md.pair_logits(params, lex, t1, t2, training=True,
                             rng=stream(9, "dropout"))
    assert np.any(np.asarray(plain) != np.asarray(dropped))
