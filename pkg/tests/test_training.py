import numpy as np
import pytest

from pairsim import model as md
from pairsim import objectives as obj
from pairsim import training as tr
from pairsim.errors import CheckpointError, NumericError

from oracles import scalar_adadelta_steps
from toys import sts_overfit_dataset, toy_lexicon


@pytest.fixture(scope="module")
def lex():
    return toy_lexicon(seed=7, dims=(5, 3))


def small_spec(task="sts"):
    if task == "sts":
        return md.ModelSpec(task="sts", encoder="word_avg", comparison="sent",
                            total_dim=8, H=4, l=3, L=3, d_neu=2, C=5,
                            dropout_p=0.0, score=obj.ScoreSpec(5, 0, 5))
    raise ValueError(task)


def maxlstm_spec(dropout=0.0):
    return md.ModelSpec(task="sts", encoder="maxlstm", comparison="multi",
                        total_dim=8, H=6, l=6, L=4, d_neu=4, C=5,
                        dropout_p=dropout, score=obj.ScoreSpec(5, 0, 5))


# ---------------------------------------------------------------------------
# adadelta


def zero_grads(params):
    return {n: np.zeros_like(a) for n, a in md.named_parameters(params)}


def test_adadelta_zero_gradient_keeps_params(lex):
    params = md.build_model(small_spec(), seed=1)
    state = tr.AdaDeltaState.zeros(params)
    state.Eg2["head.b_l2"][:] = 0.04
    before = {n: a.copy() for n, a in md.named_parameters(params)}
    tr.adadelta_step(state, params, zero_grads(params))
    for n, a in md.named_parameters(params):
        np.testing.assert_array_equal(a, before[n])
    np.testing.assert_allclose(state.Eg2["head.b_l2"], 0.95 * 0.04, rtol=1e-15)


def test_adadelta_first_step_hand_value(lex):
    # scalar g=1, rho=0.95, eps=1e-6: dx = -sqrt(1e-6)/sqrt(0.05 + 1e-6)
    params = md.build_model(small_spec(), seed=1)
    state = tr.AdaDeltaState.zeros(params)
    grads = zero_grads(params)
    grads["head.b_l2"][0] = 1.0
    b0 = params.head.b_l2[0]
    tr.adadelta_step(state, params, grads)
    delta = params.head.b_l2[0] - b0
    assert abs(delta - (-4.4721e-3)) < 1e-7
    oracle = scalar_adadelta_steps([1.0], rho=0.95, eps=1e-6)[0]
    assert abs(delta - oracle) < 1e-15


def test_adadelta_second_step_grows(lex):
    deltas = scalar_adadelta_steps([1.0, 1.0], rho=0.95, eps=1e-6)
    assert abs(deltas[1]) > abs(deltas[0])
    params = md.build_model(small_spec(), seed=1)
    state = tr.AdaDeltaState.zeros(params)
    grads = zero_grads(params)
    trace = []
    for _ in range(2):
        grads["head.b_l2"][0] = 1.0
        before = params.head.b_l2[0]
        tr.adadelta_step(state, params, grads)
        trace.append(params.head.b_l2[0] - before)
    np.testing.assert_allclose(trace, deltas, rtol=0, atol=1e-15)


def test_adadelta_matches_scalar_oracle_over_sequence(lex):
    rng = np.random.default_rng(8)
    gs = rng.normal(size=7).tolist()
    params = md.build_model(small_spec(), seed=1)
    state = tr.AdaDeltaState.zeros(params)
    grads = zero_grads(params)
    got = []
    for g in gs:
        grads["head.b_l2"][0] = g
        before = params.head.b_l2[0]
        tr.adadelta_step(state, params, grads)
        got.append(params.head.b_l2[0] - before)
    np.testing.assert_allclose(got, scalar_adadelta_steps(gs, 0.95, 1e-6),
                               rtol=0, atol=1e-15)


def test_adadelta_accumulators_stay_finite_nonnegative(lex):
    params = md.build_model(small_spec(), seed=1)
    state = tr.AdaDeltaState.zeros(params)
    rng = np.random.default_rng(9)
    for _ in range(50):
        grads = {n: rng.normal(size=a.shape) * 10
                 for n, a in md.named_parameters(params)}
        tr.adadelta_step(state, params, grads)
    for group in (state.Eg2, state.Edx2):
        for v in group.values():
            assert np.all(v >= 0) and np.all(np.isfinite(v))


# ---------------------------------------------------------------------------
# training loop


def test_single_example_single_epoch_is_one_step(lex):
    ds = sts_overfit_dataset()
    ds.examples = ds.examples[:1]
    params = md.build_model(small_spec(), seed=2)
    before = {n: a.copy() for n, a in md.named_parameters(params)}
    cfg = tr.TrainConfig(batch_size=30, epochs=1, seed=4)
    result = tr.train(params, lex, ds, cfg)
    assert len(result.history) == 1
    changed = sum(np.any(a != before[n]) for n, a in md.named_parameters(params))
    assert changed > 0
    # one step from zero accumulators: |delta| <= sqrt(eps/ ((1-rho) g^2 + eps)) bound
    assert result.history[0].train_loss > 0


def test_loss_decreases_over_first_epochs(lex):
    # recorded behaviour of this seeded init; a regression check
    ds = sts_overfit_dataset()
    params = md.build_model(maxlstm_spec(), seed=5)
    cfg = tr.TrainConfig(batch_size=30, epochs=5, seed=5)
    result = tr.train(params, lex, ds, cfg)
    losses = [r.train_loss for r in result.history]
    assert all(b < a for a, b in zip(losses, losses[1:]))


def test_training_is_deterministic(lex):
    ds = sts_overfit_dataset()
    cfg = tr.TrainConfig(batch_size=4, epochs=3, seed=21)
    out = []
    for _ in range(2):
        params = md.build_model(maxlstm_spec(dropout=0.5), seed=21)
        r = tr.train(params, lex, ds, cfg)
        out.append(md.leaf_arrays(r.params))
    for k in out[0]:
        np.testing.assert_array_equal(out[0][k], out[1][k])


def test_embeddings_never_change(lex):
    before = lex.content_hash()
    ds = sts_overfit_dataset()
    params = md.build_model(maxlstm_spec(), seed=3)
    tr.train(params, lex, ds, tr.TrainConfig(batch_size=8, epochs=2, seed=3))
    assert lex.content_hash() == before


def test_validation_selects_best_and_early_stops(lex):
    ds = sts_overfit_dataset()
    params = md.build_model(maxlstm_spec(), seed=5)
    cfg = tr.TrainConfig(batch_size=30, epochs=60, seed=5, patience=3)
    result = tr.train(params, lex, ds, cfg, valid=ds)
    assert result.best_metric is not None
    metrics = [r.valid_metric for r in result.history]
    assert result.best_metric == max(metrics)
    # stopped within patience epochs of the best
    assert len(result.history) <= result.best_epoch + 3


@pytest.mark.filterwarnings("ignore:overflow")
@pytest.mark.filterwarnings("ignore:invalid value")
def test_non_finite_loss_aborts_with_batch_index(lex):
    # absurd oov fills overflow the unsquashed word-average path: the
    # sentence norms become inf and cosine yields inf/inf = nan
    from pairsim.embeddings import FusedLexicon
    crazy = FusedLexicon(tables=lex.tables, oov_scale=1e200, seed=7)
    ds = sts_overfit_dataset()
    for ex in ds.examples:
        ex.tokens1 = ex.tokens1 + ["zzz-unknown-word"]
    params = md.build_model(small_spec(), seed=6)  # word_avg encoder
    with pytest.raises(NumericError) as err:
        tr.train(params, crazy, ds, tr.TrainConfig(batch_size=8, epochs=1, seed=6))
    assert err.value.batch_index is not None


# ---------------------------------------------------------------------------
# checkpoints


def trained(lex, epochs=2, seed=31):
    ds = sts_overfit_dataset()
    params = md.build_model(maxlstm_spec(), seed=seed)
    cfg = tr.TrainConfig(batch_size=8, epochs=epochs, seed=seed)
    result = tr.train(params, lex, ds, cfg)
    return result


def test_checkpoint_roundtrip_bit_exact(tmp_path, lex):
    result = trained(lex)
    path = tmp_path / "model.ckpt"
    tr.save_checkpoint(path, result.params, result.state,
                       meta={"config": {"seed": 31}})
    loaded, state, meta = tr.load_checkpoint(path)
    for (n1, a1), (n2, a2) in zip(md.named_parameters(result.params),
                                  md.named_parameters(loaded)):
        assert n1 == n2
        np.testing.assert_array_equal(a1, a2)
    for k in result.state.Eg2:
        np.testing.assert_array_equal(result.state.Eg2[k], state.Eg2[k])
        np.testing.assert_array_equal(result.state.Edx2[k], state.Edx2[k])
    assert meta["config"] == {"seed": 31}
    assert meta["spec"]["task"] == "sts"


def test_checkpoint_same_bytes_for_same_run(tmp_path, lex):
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    tr.save_checkpoint(p1, trained(lex).params)
    tr.save_checkpoint(p2, trained(lex).params)
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_wrong_config_dimension(tmp_path, lex):
    result = trained(lex)
    path = tmp_path / "model.ckpt"
    tr.save_checkpoint(path, result.params)

    class Cfg:
        filters = 99

    with pytest.raises(CheckpointError, match="99") as err:
        tr.load_checkpoint(path, cfg=Cfg())
    assert "6" in str(err.value)  # names the checkpoint's value too


def test_checkpoint_truncated_and_bad_magic(tmp_path, lex):
    result = trained(lex)
    path = tmp_path / "model.ckpt"
    tr.save_checkpoint(path, result.params)
    raw = path.read_bytes()
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(CheckpointError):
        tr.load_checkpoint(bad)
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(CheckpointError):
        tr.load_checkpoint(bad)
    bad.write_bytes(raw + b"\x00" * 8)
    with pytest.raises(CheckpointError):
        tr.load_checkpoint(bad)
