import numpy as np
import pytest

from neamer.corpus import Corpus, Label, Language, Sample, Split
from neamer.kernels import ngram_bucket_ids
from neamer.kernels._ngram_py import ngram_bucket_ids as ngram_bucket_ids_py
from neamer.locality import LocalityVector
from neamer.model import (
    Batch,
    ModelConfig,
    SeedRun,
    TrainResult,
    batch_loss,
    build_training_data,
    encode_text,
    forward,
    init_params,
    load_params,
    loss_and_grads,
    mark_occurrences,
    save_params,
    text_bucket_ids,
    train,
    train_with_retry,
    validation_f1,
    write_epoch_log,
)

SMALL = ModelConfig(text_dim=16, feat_hidden=8, feat_out=8, hash_buckets=64, batch_size=4, epochs=3)


def random_batch(config, rng, n=6):
    ids_list = [rng.integers(0, config.hash_buckets, size=rng.integers(3, 12)) for _ in range(n)]
    feats = rng.integers(0, 2, size=(n, 6)).astype(np.float64)
    labels = rng.integers(0, 2, size=n)
    return Batch(ids_list=ids_list, feats=feats, labels=labels)


# --- kernels / encoding ----------------------------------------------------


def test_kernel_backends_agree():
    for text in ("gold mine", "ab", "a", "Ünïcode “quotes” here", "x" * 40):
        assert np.array_equal(ngram_bucket_ids(text), ngram_bucket_ids_py(text))


def test_encode_deterministic():
    params = init_params(SMALL, seed=0)
    a = encode_text(params, "search data is a gold mine", SMALL)
    b = encode_text(params, "search data is a gold mine", SMALL)
    assert np.array_equal(a, b)


def test_encode_sensitive_to_marking():
    params = init_params(SMALL, seed=0)
    plain = encode_text(params, "it is a gold mine here", SMALL)
    marked = encode_text(params, "it is a gold mine here", SMALL, mwe="gold mine")
    assert not np.array_equal(plain, marked)


def test_encode_finite_on_random_strings():
    rng = np.random.default_rng(1)
    params = init_params(SMALL, seed=0)
    for _ in range(2):
        text = "".join(chr(rng.integers(97, 123)) for _ in range(20))
        vec = encode_text(params, text, SMALL)
        assert np.all(np.isfinite(vec))


def test_short_string_still_encodes():
    assert len(ngram_bucket_ids("ab")) == 1


def test_mark_occurrences():
    assert mark_occurrences("a gold mine here", [(2, 11)]) == "a \x02gold mine\x03 here"


# --- forward ---------------------------------------------------------------


def test_zeroed_feature_weights_leave_text_path():
    params = init_params(SMALL, seed=0)
    params.feat_w1[:] = 0
    params.feat_b1[:] = 0
    params.feat_w2[:] = 0
    params.feat_b2[:] = 0
    text_vec = np.zeros(SMALL.text_dim)
    p0 = forward(params, text_vec, np.zeros(6))
    p1 = forward(params, text_vec, np.ones(6))
    assert np.allclose(p0, p1)


def test_zero_head_gives_uniform():
    params = init_params(SMALL, seed=0)
    params.head_w[:] = 0
    params.head_b[:] = 0
    p = forward(params, np.random.default_rng(0).normal(size=SMALL.text_dim), np.ones(6))
    assert np.allclose(p, [0.5, 0.5])


def test_forward_golden_straight_line():
    # independent re-implementation of the same arithmetic, scalar loops
    config = ModelConfig(text_dim=3, feat_hidden=2, feat_out=2, hash_buckets=8)
    params = init_params(config, seed=42)
    text_vec = np.random.default_rng(7).normal(size=3)
    feat = np.array([1.0, 0.0, 1.0, 0.0, 0.0, 1.0])

    h1 = [max(0.0, sum(feat[i] * params.feat_w1[i][j] for i in range(6)) + params.feat_b1[j])
          for j in range(2)]
    h2 = [max(0.0, sum(h1[i] * params.feat_w2[i][j] for i in range(2)) + params.feat_b2[j])
          for j in range(2)]
    concat = list(text_vec) + h2
    z = [sum(concat[i] * params.head_w[i][k] for i in range(5)) + params.head_b[k]
         for k in range(2)]
    m = max(z)
    e = [np.exp(v - m) for v in z]
    expected = np.array([v / sum(e) for v in e])

    assert np.allclose(forward(params, text_vec, feat), expected, atol=1e-12)


def test_softmax_sums_to_one():
    rng = np.random.default_rng(5)
    params = init_params(SMALL, seed=3)
    for _ in range(1000):
        p = forward(params, rng.normal(size=SMALL.text_dim), rng.integers(0, 2, 6).astype(float))
        assert abs(p.sum() - 1.0) <= 1e-9
        assert np.all(p > 0) and np.all(p < 1)


def test_feature_path_ablation_all_vectors():
    params = init_params(SMALL, seed=0)
    params.feat_w2[:] = 0
    params.feat_b2[:] = 0
    text_vec = np.random.default_rng(2).normal(size=SMALL.text_dim)
    baseline = forward(params, text_vec, np.zeros(6))
    for bits in range(64):
        feat = np.array([(bits >> i) & 1 for i in range(6)], dtype=np.float64)
        assert np.allclose(forward(params, text_vec, feat), baseline)


# --- gradients -------------------------------------------------------------


def test_gradient_check_all_tensors():
    config = ModelConfig(text_dim=10, feat_hidden=6, feat_out=5, hash_buckets=32)
    rng = np.random.default_rng(0)
    params = init_params(config, seed=1)
    batch = random_batch(config, rng, n=5)
    _, grads = loss_and_grads(params, batch)

    step = 1e-5
    for name, tensor in params.tensors().items():
        numeric = np.zeros_like(tensor)
        it = np.nditer(tensor, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = tensor[idx]
            tensor[idx] = orig + step
            up = batch_loss(params, batch)
            tensor[idx] = orig - step
            down = batch_loss(params, batch)
            tensor[idx] = orig
            numeric[idx] = (up - down) / (2 * step)
            it.iternext()
        denom = max(np.linalg.norm(grads[name]), np.linalg.norm(numeric), 1e-12)
        rel = np.linalg.norm(grads[name] - numeric) / denom
        assert rel < 1e-4, f"{name}: relative error {rel}"


def test_first_step_decreases_loss():
    config = ModelConfig(text_dim=12, feat_hidden=6, feat_out=6, hash_buckets=32,
                         learning_rate=1e-6, lr_multiplier=1.0)
    rng = np.random.default_rng(4)
    params = init_params(config, seed=2)
    batch = random_batch(config, rng, n=8)
    before = batch_loss(params, batch)
    _, grads = loss_and_grads(params, batch)
    for name, tensor in params.tensors().items():
        tensor -= config.effective_lr * grads[name]
    after = batch_loss(params, batch)
    assert after < before


# --- training --------------------------------------------------------------


def synthetic_the_star_corpus(n=200, seed=0):
    """Sentences where the gold label equals the the_star feature."""
    rng = np.random.default_rng(seed)
    fillers = ["today", "slowly", "again", "here", "once more", "in town"]
    samples = []
    vectors = {}
    for i in range(n):
        starred = i % 2 == 0
        filler = fillers[rng.integers(0, len(fillers))]
        prefix = "the" if starred else "some"
        target = f"we saw {prefix} gold mine {filler}."
        label = Label.NON_IDIOMATIC if starred else Label.IDIOMATIC
        samples.append(
            Sample(id=f"syn{i}", language=Language.EN, mwe="gold mine", target=target,
                   split=Split.ZERO_SHOT_TRAIN, label=label)
        )
        vectors[f"syn{i}"] = LocalityVector(the_star=starred)
    return Corpus(samples=tuple(samples)), vectors


LEARN_CONFIG = ModelConfig(text_dim=32, feat_hidden=16, feat_out=16, hash_buckets=256,
                           batch_size=16, epochs=24)


def test_learnable_separable_corpus():
    corpus, vectors = synthetic_the_star_corpus()
    data = build_training_data(corpus, vectors, LEARN_CONFIG)
    result = train(LEARN_CONFIG, data, data, seed=0)
    assert result.best_f1 >= 0.95


def test_epochs_zero_returns_initial_params():
    config = ModelConfig(text_dim=8, feat_hidden=4, feat_out=4, hash_buckets=32, epochs=0)
    corpus, vectors = synthetic_the_star_corpus(n=20)
    data = build_training_data(corpus, vectors, config)
    result = train(config, data, data, seed=1)
    initial = init_params(config, seed=1)
    for name, tensor in result.params.tensors().items():
        assert np.array_equal(tensor, initial.tensors()[name])
    assert result.history == [(0, result.best_f1)]
    assert result.best_f1 == validation_f1(initial, data)


def test_training_deterministic():
    config = ModelConfig(text_dim=16, feat_hidden=8, feat_out=8, hash_buckets=64,
                         batch_size=8, epochs=3)
    corpus, vectors = synthetic_the_star_corpus(n=40)
    data = build_training_data(corpus, vectors, config)
    a = train(config, data, data, seed=5)
    b = train(config, data, data, seed=5)
    for name in a.params.tensors():
        assert np.array_equal(a.params.tensors()[name], b.params.tensors()[name])
    assert a.history == b.history


# --- retry protocol ----------------------------------------------------------


def stub_trainer(failing_seeds):
    def trainer(config, train_data, valid_data, seed):
        f1 = 0.3 if seed in failing_seeds else 0.9
        return TrainResult(params=None, best_f1=f1, history=[], seed=seed)

    return trainer


def test_all_seeds_succeed():
    runs = train_with_retry(ModelConfig(), None, None, trainer=stub_trainer(set()))
    assert [r.seed for r in runs] == [0, 1, 3, 5, 42]
    assert not any(r.failed for r in runs)


def test_one_failure_consumes_first_retry_seed():
    runs = train_with_retry(ModelConfig(), None, None, trainer=stub_trainer({3}))
    assert [r.seed for r in runs] == [0, 1, 3, 5, 42, 49]
    assert [r.failed for r in runs] == [False, False, True, False, False, False]
    assert runs[-1].retry


def test_retry_seeds_consumed_in_order():
    runs = train_with_retry(ModelConfig(), None, None, trainer=stub_trainer({0, 1, 3, 5}))
    assert [r.seed for r in runs] == [0, 1, 3, 5, 42, 49, 81, 100, 121]


def test_nine_attempts_five_failures_rate():
    from neamer.evaluation import stability_report

    runs = train_with_retry(ModelConfig(), None, None,
                            trainer=stub_trainer({0, 1, 3, 5, 121}))
    assert len(runs) == 9
    assert sum(r.failed for r in runs) == 5
    report = stability_report([("xlmr", r.seed, r.best_f1, r.failed) for r in runs])
    assert report["xlmr"] == 44.4


def test_strict_raises_when_exhausted():
    from neamer.model import RetrySeedsExhausted

    with pytest.raises(RetrySeedsExhausted):
        train_with_retry(ModelConfig(), None, None,
                         trainer=stub_trainer({0, 1, 3, 5, 49, 81, 100, 121, 42}),
                         strict=True)


def test_seed_lists_disjoint_enforced():
    with pytest.raises(ValueError):
        ModelConfig(seeds=(0, 49), retry_seeds=(49,))


# --- serialization -----------------------------------------------------------


def test_params_round_trip(tmp_path):
    params = init_params(SMALL, seed=9)
    path = tmp_path / "params.npz"
    save_params(params, path)
    loaded = load_params(path)
    for name, tensor in params.tensors().items():
        assert np.array_equal(tensor, loaded.tensors()[name])


def test_epoch_log(tmp_path):
    path = tmp_path / "log.csv"
    write_epoch_log([(0, 0.5), (1, 0.75)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "epoch,f1"
    assert lines[1] == "0,0.500000"
