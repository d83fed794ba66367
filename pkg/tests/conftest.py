import numpy as np
import pytest

import topicsense as ts


@pytest.fixture(scope="session")
def warm_kernels():
    """Run every jitted kernel once on a tiny problem so acceptance timing
    measures the algorithms, not JIT compilation."""
    docs = [["a", "b", "a", "c"], ["b", "c", "b", "a"]]
    vocab = ts.build_vocabulary(docs)
    enc = ts.encode_corpus(docs, vocab)
    model = ts.train_lda(enc, k=2, iterations=3, seed=0, vocab_size=len(vocab))
    ts.infer_topics(model, [0, 1], iterations=5, seed=0)
    store = ts.init_embeddings(vocab, k=2, n=4, seed=0)
    cfg = ts.TrainConfig(window=1, negatives=1, dim=4, epochs=1, seed=0)
    ts.train(enc, model, cfg, store)
    cfg_exact = ts.TrainConfig(
        window=1, negatives=1, dim=4, epochs=1, seed=0, exact_sigmoid=True
    )
    ts.train(enc, model, cfg_exact, ts.init_embeddings(vocab, k=2, n=4, seed=0))
    return True


@pytest.fixture()
def toy_store():
    """Four words, two senses, three dimensions, hand-set vectors."""
    words = ["alpha", "beta", "gamma", "delta"]
    sense = np.zeros((4, 2, 3))
    sense[0] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    sense[1] = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    sense[2] = [[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]
    sense[3] = [[0.5, 0.5, 0.5], [0.2, 0.1, 0.7]]
    global_vecs = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 0.0],
        ]
    )
    mask = np.ones((4, 2), dtype=bool)
    return ts.EmbeddingStore(
        words=words, sense_vectors=sense, global_vectors=global_vecs, mask=mask
    )


def random_store(rng, V=6, k=3, n=4, masked=True):
    words = [f"w{i}" for i in range(V)]
    sense = rng.normal(0, 1, (V, k, n))
    global_vecs = rng.normal(0, 1, (V, n))
    if masked:
        mask = rng.random((V, k)) < 0.6
        for w in range(V):
            if not mask[w].any():
                mask[w, rng.integers(k)] = True
    else:
        mask = np.ones((V, k), dtype=bool)
    return ts.EmbeddingStore(
        words=words, sense_vectors=sense, global_vectors=global_vecs, mask=mask
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    rows = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if getattr(rep, "when", "call") != "call":
                continue
            if "test_acceptance" in rep.nodeid:
                rows.append((rep.nodeid.split("::")[-1], status.upper()))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(rows):
            terminalreporter.write_line(f"{name}: {status}")
