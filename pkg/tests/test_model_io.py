import numpy as np
import pytest

import topicsense as ts
from topicsense.errors import DataFormatError
from topicsense.synthetic import two_topic_corpus
from conftest import random_store


@pytest.fixture(scope="module")
def trained():
    docs, _, _ = two_topic_corpus(n_docs=40, doc_len=20, seed=2)
    vocab = ts.build_vocabulary(docs)
    enc = ts.encode_corpus(docs, vocab)
    model = ts.train_lda(enc, k=2, iterations=25, seed=3, vocab_size=len(vocab))
    cfg = ts.TrainConfig(window=2, negatives=2, dim=5, epochs=1, seed=4)
    store = ts.init_embeddings(vocab, k=2, n=5, seed=4)
    ts.train(enc, model, cfg, store)
    return vocab, model, store


class TestVocabularyIO:
    def test_round_trip(self, trained, tmp_path):
        vocab = trained[0]
        path = tmp_path / "vocab.tsv"
        ts.save_vocabulary(vocab, path)
        loaded = ts.load_vocabulary(path)
        assert loaded.words == vocab.words
        assert loaded.counts.tolist() == vocab.counts.tolist()
        assert loaded.index == vocab.index

    def test_duplicate_word_rejected(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("cat\t5\ncat\t3\n")
        with pytest.raises(DataFormatError, match="cat"):
            ts.load_vocabulary(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("")
        with pytest.raises(DataFormatError):
            ts.load_vocabulary(path)

    def test_non_monotone_counts_rejected(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("cat\t3\ndog\t5\n")
        with pytest.raises(DataFormatError, match="non-increasing"):
            ts.load_vocabulary(path)

    def test_non_integer_count_rejected(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("cat\tmany\n")
        with pytest.raises(DataFormatError, match=":1"):
            ts.load_vocabulary(path)


class TestTopicModelIO:
    def test_round_trip_preserves_everything(self, trained, tmp_path):
        model = trained[1]
        path = tmp_path / "model.ldam"
        ts.save_topic_model(model, path)
        loaded = ts.load_topic_model(path)
        assert loaded.k == model.k
        assert loaded.alpha == model.alpha and loaded.beta == model.beta
        assert np.array_equal(loaded.n_wz, model.n_wz)
        assert np.array_equal(loaded.n_dz, model.n_dz)
        assert np.array_equal(loaded.n_z, model.n_z)
        assert all(
            np.array_equal(a, b)
            for a, b in zip(loaded.assignments, model.assignments)
        )

    def test_save_load_save_byte_identical(self, trained, tmp_path):
        model = trained[1]
        p1 = tmp_path / "m1.ldam"
        p2 = tmp_path / "m2.ldam"
        ts.save_topic_model(model, p1)
        ts.save_topic_model(ts.load_topic_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_corrupted_totals_rejected(self, trained, tmp_path):
        model = trained[1]
        path = tmp_path / "model.ldam"
        ts.save_topic_model(model, path, include_training_state=False)
        lines = path.read_text().splitlines()
        lines[-1] = "\t".join(["999999"] * model.k)  # n_z row
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError, match="inconsistent"):
            ts.load_topic_model(path)

    def test_header_shape_mismatch_rejected(self, trained, tmp_path):
        model = trained[1]
        path = tmp_path / "model.ldam"
        ts.save_topic_model(model, path, include_training_state=False)
        text = path.read_text()
        path.write_text(text.replace(f"V={model.vocab_size}", "V=3"), newline="\n")
        with pytest.raises(DataFormatError):
            ts.load_topic_model(path)

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "model.ldam"
        path.write_text("something 1 k=2 V=2 alpha=1 beta=1\n")
        with pytest.raises(DataFormatError, match="not a topic-model"):
            ts.load_topic_model(path)

    def test_version_mismatch_rejected(self, trained, tmp_path):
        model = trained[1]
        path = tmp_path / "model.ldam"
        ts.save_topic_model(model, path, include_training_state=False)
        text = path.read_text()
        path.write_text(text.replace("ldam 1", "ldam 9", 1), newline="\n")
        with pytest.raises(DataFormatError, match="version"):
            ts.load_topic_model(path)

    def test_without_training_state(self, trained, tmp_path):
        model = trained[1]
        path = tmp_path / "model.ldam"
        ts.save_topic_model(model, path, include_training_state=False)
        loaded = ts.load_topic_model(path)
        assert loaded.n_dz.shape == (0, model.k)
        assert loaded.assignments is None


class TestEmbeddingIO:
    def test_round_trip_precision(self, trained, tmp_path):
        store = trained[2]
        path = tmp_path / "emb.txt"
        ts.save_embeddings(store, path)
        loaded = ts.load_embeddings(path)
        assert loaded.words == store.words
        assert np.array_equal(loaded.mask, store.mask)
        scale = np.maximum(np.abs(store.sense_vectors), 1e-300)
        rel = np.abs(loaded.sense_vectors - store.sense_vectors) / scale
        assert rel.max() < 1e-8
        scale_g = np.maximum(np.abs(store.global_vectors), 1e-300)
        assert (np.abs(loaded.global_vectors - store.global_vectors) / scale_g).max() < 1e-8

    def test_save_load_save_byte_identical(self, trained, tmp_path):
        store = trained[2]
        p1 = tmp_path / "e1.txt"
        p2 = tmp_path / "e2.txt"
        ts.save_embeddings(store, p1)
        ts.save_embeddings(ts.load_embeddings(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_wrong_mask_length_rejected(self, trained, tmp_path):
        store = trained[2]
        path = tmp_path / "emb.txt"
        ts.save_embeddings(store, path)
        lines = path.read_text().splitlines()
        word, bits = lines[1].rsplit(" ", 1)
        lines[1] = f"{word} {bits}1"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError):
            ts.load_embeddings(path)

    def test_wrong_vector_length_rejected(self, trained, tmp_path):
        store = trained[2]
        path = tmp_path / "emb.txt"
        ts.save_embeddings(store, path)
        lines = path.read_text().splitlines()
        lines[2] = lines[2] + " 0.5"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError, match=":3"):
            ts.load_embeddings(path)

    def test_header_dimension_mismatch_rejected(self, trained, tmp_path):
        store = trained[2]
        path = tmp_path / "emb.txt"
        ts.save_embeddings(store, path)
        text = path.read_text()
        path.write_text(text.replace(f"n={store.dim}", f"n={store.dim + 1}", 1))
        with pytest.raises(DataFormatError):
            ts.load_embeddings(path)

    def test_rankings_survive_round_trip(self, trained, tmp_path):
        store = trained[2]
        path = tmp_path / "emb.txt"
        ts.save_embeddings(store, path)
        loaded = ts.load_embeddings(path)
        query = store.global_vectors[0]
        for scope in ("global", "sense"):
            before = ts.nearest_neighbors(store, query, 10, scope=scope, exclude_word=0)
            after = ts.nearest_neighbors(loaded, query, 10, scope=scope, exclude_word=0)
            assert [(h.word_id, h.sense) for h in before] == [
                (h.word_id, h.sense) for h in after
            ]


class TestExternalVectors:
    def test_two_word_file(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("cat 0.1 0.2 0.3\ndog 0.4 0.5 0.6\n")
        vecs = ts.load_external_vectors(path, 3)
        assert set(vecs) == {"cat", "dog"}
        assert np.allclose(vecs["dog"], [0.4, 0.5, 0.6])

    def test_wrong_dimension_names_line(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("cat 0.1 0.2 0.3\ndog 0.4 0.5\n")
        with pytest.raises(DataFormatError, match=":2"):
            ts.load_external_vectors(path, 3)

    def test_duplicate_last_wins(self, tmp_path, caplog):
        path = tmp_path / "vectors.txt"
        path.write_text("cat 1.0 0.0\ncat 0.0 1.0\n")
        with caplog.at_level("WARNING"):
            vecs = ts.load_external_vectors(path, 2)
        assert np.allclose(vecs["cat"], [0.0, 1.0])
        assert any("duplicate" in r.message for r in caplog.records)

    def test_inferred_dimension(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("cat 1.0 2.0\n")
        vecs = ts.load_external_vectors(path)
        assert vecs["cat"].shape == (2,)

    def test_feeds_init_embeddings(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("aa 1.0 0.0 0.0\n")
        vocab = ts.build_vocabulary([["aa", "bb"]])
        vecs = ts.load_external_vectors(path, 3)
        store = ts.init_embeddings(vocab, k=2, n=3, seed=0, pretrained=vecs, jitter=0.0)
        wid = store.index["aa"]
        assert np.array_equal(store.global_vectors[wid], [1.0, 0.0, 0.0])
