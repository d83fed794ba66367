import subprocess
import sys

import numpy as np
import pytest

import topicsense as ts
from topicsense.cli import main
from topicsense.synthetic import pivot_corpus, write_corpus

CORPUS_TEXT = "The cat sat on the mat.\nThe dog sat on the log.\nA cat and a dog.\n"

GOLDEN_VOCAB = (
    "the\t4\n"
    "a\t2\n"
    "cat\t2\n"
    "dog\t2\n"
    "on\t2\n"
    "sat\t2\n"
    "and\t1\n"
    "log\t1\n"
    "mat\t1\n"
)


@pytest.fixture()
def tiny_corpus(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text(CORPUS_TEXT, encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """corpus -> vocab -> topic model -> embeddings, once per module."""
    root = tmp_path_factory.mktemp("pipeline")
    corpus = root / "corpus.txt"
    docs, _, _, _ = pivot_corpus(n_docs=60, doc_len=20, seed=4)
    write_corpus(corpus, docs)
    vocab = root / "vocab.tsv"
    ldam = root / "model.ldam"
    emb = root / "emb.txt"
    assert main(["build-vocab", "--input", str(corpus), "--output", str(vocab)]) == 0
    assert main([
        "train-lda", "--corpus", str(corpus), "--vocab", str(vocab),
        "--topics", "2", "--iters", "30", "--seed", "3", "--out", str(ldam),
    ]) == 0
    assert main([
        "train", "--corpus", str(corpus), "--vocab", str(vocab),
        "--lda-model", str(ldam), "--out", str(emb),
        "--dim", "6", "--negatives", "2", "--epochs", "1", "--seed", "5",
    ]) == 0
    return root, corpus, vocab, ldam, emb


class TestBuildVocab:
    def test_golden_vocabulary_file(self, tiny_corpus, tmp_path, capsys):
        out = tmp_path / "vocab.tsv"
        rc = main(["build-vocab", "--input", str(tiny_corpus), "--output", str(out)])
        assert rc == 0
        assert out.read_text() == GOLDEN_VOCAB
        stdout = capsys.readouterr().out
        assert "vocab_size\t9" in stdout
        assert "total_tokens\t17" in stdout
        assert "skipped_docs\t0" in stdout

    def test_missing_input_usage_error(self, tmp_path):
        rc = main(["build-vocab", "--output", str(tmp_path / "v.tsv")])
        assert rc == 2

    def test_min_count_zero_rejected(self, tiny_corpus, tmp_path):
        rc = main([
            "build-vocab", "--input", str(tiny_corpus),
            "--output", str(tmp_path / "v.tsv"), "--min-count", "0",
        ])
        assert rc == 2

    def test_nonexistent_input_runtime_error(self, tmp_path):
        rc = main([
            "build-vocab", "--input", str(tmp_path / "missing.txt"),
            "--output", str(tmp_path / "v.tsv"),
        ])
        assert rc == 1


class TestTrainLda:
    def test_deterministic_output_files(self, tiny_corpus, tmp_path):
        vocab = tmp_path / "v.tsv"
        main(["build-vocab", "--input", str(tiny_corpus), "--output", str(vocab)])
        outs = []
        for name in ("m1.ldam", "m2.ldam"):
            out = tmp_path / name
            rc = main([
                "train-lda", "--corpus", str(tiny_corpus), "--vocab", str(vocab),
                "--topics", "2", "--iters", "10", "--seed", "9", "--out", str(out),
            ])
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_single_topic_run(self, tiny_corpus, tmp_path):
        vocab = tmp_path / "v.tsv"
        main(["build-vocab", "--input", str(tiny_corpus), "--output", str(vocab)])
        rc = main([
            "train-lda", "--corpus", str(tiny_corpus), "--vocab", str(vocab),
            "--topics", "1", "--iters", "5", "--seed", "0",
            "--out", str(tmp_path / "m.ldam"),
        ])
        assert rc == 0

    def test_alpha_zero_rejected(self, tiny_corpus, tmp_path):
        vocab = tmp_path / "v.tsv"
        main(["build-vocab", "--input", str(tiny_corpus), "--output", str(vocab)])
        rc = main([
            "train-lda", "--corpus", str(tiny_corpus), "--vocab", str(vocab),
            "--topics", "2", "--iters", "5", "--seed", "0", "--alpha", "0",
            "--out", str(tmp_path / "m.ldam"),
        ])
        assert rc == 2

    def test_missing_seed_rejected(self, tiny_corpus, tmp_path):
        vocab = tmp_path / "v.tsv"
        main(["build-vocab", "--input", str(tiny_corpus), "--output", str(vocab)])
        rc = main([
            "train-lda", "--corpus", str(tiny_corpus), "--vocab", str(vocab),
            "--topics", "2", "--iters", "5", "--out", str(tmp_path / "m.ldam"),
        ])
        assert rc == 2

    def test_checkpoint_lines(self, tiny_corpus, tmp_path, capsys):
        vocab = tmp_path / "v.tsv"
        main(["build-vocab", "--input", str(tiny_corpus), "--output", str(vocab)])
        rc = main([
            "train-lda", "--corpus", str(tiny_corpus), "--vocab", str(vocab),
            "--topics", "2", "--iters", "10", "--seed", "0",
            "--checkpoint-every", "5", "--out", str(tmp_path / "m.ldam"),
        ])
        assert rc == 0
        lines = [
            l for l in capsys.readouterr().out.splitlines()
            if l.startswith("checkpoint\t")
        ]
        assert len(lines) == 2
        assert "perplexity" in lines[0] and "mean_log_likelihood" in lines[0]


class TestTrain:
    def test_deterministic_output(self, pipeline, tmp_path):
        _, corpus, vocab, ldam, _ = pipeline
        outs = []
        for name in ("e1.txt", "e2.txt"):
            out = tmp_path / name
            rc = main([
                "train", "--corpus", str(corpus), "--vocab", str(vocab),
                "--lda-model", str(ldam), "--out", str(out),
                "--dim", "6", "--negatives", "2", "--epochs", "1",
                "--seed", "5", "--threads", "1",
            ])
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_nonparametric_zero_threshold_keeps_all_senses(self, pipeline, tmp_path):
        _, corpus, vocab, ldam, _ = pipeline
        out = tmp_path / "emb.txt"
        rc = main([
            "train", "--corpus", str(corpus), "--vocab", str(vocab),
            "--lda-model", str(ldam), "--out", str(out),
            "--dim", "6", "--negatives", "2", "--epochs", "1", "--seed", "5",
            "--nonparametric", "--p-thres", "0",
        ])
        assert rc == 0
        store = ts.load_embeddings(out)
        assert store.mask.all()

    def test_epoch_loss_lines(self, pipeline, tmp_path, capsys):
        _, corpus, vocab, ldam, _ = pipeline
        rc = main([
            "train", "--corpus", str(corpus), "--vocab", str(vocab),
            "--lda-model", str(ldam), "--out", str(tmp_path / "e.txt"),
            "--dim", "6", "--negatives", "2", "--epochs", "2", "--seed", "5",
        ])
        assert rc == 0
        lines = [
            l for l in capsys.readouterr().out.splitlines() if l.startswith("epoch\t")
        ]
        assert len(lines) == 2


class TestEvalSim:
    def test_matches_library(self, pipeline, tmp_path, capsys):
        _, _, _, ldam, emb = pipeline
        store = ts.load_embeddings(emb)
        words = store.words
        dataset = tmp_path / "sim.tsv"
        rows = [
            (words[0], words[1], 9.0),
            (words[0], words[2], 5.0),
            (words[1], words[3], 3.0),
            (words[2], words[4], 1.0),
        ]
        dataset.write_text("".join(f"{a}\t{b}\t{g}\n" for a, b, g in rows))
        rc = main([
            "eval-sim", "--model", str(emb), "--dataset", str(dataset),
            "--metric", "avg",
        ])
        assert rc == 0
        out = dict(
            line.split("\t", 1) for line in capsys.readouterr().out.splitlines()
        )
        pairs = ts.load_similarity_dataset(dataset)
        rho, used, skipped = ts.evaluate_similarity(store, None, pairs, "avg")
        # stdout carries 9 significant digits
        assert float(out["rho_x100"]) == pytest.approx(rho, rel=1e-8)
        assert int(out["pairs_used"]) == used
        assert int(out["pairs_skipped"]) == skipped

    def test_avgc_without_contexts_rejected(self, pipeline, tmp_path):
        _, _, _, ldam, emb = pipeline
        dataset = tmp_path / "sim.tsv"
        dataset.write_text("a\tb\t1.0\nc\td\t2.0\n")
        rc = main([
            "eval-sim", "--model", str(emb), "--lda-model", str(ldam),
            "--dataset", str(dataset), "--metric", "avgc",
        ])
        assert rc == 2

    def test_gold_equals_model_gives_100(self, pipeline, tmp_path, capsys):
        _, _, _, _, emb = pipeline
        store = ts.load_embeddings(emb)
        words = store.words
        combos = [(words[0], words[1]), (words[0], words[2]), (words[3], words[4])]
        dataset = tmp_path / "sim.tsv"
        dataset.write_text(
            "".join(
                f"{a}\t{b}\t{ts.global_sim(store, a, b)}\n" for a, b in combos
            )
        )
        rc = main([
            "eval-sim", "--model", str(emb), "--dataset", str(dataset),
            "--metric", "global",
        ])
        assert rc == 0
        out = dict(
            line.split("\t", 1) for line in capsys.readouterr().out.splitlines()
        )
        assert float(out["rho_x100"]) == 100.0


class TestEvalAnalogy:
    def test_toy_quad(self, tmp_path, capsys):
        words = ["a", "b", "c", "d"]
        gv = np.array([[1.0, 0.0], [1.0, 1.0], [3.0, 0.0], [3.0, 1.0]])
        store = ts.EmbeddingStore(
            words=words,
            sense_vectors=np.repeat(gv[:, None, :], 1, axis=1),
            global_vectors=gv,
            mask=np.ones((4, 1), dtype=bool),
        )
        emb = tmp_path / "emb.txt"
        ts.save_embeddings(store, emb)
        dataset = tmp_path / "analogy.txt"
        dataset.write_text("a b c d\n")
        rc = main(["eval-analogy", "--model", str(emb), "--dataset", str(dataset)])
        assert rc == 0
        out = dict(
            line.split("\t", 1) for line in capsys.readouterr().out.splitlines()
        )
        assert float(out["accuracy"]) == 100.0
        assert out["answered"] == "1"

    def test_all_oov_fails(self, pipeline, tmp_path):
        _, _, _, _, emb = pipeline
        dataset = tmp_path / "analogy.txt"
        dataset.write_text("qq ww ee rr\n")
        rc = main(["eval-analogy", "--model", str(emb), "--dataset", str(dataset)])
        assert rc == 1


class TestNeighbors:
    def test_masked_out_sense_rejected_with_listing(self, pipeline, tmp_path, capsys):
        _, corpus, vocab, ldam, _ = pipeline
        out = tmp_path / "emb.txt"
        main([
            "train", "--corpus", str(corpus), "--vocab", str(vocab),
            "--lda-model", str(ldam), "--out", str(out),
            "--dim", "6", "--negatives", "2", "--epochs", "1", "--seed", "5",
            "--nonparametric", "--p-thres", "0.4",
        ])
        store = ts.load_embeddings(out)
        wid = next(w for w in range(store.vocab_size) if not store.mask[w].all())
        bad = int(np.flatnonzero(~store.mask[wid])[0])
        rc = main([
            "neighbors", "--model", str(out), "--word", store.words[wid],
            "--sense", str(bad), "--top", "3",
        ])
        assert rc == 2

    def test_empty_context_uses_uniform_weights(self, pipeline, capsys):
        _, _, _, ldam, emb = pipeline
        store = ts.load_embeddings(emb)
        rc = main([
            "neighbors", "--model", str(emb), "--word", store.words[0],
            "--context", "", "--lda-model", str(ldam), "--top", "3",
        ])
        assert rc == 0
        assert len(capsys.readouterr().out.splitlines()) == 3

    def test_golden_toy_output(self, tmp_path, capsys):
        words = ["aa", "bb", "cc"]
        gv = np.array([[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]])
        store = ts.EmbeddingStore(
            words=words,
            sense_vectors=np.repeat(gv[:, None, :], 1, axis=1),
            global_vectors=gv,
            mask=np.ones((3, 1), dtype=bool),
        )
        emb = tmp_path / "emb.txt"
        ts.save_embeddings(store, emb)
        rc = main(["neighbors", "--model", str(emb), "--word", "aa", "--top", "2"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split("\t")[0] == "bb"
        assert lines[1].split("\t")[0] == "cc"

    def test_oov_word(self, pipeline):
        _, _, _, _, emb = pipeline
        rc = main(["neighbors", "--model", str(emb), "--word", "zzzz", "--top", "3"])
        assert rc == 2

    def test_sense_scope_labels(self, pipeline, capsys):
        _, _, _, _, emb = pipeline
        store = ts.load_embeddings(emb)
        rc = main([
            "neighbors", "--model", str(emb), "--word", store.words[0],
            "--top", "4", "--scope", "sense",
        ])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert all("#" in line.split("\t")[0] for line in lines)


class TestDiagnose:
    def test_reports_keys_and_uniqueness(self, pipeline, capsys):
        _, corpus, vocab, ldam, _ = pipeline
        rc = main([
            "diagnose", "--lda-model", str(ldam), "--vocab", str(vocab),
            "--corpus", str(corpus), "--top-words", "5",
        ])
        assert rc == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert sum(1 for l in lines if l.startswith("topic\t")) == 2
        fields = dict(
            l.split("\t", 1) for l in lines if not l.startswith("topic\t")
        )
        assert 0.0 < float(fields["topic_uniqueness"]) <= 1.0
        assert float(fields["perplexity"]) >= 1.0
        assert float(fields["mean_nll"]) == pytest.approx(
            np.log(float(fields["perplexity"])), rel=1e-6
        )

    def test_top_words_exceeding_vocab(self, pipeline):
        _, _, _, ldam, _ = pipeline
        rc = main([
            "diagnose", "--lda-model", str(ldam), "--top-words", "100000",
        ])
        assert rc == 2


class TestSweepThres:
    def test_threshold_extremes_control_sense_counts(self, pipeline, tmp_path, capsys):
        _, corpus, vocab, ldam, emb = pipeline
        store = ts.load_embeddings(emb)
        dataset = tmp_path / "sim.tsv"
        words = store.words
        dataset.write_text(
            f"{words[0]}\t{words[1]}\t3.0\n{words[0]}\t{words[2]}\t2.0\n"
            f"{words[1]}\t{words[3]}\t1.0\n"
        )
        probe = words[0]
        rc = main([
            "sweep-thres", "--corpus", str(corpus), "--vocab", str(vocab),
            "--lda-model", str(ldam), "--dataset", str(dataset),
            "--thres-list", "0,0.99", "--probe-words", probe,
            "--dim", "6", "--negatives", "2", "--epochs", "1", "--seed", "5",
        ])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        sense_lines = [l for l in lines if l.startswith("senses\t")]
        counts = [int(l.split("\t")[-1]) for l in sense_lines]
        assert counts == [2, 1]  # all k senses at 0, argmax only at 0.99
        assert sum(1 for l in lines if l.startswith("p_thres\t")) == 2

    def test_empty_threshold_list(self, pipeline, tmp_path):
        _, corpus, vocab, ldam, _ = pipeline
        dataset = tmp_path / "sim.tsv"
        dataset.write_text("a\tb\t1.0\n")
        rc = main([
            "sweep-thres", "--corpus", str(corpus), "--vocab", str(vocab),
            "--lda-model", str(ldam), "--dataset", str(dataset),
            "--thres-list", "", "--seed", "1",
        ])
        assert rc == 2

    def test_rerun_identical_tables(self, pipeline, tmp_path, capsys):
        _, corpus, vocab, ldam, emb = pipeline
        store = ts.load_embeddings(emb)
        words = store.words
        dataset = tmp_path / "sim.tsv"
        dataset.write_text(
            f"{words[0]}\t{words[1]}\t3.0\n{words[2]}\t{words[3]}\t1.0\n"
        )
        outputs = []
        for _ in range(2):
            rc = main([
                "sweep-thres", "--corpus", str(corpus), "--vocab", str(vocab),
                "--lda-model", str(ldam), "--dataset", str(dataset),
                "--thres-list", "0.001", "--dim", "6", "--negatives", "2",
                "--epochs", "1", "--seed", "5",
            ])
            assert rc == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]


class TestConfigFile:
    def test_flag_beats_config_beats_default(self, tiny_corpus, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("min-count=2\nmax-vocab=3\n")
        out = tmp_path / "v.tsv"
        rc = main([
            "build-vocab", "--config", str(cfg),
            "--input", str(tiny_corpus), "--output", str(out), "--max-vocab", "2",
        ])
        assert rc == 0
        # config min-count=2 applies; flag max-vocab=2 overrides config's 3
        assert out.read_text() == "the\t4\na\t2\n"

    def test_malformed_config(self, tiny_corpus, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("not a key value line\n")
        rc = main([
            "build-vocab", "--config", str(cfg),
            "--input", str(tiny_corpus), "--output", str(tmp_path / "v.tsv"),
        ])
        assert rc == 2


class TestConsoleScript:
    def test_module_invocation_and_usage_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "topicsense.cli", "build-vocab"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2

    def test_help_runs(self):
        proc = subprocess.run(
            [sys.executable, "-m", "topicsense.cli", "--help"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "build-vocab" in proc.stdout
