import pytest

from winqe.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main


def make_fixture(tmp_path, n_systems=2):
    src = tmp_path / "src.txt"
    ids = tmp_path / "ids.txt"
    src.write_text("a b\nc d\ne f\ng h\ni j\n", encoding="utf-8")
    ids.write_text("A\nA\nA\nB\nB\n", encoding="utf-8")
    systems = []
    for k in range(n_systems):
        hyp = tmp_path / f"hyp{k}.txt"
        lines = [f"a b x{k}", "c d", f"y{k} f", "g h", f"i z{k}"]
        hyp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        systems.append((f"sys{k}", hyp))
    return src, ids, systems


def base_args(tmp_path, src, ids, systems, out="out"):
    args = [
        "--source", str(src),
        "--docids", str(ids),
        "--lang-pair", "en-de",
        "--output-dir", str(tmp_path / out),
    ]
    for name, path in systems:
        args += ["--system", f"{name}={path}"]
    return args


class TestScore:
    def test_constant_scorer(self, tmp_path, capsys):
        src, ids, systems = make_fixture(tmp_path)
        rc = main(
            ["score", "--scorer", "constant", "--scorer-param", "value=0.5",
             "--w", "2", "--s", "2"] + base_args(tmp_path, src, ids, systems)
        )
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        assert "0.5000" in out
        tsv = (tmp_path / "out" / "system_scores.tsv").read_text()
        assert tsv.count("\n") == 3  # header + 2 systems

    def test_sentence_level_equals_direct_mean(self, tmp_path):
        from winqe.corpus import load_system_output, load_testset
        from winqe.scoring import lexical_overlap_score

        src, ids, systems = make_fixture(tmp_path, n_systems=1)
        rc = main(
            ["score", "--scorer", "lexical_overlap", "--w", "1", "--s", "1"]
            + base_args(tmp_path, src, ids, systems)
        )
        assert rc == EXIT_OK
        ts = load_testset(src, ids, "en-de")
        out = load_system_output(systems[0][1], ts, "sys0")
        srcs = [s for d in ts.documents for s in d.src]
        expected = sum(
            lexical_overlap_score(a, b) for a, b in zip(srcs, out.hyp)
        ) / len(srcs)
        tsv = (tmp_path / "out" / "system_scores.tsv").read_text()
        value = float(tsv.splitlines()[1].split("\t")[3])
        assert value == pytest.approx(expected, rel=1e-12)

    def test_missing_scorer_is_usage_error(self, tmp_path):
        src, ids, systems = make_fixture(tmp_path)
        rc = main(["score", "--w", "2"] + base_args(tmp_path, src, ids, systems))
        assert rc == EXIT_USAGE

    def test_unreadable_file_is_runtime_error(self, tmp_path):
        src, ids, systems = make_fixture(tmp_path)
        rc = main(
            ["score", "--scorer", "length_ratio", "--w", "1",
             "--source", str(src), "--docids", str(tmp_path / "missing.txt"),
             "--lang-pair", "en-de"]
        )
        assert rc == EXIT_RUNTIME


class TestGrid:
    def write_human(self, tmp_path):
        path = tmp_path / "human.tsv"
        path.write_text(
            "lang_pair\tsystem\tscore\nen-de\tsys0\t2.0\nen-de\tsys1\t1.0\n",
            encoding="utf-8",
        )
        return path

    def test_grid_outputs(self, tmp_path, capsys):
        src, ids, systems = make_fixture(tmp_path)
        human = self.write_human(tmp_path)
        rc = main(
            ["grid", "--scorer", "lexical_overlap", "--w-max", "3",
             "--human-scores", str(human)]
            + base_args(tmp_path, src, ids, systems)
        )
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        assert "sentence-level baseline" in out
        tsv = (tmp_path / "out" / "grid_accuracy.tsv").read_text()
        # 6 cells, each with one lang pair row plus two pooled rows
        assert tsv.count("\n") == 1 + 6 * 3
        assert (tmp_path / "out" / "grid_heatmap.txt").is_file()
        assert (tmp_path / "out" / "grid_heatmap.svg").is_file()

    def test_missing_human_scores_usage_error(self, tmp_path):
        src, ids, systems = make_fixture(tmp_path)
        rc = main(
            ["grid", "--scorer", "lexical_overlap", "--w-max", "2"]
            + base_args(tmp_path, src, ids, systems)
        )
        assert rc == EXIT_USAGE

    def test_single_system_usage_error(self, tmp_path):
        src, ids, systems = make_fixture(tmp_path, n_systems=1)
        human = tmp_path / "human.tsv"
        human.write_text("lang_pair\tsystem\tscore\nen-de\tsys0\t1.0\n")
        rc = main(
            ["grid", "--scorer", "constant", "--scorer-param", "value=1",
             "--w-max", "2", "--human-scores", str(human)]
            + base_args(tmp_path, src, ids, systems)
        )
        assert rc == EXIT_USAGE


class TestStats:
    def test_single_sentence_docs_all_dropped(self, tmp_path):
        src = tmp_path / "src.txt"
        ids = tmp_path / "ids.txt"
        src.write_text("a\nb\nc\n", encoding="utf-8")
        ids.write_text("A\nB\nC\n", encoding="utf-8")
        rc = main(
            ["stats", "--w-max", "2", "--source", str(src), "--docids", str(ids),
             "--lang-pair", "en-de", "--output-dir", str(tmp_path / "out")]
        )
        assert rc == EXIT_OK
        tsv = (tmp_path / "out" / "dropped_fraction.en-de.tsv").read_text()
        rows = dict()
        for line in tsv.splitlines()[1:]:
            w, s, frac = line.split("\t")
            rows[(int(w), int(s))] = float(frac)
        assert rows[(2, 1)] == 1.0
        assert rows[(1, 1)] == 0.0

    def test_triangular_cell_count(self, tmp_path):
        src, ids, systems = make_fixture(tmp_path)
        rc = main(
            ["stats", "--w-max", "10"] + base_args(tmp_path, src, ids, systems)
        )
        assert rc == EXIT_OK
        tsv = (tmp_path / "out" / "dropped_fraction.en-de.tsv").read_text()
        assert len(tsv.splitlines()) - 1 == 55

    def test_overlength_flagging(self, tmp_path):
        src, ids, systems = make_fixture(tmp_path, n_systems=1)
        rc = main(
            ["stats", "--w-max", "2", "--token-limit", "4"]
            + base_args(tmp_path, src, ids, systems)
        )
        assert rc == EXIT_OK
        tsv = (tmp_path / "out" / "overlength_fraction.en-de.tsv").read_text()
        rows = {
            int(line.split("\t")[0]): float(line.split("\t")[1])
            for line in tsv.splitlines()[2:]
        }
        # every 2-sentence chunk has ~8 whitespace tokens > 4; 1-sentence
        # chunks have about 4 or 5
        assert rows[2] == 1.0

    def test_unknown_tokenizer(self, tmp_path):
        src, ids, systems = make_fixture(tmp_path)
        rc = main(
            ["stats", "--w-max", "2", "--tokenizer", "nope"]
            + base_args(tmp_path, src, ids, systems)
        )
        assert rc == EXIT_USAGE


class TestSynth:
    def synth_args(self, tmp_path, seed="7"):
        cfg = tmp_path / "synth.yaml"
        cfg.write_text(
            "synth:\n"
            "  n_docs: 20\n"
            "  ambiguity_rate: 0.5\n"
            "  error_rates: {alpha: 0.1, beta: 0.3}\n",
            encoding="utf-8",
        )
        return ["synth", "--config", str(cfg), "--seed", seed,
                "--output-dir", str(tmp_path / "out")]

    def test_deterministic_output(self, tmp_path):
        args = self.synth_args(tmp_path)
        assert main(args) == EXIT_OK
        first = {
            p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()
        }
        assert main(args) == EXIT_OK
        second = {
            p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()
        }
        assert first == second
        assert "source.txt" in first and "hyp.alpha.txt" in first

    def test_human_file_ranks_lower_error_rate_higher(self, tmp_path):
        from winqe.corpus import load_human_scores

        assert main(self.synth_args(tmp_path)) == EXIT_OK
        human = load_human_scores(tmp_path / "out" / "human_scores.tsv")[0]
        assert human.scores["alpha"] > human.scores["beta"]

    def test_zero_docs_usage_error(self, tmp_path):
        cfg = tmp_path / "synth.yaml"
        cfg.write_text("synth: {n_docs: 0}\n", encoding="utf-8")
        rc = main(["synth", "--config", str(cfg),
                   "--output-dir", str(tmp_path / "out")])
        assert rc == EXIT_USAGE


class TestValidate:
    def test_valid_config(self, tmp_path, capsys):
        src, ids, systems = make_fixture(tmp_path)
        cfg = tmp_path / "run.yaml"
        cfg.write_text(
            "lang_pairs:\n"
            "  en-de:\n"
            f"    source: {src.name}\n"
            f"    docids: {ids.name}\n"
            "    systems:\n"
            + "".join(f"      {n}: {p.name}\n" for n, p in systems),
            encoding="utf-8",
        )
        assert main(["validate", "--config", str(cfg)]) == EXIT_OK
        assert "config ok" in capsys.readouterr().out

    def test_missing_path_rejected(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(
            "lang_pairs:\n  en-de:\n    source: nope.txt\n    docids: nope2.txt\n",
            encoding="utf-8",
        )
        assert main(["validate", "--config", str(cfg)]) == EXIT_USAGE

    def test_bad_window_rejected(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("w: 2\ns: 3\n", encoding="utf-8")
        assert main(["validate", "--config", str(cfg)]) == EXIT_USAGE
