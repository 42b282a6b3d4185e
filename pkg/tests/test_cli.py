import json
import random
from pathlib import Path

import pytest

from langsel.cli import EXIT_ERROR, EXIT_NOTHING_SELECTED, EXIT_OK, main

TOY = Path(__file__).parent / "data" / "toy"


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out


def test_ingest_and_stats(tmp_path, capsys):
    src = tmp_path / "c.jsonl"
    write_jsonl(src, [{"id": "a", "code": "x = 1", "docstring": "doc"},
                      {"id": "b", "code": "y = 2"}])
    code, out = run(capsys, "ingest", src, "--language", "ruby", "--split", "train",
                    "--out", tmp_path / "copy.jsonl")
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["total"] == 2
    assert summary["bimodal"] == 1
    assert (tmp_path / "copy.jsonl").exists()

    code, out = run(capsys, "stats", tmp_path / "copy.jsonl", "--language", "ruby")
    assert code == EXIT_OK
    assert json.loads(out)["total"] == 2


def test_ingest_missing_file_is_input_error(tmp_path, capsys):
    code, _ = run(capsys, "ingest", tmp_path / "nope.jsonl", "--language", "x")
    assert code == EXIT_ERROR


def test_train_semsim_textsim_round_trip(tmp_path, capsys):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    shared = " ".join(f"tok{i}" for i in range(35))
    write_jsonl(a, [{"id": f"a{i}", "code": shared} for i in range(3)])
    write_jsonl(b, [{"id": f"b{i}", "code": shared} for i in range(3)])
    model = tmp_path / "model.bin"
    text_dump = tmp_path / "model.txt"
    code, _ = run(capsys, "train-embed", "--corpus", f"pa={a}", "--corpus", f"pb={b}",
                  "--out", model, "--dim", 8, "--epochs", 1, "--min-count", 2,
                  "--buckets", 64, "--seed", 4, "--export-text", text_dump)
    assert code == EXIT_OK
    assert model.exists() and text_dump.exists()

    code, out = run(capsys, "semsim", "--model", model, "--candidate", a, "--target", b)
    assert code == EXIT_OK
    assert float(out.strip()) == pytest.approx(1.0, abs=1e-6)

    clone_dump = tmp_path / "clones.jsonl"
    code, out = run(capsys, "textsim", "--candidate", a, "--target", b,
                    "--min-tokens", 30, "--export", clone_dump)
    assert code == EXIT_OK
    assert int(out.strip()) == 9  # 3 x 3 identical docs
    assert len(clone_dump.read_text().splitlines()) == 9

    code, out = run(capsys, "textsim", "--candidate", a, "--target", b,
                    "--min-tokens", 30, "--cap", 2)
    assert code == EXIT_OK
    assert out.strip() == "at least 2"


def test_eval_bleu_meteor_from_files(tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("the cat sat\n")
    ref.write_text("the cat sat down\n")
    code, out = run(capsys, "eval-bleu", "--hyp", hyp, "--ref", ref, "--max-n", 1)
    assert code == EXIT_OK
    assert float(out.strip()) == pytest.approx(71.65, abs=0.01)

    hyp.write_text("a b\n")
    ref.write_text("a b\n")
    code, out = run(capsys, "eval-meteor", "--hyp", hyp, "--ref", ref)
    assert code == EXIT_OK
    assert float(out.strip()) == pytest.approx(0.9375, abs=1e-6)


def test_eval_meteor_jsonl_and_synonyms(tmp_path, capsys):
    pairs = tmp_path / "pairs.jsonl"
    pairs.write_text(json.dumps({"hyp": "quick dog", "ref": "fast dog"}) + "\n")
    syn = tmp_path / "syn.tsv"
    syn.write_text("quick\tfast\n")
    code, plain = run(capsys, "eval-meteor", "--jsonl", pairs)
    code2, with_syn = run(capsys, "eval-meteor", "--jsonl", pairs, "--synonyms", syn)
    assert code == code2 == EXIT_OK
    assert float(with_syn.strip()) > float(plain.strip())


def test_eval_mrr(tmp_path, capsys):
    rankings = tmp_path / "ranks.jsonl"
    rankings.write_text(
        '{"qid": 1, "rank": 1, "candidates": 1000}\n'
        '{"qid": 2, "rank": 2, "candidates": 1000}\n'
        '{"qid": 3, "rank": 4, "candidates": 1000}\n'
    )
    code, out = run(capsys, "eval-mrr", "--rankings", rankings)
    assert code == EXIT_OK
    assert float(out.strip()) == pytest.approx(0.583333, abs=1e-6)


def test_utest(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("1\n2\n3\n")
    (tmp_path / "b.txt").write_text("4\n5\n6\n")
    code, out = run(capsys, "utest", "--a", tmp_path / "a.txt", "--b", tmp_path / "b.txt")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["u_a"] == 0.0
    assert payload["p_exact"] == pytest.approx(0.1)


def test_ptr_with_figure(tmp_path, capsys):
    records = tmp_path / "records.jsonl"
    write_jsonl(records, [
        {"model": "mono", "performance": 2.0, "seconds": 10.0},
        {"model": "multi", "performance": 4.0, "seconds": 40.0},
    ])
    figure = tmp_path / "ptr.png"
    out_csv = tmp_path / "ptr.csv"
    code, _ = run(capsys, "ptr", "--records", records, "--format", "csv",
                  "--out", out_csv, "--figure", figure)
    assert code == EXIT_OK
    assert "mono,2" in out_csv.read_text()
    assert figure.stat().st_size > 0


def test_bins_with_figure(tmp_path, capsys):
    corpus = tmp_path / "test.jsonl"
    write_jsonl(corpus, [
        {"id": str(i), "code": " ".join(["t"] * (i + 1))} for i in range(100)
    ])
    figure = tmp_path / "hist.png"
    bins_json = tmp_path / "bins.json"
    code, out = run(capsys, "bins", "--corpus", corpus, "--language", "x",
                    "--out", bins_json, "--figure", figure)
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["boundaries"] == [25.75, 50.5, 75.25]
    assert payload["sizes"] == [25, 25, 25, 25]
    assert figure.stat().st_size > 0
    assert len(json.loads(bins_json.read_text())["bins"]) == 4


def test_report_with_baseline(tmp_path, capsys):
    rows = tmp_path / "rows.json"
    rows.write_text(json.dumps([{"model": "tuned", "mrr": 0.57}]))
    code, out = run(capsys, "report", "--rows", rows, "--format", "csv",
                    "--baseline", 0.4219, "--value-column", "mrr")
    assert code == EXIT_OK
    assert "mrr_improvement_pct" in out
    improvement = float(out.splitlines()[1].split(",")[-1])
    assert improvement == pytest.approx(35.1, abs=0.1)


def test_recommend(capsys):
    code, out = run(capsys, "recommend", "search")
    assert code == EXIT_OK
    assert json.loads(out)["strategy"] == "combined-multilingual"
    code, out = run(capsys, "recommend", "summarization")
    assert json.loads(out)["strategy"] == "similarity-selection"


def test_suitability_toy_fixture(tmp_path, capsys):
    code, out = run(capsys, "suitability", "--config", TOY / "config.json",
                    "--out", tmp_path / "run", "--figures")
    assert code == EXIT_OK
    assert "selected: py" in out
    assert (tmp_path / "run" / "report.json").exists()
    assert (tmp_path / "run" / "report.csv").exists()
    assert (tmp_path / "run" / "suitability.png").exists()


def test_suitability_theta_zero_selects_all(tmp_path, capsys):
    code, out = run(capsys, "suitability", "--config", TOY / "config.json",
                    "--out", tmp_path / "run", "--theta", 0.0)
    assert code == EXIT_OK
    assert "selected: go, py" in out


def test_suitability_bimodal_only_flag(tmp_path, capsys):
    # toy documents all carry docstrings, so the filtered run still selects py
    code, out = run(capsys, "suitability", "--config", TOY / "config.json",
                    "--out", tmp_path / "run", "--bimodal-only")
    assert code == EXIT_OK
    assert "selected: py" in out


def test_suitability_nothing_selected_exits_2(tmp_path, capsys):
    # c1 wins the semantic signal (shuffled target tokens, no long runs);
    # c2 wins the textual signal (alien vocabulary plus one planted run).
    # With theta = 1 no candidate tops both, so nothing is selected.
    rng = random.Random(5)
    vocab = ("alpha beta gamma delta epsilon zeta eta theta iota kappa "
             "lam mu nu xi omicron pi rho sigma tau upsilon").split()
    target = [" ".join(rng.choice(vocab) for _ in range(40)) for _ in range(8)]
    planted = " ".join(target[0].split()[:30])
    c1 = []
    for doc in target:
        tokens = doc.split()
        rng.shuffle(tokens)
        c1.append(" ".join(tokens))
    c2 = [
        " ".join(rng.choice(["zork", "grue", "frotz", "plugh"]) for _ in range(30))
        + " " + planted
        for _ in range(4)
    ]
    for name, docs in (("t", target), ("c1", c1), ("c2", c2)):
        write_jsonl(tmp_path / f"{name}.jsonl",
                    [{"id": f"{name}-{i}", "code": code} for i, code in enumerate(docs)])
    config = {
        "target": "t",
        "corpora": {"t": ["t.jsonl"], "c1": ["c1.jsonl"], "c2": ["c2.jsonl"]},
        "theta": 1.0,
        "min_tokens": 30,
        "embedding": {"dim": 8, "epochs": 2, "negative": 3, "min_count": 2,
                      "buckets": 64},
        "seed": 3,
        "jobs": 1,
        "formats": ["json"],
    }
    (tmp_path / "config.json").write_text(json.dumps(config))
    code, out = run(capsys, "suitability", "--config", tmp_path / "config.json",
                    "--out", tmp_path / "run")
    assert code == EXIT_NOTHING_SELECTED


def test_bad_config_exits_1(tmp_path, capsys):
    (tmp_path / "config.json").write_text("{not json")
    code, _ = run(capsys, "suitability", "--config", tmp_path / "config.json")
    assert code == EXIT_ERROR


def test_usage_error_exits_1_not_2(capsys):
    # argparse's native exit code for usage errors is 2, which is reserved
    # for "no language selected"
    assert main(["no-such-command"]) == EXIT_ERROR
    assert main(["recommend", "translation"]) == EXIT_ERROR


def test_help_exits_0(capsys):
    assert main(["--help"]) == EXIT_OK
