"""End-to-end CLI coverage: every subcommand, exit codes, determinism."""

from __future__ import annotations

import json

import pytest

import homopart as hp
from homopart import cli


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    summary = None
    for line in captured.out.splitlines():
        if line.startswith("{"):
            summary = json.loads(line)
    return code, summary, captured.err


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """synth -> qc -> pairwise outputs shared by the command tests."""
    root = tmp_path_factory.mktemp("cli")
    code = cli.run([
        "synth", "--families", "10", "--family-size", "5",
        "--min-len", "60", "--max-len", "140", "--mutation-rate", "0.45",
        "--negative-fraction", "0.5", "--seed", "21",
        "--out", str(root / "synth"),
    ])
    assert code == 0
    code = cli.run([
        "qc", "--pos", str(root / "synth/positives.fasta"),
        "--neg", str(root / "synth/negatives.fasta"),
        "--min-len", "50", "--max-len", "1000",
        "--out", str(root / "qc"),
    ])
    assert code == 0
    code = cli.run([
        "pairwise", "--fasta", str(root / "qc/pos_kept.fasta"),
        "--fasta", str(root / "qc/neg_kept.fasta"),
        "--floor", "0.25", "--workers", "2",
        "--out", str(root / "pairwise"),
    ])
    assert code == 0
    code = cli.run([
        "partition",
        "--pos", str(root / "qc/pos_kept.fasta"),
        "--neg", str(root / "qc/neg_kept.fasta"),
        "--store", str(root / "pairwise/identities.tsv"),
        "--k", "3", "--ts", "0.4", "--tc", "0.5", "--tc", "0.0",
        "--seed", "7", "--dataset", "toy",
        "--out", str(root / "parts"),
    ])
    assert code == 0
    return root


class TestPipelineCommands:
    def test_synth_outputs(self, workspace):
        assert (workspace / "synth/positives.fasta").exists()
        assert (workspace / "synth/negatives.fasta").exists()
        assert (workspace / "synth/run_config.json").exists()

    def test_qc_counts_match_library(self, workspace, capsys):
        code, summary, _ = run_cli(
            capsys, "qc", "--pos", str(workspace / "synth/positives.fasta"),
            "--out", str(workspace / "qc_again"),
        )
        assert code == 0
        kept, dropped = hp.quality_filter(
            hp.parse_fasta(workspace / "synth/positives.fasta", "positive")
        )
        assert summary["pos_kept"] == len(kept)
        assert summary["pos_dropped"] == len(dropped)

    def test_qc_log_schema(self, workspace):
        lines = (workspace / "qc/qc_pos.tsv").read_text().splitlines()
        assert lines[0] == "id\treason"

    def test_store_roundtrips(self, workspace):
        store = hp.IdentityStore.load(workspace / "pairwise/identities.tsv")
        assert store.floor == 0.25
        assert len(store) > 0

    def test_partition_then_verify_passes(self, workspace, capsys):
        manifest = workspace / "parts/partition_ts0.4_tc0.5.json"
        assert manifest.exists()
        code, summary, _ = run_cli(
            capsys, "verify", "--manifest", str(manifest),
            "--store", str(workspace / "pairwise/identities.tsv"),
            "--out", str(workspace / "verify"),
        )
        assert code == 0
        assert summary["passed"] is True
        assert summary["violations"] == 0
        report = json.loads((workspace / "verify/verify_report.json").read_text())
        assert report["passed"] is True

    def test_verify_detects_tampering(self, workspace, tmp_path, capsys):
        manifest = json.loads(
            (workspace / "parts/partition_ts0.4_tc0.0.json").read_text()
        )
        # move one member of a family into another split to plant a violation
        store = hp.IdentityStore.load(workspace / "pairwise/identities.tsv")
        moved = None
        for a, b, ident in store.pairs():
            if ident > 0.4:
                pool0 = manifest["splits"][0]["positives"]
                pool1 = manifest["splits"][1]["positives"]
                if a in pool0 and b in pool0:
                    pool0.remove(a)
                    pool1.append(a)
                    moved = a
                    break
        assert moved is not None
        bad_path = tmp_path / "tampered.json"
        bad_path.write_text(json.dumps(manifest))
        code, summary, err = run_cli(
            capsys, "verify", "--manifest", str(bad_path),
            "--store", str(workspace / "pairwise/identities.tsv"),
        )
        assert code == 2
        assert summary["passed"] is False
        assert summary["violations"] >= 1

    def test_partition_rerun_byte_identical(self, workspace, tmp_path, capsys):
        args = [
            "partition",
            "--pos", str(workspace / "qc/pos_kept.fasta"),
            "--neg", str(workspace / "qc/neg_kept.fasta"),
            "--store", str(workspace / "pairwise/identities.tsv"),
            "--k", "3", "--ts", "0.4", "--tc", "0.5", "--tc", "0.0",
            "--seed", "7", "--dataset", "toy",
        ]
        code = cli.run(args + ["--out", str(tmp_path / "again")])
        assert code == 0
        for name in ("partition_ts0.4_tc0.5.json", "partition_ts0.4_tc0.0.json"):
            a = (workspace / "parts" / name).read_bytes()
            b = (tmp_path / "again" / name).read_bytes()
            assert a == b

    def test_pairwise_workers_invariant(self, workspace, tmp_path):
        outputs = []
        for i, workers in enumerate(("1", "4", "8")):
            out = tmp_path / f"w{i}"
            code = cli.run([
                "pairwise", "--fasta", str(workspace / "qc/pos_kept.fasta"),
                "--floor", "0.25", "--workers", workers, "--out", str(out),
            ])
            assert code == 0
            outputs.append((out / "identities.tsv").read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_balance_hard(self, workspace, capsys):
        code, summary, _ = run_cli(
            capsys, "balance",
            "--manifest", str(workspace / "parts/partition_ts0.4_tc0.0.json"),
            "--strategy", "hard", "--seed", "3",
            "--out", str(workspace / "balanced"),
        )
        assert code == 0
        doc = json.loads(
            (workspace / "balanced" / summary["manifests"][0]).read_text()
        )
        assert doc["strategy"]["name"] == "hard"
        for split in doc["splits"]:
            assert len(split["negatives"]) <= max(len(split["positives"]), 1)

    def test_balance_length_needs_fastas(self, workspace, capsys):
        code, _, err = run_cli(
            capsys, "balance",
            "--manifest", str(workspace / "parts/partition_ts0.4_tc0.0.json"),
            "--strategy", "length", "--seed", "3",
            "--out", str(workspace / "balanced_len"),
        )
        assert code == 1
        code, summary, _ = run_cli(
            capsys, "balance",
            "--manifest", str(workspace / "parts/partition_ts0.4_tc0.0.json"),
            "--strategy", "length", "--seed", "3",
            "--pos", str(workspace / "qc/pos_kept.fasta"),
            "--neg", str(workspace / "qc/neg_kept.fasta"),
            "--out", str(workspace / "balanced_len"),
        )
        assert code == 0

    def test_balance_minimal(self, workspace, capsys):
        code, summary, _ = run_cli(
            capsys, "balance",
            "--manifest", str(workspace / "parts/partition_ts0.4_tc0.0.json"),
            "--strategy", "minimal", "--seed", "3",
            "--store", str(workspace / "pairwise/identities.tsv"),
            "--scope", "global",
            "--out", str(workspace / "balanced_min"),
        )
        assert code == 0
        doc = json.loads(
            (workspace / "balanced_min" / summary["manifests"][0]).read_text()
        )
        sizes = {(len(s["positives"]), len(s["negatives"]))
                 for s in doc["splits"]}
        assert len(sizes) == 1

    def test_baseline_partition_and_hist(self, workspace, capsys):
        code, summary, _ = run_cli(
            capsys, "baseline-partition",
            "--pos", str(workspace / "qc/pos_kept.fasta"),
            "--neg", str(workspace / "qc/neg_kept.fasta"),
            "--store", str(workspace / "pairwise/identities.tsv"),
            "--ts", "0.4", "--k", "3", "--seed", "1",
            "--out", str(workspace / "baseline"),
        )
        assert code == 0
        code, summary, _ = run_cli(
            capsys, "hist",
            "--set-a", str(workspace / "qc/pos_kept.fasta"),
            "--set-b", str(workspace / "qc/neg_kept.fasta"),
            "--store", str(workspace / "pairwise/identities.tsv"),
            "--bins", "25", "--out", str(workspace / "hist"),
        )
        assert code == 0
        lines = (workspace / "hist/hist.csv").read_text().splitlines()
        assert lines[0] == "bin_lo,bin_hi,all_vs_all,maximum"
        assert len(lines) == 26

    def test_derive_train(self, workspace, capsys):
        code, summary, _ = run_cli(
            capsys, "derive-train",
            "--manifest", str(workspace / "parts/partition_ts0.4_tc0.5.json"),
            "--test-split", "0",
            "--store", str(workspace / "pairwise/identities.tsv"),
            "--ts", "0.4", "--train-tc", "0.4",
            "--out", str(workspace / "derived"),
        )
        assert code == 0
        doc = json.loads((workspace / "derived/train_set.json").read_text())
        assert doc["params"]["t_s"] == 0.4
        assert summary["positives"] == len(doc["train"]["positives"])

    def test_difficulty(self, workspace, capsys):
        code, summary, _ = run_cli(
            capsys, "difficulty",
            "--train-pos", str(workspace / "qc/pos_kept.fasta"),
            "--train-neg", str(workspace / "qc/neg_kept.fasta"),
            "--test-pos", str(workspace / "qc/pos_kept.fasta"),
            "--test-neg", str(workspace / "qc/neg_kept.fasta"),
            "--store", str(workspace / "pairwise/identities.tsv"),
        )
        assert code == 0
        assert summary["verdict"] == "no_sig"  # identical sets


class TestStandaloneCommands:
    def test_split_by_date(self, tmp_path, capsys):
        fasta = tmp_path / "dated.fasta"
        fasta.write_text(
            ">early created=2019-05-01\n" + "ACDEFGHIKL" * 6 + "\n"
            ">boundary created=2020-12-31\n" + "MNPQRSTVWY" * 6 + "\n"
            ">late created=2021-01-01\n" + "ACDEFGHIKW" * 6 + "\n"
        )
        code, summary, _ = run_cli(
            capsys, "split-by-date", "--fasta", str(fasta),
            "--cutoff", "2020-12-31", "--out", str(tmp_path / "dated"),
        )
        assert code == 0
        assert summary["before_or_on"] == 2 and summary["after"] == 1
        before = hp.parse_fasta(tmp_path / "dated/before_or_on.fasta", "positive")
        assert set(before.ids()) == {"early", "boundary"}

    def test_split_by_date_sidecar(self, tmp_path, capsys):
        fasta = tmp_path / "plain.fasta"
        fasta.write_text(">a\n" + "ACDEFGHIKL" * 6 + "\n")
        meta = tmp_path / "meta.json"
        meta.write_text('{"a": {"created": "2022-01-01"}}')
        code, summary, _ = run_cli(
            capsys, "split-by-date", "--fasta", str(fasta),
            "--cutoff", "2020-12-31", "--meta", str(meta),
            "--out", str(tmp_path / "out"),
        )
        assert code == 0
        assert summary["after"] == 1

    def test_evaluate(self, tmp_path, capsys):
        scores = tmp_path / "scores.tsv"
        scores.write_text(
            "id\tlabel\tscore\n"
            "a\t1\t0.9\nb\t1\t0.4\nc\t0\t0.6\nd\t0\t0.2\n"
        )
        code, summary, _ = run_cli(capsys, "evaluate", "--scores", str(scores))
        assert code == 0
        assert summary["auroc"] == 0.75
        assert summary["background_auprc"] == 0.5

    def test_stats(self, tmp_path, capsys):
        csv = tmp_path / "table.csv"
        csv.write_text(
            "dataset,m0,m1,m2\n"
            "d0,0.9,0.5,0.1\nd1,0.8,0.6,0.2\nd2,0.95,0.55,0.15\n"
            "d3,0.85,0.45,0.05\nd4,0.9,0.5,0.2\nd5,0.8,0.6,0.1\n"
        )
        code, summary, _ = run_cli(capsys, "stats", "--table", str(csv),
                                   "--alpha", "0.05")
        assert code == 0
        assert summary["friedman_p"] < 0.05
        assert ["m0", "m2"] in summary["significant_pairs"]


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, tmp_path, capsys):
        code, summary, err = run_cli(
            capsys, "qc", "--bogus-flag", "x", "--out", str(tmp_path / "o")
        )
        assert code == 1
        assert summary is None
        assert not (tmp_path / "o").exists()

    def test_unknown_subcommand(self, capsys):
        code, _, _ = run_cli(capsys, "frobnicate")
        assert code == 1

    def test_missing_input_file(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "qc", "--pos", str(tmp_path / "nope.fasta"),
            "--out", str(tmp_path / "o"),
        )
        assert code == 2
        assert err

    def test_malformed_fasta(self, tmp_path, capsys):
        bad = tmp_path / "bad.fasta"
        bad.write_text("ACDE\n>a\nACDE\n")
        code, _, err = run_cli(
            capsys, "qc", "--pos", str(bad), "--out", str(tmp_path / "o")
        )
        assert code == 2

    def test_infeasible_minimal_is_exit_3(self, tmp_path, capsys):
        # a t_c = 0.7 manifest whose store anchors almost nothing: the minimal
        # strategy cannot reach its negative target
        manifest = {
            "version": 1,
            "params": {"k": 2, "t_s": 0.4, "t_c": 0.7, "seed": 0, "dataset": "d"},
            "splits": [
                {"index": 0, "positives": ["p0"], "negatives": ["n0", "n1", "n2"]},
                {"index": 1, "positives": ["p1"], "negatives": ["n3", "n4", "n5"]},
            ],
            "removed": [],
            "unassigned_negatives": [],
        }
        mpath = tmp_path / "m.json"
        mpath.write_text(json.dumps(manifest))
        store = hp.IdentityStore(0.25, hp.ScoringScheme(), {("n0", "p0"): 0.9})
        spath = tmp_path / "s.tsv"
        store.save(spath)
        code, _, err = run_cli(
            capsys, "balance", "--manifest", str(mpath),
            "--strategy", "minimal", "--store", str(spath),
            "--out", str(tmp_path / "o"),
        )
        assert code == 3
        assert "anchored" in err

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.run(["--version"])
        assert exc.value.code == 0


class TestAdditionalPaths:
    def test_hist_exact_mode(self, workspace, tmp_path, capsys):
        code, summary, _ = run_cli(
            capsys, "hist",
            "--set-a", str(workspace / "qc/pos_kept.fasta"),
            "--set-b", str(workspace / "qc/neg_kept.fasta"),
            "--exact", "--bins", "10", "--out", str(tmp_path / "h"),
        )
        assert code == 0
        lines = (tmp_path / "h/hist.csv").read_text().splitlines()
        assert len(lines) == 11
        # exact mode sees every cross pair, including sub-floor ones
        kept_pos = hp.parse_fasta(workspace / "qc/pos_kept.fasta", "positive")
        kept_neg = hp.parse_fasta(workspace / "qc/neg_kept.fasta", "negative")
        assert summary["pairs"] == len(kept_pos) * len(kept_neg)

    def test_evaluate_out_writes_config(self, tmp_path, capsys):
        scores = tmp_path / "scores.tsv"
        scores.write_text("id\tlabel\tscore\na\t1\t0.9\nb\t0\t0.1\n")
        code, _, _ = run_cli(capsys, "evaluate", "--scores", str(scores),
                             "--out", str(tmp_path / "m"))
        assert code == 0
        doc = json.loads((tmp_path / "m/metrics.json").read_text())
        assert doc["config"]["scores"] == str(scores)
        assert "out" not in doc["config"]
