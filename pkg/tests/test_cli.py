import csv
import filecmp
import json
import os

import pytest

from hfmoments.cli import main
from hfmoments.diagnostics import significance_code

SIM_SETTINGS = {
    "n_per_day": 66,
    "days": 40,
    "sigma": 0.01,
    "jump_intensity": 0.5,
    "jump_scale": 0.01,
    "seed": 7,
    "symbol": "TST",
    "volume_coupling": True,
}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.json"
    config.write_text(json.dumps({"sim": SIM_SETTINGS}))
    ticks = root / "ticks"
    records = root / "records"
    assert main(["--config", str(config), "--out-dir", str(ticks), "simulate"]) == 0
    assert (
        main(
            ["--out-dir", str(records), "compute", "--input-dir", str(ticks),
             "--estimator", "naive"]
        )
        == 0
    )
    return root, config, ticks, records


def read_csv_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestSimulateCompute:
    def test_tick_files_written(self, workspace):
        _, _, ticks, _ = workspace
        files = [f for f in os.listdir(ticks) if f.startswith("TST_")]
        assert len(files) == SIM_SETTINGS["days"]
        assert (ticks / "ground_truth.csv").exists()

    def test_records_file(self, workspace):
        _, _, _, records = workspace
        rows = read_csv_rows(records / "records_TST.csv")
        assert len(rows) == SIM_SETTINGS["days"]
        assert rows[0]["dret"] == ""
        assert rows[1]["dret"] != ""
        assert float(rows[1]["rvar"]) > 0

    def test_preavg_records_parse_cleanly(self, workspace, tmp_path):
        _, _, ticks, _ = workspace
        out = tmp_path / "pa"
        assert (
            main(["--out-dir", str(out), "compute", "--input-dir", str(ticks),
                  "--estimator", "preavg"])
            == 0
        )
        text = (out / "records_TST.csv").read_text()
        assert "np.float" not in text
        reg_out = tmp_path / "pa_reg"
        assert (
            main(["--out-dir", str(reg_out), "regress", "--records",
                  str(out / "records_TST.csv"), "--models", "20", "22"])
            == 0
        )
        rows = read_csv_rows(reg_out / "results.csv")
        assert {r["model_id"] for r in rows} == {"20", "22"}
        regs = {r["regressor"] for r in rows if r["regressor"]}
        assert {"nrskew", "nrkurt"} <= regs

    def test_corrupt_file_skipped(self, workspace, tmp_path):
        root, config, ticks, _ = workspace
        import shutil

        broken_dir = tmp_path / "broken"
        shutil.copytree(ticks, broken_dir)
        bad = broken_dir / "TST_2021-01-01.csv"
        bad.write_text("time,price,size\nnot-a-time,xx,yy\n")
        out = tmp_path / "rec"
        assert main(["--out-dir", str(out), "compute", "--input-dir", str(broken_dir)]) == 0
        rows = read_csv_rows(out / "records_TST.csv")
        assert len(rows) == SIM_SETTINGS["days"]


class TestRegress:
    def test_results_table_and_code_consistency(self, workspace, tmp_path):
        _, _, _, records = workspace
        out = tmp_path / "reg"
        rc = main(
            ["--out-dir", str(out), "regress", "--records",
             str(records / "records_TST.csv"), "--models", "21", "24", "34"]
        )
        assert rc == 0
        rows = read_csv_rows(out / "results.csv")
        model_ids = {r["model_id"] for r in rows}
        assert model_ids == {"21", "24", "34"}
        for row in rows:
            if row["regressor"]:
                assert row["code"] == significance_code(float(row["p_value"]))
                assert float(row["std_error"]) > 0
            else:
                assert 0.0 <= float(row["r_squared"]) <= 1.0
                assert row["n_obs"]

    def test_horizon_expansion(self, workspace, tmp_path):
        _, _, _, records = workspace
        out = tmp_path / "regh"
        main(
            ["--out-dir", str(out), "regress", "--records",
             str(records / "records_TST.csv"), "--models", "21",
             "--horizons", "1", "2", "5"]
        )
        rows = read_csv_rows(out / "results.csv")
        assert {r["horizon"] for r in rows} == {"1", "2", "5"}
        by_h = {h: [r for r in rows if r["horizon"] == h and not r["regressor"]] for h in ("1", "2", "5")}
        assert int(by_h["1"][0]["n_obs"]) == SIM_SETTINGS["days"] - 2
        assert int(by_h["5"][0]["n_obs"]) == SIM_SETTINGS["days"] - 6

    def test_unknown_model_rejected(self, workspace, tmp_path):
        _, _, _, records = workspace
        with pytest.raises(SystemExit):
            main(
                ["--out-dir", str(tmp_path), "regress", "--records",
                 str(records / "records_TST.csv"), "--models", "99"]
            )

    def test_sqrt_kurtosis_form(self, workspace, tmp_path):
        _, _, _, records = workspace
        out = tmp_path / "regs"
        main(
            ["--out-dir", str(out), "regress", "--records",
             str(records / "records_TST.csv"), "--models", "24",
             "--kurtosis-form", "sqrt_rkurt"]
        )
        rows = read_csv_rows(out / "results.csv")
        assert {r["regressor"] for r in rows if r["regressor"]} == {"tvol", "sqrt_rkurt"}


class TestOosSelectReport:
    def test_oos_row(self, workspace, tmp_path):
        _, _, _, records = workspace
        out = tmp_path / "oos"
        rc = main(
            ["--out-dir", str(out), "oos", "--records",
             str(records / "records_TST.csv"), "--pair", "28,31",
             "--train", "25", "--test", "14"]
        )
        assert rc == 0
        rows = read_csv_rows(out / "oos.csv")
        assert rows[0]["comparison"] == "(31) versus (28)"
        assert [rows[0][k] for k in ("cv_0.90", "cv_0.95", "cv_0.99")] == [
            "0.449", "0.698", "1.3",
        ]
        assert float(rows[0]["mse_1"]) > 0

    def test_nonnested_pair_fails(self, workspace, tmp_path):
        _, _, _, records = workspace
        with pytest.raises(ValueError):
            main(
                ["--out-dir", str(tmp_path), "oos", "--records",
                 str(records / "records_TST.csv"), "--pair", "29,31",
                 "--train", "25", "--test", "14"]
            )

    def test_select_writes_token(self, workspace, tmp_path, capsys):
        _, _, _, records = workspace
        out = tmp_path / "sel"
        rc = main(
            ["--out-dir", str(out), "select", "--records",
             str(records / "records_TST.csv")]
        )
        assert rc == 0
        token = capsys.readouterr().out.strip()
        rows = read_csv_rows(out / "selection.csv")
        assert rows[0]["token"] == token
        assert token == "1" or all(
            part in {"dret^+", "dret^-", "rskew", "rkurt", "tvol"}
            for part in token.split("+")
        )

    def test_report_summary_and_counts(self, workspace, tmp_path):
        _, _, _, records = workspace
        import shutil

        batch = tmp_path / "batch"
        batch.mkdir()
        shutil.copy(records / "records_TST.csv", batch / "records_AAA.csv")
        shutil.copy(records / "records_TST.csv", batch / "records_BBB.csv")
        out = tmp_path / "rep"
        rc = main(["--out-dir", str(out), "report", "--records-dir", str(batch)])
        assert rc == 0
        with open(out / "summary.csv") as fh:
            header = fh.readline().strip()
        assert header == "symbol,dret&rskew,tvol,dret^+&dret^-,all,covariate selection"
        rows = read_csv_rows(out / "summary.csv")
        assert [r["symbol"] for r in rows] == ["AAA", "BBB"]
        assert rows[0]["dret&rskew"] == rows[1]["dret&rskew"]
        counts = read_csv_rows(out / "counts.csv")
        total = sum(int(r["count"]) for r in counts if r["context"] == "tvol")
        assert total == 2


class TestDeterminism:
    def test_pipeline_byte_identical(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"sim": dict(SIM_SETTINGS, days=25)}))
        outputs = []
        for tag in ("one", "two"):
            base = tmp_path / tag
            main(["--config", str(config), "--out-dir", str(base / "ticks"), "simulate"])
            main(["--out-dir", str(base / "rec"), "compute", "--input-dir", str(base / "ticks")])
            main(
                ["--out-dir", str(base / "reg"), "regress", "--records",
                 str(base / "rec" / "records_TST.csv"), "--models", "21", "24"]
            )
            main(["--out-dir", str(base / "rep"), "report", "--records-dir", str(base / "rec")])
            outputs.append(base)
        for rel in (
            "ticks/ground_truth.csv", "rec/records_TST.csv", "reg/results.csv",
            "rep/summary.csv", "rep/counts.csv",
        ):
            a, b = outputs[0] / rel, outputs[1] / rel
            assert filecmp.cmp(a, b, shallow=False), rel
