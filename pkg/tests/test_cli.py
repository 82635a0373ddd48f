import csv

import pytest

from incutime import Dataset, DatasetValidationError, validate_dataset
from incutime.cli import main, parse_points, read_dataset_csv, write_dataset_csv
from incutime.simulate import ExposureSpec, TruthSpec, draw_singly


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _write_singly(path, pairs):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["e", "s"])
        writer.writerows(pairs)


def test_parse_points_range_and_list():
    assert parse_points("3:10") == [3, 4, 5, 6, 7, 8, 9, 10]
    assert parse_points("1,5,9") == [1, 5, 9]
    assert parse_points("7:7") == [7]
    with pytest.raises(ValueError):
        parse_points("10:3")
    with pytest.raises(ValueError):
        parse_points(",")


def test_dataset_csv_round_trip(tmp_path):
    data = validate_dataset(Dataset.doubly([3, 2, 5], [0, 1, 2], [2, 3, 6]))
    path = str(tmp_path / "d.csv")
    write_dataset_csv(path, data)
    again = read_dataset_csv(path, "double")
    assert again == data


def test_read_dataset_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("onset,exposure\n1,2\n")
    with pytest.raises(DatasetValidationError):
        read_dataset_csv(str(path), "single")


def test_simulate_writes_expected_shapes(tmp_path):
    out = str(tmp_path / "single.csv")
    truth_out = str(tmp_path / "truth.csv")
    code = main(
        [
            "simulate", "--mode", "single", "--model", "weibull",
            "--n", "40", "--seed", "7", "--out", out, "--truth-out", truth_out,
        ]
    )
    assert code == 0
    rows = _read_rows(out)
    assert rows[0] == ["e", "s"] and len(rows) == 41
    truth_rows = _read_rows(truth_out)
    assert truth_rows[0] == ["day", "fbar"] and len(truth_rows) == 16
    # day-averaged truth at the horizon integrates over (m1-1, m1], so it
    # sits just under 1 rather than exactly at it
    assert 0.999 < float(truth_rows[-1][1]) <= 1.0

    out2 = str(tmp_path / "double.csv")
    assert main(
        ["simulate", "--mode", "double", "--n", "40", "--seed", "7", "--out", out2]
    ) == 0
    rows2 = _read_rows(out2)
    assert rows2[0] == ["e", "sl", "sr"] and all(len(r) == 3 for r in rows2)


def test_simulate_is_reproducible(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for out in (a, b):
        main(["simulate", "--mode", "single", "--n", "60", "--seed", "3",
              "--out", str(out)])
    assert a.read_bytes() == b.read_bytes()


def test_fit_trivial_dataset(tmp_path):
    data_path = str(tmp_path / "d.csv")
    _write_singly(data_path, [(1, 1)] * 3)
    out = str(tmp_path / "fit.csv")
    code = main(["fit", "--mode", "single", "--data", data_path, "--out", out])
    assert code == 0
    rows = _read_rows(out)
    assert rows[0] == ["day", "mass", "fbar"]
    assert rows[1][0] == "1" and float(rows[1][1]) == 1.0


def test_fit_writes_trace(tmp_path):
    data_path = str(tmp_path / "d.csv")
    out = str(tmp_path / "fit.csv")
    trace_path = str(tmp_path / "trace.csv")
    data = draw_singly(
        120, TruthSpec(family="truncexp", a=6.0, m1=15), ExposureSpec(m2=15), seed=11
    )
    write_dataset_csv(data_path, data)
    code = main(
        ["fit", "--mode", "single", "--data", data_path, "--m1", "15",
         "--out", out, "--trace-out", trace_path]
    )
    assert code == 0
    rows = _read_rows(trace_path)
    assert rows[0] == ["iter", "criterion", "min_grad", "complementarity",
                       "support_size"]
    assert len(rows) > 1


def test_ci_wald_row_per_requested_day(tmp_path):
    data_path = str(tmp_path / "d.csv")
    out = str(tmp_path / "ci.csv")
    main(["simulate", "--mode", "single", "--n", "300", "--seed", "5",
          "--out", data_path])
    code = main(
        ["ci", "--mode", "single", "--data", data_path, "--method", "wald",
         "--m1", "15", "--points", "3:10", "--out", out]
    )
    assert code == 0
    rows = _read_rows(out)
    assert rows[0] == ["day", "estimate", "lower", "upper", "method", "variance"]
    assert [r[0] for r in rows[1:]] == [str(d) for d in range(3, 11)]
    assert all(r[4] == "wald" for r in rows[1:])


def test_ci_bootstrap_is_reproducible(tmp_path):
    data_path = str(tmp_path / "d.csv")
    main(["simulate", "--mode", "single", "--n", "200", "--seed", "5",
          "--out", data_path])
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for out in (a, b):
        code = main(
            ["ci", "--mode", "single", "--data", data_path, "--method",
             "bootstrap", "--b", "50", "--seed", "1", "--m1", "15",
             "--points", "4:8", "--out", str(out)]
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_exit_code_non_convergence(tmp_path):
    data_path = str(tmp_path / "d.csv")
    out = str(tmp_path / "fit.csv")
    main(["simulate", "--mode", "single", "--n", "200", "--seed", "5",
          "--out", data_path])
    code = main(
        ["fit", "--mode", "single", "--data", data_path, "--m1", "15",
         "--max-outer", "1", "--out", out]
    )
    assert code == 2


def test_exit_code_invalid_input(tmp_path):
    out = str(tmp_path / "x.csv")
    assert main(["fit", "--mode", "single", "--data",
                 str(tmp_path / "missing.csv"), "--out", out]) == 3

    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert main(["fit", "--mode", "single", "--data", str(bad),
                 "--out", out]) == 3

    data_path = str(tmp_path / "d.csv")
    main(["simulate", "--mode", "single", "--n", "50", "--seed", "5",
          "--out", data_path])
    assert main(
        ["ci", "--mode", "single", "--data", data_path, "--method", "wald",
         "--fisher-averaged", "--out", out]
    ) == 3
    assert main(
        ["ci", "--mode", "single", "--data", data_path, "--method", "wald",
         "--level", "0.93", "--out", out]
    ) == 3
    assert main(["fit", "--no-such-flag"]) == 3


def test_exit_code_infeasible_record(tmp_path):
    # an m1 far below the observed windows leaves the late record with no
    # grid day to place mass on
    path = tmp_path / "d.csv"
    path.write_text("e,sl,sr\n2,0,3\n1,10,12\n")
    out = str(tmp_path / "fit.csv")
    code = main(["fit", "--mode", "double", "--data", str(path), "--m1", "2",
                 "--out", out])
    assert code == 4


def test_exit_code_degenerate_fit(tmp_path):
    # every record pins day 1, so the fit has a single mass point and no
    # information matrix
    path = tmp_path / "d.csv"
    _write_singly(path, [(1, 1)] * 5)
    out = str(tmp_path / "ci.csv")
    code = main(["ci", "--mode", "single", "--data", str(path), "--method",
                 "wald", "--out", out])
    assert code == 4


def test_coverage_smoke(tmp_path):
    out = str(tmp_path / "cov.csv")
    code = main(
        ["coverage", "--mode", "single", "--method", "wald", "--n", "150",
         "--reps", "1", "--points", "4:6", "--seed", "2", "--out", out]
    )
    assert code == 0
    rows = _read_rows(out)
    assert rows[0] == ["day", "coverage", "mean_width", "failures"]
    assert [r[0] for r in rows[1:]] == ["4", "5", "6"]
    for r in rows[1:]:
        assert float(r[1]) in (0.0, 1.0)
        assert float(r[2]) > 0
        assert r[3] == "0"
