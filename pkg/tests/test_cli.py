import io
import json
import math

import numpy as np
import pandas as pd
import pytest

from smallcells import analytic
from smallcells.cli import build_parser, main, resolve_config
from smallcells.errors import QuadratureError
from smallcells.sampler import SampleStreamSpec, sample_array


def run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


def test_rates_standard_2d():
    assert run(["rates", "--standard-2d"]) == (0, "1 1\n")


def test_rates_from_model_file(model_dir):
    code, out = run(["rates", "--model", str(model_dir / "sixty_degrees.model")])
    assert code == 0
    rates = [float(r) for r in out.split()]
    assert rates == pytest.approx([1.2124356, 0.5196152], abs=1e-7)


def test_rates_standard_3d():
    code, out = run(["rates", "--standard-3d"])
    assert code == 0
    assert [float(r) for r in out.split()] == pytest.approx([1.0, 1.0, 1.0])


def test_sample_matches_library(standard_2d):
    code, out = run(["sample", "--standard-2d", "--n", "4", "--seed", "9"])
    assert code == 0
    rows = np.array([[float(v) for v in line.split(",")] for line in out.splitlines()])
    expected = sample_array(standard_2d, SampleStreamSpec(seed=9, count=4))
    assert np.array_equal(rows, expected)


def test_sample_empty_stream():
    assert run(["sample", "--standard-2d", "--n", "0"]) == (0, "")


def test_sample_to_directory(tmp_path):
    code, out = run(["sample", "--standard-3d", "--n", "3", "--out", str(tmp_path)])
    assert (code, out) == (0, "")
    lines = (tmp_path / "cells.csv").read_text().splitlines()
    assert len(lines) == 3
    assert all(len(line.split(",")) == 3 for line in lines)


def test_usage_errors(capsys):
    assert run(["rates"])[0] == 1
    assert run(["rates", "--standard-2d", "--bogus"])[0] == 1
    assert run(["rates", "--standard-2d", "--standard-3d"])[0] == 1
    assert run(["rates", "--standard-2d", "--seed", str(2**64)])[0] == 1
    assert run(["rates", "--standard-2d", "--eps", "0.1,x"])[0] == 1
    assert run(["bogus", "--standard-2d"])[0] == 1
    assert "usage" in capsys.readouterr().err


def test_missing_model_file(tmp_path, capsys):
    code, out = run(["rates", "--model", str(tmp_path / "nope.model")])
    assert (code, out) == (1, "")
    assert "cannot be found" in capsys.readouterr().err


def test_invalid_model_file(model_dir):
    assert run(["rates", "--model", str(model_dir / "bad_weights.model")])[0] == 1
    assert run(["rates", "--model", str(model_dir / "malformed.model")])[0] == 1


def test_resolve_config_defaults(monkeypatch):
    monkeypatch.delenv("SMALLCELLS_THREADS", raising=False)
    cfg = resolve_config(build_parser().parse_args(["study", "--standard-2d"]))
    assert cfg.model == "standard-2d"
    assert (cfg.seed, cfg.n, cfg.k, cfg.threads) == (42, 10**8, 150, 1)
    assert cfg.out is None


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("SMALLCELLS_THREADS", "3")
    cfg = resolve_config(build_parser().parse_args(["rates", "--standard-2d"]))
    assert cfg.threads == 3
    cfg = resolve_config(build_parser().parse_args(["rates", "--standard-2d", "--threads", "2"]))
    assert cfg.threads == 2


def test_bad_threads_environment(monkeypatch):
    monkeypatch.setenv("SMALLCELLS_THREADS", "many")
    assert run(["rates", "--standard-2d"])[0] == 1


def _frame(text):
    return pd.read_csv(io.StringIO(text))


def test_analytic_cdf():
    code, out = run(["analytic", "cdf-half-perimeter", "--standard-2d", "--threshold", "1,2"])
    assert code == 0
    frame = _frame(out)
    assert list(frame.columns) == ["quantity", "eps", "threshold", "value", "method", "est_error"]
    assert frame["value"].iloc[0] == pytest.approx(0.2642411, abs=1e-7)
    assert frame["method"].tolist() == ["closed_form", "closed_form"]
    assert frame["eps"].isna().all()
    assert frame["est_error"].isna().all()


def test_analytic_conditional_grid(model_dir):
    code, out = run(
        [
            "analytic",
            "cond-sigma-perimeter",
            "--model",
            str(model_dir / "sixty_degrees.model"),
            "--eps",
            "0.1,0.5",
            "--threshold",
            "1",
        ]
    )
    assert code == 0
    frame = _frame(out)
    assert frame["eps"].tolist() == [0.1, 0.5]
    assert (frame["value"] > 0).all() and (frame["value"] < 1).all()
    assert (frame["est_error"] < 1e-6).all()


def test_analytic_area_consensus():
    code, out = run(["analytic", "prob-area-less", "--standard-2d", "--threshold", "0.25"])
    assert code == 0
    frame = _frame(out)
    assert frame["method"].iloc[0] == "consensus"
    assert frame["est_error"].iloc[0] < 1e-8


def test_analytic_e1():
    code, out = run(["analytic", "e1", "--standard-2d", "--threshold", "1"])
    assert code == 0
    assert _frame(out)["value"].iloc[0] == pytest.approx(0.21938393, abs=1e-8)


def test_analytic_needs_eps():
    assert run(["analytic", "cond-sigma-area", "--standard-2d", "--threshold", "0.1"])[0] == 1
    assert run(["analytic", "cdf-half-perimeter", "--standard-2d"])[0] == 1


def test_analytic_planar_only():
    code, _ = run(["analytic", "cdf-half-perimeter", "--standard-3d", "--threshold", "1"])
    assert code == 1


def test_numeric_failure_exit_code(monkeypatch):
    def fail(*args, **kwargs):
        raise QuadratureError("did not converge")

    monkeypatch.setattr(analytic, "cdf_half_perimeter", fail)
    code, _ = run(["analytic", "cdf-half-perimeter", "--standard-2d", "--threshold", "1"])
    assert code == 2


def test_tessellate():
    code, out = run(["tessellate", "--standard-2d", "--window", "0,0,2,2", "--seed", "3"])
    assert code == 0
    frame = _frame(out)
    assert list(frame.columns) == ["family", "offset", "x0", "y0", "x1", "y1"]
    assert set(frame["family"]) <= {1, 2}


def test_tessellate_needs_window():
    assert run(["tessellate", "--standard-2d"])[0] == 1


def test_topk_to_stdout():
    code, out = run(
        ["topk", "--standard-2d", "--n", "1000", "--k", "5", "--functional", "half-perimeter"]
    )
    assert code == 0
    frame = _frame(out)
    assert list(frame.columns) == ["sample_index", "x1", "x2", "size"]
    assert len(frame) == 5
    assert frame["size"].is_monotonic_increasing


def test_topk_needs_functional_without_out():
    assert run(["topk", "--standard-2d", "--n", "100", "--k", "5"])[0] == 1


def test_topk_unknown_functional():
    assert run(["topk", "--standard-2d", "--n", "100", "--functional", "diameter"])[0] == 1


def test_topk_to_directory(tmp_path):
    code, _ = run(["topk", "--standard-2d", "--n", "1000", "--k", "5", "--out", str(tmp_path)])
    assert code == 0
    assert {p.name for p in tmp_path.iterdir()} == {
        "topk_area.csv",
        "topk_geom-area.csv",
        "topk_half-perimeter.csv",
    }


def test_study(tmp_path, monkeypatch):
    monkeypatch.setenv("SMALLCELLS_THREADS", "2")
    out_dir = tmp_path / "study"
    code, out = run(
        ["study", "--standard-2d", "--n", "3000", "--k", "10", "--seed", "5", "--out", str(out_dir)]
    )
    assert code == 0
    assert out == f"{out_dir}\n"
    payload = json.loads((out_dir / "report.json").read_text())
    assert payload["config"]["command"] == "study"
    assert payload["config"]["threads"] == 2
    assert payload["config"]["seed"] == 5
    assert payload["k"] == 10
    assert (out_dir / "hist_half-perimeter_sigma.csv").exists()


def test_study_output_is_reproducible(tmp_path, monkeypatch):
    argv = ["study", "--standard-3d", "--n", "5000", "--k", "12", "--seed", "17"]
    argv += ["--out", "study"]
    contents = []
    for name in ("first", "second"):
        (tmp_path / name).mkdir()
        monkeypatch.chdir(tmp_path / name)
        assert run(argv)[0] == 0
        out_dir = tmp_path / name / "study"
        contents.append({p.name: p.read_bytes() for p in sorted(out_dir.iterdir())})
    assert "report.json" in contents[0]
    assert contents[0] == contents[1]


def test_study_rejects_small_n(tmp_path):
    code, _ = run(["study", "--standard-2d", "--n", "5", "--k", "10", "--out", str(tmp_path)])
    assert code == 1


def test_convergence_to_stdout():
    code, out = run(
        [
            "convergence",
            "--standard-2d",
            "--n",
            "2000",
            "--eps",
            "0.5",
            "--threshold",
            "0.5,1",
            "--functional",
            "half-perimeter",
        ]
    )
    assert code == 0
    frame = _frame(out)
    assert len(frame) == 4
    assert frame["quad"].iloc[0] == pytest.approx(0.5)
    assert not math.isnan(frame["mc"].iloc[0])


def test_convergence_needs_grids():
    assert run(["convergence", "--standard-2d", "--n", "100", "--eps", "0.5"])[0] == 1


def test_convergence_to_directory(tmp_path):
    code, _ = run(
        [
            "convergence",
            "--standard-2d",
            "--n",
            "2000",
            "--eps",
            "0.5",
            "--threshold",
            "0.5",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["functional"] == "area"
    assert payload["config"]["eps"] == [0.5]
