"""Config parsing, report formats, and end-to-end command runs at toy sizes."""

import pytest

from fracwave.cli import (
    CSV_HEADER,
    TRAJECTORY_HEADER,
    ConfigError,
    main,
    parse_config,
    run,
)


def test_parse_full_study_line():
    cfg = parse_config("command=temporal-study example=ex1 alpha=1.4,1.5,1.8 N=128,256,512,1024")
    assert cfg.command == "temporal-study"
    assert cfg.alpha == [1.4, 1.5, 1.8]
    assert cfg.N == [128, 256, 512, 1024]
    assert cfg.threads == 1
    assert cfg.timing == "fixed"


def test_parse_requires_command():
    with pytest.raises(ConfigError, match="command"):
        parse_config("")


@pytest.mark.parametrize(
    "line,key",
    [
        ("command=temporal-study alpha=2.5 N=8,16", "alpha"),
        ("command=temporal-study alpha=1.5 N=1,16", "N"),
        ("command=spatial-study alpha=1.5 Ms=1,8", "Ms"),
        ("command=temporal-study alpha=1.5 N=8,16 r=0.5", "r"),
        ("command=temporal-study alpha=1.5 N=8,16 quadrature=9", "quadrature"),
        ("command=temporal-study alpha=1.5 N=8,16 tol=0", "tol"),
        ("command=temporal-study alpha=1.5 N=8,16 threads=0", "threads"),
        ("command=caputo-check beta=1.5 sigma=1 N=8,16", "beta"),
        ("command=temporal-study alpha=1.5 N=8,16 timing=cpu", "timing"),
        ("command=fit alpha=1.5 N=8,16", "command"),
        ("command=temporal-study example=ex9 alpha=1.5 N=8,16", "ex"),
    ],
)
def test_parse_rejects_and_names_offender(line, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(line)


def test_parse_rejects_unknown_and_duplicate_keys():
    with pytest.raises(ConfigError, match="mesh"):
        parse_config("command=solve alpha=1.5 N=4 mesh=fine")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("command=solve alpha=1.5 alpha=1.6 N=4")
    with pytest.raises(ConfigError, match="key=value"):
        parse_config("temporal-study")


def test_parse_command_specific_requirements():
    with pytest.raises(ConfigError, match="alpha"):
        parse_config("command=temporal-study N=8,16")
    with pytest.raises(ConfigError, match="two entries"):
        parse_config("command=temporal-study alpha=1.5 N=8")
    with pytest.raises(ConfigError, match="beta and sigma"):
        parse_config("command=caputo-check N=8,16")
    with pytest.raises(ConfigError, match="one N"):
        parse_config("command=solve alpha=1.5 N=4,8")


def test_threads_env_override(monkeypatch):
    monkeypatch.setenv("FRACWAVE_THREADS", "3")
    cfg = parse_config("command=solve alpha=1.5 N=4 threads=1")
    assert cfg.threads == 3
    monkeypatch.setenv("FRACWAVE_THREADS", "zero")
    with pytest.raises(ConfigError, match="FRACWAVE_THREADS"):
        parse_config("command=solve alpha=1.5 N=4")


def test_solve_writes_trajectory(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    cfg = parse_config(f"command=solve example=ex1 alpha=1.5 N=2 Ms=4 output={out}")
    assert run(cfg) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == TRAJECTORY_HEADER
    assert len(lines) == 4
    assert lines[1].startswith("0,0,")
    assert "step condition" in capsys.readouterr().out


def test_temporal_study_csv_shape(tmp_path):
    out = tmp_path / "report.csv"
    cfg = parse_config(f"command=temporal-study example=ex1 alpha=1.5 N=8,16 output={out}")
    assert run(cfg) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "1.5"
    assert first[1] == "8"
    assert first[2] == "14"  # round_even(8 ** 1.25)
    assert first[3] == "1.666667"
    assert "E" in first[4]
    assert len(first[5].split(".")[1]) == 6
    assert first[6] == "0.000"
    last = lines[2].split(",")
    assert last[5] == ""  # no order on the finest level


def test_serial_reruns_are_byte_identical(tmp_path):
    text = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        cfg = parse_config(
            f"command=temporal-study example=ex1 alpha=1.5 N=8,16 output={out}"
        )
        assert run(cfg) == 0
        text.append(out.read_bytes())
    assert text[0] == text[1]


def test_wall_timing_opt_in(tmp_path):
    out = tmp_path / "walled.csv"
    cfg = parse_config(
        f"command=temporal-study example=ex1 alpha=1.5 N=8,16 timing=wall output={out}"
    )
    assert run(cfg) == 0
    for line in out.read_text().splitlines()[1:]:
        seconds = float(line.split(",")[6])
        assert seconds >= 0.0


def test_threaded_run_matches_serial(tmp_path):
    serial = tmp_path / "serial.csv"
    threaded = tmp_path / "threaded.csv"
    base = "command=temporal-study example=ex1 alpha=1.4,1.8 N=8,16"
    assert run(parse_config(f"{base} output={serial}")) == 0
    assert run(parse_config(f"{base} threads=2 output={threaded}")) == 0
    assert serial.read_bytes() == threaded.read_bytes()


def test_caputo_check_rates(tmp_path):
    out = tmp_path / "caputo.csv"
    cfg = parse_config(f"command=caputo-check beta=0.7 sigma=0.7 N=32,64,128 output={out}")
    assert run(cfg) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    rows = [line.split(",") for line in lines[1:]]
    assert [row[1] for row in rows] == ["32", "64", "128"]
    assert all(row[0] == "1.4" and row[2] == "0" for row in rows)
    assert float(rows[1][5]) == pytest.approx(1.3, abs=0.15)


def test_bound_report_runs(tmp_path, capsys):
    out = tmp_path / "bound.csv"
    cfg = parse_config(f"command=bound-report example=ex1 alpha=1.5 N=8,16 output={out}")
    assert run(cfg) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    bounds = [float(line.split(",")[4]) for line in lines[1:]]
    assert all(b > 0 for b in bounds)
    assert "step condition" in capsys.readouterr().out


def test_spatial_study_prints_cap_note(tmp_path, capsys, monkeypatch):
    import fracwave.cli as cli_module

    monkeypatch.setattr(cli_module, "DEFAULT_N_CAP", 16)
    out = tmp_path / "spatial.csv"
    cfg = parse_config(f"command=spatial-study example=ex1 alpha=1.5 Ms=4,8 output={out}")
    assert run(cfg) == 0
    captured = capsys.readouterr().out
    assert "capped" in captured
    lines = out.read_text().splitlines()
    assert len(lines) == 3


def test_main_accepts_config_file(tmp_path):
    out = tmp_path / "from_file.csv"
    config = tmp_path / "study.cfg"
    config.write_text(f"command=solve example=ex1 alpha=1.5 N=2 Ms=4\noutput={out}\n")
    assert main([str(config)]) == 0
    assert out.exists()


def test_main_reports_config_errors(capsys):
    assert main(["command=unknown-thing"]) == 2
    assert "config error" in capsys.readouterr().err


def test_main_reports_runtime_failure(tmp_path, capsys):
    # quadrature=2 has no triangle rule, so a 2D run fails cleanly
    out = tmp_path / "nope.csv"
    code = main([
        "command=temporal-study", "example=ex2", "alpha=1.5", "N=4,8",
        "quadrature=2", f"output={out}",
    ])
    assert code == 1
    assert "error" in capsys.readouterr().err
