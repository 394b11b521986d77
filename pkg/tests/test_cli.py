import re
import shlex

import pytest

from nodecap._io import read_csv
from nodecap.cli import build_parser, main

SUBCOMMANDS = [
    "generate",
    "stats",
    "betweenness",
    "bplus",
    "allocate",
    "simulate",
    "lambda-c",
    "sweep-alpha",
    "fit-bplus",
    "estimate",
    "reproduce",
]


def rerun_from_header(path, out):
    """Run the command recorded in a file's header, redirected to ``out``."""
    first = path.read_text().splitlines()[0]
    argv = shlex.split(first[2:])[1:]
    i = argv.index("--out")
    argv[i + 1] = str(out)
    return main(argv)


@pytest.fixture
def graph(tmp_path):
    path = tmp_path / "g.txt"
    assert main(["generate", "--model", "ba", "--n", "120", "--m", "2", "--seed", "4", "--out", str(path)]) == 0
    return path


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_help_lists_every_flag(name, capsys):
    sub = build_parser()._subparsers._group_actions[0].choices[name]
    with pytest.raises(SystemExit) as exc:
        main([name, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for action in sub._actions:
        for opt in action.option_strings:
            assert opt in text


def test_pipeline_and_csv_contracts(graph, tmp_path, capsys):
    cap = tmp_path / "cap.csv"
    assert main(["allocate", "--graph", str(graph), "--scheme", "degree-power", "--alpha", "1.2", "--out", str(cap)]) == 0
    comments, rows = read_csv(cap)
    assert comments[0].startswith("nodecap allocate")
    assert list(rows[0]) == ["node", "capability"] and len(rows) == 120

    bt = tmp_path / "b.csv"
    assert main(["betweenness", "--graph", str(graph), "--out", str(bt)]) == 0
    assert list(read_csv(bt)[1][0]) == ["node", "degree", "betweenness"]

    bp = tmp_path / "bp.csv"
    assert main(["bplus", "--graph", str(graph), "--out", str(bp)]) == 0
    assert list(read_csv(bp)[1][0]) == ["k", "b_plus", "count_of_k_degree_nodes"]
    fit = tmp_path / "fit.csv"
    assert main(["fit-bplus", "--bplus", str(bp), "--out", str(fit)]) == 0
    est = tmp_path / "est.csv"
    assert main(["estimate", "--graph", str(graph), "--out", str(est)]) == 0
    assert read_csv(fit)[1] == read_csv(est)[1]
    assert list(read_csv(fit)[1][0]) == ["alpha_prime", "intercept", "r_squared"]

    sim = tmp_path / "sim.csv"
    argv = ["simulate", "--graph", str(graph), "--capability", str(cap), "--lambda", "30"]
    argv += ["--steps", "600", "--transient", "200", "--out", str(sim)]
    assert main(argv) == 0
    comments, rows = read_csv(sim)
    assert list(rows[0]) == ["step", "theta"] and len(rows) == 600
    assert re.match(r"eta=\S+ eta_raw=\S+ delivered=\d+ created=18000", comments[-1])
    assert "created=18000" in capsys.readouterr().out

    sweep = tmp_path / "sweep.csv"
    argv = ["sweep-alpha", "--graph", str(graph), str(graph), "--alphas", "0.5:1.5:0.5"]
    argv += ["--steps", "1200", "--transient", "400", "--out", str(sweep)]
    assert main(argv) == 0
    comments, rows = read_csv(sweep)
    assert list(rows[0]) == ["alpha", "lambda_c_mean", "lambda_c_min", "lambda_c_max"]
    assert [float(r["alpha"]) for r in rows] == [0.5, 1.0, 1.5]
    assert comments[-1].startswith("alpha_star=")

    lc = tmp_path / "lc.csv"
    argv = ["lambda-c", "--graph", str(graph), "--scheme", "degree", "--steps", "1200", "--transient", "400"]
    assert main(argv + ["--out", str(lc)]) == 0
    # the same rate as the alpha=1 sweep point on the same graph
    assert f"lambda_c={int(float(rows[1]['lambda_c_mean']))} " in read_csv(lc)[0][-1]


def test_outputs_regenerate_from_their_header(graph, tmp_path):
    cap = tmp_path / "cap.csv"
    main(["allocate", "--graph", str(graph), "--scheme", "uniform", "--out", str(cap)])
    sim = tmp_path / "sim.csv"
    main(["simulate", "--graph", str(graph), "--capability", str(cap), "--lambda", "25", "--seed", "3", "--out", str(sim)])
    again = tmp_path / "again.csv"
    assert rerun_from_header(sim, again) == 0
    assert sim.read_bytes().split(b"\n", 1)[1] == again.read_bytes().split(b"\n", 1)[1]
    regen = tmp_path / "g2.txt"
    assert rerun_from_header(graph, regen) == 0
    assert graph.read_bytes().split(b"\n", 1)[1] == regen.read_bytes().split(b"\n", 1)[1]


def test_exit_codes(graph, tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    assert main(["betweenness", "--graph", str(missing), "--out", str(tmp_path / "b.csv")]) == 2
    assert str(missing) in capsys.readouterr().err
    argv = ["simulate", "--graph", str(graph), "--capability", str(missing), "--lambda", "3", "--out", "x"]
    assert main(argv) == 2
    assert main(["allocate", "--graph", str(graph), "--scheme", "degree-power", "--out", str(tmp_path / "c")]) == 2
    assert main(["reproduce", "--config", str(missing)]) == 2
    assert main(["reproduce", "--set", "plan.replicates=0"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--model", "ws", "--n", "10", "--out", "x"])
    assert exc.value.code == 2
    # a search that cannot bracket the transition is a computation failure
    argv = ["lambda-c", "--graph", str(graph), "--scheme", "uniform", "--lambda-lo", "1", "--lambda-hi", "2"]
    argv += ["--eta-threshold", "0.5", "--lambda-cap", "4", "--steps", "300", "--transient", "100", "--out", str(tmp_path / "lc.csv")]
    code = main(argv)
    assert code == 1
    assert "upper side failed" in capsys.readouterr().err
