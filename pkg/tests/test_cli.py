import json
import threading

import pytest
import uvicorn

from kbpack.cli import main
from kbpack.core import Packing


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(
        json.dumps(
            {
                "capacity": "1000",
                "demands": ["371", "659", "113", "47", "485", "3", "228", "419", "468", "581", "626"],
            }
        )
    )
    return path


def test_pack_writes_packing_and_summary(instance_file, tmp_path, capsys):
    out = tmp_path / "packing.json"
    code = main(["pack", str(instance_file), "--k", "2", "--alg", "ffk", "--out", str(out)])
    assert code == 0
    assert "bins=11" in capsys.readouterr().out
    packing = Packing.from_json(out.read_text())
    assert packing.k == 2 and len(packing.bins) == 11


def test_pack_exact_reports_optimality(instance_file, tmp_path, capsys):
    out = tmp_path / "packing.json"
    code = main(["pack", str(instance_file), "--k", "2", "--alg", "exact", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "bins=8" in text and "optimal=volume-certified" in text


def test_pack_single_item_nfk(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"capacity": "5", "demands": ["5"]}))
    code = main(["pack", str(path), "--k", "1", "--alg", "nfk", "--out", str(tmp_path / "p.json")])
    assert code == 0
    assert "bins=1" in capsys.readouterr().out


def test_pack_dump_lp_writes_debug_file(tmp_path, capsys):
    path = tmp_path / "i.json"
    path.write_text(json.dumps({"capacity": "3", "demands": ["2", "1", "1"]}))
    out = tmp_path / "p.json"
    code = main(["pack", str(path), "--k", "2", "--alg", "exact", "--dump-lp", "--out", str(out)])
    assert code == 0
    dump = json.loads((tmp_path / "p.json.lp.json").read_text())
    assert set(dump) == {"system", "solution"}
    assert dump["solution"]["objective"] == "3"


def test_exit_code_parse_error(tmp_path):
    assert main(["pack", str(tmp_path / "missing.json"), "--k", "2"]) == 2


def test_exit_code_flag_combination(instance_file, tmp_path):
    assert main(["pack", str(instance_file), "--k", "2", "--alg", "dlvl"]) == 3


def test_exit_code_budget(instance_file, tmp_path):
    code = main(
        ["pack", str(instance_file), "--k", "2", "--alg", "exact", "--node-budget", "0",
         "--out", str(tmp_path / "p.json")]
    )
    assert code == 4


def test_rmax_output(tmp_path, capsys):
    path = tmp_path / "i.json"
    path.write_text(json.dumps({"capacity": "25", "demands": ["11", "12", "13"]}))
    assert main(["rmax", str(path), "--k-max", "3"]) == 0
    out = capsys.readouterr().out
    assert "r_max=2/3" in out
    assert "minimal_k=2" in out
    assert "1->2 2->3 3->5" in out


def test_generate_ratio_simulate_watts_pipeline(tmp_path, capsys):
    series = tmp_path / "series.csv"
    assert main(["generate", "series", "--agents", "5", "--weeks", "1", "--seed", "2", "--out", str(series)]) == 0
    ratio = tmp_path / "ratio.csv"
    assert main(
        ["ratio", "--alg", "ffk,ffdk,nfk", "--k-list", "2", "--opt-list", "1,2",
         "--instances-per-cell", "2", "--seed", "3", "--out", str(ratio)]
    ) == 0
    lines = ratio.read_text().splitlines()
    assert lines[0].startswith("# kbp")
    assert lines[1] == "alg,k,opt,opt_dk,max_bins,bound_ffk_conjecture,bound_ffdk_conjecture"
    metrics = tmp_path / "metrics.csv"
    assert main(
        ["simulate", str(series), "--k", "2", "--runs", "2", "--seed", "4",
         "--discard-weeks", "0", "--out", str(metrics)]
    ) == 0
    header = metrics.read_text().splitlines()[1].split(",")
    assert header[0] == "run" and "time_egalitarian" in header
    watts = tmp_path / "watts.csv"
    assert main(["watts", str(series), "--ha", "4", "--k", "2", "--out", str(watts)]) == 0
    assert "shedding_hours" in watts.read_text().splitlines()[1]


def test_watts_single_instance_mode(tmp_path, capsys):
    path = tmp_path / "m5.json"
    path.write_text(json.dumps({"capacity": "6", "demands": ["5", "4", "1"]}))
    assert main(["watts", str(path), "--ha", "1", "--k", "4"]) == 0
    assert "egalitarian=2.22222" in capsys.readouterr().out


def test_seeded_outputs_bit_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(
            ["ratio", "--alg", "ffk", "--k-list", "2", "--opt-list", "2",
             "--instances-per-cell", "3", "--seed", "11", "--out", str(out)]
        ) == 0
    ta = a.read_text().replace("out=" + str(a), "")
    tb = b.read_text().replace("out=" + str(b), "")
    assert ta == tb


def test_remote_server_round_trip(tmp_path, capsys):
    config = uvicorn.Config("kbpack.service.app:app", host="127.0.0.1", port=8731, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    import time

    for _ in range(100):
        if server.started:
            break
        time.sleep(0.05)
    try:
        path = tmp_path / "i.json"
        path.write_text(json.dumps({"capacity": "31", "demands": ["10", "20", "11"]}))
        code = main(
            ["--server", "http://127.0.0.1:8731", "pack", str(path), "--k", "2",
             "--out", str(tmp_path / "p.json")]
        )
        assert code == 0
        assert "bins=3" in capsys.readouterr().out
    finally:
        server.should_exit = True
        thread.join(timeout=5)
