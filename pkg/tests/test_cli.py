import json

from gfl.cli import main
from gfl.graph import load_tu_dataset
from gfl.persistence import parse_barcodes


def _synth(tmp_path, n=6):
    spec = tmp_path / "spec.cfg"
    spec.write_text(f"classes = tree, two_cycle\nn_per_class = {n}\nsize_min = 6\nsize_max = 9\nseed = 2\n")
    assert main(["synth", "--spec", str(spec), "--out", str(tmp_path / "TOY")]) == 0
    return tmp_path / "TOY"


def test_synth_writes_tu_files(tmp_path):
    ds = load_tu_dataset(_synth(tmp_path))
    assert len(ds) == 12 and ds.num_classes == 2


def test_train_writes_metrics_and_barcodes(tmp_path, capsys):
    data = _synth(tmp_path)
    cfg = tmp_path / "train.cfg"
    cfg.write_text(f"dataset = {data.name}\nepochs = 2\nfolds = 3\nhidden = 8\nn_elements = 4\nbatch_size = 4\n")
    out = tmp_path / "metrics.json"
    dump = tmp_path / "bars"
    assert main(["train", "--config", str(cfg), "--seed", "1", "--deterministic",
                 "--dump-barcodes", str(dump), "--out", str(out)]) == 0
    metrics = json.loads(out.read_text())
    assert len(metrics["fold_accuracies"]) == 3 and len(metrics["loss_curves"][0]) == 2
    assert "accuracy" in capsys.readouterr().out
    files = list(dump.glob("fold*/graph*.txt"))
    assert len(files) == 12
    assert all(parse_barcodes(f.read_text()) for f in files)


def test_bench_writes_csv(tmp_path):
    data = _synth(tmp_path)
    out = tmp_path / "timings.csv"
    assert main(["bench", "--dataset", str(data), "--repeats", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "m,seconds" and len(lines) == 13


def test_errors_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("epochs = 3\n")
    assert main(["train", "--config", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err
