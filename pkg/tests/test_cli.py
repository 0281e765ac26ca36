import numpy as np
import pytest

from multicut.cli import main
from multicut.bench import read_benchmark_csv
from multicut.io import parse_instance


def run(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGen:
    def test_writes_instance(self, tmp_path, capsys):
        out = tmp_path / "inst.txt"
        code, _, _ = run(["gen", "--n", "6", "--lo", "-5", "--hi", "5", "--seed", "3", "--out", str(out)], capsys)
        assert code == 0
        inst = parse_instance(out)
        assert inst.n == 6 and inst.m == 15

    def test_seed_changes_output(self, tmp_path, capsys):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        run(["gen", "--n", "6", "--lo", "-5", "--hi", "5", "--seed", "1", "--out", str(a)], capsys)
        run(["gen", "--n", "6", "--lo", "-5", "--hi", "5", "--seed", "2", "--out", str(b)], capsys)
        assert not np.array_equal(parse_instance(a).costs, parse_instance(b).costs)

    def test_env_seed_used_when_flag_absent(self, tmp_path, capsys, monkeypatch):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        monkeypatch.setenv("MC_SEED", "77")
        run(["gen", "--n", "6", "--lo", "-5", "--hi", "5", "--out", str(a)], capsys)
        monkeypatch.delenv("MC_SEED")
        run(["gen", "--n", "6", "--lo", "-5", "--hi", "5", "--seed", "77", "--out", str(b)], capsys)
        assert np.array_equal(parse_instance(a).costs, parse_instance(b).costs)


@pytest.fixture
def instance_file(tmp_path, capsys):
    path = tmp_path / "inst.txt"
    main(["gen", "--n", "7", "--lo", "-5", "--hi", "5", "--seed", "5", "--out", str(path)])
    capsys.readouterr()
    return path


class TestSolve:
    def test_bruteforce_reports_optimum(self, instance_file, capsys):
        code, out, _ = run(["solve", "--in", str(instance_file), "--solver", "bruteforce"], capsys)
        assert code == 0
        assert "objective" in out and "optimal    : yes" in out

    @pytest.mark.parametrize("solver", ["gaec", "gf", "mws", "klj", "bnb"])
    def test_heuristics_and_exact_run(self, instance_file, capsys, solver):
        code, out, _ = run(["solve", "--in", str(instance_file), "--solver", solver], capsys)
        assert code == 0
        assert "objective" in out

    def test_parse_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("not an instance\n")
        code, _, err = run(["solve", "--in", str(bad), "--solver", "gaec"], capsys)
        assert code == 2
        assert "parse error" in err

    def test_timeout_exit_code(self, tmp_path, capsys):
        hard = tmp_path / "hard.txt"
        main(["gen", "--n", "13", "--lo", "-9", "--hi", "9", "--seed", "1", "--out", str(hard)])
        capsys.readouterr()
        code, out, _ = run(
            ["solve", "--in", str(hard), "--solver", "bnb", "--time-limit", "0.0"], capsys
        )
        assert code == 4
        assert "no (time limit)" in out

    def test_gnn_requires_model(self, instance_file, capsys):
        code, _, err = run(["solve", "--in", str(instance_file), "--solver", "gnn"], capsys)
        assert code == 2
        assert "--model" in err


@pytest.fixture(scope="module")
def trained_model(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("train")
    cfg = tmp / "train.cfg"
    cfg.write_text(
        "layers=3\nwidth=8\nsizes=5\nranges=-5:5\ncount=6\nepochs=3\nseed=2\n"
        "checkpoint_every=2\n"
    )
    out = tmp / "tiny.mctmp"
    code = main(["train", "--config", str(cfg), "--out-model", str(out)])
    assert code == 0
    return out


class TestTrain:
    def test_outputs_model_loss_curve_and_checkpoints(self, trained_model):
        assert trained_model.exists()
        assert trained_model.with_name(trained_model.name + ".manifest.txt").exists()
        loss = trained_model.with_name(trained_model.name + ".loss.csv")
        lines = loss.read_text().splitlines()
        assert lines[0] == "epoch,mean_loss,lr" and len(lines) == 4
        ckpts = sorted(trained_model.with_name(trained_model.name + ".ckpts").glob("*.mctmp"))
        assert len(ckpts) == 1  # epoch 2 of 3

    def test_gnn_solvers_consume_checkpoint(self, trained_model, instance_file, capsys, tmp_path):
        trace = tmp_path / "trace.jsonl"
        code, out, _ = run(
            ["solve", "--in", str(instance_file), "--solver", "gnn",
             "--model", str(trained_model), "--trace", str(trace)],
            capsys,
        )
        assert code == 0
        assert trace.exists()
        code, _, _ = run(
            ["solve", "--in", str(instance_file), "--solver", "gnn1",
             "--model", str(trained_model)],
            capsys,
        )
        assert code == 0

    def test_resume_from_checkpoint(self, trained_model, tmp_path, capsys):
        cfg = tmp_path / "resume.cfg"
        cfg.write_text("layers=3\nwidth=8\nsizes=5\nranges=-5:5\ncount=4\nepochs=1\nseed=3\n")
        out = tmp_path / "resumed.mctmp"
        code, _, _ = run(
            ["train", "--config", str(cfg), "--out-model", str(out), "--resume", str(trained_model)],
            capsys,
        )
        assert code == 0 and out.exists()


class TestBench:
    def test_campaign_with_references(self, tmp_path, capsys, trained_model):
        for i in range(2):
            main(["gen", "--n", "6", "--lo", "-5", "--hi", "5", "--seed", str(i),
                  "--out", str(tmp_path / f"inst{i}.txt")])
        capsys.readouterr()
        refs = tmp_path / "refs.csv"
        lines = ["name,value,optimal"]
        from multicut.exact import brute_force

        for i in range(2):
            inst = parse_instance(tmp_path / f"inst{i}.txt")
            lines.append(f"inst{i},{brute_force(inst).value},1")
        refs.write_text("\n".join(lines) + "\n")
        out_csv = tmp_path / "bench.csv"
        code, out, _ = run(
            ["bench", "--instances", str(tmp_path / "inst*.txt"),
             "--solvers", f"gaec,bruteforce,gnn1:{trained_model}",
             "--ref", str(refs), "--out", str(out_csv)],
            capsys,
        )
        assert code == 0
        records = read_benchmark_csv(out_csv)
        assert len(records) == 6
        brute = [r for r in records if r.solver == "bruteforce"]
        assert all(r.gap == 0.0 for r in brute)
        assert (tmp_path / "bench.csv.summary.csv").exists()

    def test_empty_glob_is_parse_error(self, tmp_path, capsys):
        code, _, err = run(
            ["bench", "--instances", str(tmp_path / "nothing*.txt"),
             "--solvers", "gaec", "--out", str(tmp_path / "o.csv")],
            capsys,
        )
        assert code == 2


class TestGradcheck:
    def test_passes_at_default_tolerance(self, capsys):
        code, out, _ = run(["gradcheck"], capsys)
        assert code == 0
        assert "all gradient checks below tolerance" in out

    def test_custom_tolerance_flag(self, capsys):
        code, out, _ = run(["gradcheck", "--tolerance", "1e-2"], capsys)
        assert code == 0
