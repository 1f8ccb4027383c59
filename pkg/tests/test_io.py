import numpy as np
import pytest

from hyperproto.errors import HeaderMismatchError, LoadError, NormError, ParseError
from hyperproto.io import read_model, read_prototypes, write_metrics, write_model, write_prototypes
from hyperproto.network import MetricsLog, forward, mlp_init


def random_unit_rows(K, D, seed):
    P = np.random.default_rng(seed).standard_normal((K, D))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


class TestPrototypeFile:
    def test_round_trip(self, tmp_path):
        P = random_unit_rows(7, 5, 0)
        write_prototypes(tmp_path / "p.txt", P)
        Q, names = read_prototypes(tmp_path / "p.txt")
        assert names is None
        assert np.abs(Q - P).max() <= 1e-15

    def test_names(self, tmp_path):
        P = random_unit_rows(3, 2, 1)
        write_prototypes(tmp_path / "p.txt", P, ["a", "b", "c"])
        assert read_prototypes(tmp_path / "p.txt")[1] == ["a", "b", "c"]

    def test_comments_and_blank_lines(self, tmp_path):
        (tmp_path / "p.txt").write_text("# hello\n\n1 0\n# more\n0 -1\n")
        P, _ = read_prototypes(tmp_path / "p.txt")
        np.testing.assert_array_equal(P, [[1, 0], [0, -1]])

    def test_non_unit_row_named(self, tmp_path):
        (tmp_path / "p.txt").write_text("1 0\n0 1\n0.5 0.5\n")
        with pytest.raises(NormError, match="row 2"):
            read_prototypes(tmp_path / "p.txt")

    def test_errors(self, tmp_path):
        (tmp_path / "a.txt").write_text("1 0\n0 0 1\n")
        with pytest.raises(HeaderMismatchError, match="line 2"):
            read_prototypes(tmp_path / "a.txt")
        (tmp_path / "b.txt").write_text("# only comments\n")
        with pytest.raises(LoadError):
            read_prototypes(tmp_path / "b.txt")
        (tmp_path / "c.txt").write_text("1 zero\n")
        with pytest.raises(ParseError):
            read_prototypes(tmp_path / "c.txt")
        (tmp_path / "d.txt").write_text("# names: a,b\n1 0\n")
        with pytest.raises(HeaderMismatchError):
            read_prototypes(tmp_path / "d.txt")


class TestModelFile:
    def test_round_trip_is_exact(self, tmp_path):
        params = mlp_init([3, 7, 5, 2], 11)
        write_model(tmp_path / "m.txt", params)
        back = read_model(tmp_path / "m.txt")
        assert back.widths == params.widths
        for (W, b), (V, c) in zip(params.layers, back.layers):
            np.testing.assert_array_equal(W, V)
            np.testing.assert_array_equal(b, c)
        x = np.array([0.1, -2.0, 3.3])
        np.testing.assert_array_equal(forward(params, x)[0], forward(back, x)[0])

    def test_layout(self, tmp_path):
        write_model(tmp_path / "m.txt", mlp_init([2, 3, 1], 0))
        lines = (tmp_path / "m.txt").read_text().splitlines()
        assert lines[0] == "hpn-model v1"
        assert lines[1] == "2 3 1"
        assert len(lines) == 2 + (3 + 1) + (1 + 1)

    def test_rejects_bad_files(self, tmp_path):
        (tmp_path / "a.txt").write_text("not a model\n")
        with pytest.raises(LoadError):
            read_model(tmp_path / "a.txt")
        write_model(tmp_path / "b.txt", mlp_init([2, 2], 0))
        text = (tmp_path / "b.txt").read_text()
        (tmp_path / "b.txt").write_text(text + "1 2\n")
        with pytest.raises(HeaderMismatchError):
            read_model(tmp_path / "b.txt")
        (tmp_path / "c.txt").write_text("hpn-model v1\n2 2\n1 2\n")
        with pytest.raises(HeaderMismatchError):
            read_model(tmp_path / "c.txt")


def test_metrics_csv(tmp_path):
    log = MetricsLog()
    log.add(1, "train", "loss", 0.5)
    log.add(10, "test", "accuracy", 0.1 + 0.2)
    write_metrics(tmp_path / "m.csv", log)
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "epoch,split,metric,value"
    assert lines[1] == "1,train,loss,0.5"
    assert float(lines[2].split(",")[3]) == 0.1 + 0.2
