import json
import math
import subprocess
import sys

import numpy as np
import pytest
import yaml

from constwidth import io
from constwidth.cli import main
from constwidth.config import JobConfig, load_config, parse_config_text
from constwidth.errors import ConfigurationError, DomainError
from constwidth.geometry import sample_sphere
from constwidth.planar import curve_from_beta, reuleaux_beta

PI = math.pi


def circle(m=1024, radius=0.5):
    t = np.linspace(0, 2 * PI, m, endpoint=False)
    return radius * np.column_stack([np.cos(t), np.sin(t)])


def report(path):
    return json.loads(path.read_text())


class TestFormats:
    def test_csv_round_trip(self, tmp_path):
        pts = np.random.default_rng(0).standard_normal((50, 3))
        p = io.write_csv(tmp_path / "a.csv", pts, t=np.arange(50.0))
        raw = p.read_bytes()
        assert raw.startswith(b"t,x,y,z\r\n") and raw.count(b"\r\n") == 51
        assert np.array_equal(io.read_csv(p).points, pts)

    def test_csv_errors(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("x,y\n1,zz\n")
        with pytest.raises(DomainError):
            io.read_csv(p)
        p.write_text("")
        with pytest.raises(DomainError):
            io.read_csv(p)

    def test_json_cloud(self, tmp_path):
        pts = circle(20)
        p = io.write_json_cloud(tmp_path / "c.json", pts)
        assert np.array_equal(io.read_cloud(p).points, pts)

    def test_svg_round_trip(self, tmp_path):
        curve = curve_from_beta(reuleaux_beta(1), 1.0, 256)
        p = io.write_svg(tmp_path / "r.svg", curve.points[:-1])
        text = p.read_text()
        assert 'version="1.1"' in text and "scale(1,-1)" in text and text.rstrip().endswith("</svg>")
        assert np.array_equal(io.read_svg_path(p), curve.points[:-1])
        with pytest.raises(DomainError):
            io.write_svg(tmp_path / "x.svg", np.zeros((4, 3)))

    @pytest.mark.parametrize("ext", [".off", ".obj"])
    def test_mesh_round_trip_and_orientation(self, tmp_path, ext):
        dirs = sample_sphere(3, 200, "fibonacci")
        pts = 0.5 * dirs + [0.1, 0.0, -0.2]
        verts, faces = io.hull_mesh(pts, dirs)
        p = io.write_mesh(tmp_path / f"m{ext}", verts, faces)
        v2, f2 = (io.read_off if ext == ".off" else io.read_obj)(p)
        assert np.array_equal(v2, verts) and np.array_equal(f2, faces)
        tri = v2[f2]
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        outward = np.einsum("ij,ij->i", n, tri.mean(axis=1) - v2.mean(axis=0))
        assert np.all(outward > 0)  # counterclockwise seen from outside
        assert len(faces) == 2 * len(pts) - 4  # closed triangulated sphere


class TestConfig:
    def test_unknown_key_with_line(self):
        with pytest.raises(ConfigurationError, match=r"job.yaml:3: field 'colour'"):
            parse_config_text("command: reuleaux\nk: 2\ncolour: red\n", "job.yaml")

    def test_syntax_error_location(self):
        with pytest.raises(ConfigurationError, match=r"job.yaml:3:1"):
            parse_config_text("command: reuleaux\nk: 1\n- 2\n", "job.yaml")

    def test_defaults_and_required(self):
        cfg = JobConfig("reuleaux", {"k": 2})
        assert cfg["r"] == 1.0 and cfg["rng_seed"] == 0
        with pytest.raises(ConfigurationError, match="'in' is required"):
            JobConfig("verify", {"r": 1.0}).validate()
        with pytest.raises(ConfigurationError):
            JobConfig("nope")

    def test_effective_round_trip(self, tmp_path):
        cfg = JobConfig("planar", {"r": 2.0})
        p = tmp_path / "eff.yaml"
        p.write_text(cfg.dump())
        again = load_config(p)
        assert again.effective() == cfg.effective()


class TestCommands:
    def test_reuleaux(self, tmp_path, capsys):
        out, rep = tmp_path / "tri.svg", tmp_path / "rep.json"
        assert main(["reuleaux", "--k", "1", "--r", "1", "--out", str(out), "--report", str(rep)]) == 0
        data = report(rep)
        per = next(c for c in data["checks"] if c["name"] == "barbier_perimeter")
        assert per["witness"]["perimeter"] == pytest.approx(PI, abs=1e-6)
        assert data["provenance"]["config"]["k"] == 1
        assert len(io.read_svg_path(out)) > 4000

    def test_rstar(self, capsys):
        assert main(["rstar", "--seed", "cos3theta", "--eps", "0.0625"]) == 0
        first = capsys.readouterr().out.splitlines()[0]
        assert float(first) == pytest.approx(1.0, abs=1e-3)

    def test_verify_circle(self, tmp_path):
        p = io.write_csv(tmp_path / "circle.csv", circle(2048))
        assert main(["verify", "--in", str(p), "--r", "1"]) == 0

    def test_verify_failure_exit_and_report(self, tmp_path, capsys):
        p = io.write_csv(tmp_path / "c.csv", circle(2048, radius=0.4))
        rep = tmp_path / "r.json"
        assert main(["verify", "--in", str(p), "--r", "1", "--report", str(rep)]) == 1
        assert str(rep) in capsys.readouterr().out
        assert not report(rep)["passed"]

    def test_config_errors_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "job.yaml"
        bad.write_text("command: reuleaux\nsize: 3\n")
        assert main(["--config", str(bad)]) == 2
        assert "job.yaml:2: field 'size'" in capsys.readouterr().err
        assert main(["reuleaux", "--bogus"]) == 2
        assert main(["verify", "--r", "1"]) == 2
        assert main([]) == 2

    def test_domain_error_exit_1(self, tmp_path, capsys):
        assert main(["embed-arc", "--theta-star", str(PI / 3 + 0.01)]) == 1
        assert "pi/3" in capsys.readouterr().err

    def test_planar_and_reexport(self, tmp_path):
        out = tmp_path / "c.csv"
        rep1, rep2 = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["planar", "--profile", '{"kind": "trig", "cos": {"3": -1}}', "--out", str(out),
                     "--report", str(rep1)]) == 0
        assert main(["verify", "--in", str(out), "--r", "1", "--report", str(rep2)]) == 0
        v1 = {c["name"]: c["passed"] for c in report(rep1)["checks"]}
        v2 = {c["name"]: c["passed"] for c in report(rep2)["checks"]}
        assert all(v1[k] == v2[k] for k in v2)

    def test_embed_arc(self, tmp_path):
        rep, prof = tmp_path / "e.json", tmp_path / "beta.csv"
        args = ["embed-arc", "--rho", '{"const": 0.5, "sin": {"3": 0.5}}', "--report", str(rep),
                "--profile-out", str(prof), "--out", str(tmp_path / "e.csv")]
        assert main(args) == 0
        data = report(rep)
        cont = next(c for c in data["checks"] if c["name"] == "containment")
        assert cont["residual"] <= 1e-6
        assert io.read_csv(prof).points.shape == (1025, 2)

    def test_construct_planar_and_override(self, tmp_path):
        assert main(["construct", "--out", str(tmp_path / "b.csv")]) == 0
        assert main(["construct", "--r", "0.5", "--override"]) == 1

    def test_construct_space(self, tmp_path):
        out = tmp_path / "b.off"
        assert main(["construct", "--seed", "xyz", "--eps", "1", "--samples", "2000", "--out", str(out),
                     "--width-directions", "500"]) == 0
        v, f = io.read_off(out)
        assert v.shape == (2000, 3) and f.shape[1] == 3

    def test_family(self, tmp_path):
        rep = tmp_path / "f.json"
        assert main(["family", "--steps", "10", "--samples", "720", "--out", str(tmp_path / "fam"),
                     "--report", str(rep)]) == 0
        assert len(list((tmp_path / "fam").glob("body_*.csv"))) == 11

    def test_complete(self, tmp_path):
        src = io.write_csv(tmp_path / "pts.csv", [[0.0, 0.0], [2.0, 2.0]])
        out = tmp_path / "done.csv"
        assert main(["complete", "--in", str(src), "--r", "2", "--norm", "linf", "--h", "0.1",
                     "--out", str(out)]) == 0
        pts = io.read_csv(out).points
        assert pts.min() >= -1e-9 and pts.max() <= 2 + 1e-9

    def test_bit_identical_rerun(self, tmp_path):
        eff = tmp_path / "eff.yaml"
        r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
        o1, o2 = tmp_path / "o1.csv", tmp_path / "o2.csv"
        assert main(["reuleaux", "--k", "2", "--out", str(o1), "--report", str(r1), "--emit-config", str(eff)]) == 0
        cfg = yaml.safe_load(eff.read_text())
        assert cfg["command"] == "reuleaux" and cfg["k"] == 2 and cfg["steps"] == 4096
        assert main(["reuleaux", "--config", str(eff), "--out", str(o2), "--report", str(r2)]) == 0
        assert o1.read_bytes() == o2.read_bytes()
        a, b = report(r1), report(r2)
        for d in (a, b):
            d["provenance"]["config"].pop("out")
            d["provenance"]["config"].pop("report")
        assert a == b

    def test_module_entry_point(self, tmp_path):
        res = subprocess.run([sys.executable, "-m", "constwidth.cli", "reuleaux", "--k", "1", "--steps", "512"],
                             capture_output=True, text=True)
        assert res.returncode == 0 and "overall: PASS" in res.stdout
