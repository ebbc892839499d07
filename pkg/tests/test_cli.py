import numpy as np
import pytest

from semifem.cli import main
from semifem.femfunction import read_function
from semifem.mesh import preset_polygon, read_mesh, triangulate_convex_polygon

KINK_CONFIG = """
# kink problem on the worst-angle pentagon
domain = pentagon
level = 3
nonlinearity = power_law
scale = 50.0
exponent = 0.3333333333333333
shift = -1.0
rhs = constant 1
"""

MANUFACTURED_CONFIG = """
domain = unit-square
levels = 2..5
exponent = 0.5
rhs = manufactured
reference = exact
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def strip_wall_time(csv_text):
    return "\n".join(",".join(line.split(",")[:-1])
                     for line in csv_text.strip().splitlines())


class TestMeshCommand:
    def test_unit_square_level0(self, tmp_path, capsys):
        out = str(tmp_path / "mesh.txt")
        assert main(["mesh", "--domain", "unit-square", "--level", "0",
                     "--output", out]) == 0
        printed = capsys.readouterr().out
        assert "nv=5" in printed and "nt=4" in printed
        mesh = read_mesh(out)
        assert mesh.num_vertices == 5

    def test_level1_has_sixteen_triangles(self, tmp_path, capsys):
        out = str(tmp_path / "mesh.txt")
        assert main(["mesh", "--domain", "unit-square", "--level", "1",
                     "--output", out]) == 0
        assert "nt=16" in capsys.readouterr().out

    def test_concave_polygon_rejected(self, tmp_path, capsys):
        poly = write(tmp_path, "bad.poly",
                     "0 0\n2 0\n1 0.1\n2 2\n0 2\n")
        code = main(["mesh", "--domain", poly, "--level", "0",
                     "--output", str(tmp_path / "m.txt")])
        assert code == 2
        assert "vertex 2" in capsys.readouterr().err

    def test_round_trip_bit_for_bit(self, tmp_path, capsys):
        out = str(tmp_path / "mesh.txt")
        assert main(["mesh", "--domain", "pentagon", "--level", "2",
                     "--output", out]) == 0
        reread = read_mesh(out)
        expected = triangulate_convex_polygon(preset_polygon("pentagon"))
        from semifem.mesh import refine_uniform
        expected = refine_uniform(refine_uniform(expected))
        np.testing.assert_array_equal(reread.vertices, expected.vertices)


class TestSolveCommand:
    def test_zero_problem_writes_zero_solution(self, tmp_path, capsys):
        cfg = write(tmp_path, "zero.cfg",
                    "domain = unit-square\nlevel = 1\nweight = 0\n"
                    "rhs = constant 0\n")
        out = str(tmp_path / "u.txt")
        assert main(["solve", "--config", cfg, "--output", out]) == 0
        mesh = triangulate_convex_polygon(preset_polygon("unit-square"))
        from semifem.mesh import refine_uniform
        mesh = refine_uniform(mesh)
        u = read_function(mesh, out)
        assert not np.any(u.coeffs)

    def test_kink_config_reports_residual(self, tmp_path, capsys):
        cfg = write(tmp_path, "kink.cfg", KINK_CONFIG)
        out = str(tmp_path / "u.txt")
        assert main(["solve", "--config", cfg, "--output", out]) == 0
        printed = capsys.readouterr().out
        residual = float(printed.split("final_residual=")[1].split()[0])
        assert residual <= 1e-10

    def test_solve_on_mesh_file(self, tmp_path, capsys):
        mesh_file = str(tmp_path / "mesh.txt")
        assert main(["mesh", "--domain", "unit-square", "--level", "2",
                     "--output", mesh_file]) == 0
        cfg = write(tmp_path, "lin.cfg", "rhs = constant 1\n")
        out = str(tmp_path / "u.txt")
        assert main(["solve", "--config", cfg, "--domain", mesh_file,
                     "--level", "0", "--output", out]) == 0
        reread = read_mesh(mesh_file)
        u = read_function(reread, out)
        assert u.coeffs.size == reread.num_vertices

    def test_missing_value_names_key(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.cfg", "rhs = constant\n")
        assert main(["solve", "--config", cfg]) == 2
        assert "rhs" in capsys.readouterr().err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.cfg", "viscosity = 7\n")
        assert main(["solve", "--config", cfg]) == 2
        assert "viscosity" in capsys.readouterr().err

    def test_out_of_range_exponent_rejected(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.cfg", "exponent = 1.5\n")
        assert main(["solve", "--config", cfg]) == 2
        assert "exponent" in capsys.readouterr().err

    def test_cut_m_applied(self, tmp_path, capsys):
        cfg = write(tmp_path, "cut.cfg", KINK_CONFIG + "cut_m = 2.5\nlevel = 2\n")
        out = str(tmp_path / "u.txt")
        assert main(["solve", "--config", cfg, "--output", out]) == 0
        residual = float(capsys.readouterr().out
                         .split("final_residual=")[1].split()[0])
        assert residual <= 1e-10


class TestStudyCommand:
    def test_manufactured_structure(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.cfg", MANUFACTURED_CONFIG)
        out = str(tmp_path / "study.csv")
        assert main(["study", "--config", cfg, "--output", out]) == 0
        lines = open(out, encoding="utf-8").read().strip().splitlines()
        assert len(lines) == 5  # header + 4 data rows
        assert lines[1].split(",")[6] == ""
        for row in lines[2:]:
            assert row.split(",")[6] != ""

    def test_single_level_empty_eoc(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.cfg",
                    MANUFACTURED_CONFIG.replace("2..5", "3..3"))
        out = str(tmp_path / "study.csv")
        assert main(["study", "--config", cfg, "--output", out]) == 0
        lines = open(out, encoding="utf-8").read().strip().splitlines()
        assert len(lines) == 2
        fields = lines[1].split(",")
        assert fields[6] == fields[7] == fields[8] == fields[9] == ""

    def test_exact_reference_requires_manufactured(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.cfg",
                    "rhs = constant 1\nreference = exact\nlevels = 2..3\n")
        assert main(["study", "--config", cfg]) == 2
        assert "manufactured" in capsys.readouterr().err

    def test_deterministic_output(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.cfg",
                    MANUFACTURED_CONFIG.replace("2..5", "2..4"))
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        assert main(["study", "--config", cfg, "--output", out1]) == 0
        assert main(["study", "--config", cfg, "--output", out2]) == 0
        a = strip_wall_time(open(out1, encoding="utf-8").read())
        b = strip_wall_time(open(out2, encoding="utf-8").read())
        assert a == b

    def test_failed_level_truncates_csv(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.cfg",
                    KINK_CONFIG + "levels = 2..3\nmax_newton = 1\n")
        out = str(tmp_path / "study.csv")
        assert main(["study", "--config", cfg, "--output", out]) == 1
        lines = open(out, encoding="utf-8").read().strip().splitlines()
        assert len(lines) == 1  # header only: the first level already fails


class TestValidateCommand:
    def test_all_checks_pass(self, capsys):
        assert main(["validate"]) == 0
        printed = capsys.readouterr().out
        assert "FAIL" not in printed
        assert "checks passed" in printed


def test_usage_error_exit_code(capsys):
    assert main([]) == 2
