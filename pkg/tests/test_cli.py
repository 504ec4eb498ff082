import json

import pytest

from src.check_service import load_workspace
from src.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main


def _json_lines(out: str) -> list[dict]:
    return [json.loads(line) for line in out.split("\n\n")[0].splitlines()]


class TestCheck:
    def test_corpus_directory(self, corpus_dir, capsys):
        assert main(["check", str(corpus_dir)]) == EXIT_OK
        records = _json_lines(capsys.readouterr().out)
        assert {r["status"] for r in records} == {"ok"}
        assert any(r["kind"] == "claim" for r in records)

    def test_parse_error_is_a_usage_error(self, tmp_path):
        bad = tmp_path / "bad.auk"
        bad.write_text("context Ob\n  node X\n", encoding="utf-8")
        assert main(["check", str(bad)]) == EXIT_USAGE

    def test_failed_check(self, tmp_path, capsys):
        doc = tmp_path / "side.auk"
        doc.write_text("context C\n  node A\n  node B\n  edge f : A -> B\nend\n"
                       "eqext E over C\n  Composition u=f v=f\nend\n", encoding="utf-8")
        assert main(["check", str(doc)]) == EXIT_FAILED
        assert "✗ document" in capsys.readouterr().out

    def test_empty_directory(self, tmp_path):
        assert main(["check", str(tmp_path)]) == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        assert main(["check", str(tmp_path / "absent.auk")]) == EXIT_USAGE

    def test_unknown_command(self):
        assert main(["frobnicate"]) == EXIT_USAGE


class TestModels:
    def test_eval(self, corpus_dir, capsys):
        assert main(["eval", str(corpus_dir / "nat.auk"), "M", "--list-bound", "3"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "add (nat(2), nat(3)) = nat(5)" in out

    def test_strictify(self, corpus_dir, capsys):
        assert main(["strictify", str(corpus_dir / "models.auk"), "Renamed"]) == EXIT_OK
        assert "✓ strictify Renamed" in capsys.readouterr().out

    def test_unknown_model(self, corpus_dir):
        assert main(["eval", str(corpus_dir / "models.auk"), "Missing"]) == EXIT_USAGE


class TestMaps:
    def test_compose_then_eqcheck(self, corpus_dir, tmp_path, capsys):
        maps = corpus_dir / "maps.auk"
        composite = tmp_path / "composite.json"
        assert main(["compose", str(maps), "extend", "restrict", "-o", str(composite)]) == EXIT_OK
        both = tmp_path / "both.json"
        both.write_text(load_workspace(maps.read_text(encoding="utf-8")).map("both").model_dump_json(), encoding="utf-8")
        cert = tmp_path / "cert.json"
        assert main(["eqcheck", "--maps", str(composite), str(both), "-o", str(cert)]) == EXIT_OK
        assert cert.exists()
        assert main(["eqcheck", "--maps", str(composite), str(both), "--certificate", str(cert)]) == EXIT_OK
        assert "✓ eqcheck composite.json == both.json" in capsys.readouterr().out

    def test_eqcheck_document(self, corpus_dir, capsys):
        assert main(["eqcheck", str(corpus_dir / "maps.auk")]) == EXIT_OK
        kinds = {r["kind"] for r in _json_lines(capsys.readouterr().out)}
        assert kinds == {"claim"}

    def test_eqcheck_needs_input(self):
        assert main(["eqcheck"]) == EXIT_USAGE

    def test_not_a_map(self, tmp_path):
        junk = tmp_path / "junk.json"
        junk.write_text('{"source": 1}', encoding="utf-8")
        assert main(["eqcheck", "--maps", str(junk), str(junk)]) == EXIT_USAGE


class TestOutputs:
    def test_limit(self, corpus_dir, tmp_path):
        out = tmp_path / "product.json"
        assert main(["limit", str(corpus_dir / "basics.auk"), "product", "Ob", "Ob", "-o", str(out)]) == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["kind"] == "product"

    def test_limit_arity(self, corpus_dir):
        assert main(["limit", str(corpus_dir / "basics.auk"), "product", "Ob"]) == EXIT_USAGE

    @pytest.mark.parametrize("name", ["Ob", "Arrow", "Triangle"])
    def test_dot(self, corpus_dir, capsys, name):
        assert main(["dot", str(corpus_dir / "basics.auk"), name]) == EXIT_OK
        assert capsys.readouterr().out.startswith(f'digraph "{name}"')
