import pytest

from src.check_service import (
    build_limit, certify, check_claims, check_document, compose_maps, dot_for, evaluate_model, query_records,
    strictify_model, verify_map_json,
)
from src.kernel.errors import ParseError, ShapeError
from src.utilities import FAILED, OK, failed, format_record, render_report


class TestCheckDocument:
    @pytest.mark.parametrize("stem", ["basics", "nat", "maps", "models"])
    def test_corpus_checks(self, corpus_dir, stem):
        source = (corpus_dir / f"{stem}.auk").read_text(encoding="utf-8")
        records = check_document(source, document=stem)
        assert records
        assert not failed(records), [r for r in records if r["status"] == FAILED]

    def test_one_record_per_declaration(self, corpus_dir):
        records = check_document((corpus_dir / "basics.auk").read_text(encoding="utf-8"))
        assert [(r["kind"], r["name"]) for r in records] == [
            ("context", "Ob"), ("context", "Arrow"), ("context", "Triangle"), ("context", "Pair"),
        ]

    def test_parse_errors_propagate(self):
        with pytest.raises(ParseError):
            check_document("context Ob\n  node\nend\n")

    def test_side_condition_becomes_a_document_record(self):
        source = ("context C\n  node A\n  node B\n  edge f : A -> B\nend\n"
                  "eqext E over C\n  Composition u=f v=f\nend\n")
        records = check_document(source, document="bad")
        assert len(records) == 1
        assert records[0]["kind"] == "document"
        assert records[0]["status"] == FAILED
        assert records[0]["code"] == "E-SIDE"

    def test_failing_commutativity_rejects_the_document(self):
        source = (
            "context Tri\n  node A\n  node B\n  edge f : A -> B\n  edge g : A -> B\n  comm f . id(B) = g\nend\n\n"
            "model Off of Tri\n  A := {0}\n  B := {0, 1}\n  f := {0 |-> 0}\n  g := {0 |-> 1}\nend\n"
        )
        [rec] = check_document(source)
        assert rec["status"] == FAILED
        assert rec["code"] == "E-MODEL"


class TestModels:
    def test_addition_by_list_recursion(self, corpus):
        ws = corpus("nat")
        outputs = [r["output"] for r in query_records(ws.model("M"))]
        assert outputs == ["nat(0)", "nat(5)", "nat(5)"]

    def test_query_inputs_are_printed(self, corpus):
        records = query_records(corpus("nat").model("M"))
        assert records[1]["input"] == "(nat(2), nat(3))"
        assert records[1]["message"] == "add (nat(2), nat(3)) = nat(5)"

    def test_pullback_carrier(self, corpus):
        records = evaluate_model(corpus("models"), "Square")
        carriers = {r["name"]: r for r in records if r["kind"] == "carrier"}
        assert carriers["Square.A"]["size"] == 2
        assert carriers["Square.C"]["size"] == 1
        assert carriers["Square.P"]["size"] == 4
        assert carriers["Square.P"]["elements"] == ["(0, 0)", "(0, 1)", "(1, 0)", "(1, 1)"]

    def test_projection_queries(self, corpus):
        records = [r for r in evaluate_model(corpus("models"), "Square") if r["kind"] == "eval"]
        assert [(r["name"], r["output"]) for r in records] == [("Square.p1", "1"), ("Square.p2", "0")]

    def test_lazy_carrier_respects_bound(self, corpus):
        records = evaluate_model(corpus("nat"), "M", bound=2)
        n = next(r for r in records if r["name"] == "M.N")
        assert n["size"] is None
        assert n["elements"] == ["nat(0)", "nat(1)", "nat(2)"]

    def test_query_outside_domain(self):
        source = ("context Arr\n  node A\n  node B\n  edge f : A -> B\nend\n\n"
                  "model M of Arr\n  A := {0}\n  B := {1}\n  f := {0 |-> 1}\n  eval f 7\nend\n")
        records = check_document(source)
        query = next(r for r in records if r["kind"] == "eval")
        assert query["status"] == FAILED
        assert "not in the domain" in query["message"]

    def test_strictify_renamed_model(self, corpus):
        [rec] = strictify_model(corpus("models"), "Renamed")
        assert rec["status"] == OK
        assert rec["iso_natural"] is True

    def test_strictify_strict_model(self, corpus):
        [rec] = strictify_model(corpus("models"), "Square")
        assert rec["status"] == OK


class TestMaps:
    def test_claims_hold(self, corpus):
        records = check_claims(corpus("maps"))
        assert [(r["name"], r["status"]) for r in records] == [
            ("composite == both", OK), ("identity == identity", OK),
        ]

    def test_compose(self, corpus):
        m, rec = compose_maps(corpus("maps"), "extend", "restrict")
        assert rec["name"] == "extend;restrict"
        assert rec["ext_steps"] == len(m.ext.steps)

    def test_certificate_is_reusable(self, corpus):
        ws = corpus("maps")
        ok, cert, reason = certify(ws.map("composite"), ws.map("both"))
        assert ok and reason == ""
        again, _, _ = certify(ws.map("composite"), ws.map("both"), cert)
        assert again

    def test_maps_in_json(self, corpus):
        ws = corpus("maps")
        left = ws.map("composite").model_dump_json()
        right = ws.map("both").model_dump_json()
        records, cert = verify_map_json(left, right)
        assert records[0]["status"] == OK
        assert cert is not None
        records, _ = verify_map_json(left, right, cert.model_dump_json())
        assert records[0]["status"] == OK


class TestLimits:
    def test_product(self, corpus):
        result, rec = build_limit(corpus("basics"), "product", ["Ob", "Triangle"])
        assert result.kind == "product"
        assert rec["legs"] == 2

    @pytest.mark.parametrize("kind, names", [("colimit", ["Ob"]), ("product", ["Ob"]), ("pullback", ["Ob", "Ob"])])
    def test_bad_usage(self, corpus, kind, names):
        with pytest.raises(ParseError):
            build_limit(corpus("basics"), kind, names)

    def test_pullback_needs_an_extension(self, corpus):
        with pytest.raises(ShapeError):
            build_limit(corpus("basics"), "pullback", ["Triangle", "Ob", "Arrow"])


class TestReport:
    def test_dot(self, corpus):
        assert dot_for(corpus("basics"), "Ob").startswith("digraph")

    def test_render(self):
        records = [{"kind": "claim", "name": "a == b", "status": OK, "message": "objectively equal"},
                   {"kind": "model", "name": "M", "status": FAILED, "summary": "1 checks, 0 verified to bound, 1 failed"}]
        text = render_report(records)
        human = text.split("\n\n")[1].splitlines()
        assert human == ["✓ claim a == b: objectively equal", "✗ model M: 1 checks, 0 verified to bound, 1 failed"]
        assert format_record({"kind": "map", "name": "m", "status": OK}) == "✓ map m"
