import os
import pathlib

import pytest

import ftg

SOURCE = pathlib.Path(os.environ.get("FTG_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="module")
def grammar():
    return ftg.sample_grammar()


def test_sample_grammar(grammar):
    assert grammar.lexeme_count == 10
    assert grammar.schema_names == ["head_subject", "head_complement"]
    assert "phrase/1" in grammar.rule_names
    assert grammar.warnings == []
    assert ftg.sample_grammar_source() == (SOURCE / "grammars" / "hpsg_paper.ftg").read_text()


def test_glb(grammar):
    assert grammar.glb("sign", "lex") == "lex"
    assert grammar.glb("noun", "verb") is None
    assert grammar.leq("noun", "head")
    with pytest.raises(KeyError):
        grammar.glb("sign", "nosuch")


def test_unify(grammar):
    out = grammar.unify("category(head => noun)", "category(marking => unmarked)")
    root = out["nodes"][out["root"]]
    assert out["nodes"][root["features"]["head"]]["sort"] == "noun"
    assert grammar.unify("category(head => noun)", "category(head => verb)") is None
    assert grammar.unify("category(head => X, marking => X)", "category", rules=False, avm=True) == (
        "category(head => #1:top, marking => #1)"
    )


def test_unify_syntax_error(grammar):
    with pytest.raises(ftg.GrammarError) as err:
        grammar.unify("category(head => ", "top")
    assert "<term 1>:1:" in str(err.value)


def test_parse(grammar):
    lines = []
    r = grammar.parse("John sleeps", trace=lines.append)
    assert r["tokens"] == ["john", "sleeps"]
    assert r["parse_count"] == 1
    assert r["metrics"]["posthoc_rejections"] == 0
    assert any(line.startswith("FIRE rule=") for line in lines)
    p = r["parses"][0]
    nodes = p["nodes"]

    def follow(node, path):
        for f in path.split("."):
            node = nodes[node]["features"][f]
        return node

    assert follow(p["root"], "synsem.loc.cat.head") == follow(p["root"], "dtrs.head-dtr.synsem.loc.cat.head")
    assert grammar.parse("sleeps john")["parse_count"] == 0


def test_compare(grammar):
    c = grammar.compare("john sleeps mary")
    assert c["equal_parse_sets"]
    assert c["direct"]["metrics"]["edges_created"] < c["gat"]["metrics"]["edges_created"]
    assert c["gat"]["metrics"]["posthoc_rejections"] > 0


def test_errors(grammar):
    with pytest.raises(ftg.UnknownWord) as err:
        grammar.parse("john zzz")
    assert err.value.args[1:] == ("zzz", 1)
    with pytest.raises(ValueError):
        grammar.parse("john sleeps", mode="fast")
    with pytest.raises(ftg.GrammarError):
        ftg.load_grammar("a <| .")


def test_custom_grammar():
    g = ftg.load_grammar('a <| top.\nu <| top.\nword "x" : a.\nschema up : u(d => a) dtrs [d].\n')
    assert g.sort_count == 7
    assert g.parse("x")["parse_count"] == 2


def test_runaway_unary_chain():
    g = ftg.load_grammar('a <| top.\nword "x" : a.\nschema up : top(d => top) dtrs [d].\n')
    with pytest.raises((ftg.NodeBudgetExceeded, ftg.EdgeBudgetExceeded)):
        g.parse("x")
    assert ftg.tokenize("  A  b ") == ["a", "b"]
