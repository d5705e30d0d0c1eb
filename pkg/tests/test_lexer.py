from solvent.parser import tokenize


def kinds_texts(src):
    toks, diags = tokenize(src)
    assert not diags, [d.message for d in diags]
    return [(t.kind, t.text) for t in toks[:-1]]  # drop eof


def test_property_header_tokens():
    assert kinds_texts("Exists tx [1, xa]") == [
        ("kw", "Exists"), ("kw", "tx"), ("punct", "["), ("int", "1"),
        ("punct", ","), ("ident", "xa"), ("punct", "]"),
    ]


def test_empty_input():
    assert kinds_texts("") == []


def test_post_marker():
    assert kinds_texts("<tx>balance") == [("punct", "<tx>"), ("ident", "balance")]


def test_post_marker_vs_comparison():
    assert kinds_texts("a<txfee") == [
        ("ident", "a"), ("punct", "<"), ("ident", "txfee")]
    # `<tx>` only lexes as a marker when the full four characters appear
    assert ("punct", "<tx>") in kinds_texts("x <tx>y")


def test_comments_are_skipped():
    src = "a // line comment\n/* block\ncomment */ b"
    assert kinds_texts(src) == [("ident", "a"), ("ident", "b")]


def test_unterminated_comment_diagnoses():
    toks, diags = tokenize("a /* never closed")
    assert any(d.rule_id == "lex-comment" for d in diags)


def test_illegal_character_diagnoses():
    toks, diags = tokenize("a $ b")
    assert any(d.rule_id == "lex-char" for d in diags)
    # lexing continues after the bad character
    assert [(t.kind, t.text) for t in toks[:-1]] == [("ident", "a"), ("ident", "b")]


def test_spans_are_one_based():
    toks, _ = tokenize("ab\n  cd")
    assert toks[0].span.line == 1 and toks[0].span.col == 1
    assert toks[1].span.line == 2 and toks[1].span.col == 3


def test_operators_longest_match():
    texts = [t.text for t in tokenize("a<=b->c==d!=e=>f+=g")[0][:-1]]
    assert texts == ["a", "<=", "b", "->", "c", "==", "d", "!=", "e", "=>",
                     "f", "+=", "g"]


def test_determinism():
    src = "contract C { uint x; } property p { Forall xa [ true -> Exists tx [1, xa] [ true ] ] }"
    assert tokenize(src) == tokenize(src)
