"""Query parser: supported subset, prefixes, errors, and round-trips."""

import pytest

from sparqlsim import (
    ParseError, Query, UnsupportedFeatureError, iri, parse_query,
    parse_query_file, serialize_query, var,
)
from sparqlsim.sparql import RDF_TYPE
from sparqlsim.terms import TriplePattern, lit

from conftest import QUERY_DIR


def test_parse_minimal_query():
    q = parse_query("SELECT ?x WHERE { ?x <http://e/p> ?y . }")
    assert q.select == (var("x"),)
    assert q.patterns == (TriplePattern(var("x"), iri("http://e/p"), var("y")),)


def test_parse_prefixes_and_a_keyword():
    q = parse_query("""
        PREFIX ex: <http://e/>
        SELECT ?x ?y
        WHERE {
          ?x a ex:Widget .
          ?x ex:linked ?y
        }
    """)
    assert q.patterns[0][1] is RDF_TYPE
    assert q.patterns[0][2] is iri("http://e/Widget")
    assert q.patterns[1][1] is iri("http://e/linked")
    # the final dot before '}' is optional
    assert len(q.patterns) == 2


def test_parse_literals_with_prefixed_datatype():
    q = parse_query("""
        PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
        SELECT ?x WHERE { ?x <http://e/age> "7"^^xsd:int . }
    """)
    assert q.patterns[0][2] is lit("7", datatype="http://www.w3.org/2001/XMLSchema#int")


def test_undeclared_prefix_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_query("SELECT ?x WHERE { ?x ex:p ?y . }")


@pytest.mark.parametrize("text,feature", [
    ("SELECT ?x WHERE { ?x <http://e/p> ?y . FILTER(?y > 3) }", "FILTER"),
    ("SELECT ?x WHERE { OPTIONAL { ?x <http://e/p> ?y . } }", "OPTIONAL"),
    ("SELECT DISTINCT ?x WHERE { ?x <http://e/p> ?y . }", "DISTINCT"),
    ("SELECT ?x WHERE { ?x <http://e/p> ?y . } LIMIT 10", "LIMIT"),
    ("SELECT ?x WHERE { ?x <http://e/p> ?y . } ORDER BY ?x", "ORDER"),
    ("SELECT * WHERE { ?x <http://e/p> ?y . }", "SELECT *"),
])
def test_unsupported_features_are_flagged(text, feature):
    with pytest.raises(UnsupportedFeatureError) as err:
        parse_query(text)
    assert err.value.feature == feature


@pytest.mark.parametrize("text", [
    "",
    "SELECT WHERE { ?x <http://e/p> ?y . }",
    "SELECT ?x { ?x <http://e/p> ?y . }",
    "SELECT ?x WHERE { }",
    "SELECT ?x WHERE { ?x <http://e/p> }",
    "SELECT ?z WHERE { ?x <http://e/p> ?y . }",   # ?z not bound by any pattern
])
def test_malformed_queries_are_parse_errors(text):
    with pytest.raises(ParseError):
        parse_query(text)


def test_query_validation_direct_construction():
    pat = TriplePattern(var("x"), iri("http://e/p"), var("y"))
    with pytest.raises(ValueError):
        Query((), ())
    with pytest.raises(ValueError):
        Query((iri("http://e/a"),), (pat,))
    q = Query((var("y"), var("x")), (pat,))
    assert q.all_vars == frozenset({var("x"), var("y")})


def test_serialize_round_trip():
    q = parse_query("""
        PREFIX ex: <http://e/>
        SELECT ?x ?z WHERE {
          ?x a ex:Widget .
          ?x ex:tag "a\\"b" .
          ?x ex:next ?z .
        }
    """)
    again = parse_query(serialize_query(q))
    assert again == q


def test_parse_query_file_collects_metadata():
    query, meta = parse_query_file(QUERY_DIR / "watdiv_c3.rq")
    assert meta["label"] == "catalog-complex"
    assert len(query.patterns) == 6
    assert query.select == (var("v0"),)


def test_bundled_queries_parse():
    for name in ("q8.rq", "watdiv_s1.rq", "watdiv_f5.rq", "watdiv_c3.rq"):
        query, _ = parse_query_file(QUERY_DIR / name)
        assert query.patterns


def test_error_line_numbers():
    text = "SELECT ?x\nWHERE {\n  ?x <http://e/p> ?y ;\n}"
    with pytest.raises(ParseError) as err:
        parse_query(text, source="q.rq")
    assert err.value.line == 3
