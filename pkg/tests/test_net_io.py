import orjson
import pytest

from conftest import EXAMPLES
from genbench import GenParams, random_sm
from net_io import NetDocument, dumps_net, from_dict, load_net, parse_net, save_net, to_dict
from sync_errors import NetInputError, NetParseError, NetStructureError


def _same_net(a, b):
    return (
        a.places == b.places
        and a.transitions == b.transitions
        and a.alphabet == b.alphabet
        and a.labels == b.labels
        and (a.net.pre == b.net.pre).all()
        and (a.net.post == b.net.post).all()
    )


@pytest.mark.parametrize(
    "name, fixture",
    [
        ("loop_sm", "loop_sm"),
        ("loop_sm_relabeled", "loop_sm_relabeled"),
        ("weighted_net", "weighted_net"),
        ("two_ergodic_sm", "two_ergodic_sm"),
        ("single_ergodic_sm", "single_ergodic_sm"),
        ("monitored_subnets", "monitored_net"),
    ],
)
def test_example_files_match_fixtures(name, fixture, request):
    doc = load_net(EXAMPLES / f"{name}.json")
    assert _same_net(doc.net, request.getfixturevalue(fixture))


def test_optional_fields(monitored_subnets):
    doc = load_net(EXAMPLES / "monitored_subnets.json")
    assert doc.marking == (1, 0, 1, 0, 1, 0)
    assert doc.target_marking == (1, 0, 1, 0, 0, 0)
    assert doc.subnets == tuple(monitored_subnets)
    assert load_net(EXAMPLES / "loop_sm.json").target_place == "p4"
    assert load_net(EXAMPLES / "weighted_net.json").marking == (2, 0, 0)


def test_round_trip(tmp_path, weighted_net):
    doc = NetDocument(weighted_net, marking=(2, 0, 0), target_marking=(0, 1, 0), meta={"source": "test"})
    path = save_net(doc, tmp_path / "nested" / "net.json")
    back = load_net(path)
    assert _same_net(back.net, weighted_net)
    assert back.marking == (2, 0, 0)
    assert back.target_marking == (0, 1, 0)
    assert back.meta == {"source": "test"}
    assert to_dict(back) == to_dict(doc)


def test_sparse_output(weighted_net):
    raw = orjson.loads(dumps_net(NetDocument(weighted_net, marking=(2, 0, 0))))
    assert raw["marking"] == {"p1": 2}
    assert raw["transitions"][1] == {"id": "t2", "label": "e2", "pre": {"p2": 1}, "post": {"p1": 1, "p3": 1}}


def test_alphabet_inferred_from_labels():
    doc = from_dict({"places": ["p1"], "transitions": [{"id": "t1", "label": "go", "pre": {"p1": 1}, "post": {"p1": 1}}]})
    assert doc.net.alphabet == ("go",)


def test_bad_json_reports_position():
    with pytest.raises(NetParseError) as info:
        parse_net('{\n  "places": ["p1",\n}')
    assert info.value.line == 3
    assert info.value.column is not None


def test_unknown_key():
    with pytest.raises(NetParseError, match="unknown keys: colour"):
        from_dict({"places": ["p1"], "colour": "red"})


@pytest.mark.parametrize(
    "doc",
    [
        [],
        {"places": "p1"},
        {"places": ["p1"], "transitions": [{"label": "e"}]},
        {"places": ["p1"], "transitions": [{"id": "t1", "label": "e", "pre": {"p1": -1}}]},
        {"places": ["p1"], "target_place": "p7"},
        {"places": ["p1"], "marking": {"p9": 1}},
        {"places": ["p1"], "subnets": [{"transitions": []}]},
    ],
)
def test_schema_errors(doc):
    with pytest.raises(NetParseError):
        from_dict(doc)


def test_structural_errors_pass_through():
    with pytest.raises(NetStructureError):
        from_dict({"places": ["p1"], "transitions": [{"id": "t1", "label": "e", "pre": {"p2": 1}}]})


def test_missing_file(tmp_path):
    with pytest.raises(NetInputError):
        load_net(tmp_path / "absent.json")


def test_generated_net_parses_back():
    net = random_sm(GenParams(5, 9, 3, seed=8))
    back = parse_net(dumps_net(NetDocument(net, meta={"seed": 8})))
    assert _same_net(back.net, net)
    assert back.meta == {"seed": 8}
