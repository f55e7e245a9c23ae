"""
Net I/O – v1.0

JSON net documents (orjson):

    {
      "places": ["p1", "p2"],
      "transitions": [{"id": "t1", "label": "e1", "pre": {"p1": 1}, "post": {"p2": 1}}, ...],
      "alphabet": ["e1", "e2"],
      "marking": {"p1": 1},                  optional
      "target_marking": {"p2": 1},           optional
      "target_place": "p2",                  optional
      "subnets": [{"places": [...], "transitions": [...]}],   optional
      "meta": {...}                          optional, carried through untouched
    }

Zero entries are omitted from markings and arc maps on output.
"""

from dataclasses import dataclass, field
from pathlib import Path

import orjson

from petri_net import (
    PlaceTransitionNet,
    SynchronizedNet,
    marking_as_mapping,
    marking_from_mapping,
)
from sync_errors import NetInputError, NetParseError

KNOWN_KEYS = {"places", "transitions", "alphabet", "marking", "target_marking", "target_place", "subnets", "meta"}


@dataclass(frozen=True, eq=False)
class NetDocument:
    net: SynchronizedNet
    marking: tuple | None = None
    target_marking: tuple | None = None
    target_place: str | None = None
    subnets: tuple = ()
    meta: dict = field(default_factory=dict)


def _require(cond, message):
    if not cond:
        raise NetParseError(message)


def _arc_map(raw, where):
    _require(isinstance(raw, dict), f"{where} must be an object of place -> weight")
    for p, w in raw.items():
        _require(isinstance(w, int) and not isinstance(w, bool) and w >= 0, f"{where}[{p!r}] must be a non-negative integer")
    return raw


def _marking(net, raw, key):
    if raw is None:
        return None
    _arc_map(raw, key)
    try:
        return marking_from_mapping(net, raw)
    except NetInputError as exc:
        raise NetParseError(f"{key}: {exc}") from exc


def from_dict(doc):
    """Build a NetDocument from decoded JSON; schema problems raise NetParseError."""
    _require(isinstance(doc, dict), "net document must be a JSON object")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    _require(not unknown, f"unknown keys: {', '.join(unknown)}")
    places = doc.get("places")
    _require(isinstance(places, list) and all(isinstance(p, str) for p in places), "`places` must be a list of ids")
    records = doc.get("transitions", [])
    _require(isinstance(records, list), "`transitions` must be a list")

    ids, labels, pre, post = [], {}, {}, {}
    for n, rec in enumerate(records):
        _require(isinstance(rec, dict), f"transitions[{n}] must be an object")
        _require(isinstance(rec.get("id"), str), f"transitions[{n}] needs a string `id`")
        _require(isinstance(rec.get("label"), str), f"transition {rec['id']!r} needs a string `label`")
        t = rec["id"]
        ids.append(t)
        labels[t] = rec["label"]
        pre[t] = _arc_map(rec.get("pre", {}), f"{t}.pre")
        post[t] = _arc_map(rec.get("post", {}), f"{t}.post")

    alphabet = doc.get("alphabet")
    if alphabet is None:
        alphabet = list(dict.fromkeys(labels[t] for t in ids))
    _require(isinstance(alphabet, list) and all(isinstance(e, str) for e in alphabet), "`alphabet` must be a list of ids")

    net = SynchronizedNet.from_labeling(PlaceTransitionNet.from_arcs(places, ids, pre, post), alphabet, labels)

    target_place = doc.get("target_place")
    if target_place is not None:
        _require(target_place in net.places, f"target_place {target_place!r} is not a place")

    subnets = []
    for n, raw in enumerate(doc.get("subnets") or []):
        _require(isinstance(raw, dict) and isinstance(raw.get("places"), list), f"subnets[{n}] needs a `places` list")
        subnets.append((tuple(raw["places"]), tuple(raw.get("transitions", []))))

    meta = doc.get("meta") or {}
    _require(isinstance(meta, dict), "`meta` must be an object")
    return NetDocument(
        net=net,
        marking=_marking(net, doc.get("marking"), "marking"),
        target_marking=_marking(net, doc.get("target_marking"), "target_marking"),
        target_place=target_place,
        subnets=tuple(subnets),
        meta=meta,
    )


def parse_net(text):
    try:
        raw = orjson.loads(text)
    except orjson.JSONDecodeError as exc:
        raise NetParseError(exc.msg, exc.lineno, exc.colno) from exc
    return from_dict(raw)


def load_net(path):
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise NetInputError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_net(data)


def _sparse(mapping):
    return {k: int(v) for k, v in mapping.items() if v}


def to_dict(doc):
    net = doc.net
    pt = net.net
    out = {
        "places": list(net.places),
        "transitions": [
            {
                "id": t,
                "label": net.labels[j],
                "pre": _sparse(dict(zip(pt.places, pt.pre[:, j].tolist()))),
                "post": _sparse(dict(zip(pt.places, pt.post[:, j].tolist()))),
            }
            for j, t in enumerate(pt.transitions)
        ],
        "alphabet": list(net.alphabet),
    }
    if doc.marking is not None:
        out["marking"] = _sparse(marking_as_mapping(net, doc.marking))
    if doc.target_marking is not None:
        out["target_marking"] = _sparse(marking_as_mapping(net, doc.target_marking))
    if doc.target_place is not None:
        out["target_place"] = doc.target_place
    if doc.subnets:
        out["subnets"] = [{"places": list(p), "transitions": list(t)} for p, t in doc.subnets]
    if doc.meta:
        out["meta"] = doc.meta
    return out


def dumps_net(doc):
    return orjson.dumps(to_dict(doc), option=orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE)


def save_net(doc, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_net(doc))
    return path
