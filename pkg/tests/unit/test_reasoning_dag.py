import random

import pytest

from app.services.errors import (
    CycleError,
    DuplicateClaimError,
    EmptyDiagramError,
    MappingError,
    ParameterError,
)
from app.services.reasoning_dag import (
    ClaimDAG,
    ClaimEdge,
    ClaimNode,
    Status,
    accept_all,
    colimit,
    dump_dag,
    format_colimit,
    parse_dag,
    reject_ids,
    threshold_checker,
    validate,
)

SPAN = """\
node a a1,a2
node b b1,b2
node c g
edge c a g=a1
edge c b g=b1
"""


def chain(*ids):
    dag = ClaimDAG()
    for nid in ids:
        dag.add_claim(ClaimNode(nid, ("x",)))
    for src, dst in zip(ids, ids[1:]):
        dag.add_edge(ClaimEdge(src, dst, {"x": "x"}))
    return dag


def diamond():
    dag = ClaimDAG()
    for nid in ("root", "left", "right", "sink"):
        dag.add_claim(ClaimNode(nid, ("x",)))
    for src, dst in (("root", "left"), ("root", "right"), ("left", "sink"), ("right", "sink")):
        dag.add_edge(ClaimEdge(src, dst, {"x": "x"}))
    return dag


def statuses(dag):
    return {nid: node.status for nid, node in dag.nodes.items()}


def test_add_claim_and_duplicates():
    dag = ClaimDAG().add_claim(ClaimNode("a", ("x", "y")))
    assert len(dag) == 1
    with pytest.raises(DuplicateClaimError):
        dag.add_claim(ClaimNode("a", ()))


def test_duplicate_labels_are_rejected():
    with pytest.raises(ValueError):
        ClaimNode("a", ("x", "x"))


def test_add_edge_errors():
    dag = chain("a", "b", "c")
    with pytest.raises(CycleError):
        dag.add_edge(ClaimEdge("c", "a", {"x": "x"}))
    with pytest.raises(CycleError):
        dag.add_edge(ClaimEdge("b", "b", {"x": "x"}))

    dag.add_claim(ClaimNode("d", ("u", "v")))
    dag.add_claim(ClaimNode("e", ("w",)))
    with pytest.raises(MappingError):
        dag.add_edge(ClaimEdge("d", "e", {"u": "w"}))
    with pytest.raises(MappingError):
        dag.add_edge(ClaimEdge("d", "e", {"u": "w", "v": "z"}))
    with pytest.raises(ParameterError):
        dag.add_edge(ClaimEdge("d", "missing", {}))


def test_validate_examples():
    assert set(statuses(validate(diamond(), accept_all)).values()) == {Status.VALIDATED}
    assert set(statuses(validate(diamond(), reject_ids(["root"]))).values()) == {Status.REJECTED}
    assert statuses(validate(diamond(), reject_ids(["left"]))) == {
        "root": Status.VALIDATED,
        "left": Status.REJECTED,
        "right": Status.VALIDATED,
        "sink": Status.REJECTED,
    }


def test_validate_leaves_input_untouched_and_requires_pending():
    dag = diamond()
    checked = validate(dag, accept_all)
    assert set(statuses(dag).values()) == {Status.PENDING}
    with pytest.raises(ParameterError):
        validate(checked, accept_all)


def test_colimit_examples():
    dag = ClaimDAG().add_claim(ClaimNode("a", ("x", "y"))).add_claim(ClaimNode("b", ("u", "v", "w")))
    assert len(colimit(validate(dag, accept_all)).classes) == 5

    span = colimit(validate(parse_dag(SPAN), accept_all))
    assert span.classes == [[("a", "a1"), ("b", "b1"), ("c", "g")], [("a", "a2")], [("b", "b2")]]

    single = colimit(validate(ClaimDAG().add_claim(ClaimNode("s", ("p", "q", "r"))), accept_all))
    assert single.classes == [[("s", "p")], [("s", "q")], [("s", "r")]]
    assert single.cocone == {"s": {"p": 0, "q": 1, "r": 2}}


def test_colimit_needs_a_validated_claim():
    with pytest.raises(EmptyDiagramError):
        colimit(validate(chain("a", "b"), reject_ids(["a"])))


def test_format_colimit_for_span():
    text = format_colimit(colimit(validate(parse_dag(SPAN), accept_all)))
    assert text == "class 0: a.a1 b.b1 c.g\nclass 1: a.a2\nclass 2: b.b2\n"


def random_dag(rng):
    count = rng.randint(1, 6)
    ids = [f"n{k}" for k in range(count)]
    payloads = {nid: tuple(f"l{j}" for j in range(rng.randint(0, 8))) for nid in ids}
    edges = []
    for i, src in enumerate(ids):
        for dst in ids[i + 1:]:
            if len(edges) < 10 and rng.random() < 0.4 and (payloads[dst] or not payloads[src]):
                edges.append(ClaimEdge(src, dst, {label: rng.choice(payloads[dst]) for label in payloads[src]}))
    return ids, payloads, edges


def build(ids, payloads, edges):
    dag = ClaimDAG()
    for nid in ids:
        dag.add_claim(ClaimNode(nid, payloads[nid]))
    for edge in edges:
        dag.add_edge(edge)
    return dag


def merge_to_fixpoint(dag):
    validated = {nid for nid, node in dag.nodes.items() if node.status is Status.VALIDATED}
    blocks = [{(nid, label)} for nid in validated for label in dag.nodes[nid].payload]
    pairs = [((e.source, s), (e.target, t)) for e in dag.edges
             if e.source in validated and e.target in validated for s, t in e.mapping.items()]
    changed = True
    while changed:
        changed = False
        for x, y in pairs:
            bx = next(b for b in blocks if x in b)
            by = next(b for b in blocks if y in b)
            if bx is not by:
                bx |= by
                blocks.remove(by)
                changed = True
    return frozenset(frozenset(b) for b in blocks)


def test_colimit_matches_brute_force_oracle():
    rng = random.Random(42)
    for _ in range(200):
        ids, payloads, edges = random_dag(rng)
        rejected = [nid for nid in ids if rng.random() < 0.2]
        checked = validate(build(ids, payloads, edges), reject_ids(rejected))
        validated = {nid for nid, node in checked.nodes.items() if node.status is Status.VALIDATED}

        # validated set is closed under predecessors
        for edge in checked.edges:
            if edge.target in validated:
                assert edge.source in validated

        if not validated:
            with pytest.raises(EmptyDiagramError):
                colimit(checked)
            continue
        result = colimit(checked)
        assert result.partition() == merge_to_fixpoint(checked)
        assert all(result.classes)
        for edge in checked.edges:
            if edge.source in validated and edge.target in validated:
                for src, dst in edge.mapping.items():
                    assert result.cocone[edge.target][dst] == result.cocone[edge.source][src]


def test_colimit_ignores_insertion_order():
    rng = random.Random(7)
    for _ in range(50):
        ids, payloads, edges = random_dag(rng)
        reference = colimit(validate(build(ids, payloads, edges), accept_all))
        shuffled_ids, shuffled_edges = ids[:], edges[:]
        rng.shuffle(shuffled_ids)
        rng.shuffle(shuffled_edges)
        again = colimit(validate(build(shuffled_ids, payloads, shuffled_edges), accept_all))
        assert again.classes == reference.classes


def test_text_format_round_trip():
    text = SPAN + "statement c holds p=2 q=2.4 alpha=0.5 n=2\n"
    dag = parse_dag("# comment\n\n" + text)
    again = parse_dag(dump_dag(dag))
    assert {nid: (n.payload, n.statement) for nid, n in again.nodes.items()} == \
        {nid: (n.payload, n.statement) for nid, n in dag.nodes.items()}
    assert [(e.source, e.target, e.mapping) for e in again.edges] == \
        [(e.source, e.target, e.mapping) for e in dag.edges]
    assert dag.nodes["c"].statement == "holds p=2 q=2.4 alpha=0.5 n=2"


@pytest.mark.parametrize("text, error", [
    ("node\n", ParameterError),
    ("edge a\n", ParameterError),
    ("node a x\nnode b y\nedge a b x\n", ParameterError),
    ("vertex a x\n", ParameterError),
    ("statement ghost something\n", ParameterError),
    ("node a x\nnode b u,v\nedge a b x=u,x=v\n", MappingError),
    ("node a x\nnode b u\nedge a b x=u,x=u\n", MappingError),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_dag(text)


def test_threshold_checker():
    assert threshold_checker(ClaimNode("a", (), "holds p=2 q=2.4 alpha=0.5 n=2"))
    assert not threshold_checker(ClaimNode("b", (), "holds p=2 q=3 alpha=0.5 n=2"))
    assert not threshold_checker(ClaimNode("c", (), "holds p=2 q=1 alpha=0.5 n=2"))
    assert threshold_checker(ClaimNode("d", (), "free-form remark"))
