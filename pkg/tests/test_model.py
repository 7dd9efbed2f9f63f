import pytest
from hypothesis import given, strategies as st

from jurisdictions import (
    BadExponent,
    Coalition,
    DimensionMismatch,
    EmptyAgentSet,
    IncompleteCover,
    Instance,
    MissingTableEntry,
    NonPositiveProjectCost,
    OverlappingBlocks,
    Partition,
    ProjectCostSpec,
    ValidationError,
    canonical_partition,
    validate_instance,
)
from jurisdictions.model import instance_to_raw, partition_from_labels


def raw_six(**over):
    raw = {
        "dimension": 1,
        "agents": [[0], [1.9], [1.9], [4.1], [4.1], [4.1]],
        "transport": {"kind": "power", "exponent": 1},
        "project_cost": {"kind": "constant", "value": 1},
    }
    raw.update(over)
    return raw


def test_validate_six_instance():
    inst = validate_instance(raw_six())
    assert inst.n == 6 and inst.dimension == 1
    assert inst.peaks == ((0.0,), (1.9,), (1.9,), (4.1,), (4.1,), (4.1,))
    assert inst.alpha == 1
    assert inst.project_cost(0b111, 3) == 1


@pytest.mark.parametrize(
    "over, exc",
    [
        ({"project_cost": {"kind": "constant", "value": 0}}, NonPositiveProjectCost),
        ({"project_cost": {"kind": "constant", "value": -2}}, NonPositiveProjectCost),
        ({"project_cost": {"kind": "by_size", "values": [1, 1, 0, 1, 1, 1]}}, NonPositiveProjectCost),
        ({"agents": [[0, 1], [1]]}, DimensionMismatch),
        ({"dimension": 0}, DimensionMismatch),
        ({"agents": []}, EmptyAgentSet),
        ({"transport": {"kind": "power", "exponent": 0.5}}, BadExponent),
        ({"transport": {"kind": "power", "exponent": float("nan")}}, BadExponent),
        ({"transport": {"kind": "log", "exponent": 1}}, ValidationError),
        ({"extra": 1}, ValidationError),
        ({"project_cost": {"kind": "by_size", "values": [1, 2]}}, ValidationError),
        ({"project_cost": {"kind": "table", "entries": []}}, MissingTableEntry),
    ],
)
def test_validate_rejects(over, exc):
    with pytest.raises(exc):
        validate_instance(raw_six(**over))


def test_table_project_cost_round_trip():
    raw = raw_six(
        project_cost={
            "kind": "table",
            "entries": [{"coalition": [1, 2], "cost": 5}],
            "default": {"kind": "by_size", "values": [1, 2, 3, 4, 5, 6]},
        }
    )
    inst = validate_instance(raw)
    assert inst.project_cost(0b11, 2) == 5
    assert inst.project_cost(0b101, 2) == 2
    assert validate_instance(instance_to_raw(inst)) == inst


def test_table_without_default_raises_on_lookup():
    spec = ProjectCostSpec.table({0b1: 2.0}, None)
    assert spec(0b1, 1) == 2.0
    with pytest.raises(MissingTableEntry):
        spec(0b10, 1)


def test_instance_is_hashable_and_immutable(six):
    assert hash(six) == hash(Instance.from_peaks([0, 1.9, 1.9, 4.1, 4.1, 4.1]))
    with pytest.raises(ValueError):
        six.points[0, 0] = 3.0


# coalitions


def test_coalition_text_forms():
    c = Coalition.parse(" 3, 1,2 ")
    assert c.mask == 0b111
    assert str(c) == "1,2,3"
    assert c.members == (1, 2, 3)
    assert len(c) == 3 and 2 in c and 4 not in c
    assert Coalition.of([5]).smallest == 5
    with pytest.raises(ValueError):
        Coalition.parse("")
    with pytest.raises(ValueError):
        Coalition.of([0])
    with pytest.raises(ValueError):
        Coalition(0)


@given(st.integers(min_value=1, max_value=2**12 - 1))
def test_coalition_round_trip(mask):
    c = Coalition(mask)
    assert Coalition.parse(str(c)) == c
    assert Coalition.of(c.members) == c


# partitions


def test_canonical_partition_sorts_blocks():
    p = canonical_partition([Coalition.of([4, 5, 6]), Coalition.of([1]), Coalition.of([2, 3])], 6)
    assert [b.members for b in p.blocks] == [(1,), (2, 3), (4, 5, 6)]
    assert str(p) == "1 | 2,3 | 4,5,6"


def test_canonical_partition_errors():
    with pytest.raises(OverlappingBlocks):
        canonical_partition([Coalition.of([1, 2]), Coalition.of([2, 3])], 3)
    with pytest.raises(IncompleteCover):
        canonical_partition([Coalition.of([1])], 2)
    with pytest.raises(IncompleteCover):
        canonical_partition([Coalition.of([1, 3])], 2)
    with pytest.raises(IncompleteCover):
        canonical_partition([], 2)


def test_partition_parse_and_labels():
    p = Partition.parse("4,5,6 | 1 | 2, 3", 6)
    assert p == Partition.parse("1|2,3|4,5,6", 6)
    assert p.labels() == (0, 1, 1, 2, 2, 2)
    assert partition_from_labels(p.labels()) == p
    assert p.block_of(3) == Coalition.of([2, 3])


@st.composite
def shuffled_partitions(draw):
    n = draw(st.integers(1, 9))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    blocks = {}
    for i, lab in enumerate(labels, 1):
        blocks.setdefault(lab, []).append(i)
    coalitions = [Coalition.of(m) for m in blocks.values()]
    return n, coalitions, draw(st.permutations(coalitions))


@given(shuffled_partitions())
def test_canonical_partition_idempotent_and_order_free(data):
    n, blocks, shuffled = data
    p = canonical_partition(blocks, n)
    assert canonical_partition(p.blocks, n) == p
    assert canonical_partition(shuffled, n) == p
    assert hash(canonical_partition(shuffled, n)) == hash(p)
    smallest = [b.smallest for b in p.blocks]
    assert smallest == sorted(smallest)
