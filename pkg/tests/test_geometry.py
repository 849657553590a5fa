import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bridgeinspect.geometry import (
    BridgeConfigError,
    BridgeValidationError,
    DegenerateLegError,
    Point3,
    RoutineKind,
    SurfaceKind,
    dump_bridge,
    load_bridge,
    node_distance,
    routine_for_leg,
)

SINGLE = """
[[surface]]
id = "B"
kind = "girder"
vertices = [[0, 0, 12], [30, 0, 12], [30, 0, 16], [0, 0, 16]]
node_a = [1, 0, 13.5]
node_b = [29, 0, 13.5]
"""


def test_viaduct_has_eleven_surfaces(viaduct):
    assert len(viaduct.surfaces) == 11
    kinds = {s.id: s.kind for s in viaduct.surfaces}
    assert [k for k, v in kinds.items() if v is SurfaceKind.COLUMN] == list("ACEGIK")
    assert [k for k, v in kinds.items() if v is SurfaceKind.GIRDER] == list("BDFHJ")
    nodes = [n for s in viaduct.surfaces for n in (s.node_a, s.node_b)]
    assert len(nodes) == 22


def test_single_surface():
    m = load_bridge(SINGLE)
    assert len(m.surfaces) == 1
    assert m.distance_scale == 1.0


def test_duplicate_id_rejected():
    with pytest.raises(BridgeValidationError) as err:
        load_bridge(SINGLE + SINGLE)
    assert err.value.surface_id == "B"
    assert err.value.invariant == "unique ids"


def test_unknown_field_is_parse_error():
    with pytest.raises(BridgeConfigError) as err:
        load_bridge(SINGLE + 'colour = "grey"\n')
    assert err.value.field == "surface[0].colour"


def test_missing_field_named():
    text = SINGLE.replace('node_b = [29, 0, 13.5]\n', "")
    with pytest.raises(BridgeConfigError) as err:
        load_bridge(text)
    assert err.value.field == "surface[0].node_b"


def test_syntax_error_has_line():
    with pytest.raises(BridgeConfigError) as err:
        load_bridge('distance_scale = 1.0\n[[surface]\nid = "A"\n')
    assert err.value.line == 2


def test_non_coplanar_rejected():
    bent = SINGLE.replace("[0, 0, 16]]", "[0, 0.01, 16]]")
    with pytest.raises(BridgeValidationError) as err:
        load_bridge(bent)
    assert err.value.invariant == "coplanar vertices"


def test_node_off_plane_rejected():
    with pytest.raises(BridgeValidationError) as err:
        load_bridge(SINGLE.replace("node_a = [1, 0, 13.5]", "node_a = [1, 0.6, 13.5]"))
    assert err.value.invariant == "node near plane"


def test_girder_nodes_must_run_longitudinally():
    text = SINGLE.replace("node_a = [1, 0, 13.5]", "node_a = [1, 0, 12.1]").replace(
        "node_b = [29, 0, 13.5]", "node_b = [1.5, 0, 15.9]"
    )
    with pytest.raises(BridgeValidationError) as err:
        load_bridge(text)
    assert err.value.invariant == "node axis"


FAR = """
[[surface]]
id = "C"
kind = "girder"
vertices = [[40, 0, 12], [70, 0, 12], [70, 0, 16], [40, 0, 16]]
node_a = [41, 0, 13.5]
node_b = [69, 0, 13.5]
"""


def test_adjacency_needs_touching_surfaces():
    with pytest.raises(BridgeValidationError) as err:
        load_bridge('adjacency = [["B", "C"]]\n' + SINGLE + FAR)
    assert err.value.invariant == "adjacent surfaces touch"


def test_adjacency_unknown_id():
    with pytest.raises(BridgeValidationError):
        load_bridge('adjacency = [["B", "Z"]]\n' + SINGLE)


def test_round_trip(viaduct, short_span):
    for m in (viaduct, short_span):
        assert load_bridge(dump_bridge(m)) == m


def test_node_distance_examples(viaduct):
    assert node_distance(viaduct, (1, 2, 3), (1, 2, 3)) == 0
    assert node_distance(viaduct, (0, 0, 0), (3, 4, 0)) == 5
    scaled = load_bridge("distance_scale = 2.5\n" + SINGLE)
    assert node_distance(scaled, (0, 0, 0), (1, 0, 0)) == 2.5


def test_routine_for_leg(viaduct):
    col, gir = viaduct.surface("K"), viaduct.surface("J")
    bottom, top = sorted((col.node_a, col.node_b), key=lambda p: p.z)
    assert routine_for_leg(col, bottom, top) is RoutineKind.CU
    assert routine_for_leg(col, top, bottom) is RoutineKind.CD
    right, left = sorted((gir.node_a, gir.node_b), key=lambda p: -p.x)
    assert routine_for_leg(gir, right, left) is RoutineKind.GL
    assert routine_for_leg(gir, left, right) is RoutineKind.GR
    with pytest.raises(DegenerateLegError):
        routine_for_leg(col, top, top)


def test_top_and_bottom_routines():
    text = SINGLE.replace('kind = "girder"', 'kind = "top"')
    s = load_bridge(text).surfaces[0]
    assert routine_for_leg(s, s.node_a, s.node_b) is RoutineKind.TR
    assert routine_for_leg(s, s.node_b, s.node_a) is RoutineKind.TL
    s = load_bridge(SINGLE.replace('kind = "girder"', 'kind = "bottom"')).surfaces[0]
    assert routine_for_leg(s, s.node_a, s.node_b) is RoutineKind.BR


@pytest.mark.parametrize("kind", list(RoutineKind))
def test_opposites_pair_up(kind):
    assert kind.opposite.opposite is kind
    assert kind.opposite is not kind


def test_routines_reverse_with_direction(viaduct):
    for s in viaduct.surfaces:
        a = routine_for_leg(s, s.node_a, s.node_b)
        assert routine_for_leg(s, s.node_b, s.node_a) is a.opposite


coords = st.floats(-1e3, 1e3, allow_nan=False)
points = st.tuples(coords, coords, coords)


@settings(max_examples=200, deadline=None)
@given(points, points, points)
def test_node_distance_is_a_metric(viaduct, p, q, r):
    d = lambda a, b: node_distance(viaduct, a, b)  # noqa: E731
    assert d(p, q) == d(q, p)
    assert (d(p, q) == 0) == (Point3(*p) == Point3(*q))
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-9 * (1 + d(p, q) + d(q, r))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.0))
def test_round_trip_any_scale(short_span, k):
    # scales above 1 would push the 0.75 m adjacency gaps past the limit
    m = load_bridge(dump_bridge(short_span).replace("distance_scale = 1.0", f"distance_scale = {k!r}"))
    assert load_bridge(dump_bridge(m)) == m
    assert math.isclose(m.distance_scale, k)
