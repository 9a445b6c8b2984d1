import json
from math import comb

import pytest

from relchern.simplicial import (FiniteSimplicialSet, SimplicialError, boundary_simplex, nerve_z2,
                                 standard_simplex, vertex_map)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_standard_simplex_counts(m):
    X = standard_simplex(m, 4)
    # weakly increasing sequences of length p+1 in [m]
    assert X.count() == [comb(m + p + 1, p + 1) for p in range(5)]
    assert [len(s) for s in X.nondegenerate] == [comb(m + 1, p + 1) for p in range(5)]


def test_boundary_and_nerve_nondegenerate():
    B = boundary_simplex(2, 4)
    assert [len(s) for s in B.nondegenerate] == [3, 3, 0, 0, 0]
    Z = nerve_z2(4)
    assert Z.count() == [1, 2, 4, 8, 16]
    assert Z.nondegenerate == [["[]"], ["[a]"], ["[a,a]"], ["[a,a,a]"], ["[a,a,a,a]"]]


def test_nerve_faces():
    Z = nerve_z2(3)
    # ∂1(a, a) = a·a = e
    assert Z.face("[a,a]", 2, 1) == "[e]"
    assert Z.face("[a,a]", 2, 0) == "[a]"


def test_decompose_degenerate():
    X = standard_simplex(1, 3)
    tau, k, psi = X.decompose("[0,0,1]", 2)
    assert (tau, k) == ("[0,1]", 1)
    assert X.act(psi, tau, k) == "[0,0,1]"


def test_act_and_edges():
    X = standard_simplex(3, 3)
    assert X.act((0, 2), "[0,1,2,3]", 3) == "[0,2]"
    assert X.edge("[0,1,2]", 2, 1, 2) == "[1,2]"


def test_json_round_trip():
    X = nerve_z2(3)
    Y = FiniteSimplicialSet.from_json(json.dumps(X.to_json()))
    assert Y.simplices == X.simplices and Y.faces == X.faces and Y.degens == X.degens


def test_validation_rejects_broken_face_identity():
    data = standard_simplex(2, 2).to_json()
    data["faces"]["2"]["[0,1,2]"] = ["[1,2]", "[0,1]", "[0,2]"]
    with pytest.raises(SimplicialError):
        FiniteSimplicialSet.from_json(data)


def test_validation_rejects_malformed():
    with pytest.raises(SimplicialError):
        FiniteSimplicialSet.from_json({"max_dim": 1, "simplices": {"0": ["a"]}})


def test_vertex_map_commutes_with_structure():
    f = vertex_map(standard_simplex(1, 3), standard_simplex(2, 3), lambda v: 2 * v)
    assert f("[0,1]", 1) == "[0,2]"
    with pytest.raises(SimplicialError):
        vertex_map(standard_simplex(1, 3), standard_simplex(2, 2), lambda v: v)
