import numpy as np
import pytest

from taxelsnn import DataFormatError, TaxelLayout, load_layout, radial_layout
from taxelsnn.layout import load_edge_list, save_edge_list, save_layout


def test_radial_default_is_39_taxels():
    lay = radial_layout()
    assert lay.num_taxels == 39
    assert lay.names is not None and len(lay.names) == 39


def test_positions_are_immutable():
    lay = radial_layout()
    with pytest.raises(ValueError):
        lay.positions[0, 0] = 99.0


def test_rejects_empty_and_bad_shapes():
    with pytest.raises(ValueError):
        TaxelLayout(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        TaxelLayout(np.zeros((3, 3)))


def test_rejects_nonfinite_and_duplicate_positions():
    with pytest.raises(ValueError, match="finite"):
        TaxelLayout(np.array([[0.0, 0.0], [np.nan, 1.0]]))
    with pytest.raises(ValueError, match="identical"):
        TaxelLayout(np.array([[1.0, 2.0], [1.0, 2.0]]))


def test_distances_match_hand_computation():
    lay = TaxelLayout(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert lay.distances()[0, 1] == pytest.approx(5.0)


def test_layout_file_round_trip(tmp_path):
    lay = radial_layout((4,), (2.5,))
    path = tmp_path / "lay.txt"
    save_layout(lay, path)
    back = load_layout(path)
    assert back.num_taxels == lay.num_taxels
    np.testing.assert_allclose(back.positions, lay.positions, atol=1e-6)
    assert back.names == lay.names


def test_layout_parse_errors_name_the_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 0.0 0.0\n1 oops 2.0\n")
    with pytest.raises(DataFormatError, match=r"bad\.txt:2"):
        load_layout(path)

    path.write_text("0 0.0 0.0\n0 1.0 1.0\n")
    with pytest.raises(DataFormatError, match="duplicate"):
        load_layout(path)

    path.write_text("0 0.0 0.0\n2 1.0 1.0\n")
    with pytest.raises(DataFormatError, match="dense"):
        load_layout(path)


def test_layout_missing_file():
    with pytest.raises(DataFormatError, match="not found"):
        load_layout("no/such/file.txt")


def test_layout_comments_and_names(tmp_path):
    path = tmp_path / "lay.txt"
    path.write_text("# a comment\n1 1.0 0.0 right\n0 0.0 0.0 origin  # inline\n")
    lay = load_layout(path)
    assert lay.num_taxels == 2
    assert lay.names == ("origin", "right")
    np.testing.assert_allclose(lay.positions, [[0, 0], [1, 0]])


def test_edge_list_round_trip(tmp_path):
    path = tmp_path / "edges.txt"
    save_edge_list([(0, 1), (2, 3)], path)
    assert load_edge_list(path) == [(0, 1), (2, 3)]


def test_edge_list_parse_error(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("0 1\n1 2 3\n")
    with pytest.raises(DataFormatError, match=r"edges\.txt:2"):
        load_edge_list(path)
