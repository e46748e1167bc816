"""Family generators must hand back validated instances or say why not."""

import pytest

from berger.generators import GenerationError, generate_family
from berger.topology import validate_instance


class TestDoubleRing:
    def test_size_12_seed_1_validates(self):
        inst = generate_family("double-ring", 12, 1)
        assert len(inst.graph.nodes) == 12
        assert validate_instance(inst).ok()

    @pytest.mark.parametrize("size", [6, 8, 16])
    def test_small_sizes(self, size):
        inst = generate_family("double-ring", size, 1)
        assert len(inst.graph.nodes) == size

    def test_size_floor(self):
        with pytest.raises(ValueError):
            generate_family("double-ring", 4, 1)

    def test_odd_size_reported(self):
        with pytest.raises(GenerationError):
            generate_family("double-ring", 7, 1, retries=2)

    def test_deterministic(self):
        a = generate_family("double-ring", 12, 5)
        b = generate_family("double-ring", 12, 5)
        assert a.graph.nodes == b.graph.nodes
        assert a.graph.edges == b.graph.edges


class TestTriangulatedLadder:
    @pytest.mark.parametrize("size", [9, 10, 13, 16])
    def test_sizes(self, size):
        inst = generate_family("triangulated-ladder", size, 1)
        assert len(inst.graph.nodes) == size
        assert validate_instance(inst).ok()

    def test_structural_floor(self):
        with pytest.raises(ValueError):
            generate_family("triangulated-ladder", 6, 1)


class TestGabrielUnitDisk:
    def test_size_40_seed_1_validates(self):
        inst = generate_family("gabriel-unit-disk", 40, 1)
        assert len(inst.graph.nodes) == 40
        assert validate_instance(inst).ok()

    def test_structural_floor(self):
        with pytest.raises(ValueError):
            generate_family("gabriel-unit-disk", 8, 1)

    def test_awkward_size_reports_rejections(self):
        # leftover-of-one patches are marginal at the smallest scale: the
        # generator must either produce a valid instance or say why not
        try:
            inst = generate_family("gabriel-unit-disk", 20, 1, retries=3)
        except GenerationError as exc:
            assert exc.attempts
        else:
            assert validate_instance(inst).ok()


class TestDispatch:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate_family("dodecahedron", 12, 1)

    def test_global_size_floor(self):
        with pytest.raises(ValueError):
            generate_family("gabriel-unit-disk", 5, 1)
