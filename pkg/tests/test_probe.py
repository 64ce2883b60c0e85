import numpy as np
import pytest

from numrange import geometry
from numrange.errors import InvalidInput
from numrange.gallery import two_ellipse_block
from numrange.probe import (NOT_OPEN, OPEN, ProbeConfig, _record, cap_image,
                            constructed_preimages, convexity_defect, delta_coverage,
                            neighbourhood_targets, openness_verdict)
from numrange.support import boundary_scan

NIL = np.array([[0, 1], [0, 0]], dtype=complex)
SMALL = ProbeConfig(samples_per_eps=4000)


class TestCapImage:
    def test_identity_constant(self):
        cloud = cap_image(np.eye(3), np.array([1, 0, 0]), 0.5, SMALL)
        assert np.allclose(cloud, 1)

    def test_nilpotent_in_disk(self):
        x = np.array([1, 1]) / np.sqrt(2)
        cloud = cap_image(NIL, x, 0.3, SMALL)
        assert cloud[0] == pytest.approx(0.5)
        assert np.all(np.abs(cloud) <= 0.5 + 1e-12)

    def test_diagonal_on_segment_near_vertex(self):
        cloud = cap_image(np.diag([1, 1j]), np.array([1, 0]), 0.2, SMALL)
        assert np.allclose(cloud.real + cloud.imag, 1, atol=1e-12)
        assert np.all(np.abs(cloud - 1) <= 0.2 * np.sqrt(2))

    def test_first_point_is_center(self):
        x = np.array([0.6, 0.8j])
        assert cap_image(NIL, x, 0.1, SMALL)[0] == pytest.approx(np.vdot(x, NIL @ x))

    def test_deterministic(self):
        x = np.array([1, 0], dtype=complex)
        assert np.array_equal(cap_image(NIL, x, 0.2, SMALL), cap_image(NIL, x, 0.2, SMALL))

    def test_rejects_non_unit(self):
        with pytest.raises(InvalidInput):
            cap_image(NIL, np.array([1, 1]), 0.1)


class TestConvexityDefect:
    def test_singleton(self):
        assert convexity_defect([1 + 1j]) == 0.0

    def test_nilpotent_disk_cloud(self):
        x = np.array([1, 0], dtype=complex)
        cloud = cap_image(NIL, x, 2.0, ProbeConfig(samples_per_eps=20000))
        assert convexity_defect(cloud) <= 0.05

    def test_two_blobs(self):
        rng = np.random.default_rng(0)
        blob = 0.02 * (rng.standard_normal(500) + 1j * rng.standard_normal(500)) / 3
        cloud = np.concatenate([blob - 1, blob + 1])
        assert convexity_defect(cloud) >= 0.3


class TestDeltaCoverage:
    def test_identity_singleton(self):
        m = boundary_scan(np.eye(2), 64)
        assert delta_coverage(np.eye(2), m, 1, [1]) == 1.0

    def test_nilpotent_center(self):
        m = boundary_scan(NIL, 256)
        cloud = cap_image(NIL, np.array([1, 0]), 0.5, SMALL)
        assert delta_coverage(NIL, m, 0, cloud) > 0

    def test_degenerate_cloud(self):
        m = boundary_scan(NIL, 256)
        assert delta_coverage(NIL, m, 0, [0, 0.1]) == 0.0


class TestRecords:
    def test_block_origin_not_covered(self):
        A = two_ellipse_block().matrix
        m = boundary_scan(A, 512)
        cfg = ProbeConfig()
        r0 = float(cfg.deltas()[0] * m.diameter)
        targets = neighbourhood_targets(m, 0, r0)
        e0 = np.array([1, 0, 0, 0])
        assert _record(A, m, 0, e0, 0.25, cfg, targets, 0).relative_nbhd_covered
        rec = _record(A, m, 0, e0, 0.1, cfg, targets, 0)
        assert not rec.relative_nbhd_covered
        assert rec.uncovered_distance > 3 * rec.noise

    def test_targets_inside_disk(self):
        m = boundary_scan(NIL, 256)
        t = neighbourhood_targets(m, 0.5, 0.05)
        assert t.size and np.all(np.abs(t - 0.5) <= 0.05)
        assert np.all(geometry.signed_distance(m.polygon, t) >= -1e-9)


class TestOpenness:
    def test_interior_open_at_both_preimages(self):
        rep = openness_verdict(NIL, z=0, config=SMALL)
        assert rep.verdict == OPEN
        assert len(rep.probes) == 2 and all(p.verdict == OPEN for p in rep.probes)
        # the two preimages of 0 are the basis vectors up to phase
        X = np.abs(np.array(rep.x))
        assert np.allclose(np.sort(X, axis=0), [[0, 0], [1, 1]], atol=1e-6)

    def test_block_origin_not_open(self):
        rep = openness_verdict(two_ellipse_block().matrix, z=0, config=SMALL)
        assert rep.verdict == NOT_OPEN
        assert rep.probes and all(p.verdict == NOT_OPEN for p in rep.probes)

    def test_weak_variant(self):
        rep = openness_verdict(NIL, z=0.5, config=SMALL, variant="weak")
        assert rep.variant == "weak" and rep.verdict == OPEN

    def test_given_preimage(self):
        rep = openness_verdict(NIL, z=0.5, config=SMALL,
                               preimages=[np.array([1, 1]) / np.sqrt(2)])
        assert len(rep.probes) == 1

    def test_deterministic(self):
        a = openness_verdict(NIL, z=0.2, config=SMALL).to_dict()
        b = openness_verdict(NIL, z=0.2, config=SMALL).to_dict()
        assert a == b

    def test_notes_limit_claim(self):
        rep = openness_verdict(NIL, z=0, config=SMALL)
        assert any("other preimages" in n for n in rep.notes)

    def test_constructed_preimages_hit_target(self):
        A = two_ellipse_block().matrix
        m = boundary_scan(A, 512)
        xs = constructed_preimages(A, 0, m)
        assert len(xs) >= 2
        for x in xs:
            assert abs(np.vdot(x, A @ x)) <= 1e-8


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(eps_list=()),
        dict(eps_list=(0.1, 0.5)),
        dict(eps_list=(3.0,)),
        dict(samples_per_eps=10),
        dict(delta_grid=np.array([0.0, 0.5])),
        dict(delta_grid=np.array([0.5, 1.5])),
    ])
    def test_invalid(self, kw):
        with pytest.raises(InvalidInput):
            ProbeConfig(**kw).validate()

    def test_bad_variant(self):
        with pytest.raises(InvalidInput):
            openness_verdict(NIL, z=0, config=SMALL, variant="medium")

    def test_default_deltas(self):
        d = ProbeConfig().deltas()
        assert d.size == 64 and d[0] == pytest.approx(0.005) and d[-1] == 1.0
