import math

import numpy as np
import pytest

import robomesh as rm


@pytest.fixture(scope="module")
def tmpl():
    return rm.synthetic_template()


def test_template_shapes(tmpl):
    assert tmpl.template_vertices.shape == (tmpl.vertex_count, 3)
    assert tmpl.faces.shape[1] == 3
    assert len(tmpl.parents) == tmpl.joint_count
    tmpl.validate()


def test_rest_forward_is_template(tmpl):
    params = rm.BodyParams.rest(tmpl)
    verts, joints = rm.forward(tmpl, params)
    np.testing.assert_allclose(verts, tmpl.template_vertices, atol=1e-12)
    assert joints.shape == (tmpl.joint_count, 3)


def test_rotation_round_trip():
    w = np.array([0.3, -1.1, 0.4])
    R = rm.rodrigues(w)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(rm.rotation_log(R), w, atol=1e-10)
    np.testing.assert_allclose(rm.rot6d_to_rotmat(rm.rotmat_to_rot6d(R)), R, atol=1e-12)


def test_project_weak_perspective():
    pts = np.array([[0.1, 0.2, 5.0], [-0.3, 0.0, -2.0]])
    cam = rm.Camera(2.0, np.array([0.1, -0.1]))
    out = rm.project(pts, cam)
    np.testing.assert_allclose(out, 2.0 * pts[:, :2] + [0.1, -0.1])


def test_rasterize_covers_square():
    verts = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    faces = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    labels = rm.rasterize_parts(verts, [0.0] * 4, faces, [0, 1], 2, 8, 8)
    assert labels.shape == (8, 8)
    assert set(np.unique(labels)) <= {0, 1}


def test_procrustes_recovers_similarity():
    rng = np.random.default_rng(3)
    src = rng.normal(size=(12, 3))
    R = rm.rodrigues(np.array([0.2, 0.5, -0.7]))
    dst = 1.7 * src @ R.T + np.array([0.1, 0.2, 0.3])
    s, Rh, t = rm.procrustes_align(src, dst)
    assert s == pytest.approx(1.7)
    np.testing.assert_allclose(Rh, R, atol=1e-10)
    assert rm.pa_mpjpe(src, dst) == pytest.approx(0.0, abs=1e-9)


def test_soft_argmax_peak():
    logits = np.full((1, 8, 8, 8), -50.0)
    logits[0, 2, 5, 3] = 50.0
    out = rm.soft_argmax3d(logits)
    np.testing.assert_allclose(out[0], [2.0, 5.0, 3.0], atol=1e-9)


def test_contrastive_zero_when_pred_matches_gt():
    rng = np.random.default_rng(0)
    gt = rng.normal(size=(6, 9))
    total, per_anchor = rm.contrastive_loss(gt, gt)
    assert total == 0.0 and len(per_anchor) == 3
    total, _ = rm.contrastive_loss(gt + rng.normal(size=gt.shape), gt)
    assert total > 0.0


def test_augmentation_taxonomy_and_grid():
    assert len(rm.augmentation_kinds()) == 10
    assert rm.taxonomy("rotation") == "pose-variant"
    assert rm.taxonomy("hue") == "image-variant"
    grid = rm.sweep_grid("scale", 7)
    assert len(grid) == 7 and 0.0 in grid
    img = np.random.default_rng(1).uniform(size=(16, 16, 3))
    np.testing.assert_allclose(rm.apply_image(img, "brightness", 0.0), img, atol=1e-12)


def test_passthrough_sweep_is_zero_error():
    rows, failures = rm.sweep("passthrough", n=3, kinds=["translate_x", "rotation"], steps=3, metrics=["mpjpe", "iou"])
    assert failures == 0
    for r in rows:
        if r["metric"] == "mpjpe":
            assert r["value"] == pytest.approx(0.0, abs=1e-6)
        else:
            assert r["value"] == pytest.approx(1.0, abs=1e-6)


def test_total_loss_and_errors():
    total, weighted = rm.total_loss({"3d": 1.0, "2d": 2.0}, {"3d": 3.0})
    assert total == pytest.approx(5.0)
    assert weighted["3d"] == pytest.approx(3.0)
    with pytest.raises(ValueError):
        rm.total_loss({"3d": -1.0})
    with pytest.raises(ValueError):
        rm.sweep("nope")
    assert math.isfinite(rm.mpjpe(np.zeros((3, 3)), np.ones((3, 3))))
