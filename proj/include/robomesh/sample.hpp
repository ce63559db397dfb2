#pragma once

#include <vector>

#include "robomesh/augmentation_spec.hpp"
#include "robomesh/body_model.hpp"
#include "robomesh/camera.hpp"
#include "robomesh/image.hpp"

namespace robomesh {

/// One crop with its ground truth. 3D quantities are root-relative (the root
/// joint sits at the origin); 2D quantities are in the normalized crop frame
/// except the part boxes, which are in crop pixels.
struct SampleRecord {
  Image image;
  BodyParams params;
  Points2 keypoints2d;                 // J x 2, == project(keypoints3d, params.camera)
  Points3 keypoints3d;                 // J x 3, meters
  std::vector<int> part_seg;           // H x W labels, part_count is background
  int part_count = 0;
  std::vector<std::vector<int>> part_groups;  // part labels making up each box group
  std::vector<Points2> part_points2d;  // projected vertices of each part group
  std::vector<Bbox> part_bboxes;       // one per part group
  double bbox_pad = 0.2;
  std::vector<AugmentationSpec> provenance;  // append-only history
};

}  // namespace robomesh
