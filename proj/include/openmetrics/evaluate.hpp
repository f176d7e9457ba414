#pragma once

#include "openmetrics/manifest.hpp"
#include "openmetrics/semantic.hpp"

namespace openmetrics {

// raster loading helpers (SEGB sentinel normalization included)
ClassRaster load_class_raster(const std::filesystem::path& path,
                              std::uint32_t ignore_id, int num_classes);
PanopticMap load_panoptic_map(const Manifest& manifest, const ManifestImage& image,
                              bool gt_side);

InstanceDataset load_instance_dataset(const Manifest& manifest);
PanopticDataset load_panoptic_dataset(const Manifest& manifest);

struct SemanticEvaluation {
  ConfusionMatrix confusion;  // merged over all images
  std::vector<bool> presence;
  IouResult vanilla;
  IouResult open;   // meaningful iff has_open
  bool has_open = false;
};

// Accumulates the dataset confusion matrix and scores it with hard counts
// plus, when open_s is non-null, with the Eq-style soft counts. Per-image
// accumulation runs on `threads` workers; the merge order is fixed.
SemanticEvaluation evaluate_semantic_manifest(const Manifest& manifest,
                                              const SimilarityMatrix* open_s,
                                              int threads = 1);

// remaps similarity values into semantic class-id order (ids are 0..k)
Eigen::MatrixXd semantic_similarity_values(const SimilarityMatrix& s,
                                           int num_classes);

}  // namespace openmetrics
