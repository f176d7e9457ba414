#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openmetrics/instance.hpp"
#include "openmetrics/panoptic.hpp"
#include "openmetrics/rle.hpp"
#include "openmetrics/similarity.hpp"

namespace openmetrics {

struct ManifestImage {
  int id = 0;
  int width = 0, height = 0;
  std::optional<std::string> gt;    // SEGB raster path (semantic/panoptic)
  std::optional<std::string> pred;
};

struct ManifestAnnotation {
  int image_id = 0;
  int category_id = 0;
  std::optional<double> score;  // present iff prediction
  RleMask segmentation;
  std::optional<Box> bbox;
};

struct ManifestSegment {
  int image_id = 0;
  bool gt_side = true;  // "which": gt | pred
  std::uint32_t id = 0;
  int category_id = 0;
};

// Dataset description. Relative raster paths resolve against base_dir.
struct Manifest {
  std::string task;  // semantic | instance | panoptic
  std::optional<std::uint32_t> ignore_id;
  std::vector<LabelSpec> categories;
  std::vector<ManifestImage> images;
  std::vector<ManifestAnnotation> annotations;
  std::vector<ManifestSegment> segments_info;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// similarity-matrix files
std::string similarity_to_json(const SimilarityMatrix& matrix);
void save_similarity(const SimilarityMatrix& matrix,
                     const std::filesystem::path& path);
SimilarityMatrix load_similarity(const std::filesystem::path& path);
// header row/column of label names
void save_similarity_csv(const SimilarityMatrix& matrix,
                         const std::filesystem::path& path);

// label lists share the manifest category schema
std::vector<LabelSpec> load_labels(const std::filesystem::path& path);

}  // namespace openmetrics
