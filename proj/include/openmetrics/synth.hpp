#pragma once

#include <cstdint>
#include <map>

#include "openmetrics/evaluate.hpp"
#include "openmetrics/manifest.hpp"

namespace openmetrics {

// Controlled error structure for synthetic predictions. All draws come from
// one seeded generator walked in a fixed order, so equal seeds give
// byte-identical outputs.
struct PerturbConfig {
  enum class SwapTarget { nearest_by_s, uniform_random, fixed_map };

  double swap_prob = 0.0;
  SwapTarget swap_target = SwapTarget::nearest_by_s;
  std::map<int, int> fixed_map;  // category id -> category id
  int erode_px = 0;              // 4-neighborhood boundary erosion
  double drop_prob = 0.0;        // whole-segment drop rate
  std::uint64_t seed = 0;
};

PerturbConfig::SwapTarget swap_target_from_string(std::string_view s);

// Derives a prediction dataset from the ground truth of `gt`:
// per segment / class-region, relabel with probability swap_prob
// (nearest-by-s takes the off-diagonal argmax of the S row, smallest index
// on ties), erode boundaries by erode_px, drop whole segments with
// drop_prob. Kept instance predictions score 0.9. Prediction rasters are
// written under out_dir; the returned manifest references them and keeps the
// original ground truth.
Manifest synth_perturb(const Manifest& gt, const PerturbConfig& config,
                       const SimilarityMatrix& s,
                       const std::filesystem::path& out_dir);

}  // namespace openmetrics
