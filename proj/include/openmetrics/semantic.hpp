#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "openmetrics/errors.hpp"

namespace openmetrics {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Per-pixel class-id raster. ignore_id marks pixels excluded from
// evaluation; every other id must be < the active class count.
struct ClassRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> ids;  // row-major
  std::uint32_t ignore_id = 0xFFFFFFFFu;

  std::size_t pixels() const { return ids.size(); }
};

// counts(i, j) = pixels with ground-truth class i predicted as class j.
//
// The matrix carries one extra column (index num_classes) for pixels whose
// prediction is the ignore id: they count as wrong predictions into a
// reserved unlabeled class with similarity zero to everything. The extra row
// stays zero because ground-truth ignore pixels are skipped entirely.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes)
      : num_classes_(num_classes),
        counts_(CountMatrix::Zero(num_classes + 1, num_classes + 1)) {}

  int num_classes() const { return num_classes_; }
  int unlabeled_index() const { return num_classes_; }
  const CountMatrix& counts() const { return counts_; }
  std::int64_t& at(int gt, int pred) { return counts_(gt, pred); }
  std::int64_t at(int gt, int pred) const { return counts_(gt, pred); }

  // entrywise addition; associative and commutative
  ConfusionMatrix& merge(const ConfusionMatrix& other);

  std::int64_t total() const { return counts_.sum(); }

 private:
  int num_classes_ = 0;
  CountMatrix counts_;
};

// soft (or hard) per-class TP/FP/FN mass
struct SoftCounts {
  Eigen::ArrayXd tp, fp, fn;

  int size() const { return static_cast<int>(tp.size()); }
};

// Both rasters must have identical dimensions; pixels whose ground truth is
// the gt raster's ignore_id are skipped.
ConfusionMatrix accumulate_confusion(const ClassRaster& gt,
                                     const ClassRaster& pred, int num_classes);

SoftCounts hard_counts(const ConfusionMatrix& c);

// Eq-style soft counts: tp_i = sum_j S(i,j) c(i,j), fn_i = sum_j (1-S(i,j)) c(i,j),
// fp_i = sum_j (1-S(j,i)) c(j,i). s must be num_classes x num_classes.
SoftCounts soft_counts(const ConfusionMatrix& c,
                       const Eigen::Ref<const Eigen::MatrixXd>& s);

// class i is present when it occurs in ground truth or prediction
std::vector<bool> class_presence(const ConfusionMatrix& c);

struct IouResult {
  Eigen::ArrayXd per_class;    // 0 where excluded
  std::vector<bool> included;
  double mean = 0;             // unweighted over included classes
};

IouResult miou(const SoftCounts& counts, const std::vector<bool>& presence);

}  // namespace openmetrics
