#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "openmetrics/rle.hpp"
#include "openmetrics/similarity.hpp"

namespace openmetrics {

struct Box {
  double x = 0, y = 0, w = 0, h = 0;
  double area() const { return w * h; }
};

double box_iou(const Box& a, const Box& b);

struct InstanceMask {
  int image_id = 0;
  int category_id = 0;
  std::optional<double> score;  // present iff prediction
  RleMask mask;
  std::int64_t area = 0;        // foreground pixels, derived from mask
  std::optional<Box> box;       // detection mode
};

enum class IouKind { mask, box };

double instance_iou(const InstanceMask& a, const InstanceMask& b, IouKind kind);

// Greedy matching: predictions in descending score order (ties by input
// order) each claim the unassigned ground truth with the largest IoU >= delta
// (ties by input order). Indices refer to the input spans.
struct MatchPair {
  int gt = 0;
  int pred = 0;
  double iou = 0;
};

struct MatchSet {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;
  double delta = 0;
};

// all labels treated as one category
MatchSet match_class_agnostic(std::span<const InstanceMask> gts,
                              std::span<const InstanceMask> preds, double delta,
                              IouKind kind = IouKind::mask);
// the same protocol restricted to identical category_id (vanilla matcher)
MatchSet match_class_aware(std::span<const InstanceMask> gts,
                           std::span<const InstanceMask> preds, double delta,
                           IouKind kind = IouKind::mask);

// One scored detection record. A matched pair with classes c_i != c_j
// contributes a record (class c_i, tp = S(ci,cj)) plus a record
// (class c_j, fp = 1 - S(ci,cj)); unmatched predictions contribute
// (own class, fp = 1).
struct PRRecord {
  double score = 0;
  double tp = 0;
  double fp = 0;
  int class_index = 0;
};

struct PRCurve {
  std::vector<PRRecord> records;             // insertion order is tie order
  std::vector<std::int64_t> gt_per_class;    // recall denominators
};

// class_index maps category ids to matrix rows of s / gt_per_class slots.
PRCurve build_pr(const MatchSet& matches, std::span<const InstanceMask> gts,
                 std::span<const InstanceMask> preds,
                 const Eigen::Ref<const Eigen::MatrixXd>& s,
                 const std::unordered_map<int, int>& class_index,
                 int num_classes);

enum class ApIntegration { points_101, all_points };

struct ApResult {
  Eigen::ArrayXd per_class;  // -1 for classes without ground truth
  double mean = 0;           // over classes with ground truth; -1 when none
};

ApResult average_precision(const PRCurve& curve,
                           ApIntegration integration = ApIntegration::points_101);

// ---- dataset-level evaluation ----

struct InstanceImage {
  int id = 0;
  int width = 0, height = 0;
  std::vector<InstanceMask> gts;
  std::vector<InstanceMask> preds;
};

struct InstanceDataset {
  std::vector<LabelSpec> categories;
  std::vector<InstanceImage> images;
};

enum class EvalMode { vanilla, vanilla_agnostic, open };

std::string to_string(EvalMode m);
EvalMode eval_mode_from_string(std::string_view s);

struct InstanceEvalOptions {
  IouKind iou_kind = IouKind::mask;
  ApIntegration integration = ApIntegration::points_101;
  bool single_class_curve = false;  // one "object" PR curve instead of per class
  int max_detections = 100;         // per image, applied after score ranking
  int threads = 1;
};

// AP over delta in {0.50,...,0.95} plus AP50/AP75 and size buckets
// (small < 32^2 <= medium <= 96^2 < large, by each mask's own area; ground
// truths and predictions outside a bucket are dropped before matching).
struct InstanceSummary {
  double ap = 0, ap50 = 0, ap75 = 0;
  double ap_small = 0, ap_medium = 0, ap_large = 0;
  Eigen::ArrayXd per_delta;  // AP at each threshold 0.50 .. 0.95
  Eigen::ArrayXd per_class;  // mean over deltas; -1 without ground truth
};

InstanceSummary evaluate_instance(const InstanceDataset& dataset,
                                  const SimilarityMatrix& s, EvalMode mode,
                                  const InstanceEvalOptions& options = {});

}  // namespace openmetrics
