#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "openmetrics/instance.hpp"

namespace openmetrics {

struct SegmentInfo {
  std::uint32_t id = 0;  // raster id, non-zero
  int category_id = 0;
  bool isthing = true;
};

// Non-overlapping segment map: one id per pixel, 0 = void.
struct PanopticMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> ids;  // row-major
  std::vector<SegmentInfo> segments;
};

// Pairwise gt/pred segment intersections from one joint raster pass.
// IoU divides by the union minus the gt-void pixels inside the prediction.
struct OverlapTable {
  struct Entry {
    int gt = 0;    // index into gt.segments
    int pred = 0;  // index into pred.segments
    std::int64_t intersection = 0;
    double iou = 0;
  };
  std::vector<Entry> entries;
  std::vector<std::int64_t> gt_area;    // raster pixels per gt segment
  std::vector<std::int64_t> pred_area;  // raster pixels per pred segment
  std::vector<std::int64_t> pred_void;  // gt-void pixels inside each prediction
};

OverlapTable segment_overlaps(const PanopticMap& gt, const PanopticMap& pred);

enum class PqMode { vanilla, open };

// Pairs require IoU > 0.5 (strict); vanilla additionally requires equal
// category_id, open only equal thing/stuff status. IoU > 0.5 on
// non-overlapping maps admits at most one partner per segment.
MatchSet pq_match(const OverlapTable& overlaps, const PanopticMap& gt,
                  const PanopticMap& pred, PqMode mode);

struct PQStats {
  Eigen::ArrayXd tp, fp, fn, iou_sum;

  PQStats() = default;
  explicit PQStats(int num_classes)
      : tp(Eigen::ArrayXd::Zero(num_classes)),
        fp(Eigen::ArrayXd::Zero(num_classes)),
        fn(Eigen::ArrayXd::Zero(num_classes)),
        iou_sum(Eigen::ArrayXd::Zero(num_classes)) {}

  int size() const { return static_cast<int>(tp.size()); }
  PQStats& merge(const PQStats& other);
};

// Matched pair (ci, cj): tp[ci] += S, and when ci != cj also
// fp[cj] += 1-S and fn[ci] += 1-S; iou_sum[ci] += IoU * S. Unmatched gt:
// fn += 1. Unmatched pred: fp += 1 unless more than half its area lies over
// gt-void (the void rule).
PQStats pq_accumulate(const MatchSet& matches, const OverlapTable& overlaps,
                      const PanopticMap& gt, const PanopticMap& pred,
                      const Eigen::Ref<const Eigen::MatrixXd>& s,
                      const std::unordered_map<int, int>& class_index,
                      int num_classes);

struct PqResult {
  struct Row {
    double pq = 0, sq = 0, rq = 0;
    double tp = 0, fp = 0, fn = 0, iou_sum = 0;
    bool present = false;  // occurs in gt or pred
  };
  std::vector<Row> per_class;
  double pq = 0, sq = 0, rq = 0;                    // means over present classes
  double pq_things = 0, sq_things = 0, rq_things = 0;
  double pq_stuff = 0, sq_stuff = 0, rq_stuff = 0;
  int n_present = 0, n_things = 0, n_stuff = 0;
};

// SQ = iou_sum/tp (0 when tp = 0), RQ = tp/(tp + fp/2 + fn/2), PQ = SQ*RQ.
PqResult pq_finalize(const PQStats& stats, std::span<const LabelSpec> labels);

// mean PQ/SQ/RQ restricted to a category-id subset (known/unknown splits)
PqResult::Row pq_subset_average(const PqResult& result,
                                std::span<const LabelSpec> labels,
                                std::span<const int> category_ids);

struct PanopticImage {
  int id = 0;
  PanopticMap gt;
  PanopticMap pred;
};

struct PanopticDataset {
  std::vector<LabelSpec> categories;
  std::vector<PanopticImage> images;
};

struct PanopticSummary {
  PqResult result;
  PQStats stats;
};

PanopticSummary evaluate_panoptic(const PanopticDataset& dataset,
                                  const SimilarityMatrix& s, PqMode mode,
                                  int threads = 1);

}  // namespace openmetrics
