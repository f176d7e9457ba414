#include "openmetrics/instance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "openmetrics/parallel.hpp"

namespace openmetrics {

double box_iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double instance_iou(const InstanceMask& a, const InstanceMask& b, IouKind kind) {
  if (kind == IouKind::box) {
    if (!a.box || !b.box) throw SchemaError("box IoU requested on mask without bbox");
    return box_iou(*a.box, *b.box);
  }
  return rle_iou(a.mask, b.mask);
}

namespace {

std::vector<int> score_order(std::span<const InstanceMask> preds) {
  for (const auto& p : preds) {
    if (!p.score) throw SchemaError("prediction without score");
  }
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return *preds[a].score > *preds[b].score;
  });
  return order;
}

Eigen::MatrixXd pairwise_iou(std::span<const InstanceMask> gts,
                             std::span<const InstanceMask> preds, IouKind kind) {
  Eigen::MatrixXd iou(gts.size(), preds.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < preds.size(); ++p) {
      iou(g, p) = instance_iou(gts[g], preds[p], kind);
    }
  }
  return iou;
}

// greedy protocol over a precomputed IoU table, shared across thresholds
MatchSet greedy_match(std::span<const InstanceMask> gts,
                      std::span<const InstanceMask> preds,
                      const Eigen::Ref<const Eigen::MatrixXd>& iou,
                      const std::vector<int>& order, double delta,
                      bool class_aware) {
  MatchSet out;
  out.delta = delta;
  std::vector<bool> gt_taken(gts.size(), false);
  std::vector<bool> pred_matched(preds.size(), false);
  for (int pi : order) {
    const InstanceMask& pred = preds[pi];
    int best_gt = -1;
    double best_iou = 0;
    for (int gi = 0; gi < static_cast<int>(gts.size()); ++gi) {
      if (gt_taken[gi]) continue;
      if (class_aware && gts[gi].category_id != pred.category_id) continue;
      if (iou(gi, pi) >= delta && iou(gi, pi) > best_iou) {
        best_iou = iou(gi, pi);
        best_gt = gi;
      }
    }
    if (best_gt >= 0) {
      gt_taken[best_gt] = true;
      pred_matched[pi] = true;
      out.pairs.push_back({best_gt, pi, best_iou});
    }
  }
  for (int gi = 0; gi < static_cast<int>(gts.size()); ++gi) {
    if (!gt_taken[gi]) out.unmatched_gt.push_back(gi);
  }
  for (int pi = 0; pi < static_cast<int>(preds.size()); ++pi) {
    if (!pred_matched[pi]) out.unmatched_pred.push_back(pi);
  }
  return out;
}

}  // namespace

MatchSet match_class_agnostic(std::span<const InstanceMask> gts,
                              std::span<const InstanceMask> preds, double delta,
                              IouKind kind) {
  return greedy_match(gts, preds, pairwise_iou(gts, preds, kind),
                      score_order(preds), delta, false);
}

MatchSet match_class_aware(std::span<const InstanceMask> gts,
                           std::span<const InstanceMask> preds, double delta,
                           IouKind kind) {
  return greedy_match(gts, preds, pairwise_iou(gts, preds, kind),
                      score_order(preds), delta, true);
}

namespace {

int require_index(const std::unordered_map<int, int>& class_index, int category_id) {
  const auto it = class_index.find(category_id);
  if (it == class_index.end()) {
    throw DanglingReference("category id " + std::to_string(category_id) +
                            " not in label set");
  }
  return it->second;
}

// Records are appended in descending score order so per-image fragments can
// be concatenated and globally stable-sorted without losing tie order. With
// single_class everything accumulates into one "object" curve at slot 0 and a
// matched pair emits a single record (tp = S, fp = 1 - S).
void append_pr(PRCurve& curve, const MatchSet& matches,
               std::span<const InstanceMask> gts,
               std::span<const InstanceMask> preds,
               const Eigen::Ref<const Eigen::MatrixXd>& s,
               const std::unordered_map<int, int>& class_index,
               bool single_class = false) {
  for (const auto& gt : gts) {
    const int ci = require_index(class_index, gt.category_id);
    ++curve.gt_per_class[single_class ? 0 : ci];
  }
  std::vector<int> matched_gt(preds.size(), -1);
  for (const auto& pair : matches.pairs) matched_gt[pair.pred] = pair.gt;
  for (int pi : score_order(preds)) {
    const InstanceMask& pred = preds[pi];
    const double score = *pred.score;
    const int cj = require_index(class_index, pred.category_id);
    if (matched_gt[pi] < 0) {
      curve.records.push_back({score, 0.0, 1.0, single_class ? 0 : cj});
      continue;
    }
    const int ci = require_index(class_index, gts[matched_gt[pi]].category_id);
    const double sim = s(ci, cj);
    if (single_class) {
      curve.records.push_back({score, sim, 1.0 - sim, 0});
    } else {
      curve.records.push_back({score, sim, 0.0, ci});
      if (ci != cj) curve.records.push_back({score, 0.0, 1.0 - sim, cj});
    }
  }
}

}  // namespace

PRCurve build_pr(const MatchSet& matches, std::span<const InstanceMask> gts,
                 std::span<const InstanceMask> preds,
                 const Eigen::Ref<const Eigen::MatrixXd>& s,
                 const std::unordered_map<int, int>& class_index,
                 int num_classes) {
  PRCurve curve;
  curve.gt_per_class.assign(num_classes, 0);
  append_pr(curve, matches, gts, preds, s, class_index);
  return curve;
}

ApResult average_precision(const PRCurve& curve, ApIntegration integration) {
  const int k = static_cast<int>(curve.gt_per_class.size());

  std::vector<int> order(curve.records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return curve.records[a].score > curve.records[b].score;
  });

  std::vector<std::vector<int>> per_class(k);
  for (int idx : order) per_class[curve.records[idx].class_index].push_back(idx);

  ApResult result;
  result.per_class = Eigen::ArrayXd::Constant(k, -1.0);
  double sum = 0;
  int valid = 0;
  for (int c = 0; c < k; ++c) {
    const std::int64_t gt_total = curve.gt_per_class[c];
    if (gt_total <= 0) continue;
    ++valid;

    std::vector<double> precision, recall;
    precision.reserve(per_class[c].size());
    recall.reserve(per_class[c].size());
    double tp = 0, fp = 0;
    for (int idx : per_class[c]) {
      tp += curve.records[idx].tp;
      fp += curve.records[idx].fp;
      precision.push_back(tp + fp > 0 ? tp / (tp + fp) : 0.0);
      recall.push_back(tp / static_cast<double>(gt_total));
    }
    // monotone precision envelope from the right
    for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i) {
      precision[i] = std::max(precision[i], precision[i + 1]);
    }

    double ap = 0;
    if (integration == ApIntegration::points_101) {
      std::size_t ri = 0;
      for (int t = 0; t <= 100; ++t) {
        const double r = t / 100.0;
        while (ri < recall.size() && recall[ri] < r) ++ri;
        if (ri < recall.size()) ap += precision[ri];
      }
      ap /= 101.0;
    } else {
      double prev_recall = 0;
      for (std::size_t i = 0; i < recall.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
      }
    }
    result.per_class[c] = ap;
    sum += ap;
  }
  result.mean = valid > 0 ? sum / valid : -1.0;
  return result;
}

std::string to_string(EvalMode m) {
  switch (m) {
    case EvalMode::vanilla: return "vanilla";
    case EvalMode::vanilla_agnostic: return "vanilla_agnostic";
    case EvalMode::open: return "open";
  }
  return "?";
}

EvalMode eval_mode_from_string(std::string_view s) {
  if (s == "vanilla") return EvalMode::vanilla;
  if (s == "vanilla_agnostic") return EvalMode::vanilla_agnostic;
  if (s == "open") return EvalMode::open;
  throw SchemaError("unknown evaluation mode '" + std::string(s) + "'");
}

namespace {

constexpr int kNumDeltas = 10;  // 0.50 .. 0.95
constexpr double kSmallMax = 32.0 * 32.0;
constexpr double kMediumMax = 96.0 * 96.0;

double bucket_area(const InstanceMask& m, IouKind kind) {
  if (kind == IouKind::box && m.box) return m.box->area();
  return static_cast<double>(m.area);
}

// 0 = all, 1 = small, 2 = medium, 3 = large
bool in_bucket(double area, int bucket) {
  switch (bucket) {
    case 1: return area < kSmallMax;
    case 2: return area >= kSmallMax && area <= kMediumMax;
    case 3: return area > kMediumMax;
    default: return true;
  }
}

}  // namespace

InstanceSummary evaluate_instance(const InstanceDataset& dataset,
                                  const SimilarityMatrix& s, EvalMode mode,
                                  const InstanceEvalOptions& options) {
  const int k = s.size();
  std::unordered_map<int, int> class_index;
  for (int i = 0; i < k; ++i) class_index.emplace(s.labels[i].id, i);
  if (static_cast<int>(class_index.size()) != k) {
    throw SchemaError("duplicate category ids in similarity matrix labels");
  }
  for (const auto& category : dataset.categories) {
    if (!class_index.count(category.id)) {
      throw DimensionMismatch("dataset category id " +
                              std::to_string(category.id) +
                              " not covered by the similarity matrix");
    }
  }

  const Eigen::MatrixXd sim = mode == EvalMode::open
                                  ? s.values
                                  : Eigen::MatrixXd::Identity(k, k).eval();
  const bool agnostic = mode != EvalMode::vanilla;
  const int curve_classes = options.single_class_curve ? 1 : k;

  // per (bucket, delta) record fragments per image, merged in image order
  constexpr int kBuckets = 4;
  const int n_images = static_cast<int>(dataset.images.size());
  std::vector<std::array<PRCurve, kBuckets * kNumDeltas>> fragments(n_images);

  parallel_for(n_images, options.threads, [&](int ii) {
    const InstanceImage& image = dataset.images[ii];

    // detection cap, applied to the score ranking
    std::vector<InstanceMask> preds;
    {
      std::vector<int> order = score_order(image.preds);
      const int cap = options.max_detections > 0
                          ? std::min<int>(options.max_detections,
                                          static_cast<int>(order.size()))
                          : static_cast<int>(order.size());
      preds.reserve(cap);
      for (int i = 0; i < cap; ++i) preds.push_back(image.preds[order[i]]);
    }

    for (int b = 0; b < kBuckets; ++b) {
      std::vector<InstanceMask> gts_b, preds_b;
      for (const auto& g : image.gts) {
        if (in_bucket(bucket_area(g, options.iou_kind), b)) gts_b.push_back(g);
      }
      for (const auto& p : preds) {
        if (in_bucket(bucket_area(p, options.iou_kind), b)) preds_b.push_back(p);
      }
      // one IoU table per bucket, shared by all ten thresholds
      const Eigen::MatrixXd iou = pairwise_iou(gts_b, preds_b, options.iou_kind);
      const std::vector<int> order = score_order(preds_b);
      for (int t = 0; t < kNumDeltas; ++t) {
        const double delta = 0.5 + 0.05 * t;
        const MatchSet matches =
            greedy_match(gts_b, preds_b, iou, order, delta, !agnostic);
        PRCurve& frag = fragments[ii][b * kNumDeltas + t];
        frag.gt_per_class.assign(curve_classes, 0);
        append_pr(frag, matches, gts_b, preds_b, sim, class_index,
                  options.single_class_curve);
      }
    }
  });

  // assemble curves in image order
  std::array<PRCurve, kBuckets * kNumDeltas> curves;
  for (auto& c : curves) c.gt_per_class.assign(curve_classes, 0);
  for (int ii = 0; ii < n_images; ++ii) {
    for (int slot = 0; slot < kBuckets * kNumDeltas; ++slot) {
      auto& dst = curves[slot];
      auto& src = fragments[ii][slot];
      dst.records.insert(dst.records.end(), src.records.begin(),
                         src.records.end());
      for (int c = 0; c < curve_classes; ++c) {
        dst.gt_per_class[c] += src.gt_per_class[c];
      }
    }
  }

  const auto mean_over_deltas = [&](int bucket, Eigen::ArrayXd* per_class_out) {
    double sum = 0;
    int n = 0;
    Eigen::ArrayXd pc_sum = Eigen::ArrayXd::Zero(curve_classes);
    Eigen::ArrayXi pc_n = Eigen::ArrayXi::Zero(curve_classes);
    for (int t = 0; t < kNumDeltas; ++t) {
      const ApResult r = average_precision(curves[bucket * kNumDeltas + t],
                                           options.integration);
      if (r.mean >= 0) {
        sum += r.mean;
        ++n;
      }
      for (int c = 0; c < curve_classes; ++c) {
        if (r.per_class[c] >= 0) {
          pc_sum[c] += r.per_class[c];
          pc_n[c] += 1;
        }
      }
    }
    if (per_class_out) {
      *per_class_out = Eigen::ArrayXd::Constant(curve_classes, -1.0);
      for (int c = 0; c < curve_classes; ++c) {
        if (pc_n[c] > 0) (*per_class_out)[c] = pc_sum[c] / pc_n[c];
      }
    }
    return n > 0 ? sum / n : -1.0;
  };

  InstanceSummary summary;
  summary.ap = mean_over_deltas(0, &summary.per_class);
  summary.per_delta = Eigen::ArrayXd::Zero(kNumDeltas);
  for (int t = 0; t < kNumDeltas; ++t) {
    summary.per_delta[t] = average_precision(curves[t], options.integration).mean;
  }
  summary.ap50 = summary.per_delta[0];
  summary.ap75 = summary.per_delta[5];
  summary.ap_small = mean_over_deltas(1, nullptr);
  summary.ap_medium = mean_over_deltas(2, nullptr);
  summary.ap_large = mean_over_deltas(3, nullptr);
  return summary;
}

}  // namespace openmetrics
