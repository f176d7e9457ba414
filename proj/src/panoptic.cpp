#include "openmetrics/panoptic.hpp"

#include <algorithm>
#include <map>

#include "openmetrics/parallel.hpp"

namespace openmetrics {

namespace {

std::unordered_map<std::uint32_t, int> segment_index(const PanopticMap& map,
                                                     const char* side) {
  std::unordered_map<std::uint32_t, int> index;
  for (std::size_t i = 0; i < map.segments.size(); ++i) {
    const auto id = map.segments[i].id;
    if (id == 0) throw SchemaError(std::string(side) + " segment with id 0");
    if (!index.emplace(id, static_cast<int>(i)).second) {
      throw SchemaError(std::string(side) + " segment id " +
                        std::to_string(id) + " declared twice");
    }
  }
  return index;
}

}  // namespace

OverlapTable segment_overlaps(const PanopticMap& gt, const PanopticMap& pred) {
  if (gt.width != pred.width || gt.height != pred.height ||
      gt.ids.size() != pred.ids.size()) {
    throw ShapeMismatch("segment_overlaps: raster dimensions differ");
  }
  const auto gt_index = segment_index(gt, "gt");
  const auto pred_index = segment_index(pred, "pred");

  OverlapTable table;
  table.gt_area.assign(gt.segments.size(), 0);
  table.pred_area.assign(pred.segments.size(), 0);
  table.pred_void.assign(pred.segments.size(), 0);

  std::map<std::pair<int, int>, std::int64_t> inter;  // ordered, deterministic
  for (std::size_t p = 0; p < gt.ids.size(); ++p) {
    const std::uint32_t g = gt.ids[p];
    const std::uint32_t d = pred.ids[p];
    int gi = -1, di = -1;
    if (g != 0) {
      const auto it = gt_index.find(g);
      if (it == gt_index.end()) {
        throw DanglingReference("gt raster id " + std::to_string(g) +
                                " missing from segments");
      }
      gi = it->second;
      ++table.gt_area[gi];
    }
    if (d != 0) {
      const auto it = pred_index.find(d);
      if (it == pred_index.end()) {
        throw DanglingReference("pred raster id " + std::to_string(d) +
                                " missing from segments");
      }
      di = it->second;
      ++table.pred_area[di];
      if (gi < 0) ++table.pred_void[di];
    }
    if (gi >= 0 && di >= 0) ++inter[{gi, di}];
  }

  table.entries.reserve(inter.size());
  for (const auto& [key, count] : inter) {
    const auto [gi, di] = key;
    const double uni =
        static_cast<double>(table.gt_area[gi] + table.pred_area[di] - count -
                            table.pred_void[di]);
    table.entries.push_back(
        {gi, di, count, uni > 0 ? static_cast<double>(count) / uni : 0.0});
  }
  return table;
}

MatchSet pq_match(const OverlapTable& overlaps, const PanopticMap& gt,
                  const PanopticMap& pred, PqMode mode) {
  MatchSet out;
  out.delta = 0.5;
  std::vector<bool> gt_taken(gt.segments.size(), false);
  std::vector<bool> pred_taken(pred.segments.size(), false);
  for (const auto& e : overlaps.entries) {
    if (e.iou <= 0.5) continue;
    const SegmentInfo& gs = gt.segments[e.gt];
    const SegmentInfo& ps = pred.segments[e.pred];
    if (mode == PqMode::vanilla) {
      if (gs.category_id != ps.category_id) continue;
    } else {
      if (gs.isthing != ps.isthing) continue;
    }
    // IoU > 0.5 on non-overlapping maps makes partners unique
    if (gt_taken[e.gt] || pred_taken[e.pred]) {
      throw Error("pq_match: segment matched twice, maps overlap");
    }
    gt_taken[e.gt] = true;
    pred_taken[e.pred] = true;
    out.pairs.push_back({e.gt, e.pred, e.iou});
  }
  for (int i = 0; i < static_cast<int>(gt.segments.size()); ++i) {
    if (!gt_taken[i]) out.unmatched_gt.push_back(i);
  }
  for (int i = 0; i < static_cast<int>(pred.segments.size()); ++i) {
    if (!pred_taken[i]) out.unmatched_pred.push_back(i);
  }
  return out;
}

namespace {

int require_index(const std::unordered_map<int, int>& class_index,
                  int category_id) {
  const auto it = class_index.find(category_id);
  if (it == class_index.end()) {
    throw DanglingReference("category id " + std::to_string(category_id) +
                            " not in label set");
  }
  return it->second;
}

}  // namespace

PQStats& PQStats::merge(const PQStats& other) {
  if (other.size() != size()) {
    throw DimensionMismatch("PQStats merge: class counts differ");
  }
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  iou_sum += other.iou_sum;
  return *this;
}

PQStats pq_accumulate(const MatchSet& matches, const OverlapTable& overlaps,
                      const PanopticMap& gt, const PanopticMap& pred,
                      const Eigen::Ref<const Eigen::MatrixXd>& s,
                      const std::unordered_map<int, int>& class_index,
                      int num_classes) {
  if (s.rows() != num_classes || s.cols() != num_classes) {
    throw DimensionMismatch("pq_accumulate: similarity matrix size mismatch");
  }
  PQStats stats(num_classes);
  for (const auto& pair : matches.pairs) {
    const int ci = require_index(class_index, gt.segments[pair.gt].category_id);
    const int cj =
        require_index(class_index, pred.segments[pair.pred].category_id);
    const double sim = s(ci, cj);
    stats.tp[ci] += sim;
    stats.iou_sum[ci] += pair.iou * sim;
    if (ci != cj) {
      stats.fp[cj] += 1.0 - sim;
      stats.fn[ci] += 1.0 - sim;
    }
  }
  for (int gi : matches.unmatched_gt) {
    stats.fn[require_index(class_index, gt.segments[gi].category_id)] += 1.0;
  }
  for (int pi : matches.unmatched_pred) {
    // void rule: drop predictions mostly covering unlabeled ground truth
    if (2 * overlaps.pred_void[pi] > overlaps.pred_area[pi]) continue;
    stats.fp[require_index(class_index, pred.segments[pi].category_id)] += 1.0;
  }
  return stats;
}

PqResult pq_finalize(const PQStats& stats, std::span<const LabelSpec> labels) {
  const int k = stats.size();
  if (static_cast<int>(labels.size()) != k) {
    throw DimensionMismatch("pq_finalize: label count mismatch");
  }
  PqResult r;
  r.per_class.resize(k);
  double sum_pq = 0, sum_sq = 0, sum_rq = 0;
  double th_pq = 0, th_sq = 0, th_rq = 0;
  double st_pq = 0, st_sq = 0, st_rq = 0;
  for (int c = 0; c < k; ++c) {
    auto& row = r.per_class[c];
    row.tp = stats.tp[c];
    row.fp = stats.fp[c];
    row.fn = stats.fn[c];
    row.iou_sum = stats.iou_sum[c];
    const double denom = row.tp + 0.5 * row.fp + 0.5 * row.fn;
    row.present = row.tp + row.fp + row.fn > 0;
    if (!row.present) continue;
    row.sq = row.tp > 0 ? row.iou_sum / row.tp : 0.0;
    row.rq = denom > 0 ? row.tp / denom : 0.0;
    row.pq = row.sq * row.rq;
    sum_pq += row.pq;
    sum_sq += row.sq;
    sum_rq += row.rq;
    ++r.n_present;
    const bool thing = !labels[c].isthing || *labels[c].isthing;
    if (thing) {
      th_pq += row.pq;
      th_sq += row.sq;
      th_rq += row.rq;
      ++r.n_things;
    } else {
      st_pq += row.pq;
      st_sq += row.sq;
      st_rq += row.rq;
      ++r.n_stuff;
    }
  }
  if (r.n_present > 0) {
    r.pq = sum_pq / r.n_present;
    r.sq = sum_sq / r.n_present;
    r.rq = sum_rq / r.n_present;
  }
  if (r.n_things > 0) {
    r.pq_things = th_pq / r.n_things;
    r.sq_things = th_sq / r.n_things;
    r.rq_things = th_rq / r.n_things;
  }
  if (r.n_stuff > 0) {
    r.pq_stuff = st_pq / r.n_stuff;
    r.sq_stuff = st_sq / r.n_stuff;
    r.rq_stuff = st_rq / r.n_stuff;
  }
  return r;
}

PqResult::Row pq_subset_average(const PqResult& result,
                                std::span<const LabelSpec> labels,
                                std::span<const int> category_ids) {
  PqResult::Row avg;
  int n = 0;
  for (int id : category_ids) {
    for (std::size_t c = 0; c < labels.size(); ++c) {
      if (labels[c].id != id) continue;
      const auto& row = result.per_class[c];
      if (!row.present) break;
      avg.pq += row.pq;
      avg.sq += row.sq;
      avg.rq += row.rq;
      ++n;
      break;
    }
  }
  if (n > 0) {
    avg.pq /= n;
    avg.sq /= n;
    avg.rq /= n;
    avg.present = true;
  }
  return avg;
}

PanopticSummary evaluate_panoptic(const PanopticDataset& dataset,
                                  const SimilarityMatrix& s, PqMode mode,
                                  int threads) {
  const int k = s.size();
  std::unordered_map<int, int> class_index;
  for (int i = 0; i < k; ++i) class_index.emplace(s.labels[i].id, i);
  if (static_cast<int>(class_index.size()) != k) {
    throw SchemaError("duplicate category ids in similarity matrix labels");
  }

  // stats are indexed by matrix order; the manifest stays authoritative for
  // names and the thing/stuff attribute
  std::vector<LabelSpec> labels = s.labels;
  for (const auto& category : dataset.categories) {
    const auto it = class_index.find(category.id);
    if (it == class_index.end()) {
      throw DimensionMismatch("dataset category id " +
                              std::to_string(category.id) +
                              " not covered by the similarity matrix");
    }
    labels[it->second] = category;
  }

  const int n_images = static_cast<int>(dataset.images.size());
  std::vector<PQStats> per_image(n_images);
  parallel_for(n_images, threads, [&](int ii) {
    const PanopticImage& image = dataset.images[ii];
    const OverlapTable overlaps = segment_overlaps(image.gt, image.pred);
    const MatchSet matches = pq_match(overlaps, image.gt, image.pred, mode);
    per_image[ii] = pq_accumulate(matches, overlaps, image.gt, image.pred,
                                  s.values, class_index, k);
  });

  PanopticSummary summary;
  summary.stats = PQStats(k);
  for (const auto& stats : per_image) summary.stats.merge(stats);
  summary.result = pq_finalize(summary.stats, labels);
  return summary;
}

}  // namespace openmetrics
