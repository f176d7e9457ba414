#include "openmetrics/synth.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "openmetrics/segb.hpp"

namespace openmetrics {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// one erosion step: drop region pixels with any 4-neighbor outside the
// region; image borders count as outside. The layout only matters up to
// transposition, which preserves the 4-neighborhood, so column-major masks
// can pass width/height swapped.
void erode_region(int width, int height, std::vector<std::uint8_t>& region) {
  std::vector<std::size_t> boundary;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      if (!region[p]) continue;
      const bool interior = x > 0 && region[p - 1] && x + 1 < width &&
                            region[p + 1] && y > 0 && region[p - width] &&
                            y + 1 < height && region[p + width];
      if (!interior) boundary.push_back(p);
    }
  }
  for (std::size_t p : boundary) region[p] = 0;
}

std::vector<std::uint8_t> region_of(const std::vector<std::uint32_t>& ids,
                                    std::uint32_t id) {
  std::vector<std::uint8_t> region(ids.size(), 0);
  for (std::size_t i = 0; i < ids.size(); ++i) region[i] = ids[i] == id ? 1 : 0;
  return region;
}

class TargetPicker {
 public:
  TargetPicker(const PerturbConfig& config, const SimilarityMatrix& s)
      : config_(config), s_(s) {}

  // new category id for an entity of category `id`, or id when unchanged
  int pick(int id, std::mt19937_64& rng) const {
    switch (config_.swap_target) {
      case PerturbConfig::SwapTarget::fixed_map: {
        const auto it = config_.fixed_map.find(id);
        return it != config_.fixed_map.end() ? it->second : id;
      }
      case PerturbConfig::SwapTarget::uniform_random: {
        const int n = s_.size();
        if (n < 2) return id;
        const int self = require_row(id);
        int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
        if (pick >= self) ++pick;
        return s_.labels[pick].id;
      }
      case PerturbConfig::SwapTarget::nearest_by_s: {
        const int self = require_row(id);
        int best = -1;
        double best_value = -1.0;
        for (int j = 0; j < s_.size(); ++j) {
          if (j == self) continue;
          if (s_.values(self, j) > best_value) {
            best_value = s_.values(self, j);
            best = j;
          }
        }
        return best >= 0 ? s_.labels[best].id : id;
      }
    }
    return id;
  }

 private:
  int require_row(int id) const {
    const int row = s_.index_of(id);
    if (row < 0) {
      throw DimensionMismatch("similarity matrix lacks category id " +
                              std::to_string(id));
    }
    return row;
  }

  const PerturbConfig& config_;
  const SimilarityMatrix& s_;
};

std::string pred_name(int image_id) {
  return "pred_" + std::to_string(image_id) + ".segb";
}

std::string relative_or_absolute(const std::filesystem::path& target,
                                 const std::filesystem::path& base) {
  const auto rel = target.lexically_relative(base);
  return rel.empty() ? target.string() : rel.string();
}

void synth_semantic(const Manifest& gt, const PerturbConfig& config,
                    const TargetPicker& picker, std::mt19937_64& rng,
                    const std::filesystem::path& out_dir, Manifest& out) {
  for (std::size_t ii = 0; ii < gt.images.size(); ++ii) {
    const ManifestImage& image = gt.images[ii];
    const SegbRaster raw = segb_load(gt.resolve(*image.gt));
    SegbRaster pred = raw;
    const std::uint32_t sentinel = raw.sentinel();
    const std::uint32_t manifest_ignore =
        gt.ignore_id ? *gt.ignore_id : sentinel;

    // class-regions in ascending id order
    std::set<std::uint32_t> present;
    for (std::uint32_t id : raw.ids) {
      if (id != sentinel && id != manifest_ignore) present.insert(id);
    }
    for (std::uint32_t class_id : present) {
      const double u_swap = uniform01(rng);
      int new_id = static_cast<int>(class_id);
      if (u_swap < config.swap_prob) {
        new_id = picker.pick(static_cast<int>(class_id), rng);
      }
      const bool dropped = uniform01(rng) < config.drop_prob;

      auto region = region_of(raw.ids, class_id);
      for (int e = 0; e < config.erode_px; ++e) {
        erode_region(raw.width, raw.height, region);
      }
      for (std::size_t p = 0; p < raw.ids.size(); ++p) {
        if (raw.ids[p] != class_id) continue;
        if (dropped || !region[p]) {
          pred.ids[p] = sentinel;
        } else {
          pred.ids[p] = static_cast<std::uint32_t>(new_id);
        }
      }
    }

    const std::string name = pred_name(image.id);
    segb_save(pred, out_dir / name);
    auto& out_image = out.images[ii];
    out_image.gt = relative_or_absolute(
        std::filesystem::absolute(gt.resolve(*image.gt)),
        std::filesystem::absolute(out_dir));
    out_image.pred = name;
  }
}

void synth_instance(const Manifest& gt, const PerturbConfig& config,
                    const TargetPicker& picker, std::mt19937_64& rng,
                    Manifest& out) {
  for (std::size_t ii = 0; ii < gt.images.size(); ++ii) {
    auto& out_image = out.images[ii];
    out_image.gt.reset();
    out_image.pred.reset();
  }
  out.annotations.clear();
  for (const auto& a : gt.annotations) {
    if (!a.score) out.annotations.push_back(a);  // ground truth retained as-is
  }
  for (const auto& a : gt.annotations) {
    if (a.score) continue;  // perturb ground truth only
    const double u_swap = uniform01(rng);
    int category = a.category_id;
    if (u_swap < config.swap_prob) category = picker.pick(category, rng);
    if (uniform01(rng) < config.drop_prob) continue;

    ManifestAnnotation pred = a;
    pred.category_id = category;
    pred.score = 0.9;
    if (config.erode_px > 0) {
      auto mask = rle_decode(a.segmentation);  // column-major
      // column-major erosion: width/height swap relative to the row-major
      // helper, so treat columns as rows of length `height`
      std::vector<std::uint8_t> region = mask;
      for (int e = 0; e < config.erode_px; ++e) {
        erode_region(a.segmentation.height, a.segmentation.width, region);
      }
      pred.segmentation = rle_encode(region, a.segmentation.height,
                                     a.segmentation.width);
      if (rle_area(pred.segmentation) == 0) continue;  // fully eroded
      if (pred.bbox) {
        // tight box over the eroded mask
        const int h = a.segmentation.height;
        int min_x = a.segmentation.width, max_x = -1, min_y = h, max_y = -1;
        for (int x = 0; x < a.segmentation.width; ++x) {
          for (int y = 0; y < h; ++y) {
            if (!region[static_cast<std::size_t>(x) * h + y]) continue;
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
          }
        }
        pred.bbox = Box{static_cast<double>(min_x), static_cast<double>(min_y),
                        static_cast<double>(max_x - min_x + 1),
                        static_cast<double>(max_y - min_y + 1)};
      }
    }
    out.annotations.push_back(std::move(pred));
  }
}

void synth_panoptic(const Manifest& gt, const PerturbConfig& config,
                    const TargetPicker& picker, std::mt19937_64& rng,
                    const std::filesystem::path& out_dir, Manifest& out) {
  out.segments_info.clear();
  for (const auto& seg : gt.segments_info) {
    if (seg.gt_side) out.segments_info.push_back(seg);
  }
  for (std::size_t ii = 0; ii < gt.images.size(); ++ii) {
    const ManifestImage& image = gt.images[ii];
    const SegbRaster raw = segb_load(gt.resolve(*image.gt));
    SegbRaster pred = raw;
    const std::uint32_t sentinel = raw.sentinel();
    for (auto& id : pred.ids) {
      if (id == sentinel) id = 0;
    }
    std::vector<std::uint32_t> base = pred.ids;

    for (const auto& seg : gt.segments_info) {
      if (seg.image_id != image.id || !seg.gt_side) continue;
      const double u_swap = uniform01(rng);
      int category = seg.category_id;
      if (u_swap < config.swap_prob) category = picker.pick(category, rng);
      const bool dropped = uniform01(rng) < config.drop_prob;

      auto region = region_of(base, seg.id);
      for (int e = 0; e < config.erode_px; ++e) {
        erode_region(raw.width, raw.height, region);
      }
      bool any = false;
      for (std::size_t p = 0; p < base.size(); ++p) {
        if (base[p] != seg.id) continue;
        if (dropped || !region[p]) {
          pred.ids[p] = 0;
        } else {
          any = true;
        }
      }
      if (dropped || !any) continue;
      ManifestSegment ps;
      ps.image_id = image.id;
      ps.gt_side = false;
      ps.id = seg.id;
      ps.category_id = category;
      out.segments_info.push_back(ps);
    }

    const std::string name = pred_name(image.id);
    segb_save(pred, out_dir / name);
    auto& out_image = out.images[ii];
    out_image.gt = relative_or_absolute(
        std::filesystem::absolute(gt.resolve(*image.gt)),
        std::filesystem::absolute(out_dir));
    out_image.pred = name;
  }
}

}  // namespace

PerturbConfig::SwapTarget swap_target_from_string(std::string_view s) {
  if (s == "nearest" || s == "nearest-by-s") {
    return PerturbConfig::SwapTarget::nearest_by_s;
  }
  if (s == "uniform" || s == "uniform-random") {
    return PerturbConfig::SwapTarget::uniform_random;
  }
  if (s == "fixed" || s == "fixed-map") return PerturbConfig::SwapTarget::fixed_map;
  throw SchemaError("unknown swap target '" + std::string(s) + "'");
}

Manifest synth_perturb(const Manifest& gt, const PerturbConfig& config,
                       const SimilarityMatrix& s,
                       const std::filesystem::path& out_dir) {
  if (config.swap_prob < 0 || config.swap_prob > 1 || config.drop_prob < 0 ||
      config.drop_prob > 1 || config.erode_px < 0) {
    throw SchemaError("perturbation probabilities outside [0,1]");
  }
  std::filesystem::create_directories(out_dir);
  std::mt19937_64 rng(config.seed);
  const TargetPicker picker(config, s);

  Manifest out = gt;
  out.base_dir = out_dir;
  if (gt.task == "semantic") {
    synth_semantic(gt, config, picker, rng, out_dir, out);
  } else if (gt.task == "instance") {
    synth_instance(gt, config, picker, rng, out);
  } else {
    synth_panoptic(gt, config, picker, rng, out_dir, out);
  }
  return out;
}

}  // namespace openmetrics
