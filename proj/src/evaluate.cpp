#include "openmetrics/evaluate.hpp"

#include <algorithm>

#include "openmetrics/parallel.hpp"
#include "openmetrics/segb.hpp"

namespace openmetrics {

namespace {

constexpr std::uint32_t kIgnoreMarker = 0xFFFFFFFFu;

}  // namespace

ClassRaster load_class_raster(const std::filesystem::path& path,
                              std::uint32_t ignore_id, int num_classes) {
  const SegbRaster raw = segb_load(path);
  ClassRaster raster;
  raster.width = raw.width;
  raster.height = raw.height;
  raster.ignore_id = kIgnoreMarker;
  raster.ids.resize(raw.ids.size());
  const std::uint32_t sentinel = raw.sentinel();
  for (std::size_t i = 0; i < raw.ids.size(); ++i) {
    const std::uint32_t id = raw.ids[i];
    if (id == sentinel || id == ignore_id) {
      raster.ids[i] = kIgnoreMarker;
    } else if (id >= static_cast<std::uint32_t>(num_classes)) {
      throw InvalidId(path.string() + ": class id " + std::to_string(id) +
                      " out of range for " + std::to_string(num_classes) +
                      " classes");
    } else {
      raster.ids[i] = id;
    }
  }
  return raster;
}

PanopticMap load_panoptic_map(const Manifest& manifest,
                              const ManifestImage& image, bool gt_side) {
  const auto& path_opt = gt_side ? image.gt : image.pred;
  if (!path_opt) {
    throw SchemaError("image " + std::to_string(image.id) + ": missing " +
                      (gt_side ? "gt" : "pred") + " raster path");
  }
  const SegbRaster raw = segb_load(manifest.resolve(*path_opt));
  if (raw.width != image.width || raw.height != image.height) {
    throw ShapeMismatch("image " + std::to_string(image.id) + ": raster is " +
                        std::to_string(raw.width) + "x" +
                        std::to_string(raw.height) + ", manifest says " +
                        std::to_string(image.width) + "x" +
                        std::to_string(image.height));
  }
  PanopticMap map;
  map.width = raw.width;
  map.height = raw.height;
  map.ids = raw.ids;
  const std::uint32_t sentinel = raw.sentinel();
  for (auto& id : map.ids) {
    if (id == sentinel) id = 0;  // sentinel and 0 both mean void
  }
  std::unordered_map<int, bool> isthing_by_cat;
  for (const auto& c : manifest.categories) {
    isthing_by_cat[c.id] = !c.isthing || *c.isthing;
  }
  for (const auto& seg : manifest.segments_info) {
    if (seg.image_id != image.id || seg.gt_side != gt_side) continue;
    map.segments.push_back(
        {seg.id, seg.category_id, isthing_by_cat.at(seg.category_id)});
  }
  return map;
}

InstanceDataset load_instance_dataset(const Manifest& manifest) {
  InstanceDataset dataset;
  dataset.categories = manifest.categories;
  std::unordered_map<int, int> image_slot;
  for (const auto& image : manifest.images) {
    image_slot.emplace(image.id, static_cast<int>(dataset.images.size()));
    dataset.images.push_back({image.id, image.width, image.height, {}, {}});
  }
  for (const auto& a : manifest.annotations) {
    const int slot = image_slot.at(a.image_id);
    const auto& image = dataset.images[slot];
    if (a.segmentation.height != image.height ||
        a.segmentation.width != image.width) {
      throw ShapeMismatch("annotation on image " + std::to_string(a.image_id) +
                          ": mask size differs from image size");
    }
    InstanceMask mask;
    mask.image_id = a.image_id;
    mask.category_id = a.category_id;
    mask.score = a.score;
    mask.mask = a.segmentation;
    mask.area = rle_area(mask.mask);
    if (a.bbox) {
      mask.box = a.bbox;
    } else {
      const RleBbox bb = rle_bbox(mask.mask);
      mask.box = Box{bb.x, bb.y, bb.w, bb.h};
    }
    auto& img = dataset.images[slot];
    (a.score ? img.preds : img.gts).push_back(std::move(mask));
  }
  return dataset;
}

PanopticDataset load_panoptic_dataset(const Manifest& manifest) {
  PanopticDataset dataset;
  dataset.categories = manifest.categories;
  dataset.images.reserve(manifest.images.size());
  for (const auto& image : manifest.images) {
    PanopticImage pi;
    pi.id = image.id;
    pi.gt = load_panoptic_map(manifest, image, true);
    pi.pred = load_panoptic_map(manifest, image, false);
    dataset.images.push_back(std::move(pi));
  }
  return dataset;
}

Eigen::MatrixXd semantic_similarity_values(const SimilarityMatrix& s,
                                           int num_classes) {
  Eigen::MatrixXd values(num_classes, num_classes);
  std::vector<int> row(num_classes, -1);
  for (int id = 0; id < num_classes; ++id) {
    row[id] = s.index_of(id);
    if (row[id] < 0) {
      throw DimensionMismatch("similarity matrix lacks class id " +
                              std::to_string(id));
    }
  }
  for (int i = 0; i < num_classes; ++i) {
    for (int j = 0; j < num_classes; ++j) {
      values(i, j) = s.values(row[i], row[j]);
    }
  }
  return values;
}

SemanticEvaluation evaluate_semantic_manifest(const Manifest& manifest,
                                              const SimilarityMatrix* open_s,
                                              int threads) {
  const int k = static_cast<int>(manifest.categories.size());
  const std::uint32_t ignore =
      manifest.ignore_id ? *manifest.ignore_id : kIgnoreMarker;

  const int n_images = static_cast<int>(manifest.images.size());
  std::vector<ConfusionMatrix> per_image(n_images);
  parallel_for(n_images, threads, [&](int ii) {
    const ManifestImage& image = manifest.images[ii];
    if (!image.gt) {
      throw SchemaError("image " + std::to_string(image.id) + ": missing gt");
    }
    if (!image.pred) {
      throw SchemaError("image " + std::to_string(image.id) + ": missing pred");
    }
    const ClassRaster gt =
        load_class_raster(manifest.resolve(*image.gt), ignore, k);
    const ClassRaster pred =
        load_class_raster(manifest.resolve(*image.pred), ignore, k);
    if (gt.width != image.width || gt.height != image.height) {
      throw ShapeMismatch("image " + std::to_string(image.id) +
                          ": gt raster size differs from manifest");
    }
    per_image[ii] = accumulate_confusion(gt, pred, k);
  });

  SemanticEvaluation result;
  result.confusion = ConfusionMatrix(k);
  for (const auto& c : per_image) result.confusion.merge(c);
  result.presence = class_presence(result.confusion);
  result.vanilla = miou(hard_counts(result.confusion), result.presence);
  if (open_s) {
    const Eigen::MatrixXd sim = semantic_similarity_values(*open_s, k);
    result.open = miou(soft_counts(result.confusion, sim), result.presence);
    result.has_open = true;
  }
  return result;
}

}  // namespace openmetrics
