#include "openmetrics/manifest.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "openmetrics/report.hpp"

namespace openmetrics {

using nlohmann::json;

namespace {

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return doc;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

int get_int(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected integer");
  return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected string");
  return v.get<std::string>();
}

LabelSpec parse_category(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected object");
  LabelSpec label;
  label.id = get_int(j, "id", path);
  label.name = get_string(j, "name", path);
  if (const auto it = j.find("wnid"); it != j.end()) {
    if (!it->is_string()) fail(path + ".wnid", "expected string");
    const std::string text = it->get<std::string>();
    std::string digits = text;
    if (!digits.empty() && (digits[0] == 'n' || digits[0] == 'N')) {
      digits.erase(0, 1);
    }
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos) {
      fail(path + ".wnid", "expected 'n' + digits, got '" + text + "'");
    }
    label.wnid = static_cast<SynsetOffset>(std::stoul(digits));
  }
  if (const auto it = j.find("alias"); it != j.end()) {
    if (!it->is_string()) fail(path + ".alias", "expected string");
    label.alias = it->get<std::string>();
  }
  if (const auto it = j.find("isthing"); it != j.end()) {
    if (!it->is_boolean()) fail(path + ".isthing", "expected boolean");
    label.isthing = it->get<bool>();
  }
  return label;
}

json category_to_json(const LabelSpec& label) {
  json j;
  j["id"] = label.id;
  j["name"] = label.name;
  if (label.wnid) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "n%08u", *label.wnid);
    j["wnid"] = buf;
  }
  if (label.alias) j["alias"] = *label.alias;
  if (label.isthing) j["isthing"] = *label.isthing;
  return j;
}

RleMask parse_segmentation(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected object");
  const json& size = member(j, "size", path);
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    fail(path + ".size", "expected [height, width]");
  }
  const int h = size[0].get<int>();
  const int w = size[1].get<int>();
  const json& counts = member(j, "counts", path);
  RleMask mask;
  if (counts.is_string()) {
    mask = coco_counts_decode(counts.get<std::string>(), h, w);
  } else if (counts.is_array()) {
    mask.height = h;
    mask.width = w;
    mask.counts.reserve(counts.size());
    for (const auto& c : counts) {
      if (!c.is_number_integer() || c.get<std::int64_t>() < 0) {
        fail(path + ".counts", "expected non-negative integers");
      }
      mask.counts.push_back(c.get<std::uint32_t>());
    }
  } else {
    fail(path + ".counts", "expected array or string");
  }
  std::int64_t total = 0;
  for (auto c : mask.counts) total += c;
  if (total != static_cast<std::int64_t>(h) * w) {
    fail(path + ".counts", "counts sum " + std::to_string(total) +
                               " != size " + std::to_string(h) + "x" +
                               std::to_string(w));
  }
  return mask;
}

}  // namespace

std::filesystem::path Manifest::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

Manifest load_manifest(const std::filesystem::path& path) {
  const json doc = parse_file(path);
  const std::string root = path.filename().string();
  if (!doc.is_object()) fail(root, "expected top-level object");

  Manifest m;
  m.base_dir = path.has_parent_path() ? path.parent_path()
                                      : std::filesystem::path(".");
  m.task = get_string(doc, "task", root);
  if (m.task != "semantic" && m.task != "instance" && m.task != "panoptic") {
    fail(root + ".task", "expected semantic|instance|panoptic");
  }
  if (const auto it = doc.find("ignore_id"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      fail(root + ".ignore_id", "expected non-negative integer");
    }
    m.ignore_id = it->get<std::uint32_t>();
  }

  const json& cats = member(doc, "categories", root);
  if (!cats.is_array() || cats.empty()) {
    fail(root + ".categories", "expected non-empty array");
  }
  std::set<int> cat_ids;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string p = root + ".categories[" + std::to_string(i) + "]";
    m.categories.push_back(parse_category(cats[i], p));
    if (!cat_ids.insert(m.categories.back().id).second) {
      fail(p + ".id", "duplicate category id");
    }
  }
  if (m.task == "semantic") {
    // pixel values are category ids, so they must be dense 0..k
    for (const auto& c : m.categories) {
      if (c.id < 0 || c.id >= static_cast<int>(m.categories.size())) {
        fail(root + ".categories", "semantic task requires ids 0..k, got " +
                                       std::to_string(c.id));
      }
    }
  }

  const json& images = member(doc, "images", root);
  if (!images.is_array()) fail(root + ".images", "expected array");
  std::set<int> image_ids;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string p = root + ".images[" + std::to_string(i) + "]";
    const json& ij = images[i];
    if (!ij.is_object()) fail(p, "expected object");
    ManifestImage image;
    image.id = get_int(ij, "id", p);
    image.width = get_int(ij, "width", p);
    image.height = get_int(ij, "height", p);
    if (image.width <= 0 || image.height <= 0) {
      fail(p, "non-positive image dimensions");
    }
    if (const auto it = ij.find("gt"); it != ij.end()) {
      if (!it->is_string()) fail(p + ".gt", "expected string");
      image.gt = it->get<std::string>();
    }
    if (const auto it = ij.find("pred"); it != ij.end()) {
      if (!it->is_string()) fail(p + ".pred", "expected string");
      image.pred = it->get<std::string>();
    }
    if (m.task != "instance" && !image.gt) fail(p, "missing gt raster path");
    if (!image_ids.insert(image.id).second) fail(p + ".id", "duplicate image id");
    m.images.push_back(std::move(image));
  }

  if (const auto it = doc.find("annotations"); it != doc.end()) {
    if (!it->is_array()) fail(root + ".annotations", "expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = root + ".annotations[" + std::to_string(i) + "]";
      const json& aj = (*it)[i];
      if (!aj.is_object()) fail(p, "expected object");
      ManifestAnnotation a;
      a.image_id = get_int(aj, "image_id", p);
      a.category_id = get_int(aj, "category_id", p);
      if (!image_ids.count(a.image_id)) {
        throw DanglingReference(p + ": unknown image_id " +
                                std::to_string(a.image_id));
      }
      if (!cat_ids.count(a.category_id)) {
        throw DanglingReference(p + ": unknown category_id " +
                                std::to_string(a.category_id));
      }
      if (const auto s = aj.find("score"); s != aj.end()) {
        if (!s->is_number()) fail(p + ".score", "expected number");
        a.score = s->get<double>();
        if (*a.score < 0.0 || *a.score > 1.0) {
          fail(p + ".score", "expected value in [0,1]");
        }
      }
      a.segmentation = parse_segmentation(member(aj, "segmentation", p),
                                          p + ".segmentation");
      if (const auto b = aj.find("bbox"); b != aj.end()) {
        if (!b->is_array() || b->size() != 4) {
          fail(p + ".bbox", "expected [x,y,w,h]");
        }
        a.bbox = Box{(*b)[0].get<double>(), (*b)[1].get<double>(),
                     (*b)[2].get<double>(), (*b)[3].get<double>()};
      }
      if (const auto ar = aj.find("area"); ar != aj.end()) {
        if (!ar->is_number_integer()) fail(p + ".area", "expected integer");
        const std::int64_t declared = ar->get<std::int64_t>();
        const std::int64_t actual = rle_area(a.segmentation);
        if (declared != actual) {
          fail(p + ".area", "declared area " + std::to_string(declared) +
                                " != mask area " + std::to_string(actual));
        }
      }
      m.annotations.push_back(std::move(a));
    }
  }

  if (const auto it = doc.find("segments_info"); it != doc.end()) {
    if (!it->is_array()) fail(root + ".segments_info", "expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = root + ".segments_info[" + std::to_string(i) + "]";
      const json& sj = (*it)[i];
      if (!sj.is_object()) fail(p, "expected object");
      ManifestSegment seg;
      seg.image_id = get_int(sj, "image_id", p);
      const std::string which = get_string(sj, "which", p);
      if (which != "gt" && which != "pred") {
        fail(p + ".which", "expected gt|pred");
      }
      seg.gt_side = which == "gt";
      const int raw_id = get_int(sj, "id", p);
      if (raw_id <= 0) fail(p + ".id", "segment ids are positive");
      seg.id = static_cast<std::uint32_t>(raw_id);
      seg.category_id = get_int(sj, "category_id", p);
      if (!image_ids.count(seg.image_id)) {
        throw DanglingReference(p + ": unknown image_id " +
                                std::to_string(seg.image_id));
      }
      if (!cat_ids.count(seg.category_id)) {
        throw DanglingReference(p + ": unknown category_id " +
                                std::to_string(seg.category_id));
      }
      m.segments_info.push_back(seg);
    }
  }

  return m;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  json doc;
  doc["task"] = manifest.task;
  if (manifest.ignore_id) doc["ignore_id"] = *manifest.ignore_id;
  doc["categories"] = json::array();
  for (const auto& c : manifest.categories) {
    doc["categories"].push_back(category_to_json(c));
  }
  doc["images"] = json::array();
  for (const auto& image : manifest.images) {
    json ij;
    ij["id"] = image.id;
    ij["width"] = image.width;
    ij["height"] = image.height;
    if (image.gt) ij["gt"] = *image.gt;
    if (image.pred) ij["pred"] = *image.pred;
    doc["images"].push_back(std::move(ij));
  }
  if (!manifest.annotations.empty()) {
    doc["annotations"] = json::array();
    for (const auto& a : manifest.annotations) {
      json aj;
      aj["image_id"] = a.image_id;
      aj["category_id"] = a.category_id;
      if (a.score) aj["score"] = *a.score;
      aj["segmentation"] = {
          {"size", {a.segmentation.height, a.segmentation.width}},
          {"counts", coco_counts_encode(a.segmentation)}};
      if (a.bbox) aj["bbox"] = {a.bbox->x, a.bbox->y, a.bbox->w, a.bbox->h};
      doc["annotations"].push_back(std::move(aj));
    }
  }
  if (!manifest.segments_info.empty()) {
    doc["segments_info"] = json::array();
    for (const auto& s : manifest.segments_info) {
      doc["segments_info"].push_back({{"image_id", s.image_id},
                                      {"which", s.gt_side ? "gt" : "pred"},
                                      {"id", s.id},
                                      {"category_id", s.category_id}});
    }
  }
  atomic_write_text(path, doc.dump(2) + "\n");
}

std::string similarity_to_json(const SimilarityMatrix& matrix) {
  json doc;
  doc["method"] = matrix.method;
  doc["labels"] = json::array();
  for (const auto& label : matrix.labels) {
    doc["labels"].push_back(category_to_json(label));
  }
  json values = json::array();
  for (int i = 0; i < matrix.size(); ++i) {
    for (int j = 0; j < matrix.size(); ++j) {
      values.push_back(matrix.values(i, j));
    }
  }
  doc["values"] = std::move(values);
  return doc.dump() + "\n";
}

void save_similarity(const SimilarityMatrix& matrix,
                     const std::filesystem::path& path) {
  atomic_write_text(path, similarity_to_json(matrix));
}

SimilarityMatrix load_similarity(const std::filesystem::path& path) {
  const json doc = parse_file(path);
  const std::string root = path.filename().string();
  if (!doc.is_object()) fail(root, "expected top-level object");
  SimilarityMatrix m;
  m.method = get_string(doc, "method", root);
  const json& labels = member(doc, "labels", root);
  if (!labels.is_array() || labels.empty()) {
    fail(root + ".labels", "expected non-empty array");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m.labels.push_back(
        parse_category(labels[i], root + ".labels[" + std::to_string(i) + "]"));
  }
  const int n = m.size();
  const json& values = member(doc, "values", root);
  if (!values.is_array() ||
      values.size() != static_cast<std::size_t>(n) * n) {
    fail(root + ".values", "expected " + std::to_string(n * n) +
                               " row-major reals");
  }
  m.values.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const json& v = values[static_cast<std::size_t>(i) * n + j];
      if (!v.is_number()) fail(root + ".values", "expected numbers");
      m.values(i, j) = v.get<double>();
    }
  }
  for (int i = 0; i < n; ++i) {
    if (m.values(i, i) != 1.0) fail(root + ".values", "diagonal must be 1");
    for (int j = 0; j < n; ++j) {
      const double v = m.values(i, j);
      if (!(v >= 0.0 && v <= 1.0)) fail(root + ".values", "entries must be in [0,1]");
      if (m.values(i, j) != m.values(j, i)) {
        fail(root + ".values", "matrix must be symmetric");
      }
    }
  }
  return m;
}

void save_similarity_csv(const SimilarityMatrix& matrix,
                         const std::filesystem::path& path) {
  std::ostringstream out;
  const auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  };
  for (const auto& label : matrix.labels) out << ',' << quote(label.name);
  out << '\n';
  out.precision(17);
  for (int i = 0; i < matrix.size(); ++i) {
    out << quote(matrix.labels[i].name);
    for (int j = 0; j < matrix.size(); ++j) out << ',' << matrix.values(i, j);
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

std::vector<LabelSpec> load_labels(const std::filesystem::path& path) {
  const json doc = parse_file(path);
  const std::string root = path.filename().string();
  const json* arr = nullptr;
  if (doc.is_array()) {
    arr = &doc;
  } else if (doc.is_object() && doc.contains("categories")) {
    arr = &doc["categories"];
  } else if (doc.is_object() && doc.contains("labels")) {
    arr = &doc["labels"];
  } else {
    fail(root, "expected an array or an object with categories/labels");
  }
  if (!arr->is_array() || arr->empty()) fail(root, "expected non-empty array");
  std::vector<LabelSpec> labels;
  std::set<int> ids;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    labels.push_back(
        parse_category((*arr)[i], root + "[" + std::to_string(i) + "]"));
    if (!ids.insert(labels.back().id).second) {
      fail(root + "[" + std::to_string(i) + "].id", "duplicate label id");
    }
  }
  return labels;
}

}  // namespace openmetrics
