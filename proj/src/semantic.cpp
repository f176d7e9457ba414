#include "openmetrics/semantic.hpp"

namespace openmetrics {

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw DimensionMismatch("confusion matrix merge: class counts differ");
  }
  counts_ += other.counts_;
  return *this;
}

ConfusionMatrix accumulate_confusion(const ClassRaster& gt,
                                     const ClassRaster& pred, int num_classes) {
  if (gt.width != pred.width || gt.height != pred.height ||
      gt.ids.size() != pred.ids.size()) {
    throw ShapeMismatch("accumulate_confusion: raster dimensions differ");
  }
  ConfusionMatrix c(num_classes);
  const auto n = static_cast<std::uint32_t>(num_classes);
  for (std::size_t p = 0; p < gt.ids.size(); ++p) {
    const std::uint32_t g = gt.ids[p];
    if (g == gt.ignore_id) continue;
    if (g >= n) {
      throw InvalidId("ground-truth id " + std::to_string(g) +
                      " out of range for " + std::to_string(num_classes) +
                      " classes");
    }
    std::uint32_t d = pred.ids[p];
    if (d == pred.ignore_id) {
      d = n;  // reserved unlabeled class
    } else if (d >= n) {
      throw InvalidId("predicted id " + std::to_string(d) +
                      " out of range for " + std::to_string(num_classes) +
                      " classes");
    }
    ++c.at(static_cast<int>(g), static_cast<int>(d));
  }
  return c;
}

SoftCounts hard_counts(const ConfusionMatrix& c) {
  const int k = c.num_classes();
  const Eigen::MatrixXd counts = c.counts().cast<double>();
  SoftCounts out;
  out.tp = counts.diagonal().head(k).array();
  out.fn = counts.topRows(k).rowwise().sum().array() - out.tp;
  out.fp = counts.leftCols(k).colwise().sum().transpose().head(k).array() - out.tp;
  return out;
}

SoftCounts soft_counts(const ConfusionMatrix& c,
                       const Eigen::Ref<const Eigen::MatrixXd>& s) {
  const int k = c.num_classes();
  if (s.rows() != k || s.cols() != k) {
    throw DimensionMismatch("soft_counts: similarity matrix is " +
                            std::to_string(s.rows()) + "x" +
                            std::to_string(s.cols()) + ", expected " +
                            std::to_string(k) + "x" + std::to_string(k));
  }
  const Eigen::MatrixXd counts =
      c.counts().topLeftCorner(k, k).cast<double>();
  const Eigen::ArrayXd unlabeled =
      c.counts().col(c.unlabeled_index()).head(k).cast<double>().array();

  SoftCounts out;
  out.tp = (s.array() * counts.array()).rowwise().sum();
  out.fn = ((1.0 - s.array()) * counts.array()).rowwise().sum() + unlabeled;
  out.fp = ((1.0 - s.array()) * counts.array()).colwise().sum().transpose();
  return out;
}

std::vector<bool> class_presence(const ConfusionMatrix& c) {
  const int k = c.num_classes();
  std::vector<bool> present(k, false);
  for (int i = 0; i < k; ++i) {
    present[i] = c.counts().row(i).sum() > 0 ||
                 c.counts().col(i).head(k).sum() > 0;
  }
  return present;
}

IouResult miou(const SoftCounts& counts, const std::vector<bool>& presence) {
  const int k = counts.size();
  if (static_cast<int>(presence.size()) != k) {
    throw DimensionMismatch("miou: presence vector size mismatch");
  }
  IouResult r;
  r.per_class = Eigen::ArrayXd::Zero(k);
  r.included.assign(k, false);
  double sum = 0;
  int n = 0;
  for (int i = 0; i < k; ++i) {
    const double denom = counts.tp[i] + counts.fp[i] + counts.fn[i];
    if (!presence[i] && denom == 0.0) continue;
    r.included[i] = true;
    r.per_class[i] = denom > 0.0 ? counts.tp[i] / denom : 0.0;
    sum += r.per_class[i];
    ++n;
  }
  r.mean = n > 0 ? sum / n : 0.0;
  return r;
}

}  // namespace openmetrics
