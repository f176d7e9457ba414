#include "openmetrics/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "openmetrics/parallel.hpp"

namespace openmetrics {

namespace {

std::optional<SynsetOffset> parse_wnid_text(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string_view digits = text;
  if (digits.front() == 'n' || digits.front() == 'N') digits.remove_prefix(1);
  if (digits.empty() ||
      digits.find_first_not_of("0123456789") != std::string_view::npos) {
    return std::nullopt;
  }
  std::uint32_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    return std::nullopt;
  }
  return value;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> split_words(std::string_view name) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : name) {
    if (c == ' ' || c == '_') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double pair_similarity(const Taxonomy& t, SynsetOffset a, SynsetOffset b,
                       SimMethod method) {
  return method == SimMethod::wup ? wup_similarity(t, a, b)
                                  : path_similarity(t, a, b);
}

}  // namespace

std::string to_string(SimMethod m) {
  switch (m) {
    case SimMethod::path: return "path";
    case SimMethod::wup: return "wup";
    case SimMethod::embedding: return "embedding";
    case SimMethod::identity: return "identity";
  }
  return "?";
}

SimMethod sim_method_from_string(std::string_view s) {
  if (s == "path") return SimMethod::path;
  if (s == "wup" || s == "wu-palmer" || s == "wup-palmer") return SimMethod::wup;
  if (s == "embedding") return SimMethod::embedding;
  if (s == "identity") return SimMethod::identity;
  throw SchemaError("unknown similarity method '" + std::string(s) + "'");
}

int SimilarityMatrix::index_of(int category_id) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].id == category_id) return static_cast<int>(i);
  }
  return -1;
}

double SimilarityMatrix::at(int category_id_a, int category_id_b) const {
  const int i = index_of(category_id_a);
  const int j = index_of(category_id_b);
  if (i < 0 || j < 0) {
    throw DimensionMismatch("category id not covered by similarity matrix");
  }
  return values(i, j);
}

SimilarityMatrix identity_matrix(std::span<const LabelSpec> labels) {
  SimilarityMatrix m;
  m.labels.assign(labels.begin(), labels.end());
  m.values = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(labels.size()),
                                       static_cast<Eigen::Index>(labels.size()));
  m.method = "identity";
  return m;
}

double path_similarity(const Taxonomy& t, SynsetOffset a, SynsetOffset b) {
  const auto r = t.shortest_hypernym_distance(a, b);
  return 1.0 / (1.0 + static_cast<double>(r.distance));
}

double wup_similarity(const Taxonomy& t, SynsetOffset a, SynsetOffset b) {
  const auto r = t.shortest_hypernym_distance(a, b);
  const double d = 2.0 * static_cast<double>(t.depth(r.lcs));
  return d / (static_cast<double>(r.distance) + d);
}

std::vector<SynsetOffset> resolve_label(const Taxonomy& t, const LabelSpec& label) {
  if (label.wnid) {
    if (!t.contains(*label.wnid)) {
      throw UnresolvableLabel("label '" + label.name + "': wnid offset " +
                              std::to_string(*label.wnid) +
                              " not present in taxonomy");
    }
    return {*label.wnid};
  }
  if (label.alias) {
    if (const auto off = parse_wnid_text(*label.alias)) {
      if (!t.contains(*off)) {
        throw UnresolvableLabel("label '" + label.name + "': alias offset " +
                                *label.alias + " not present in taxonomy");
      }
      return {*off};
    }
    auto senses = t.lookup(*label.alias);
    if (senses.empty()) {
      throw UnresolvableLabel("label '" + label.name + "': alias lemma '" +
                              *label.alias + "' absent from taxonomy");
    }
    return senses;
  }
  auto senses = t.lookup(label.name);
  if (senses.empty()) {
    throw UnresolvableLabel(
        "label '" + label.name +
        "' absent from taxonomy; supply a wnid or a hypernym alias");
  }
  return senses;
}

double label_similarity(const Taxonomy& t, const LabelSpec& a, const LabelSpec& b,
                        SimMethod method, SensePolicy policy) {
  const auto sa = resolve_label(t, a);
  const auto sb = resolve_label(t, b);
  if (policy == SensePolicy::first_sense) {
    return pair_similarity(t, sa.front(), sb.front(), method);
  }
  double best = 0.0;
  for (SynsetOffset x : sa) {
    for (SynsetOffset y : sb) {
      best = std::max(best, pair_similarity(t, x, y, method));
      if (best == 1.0) return best;
    }
  }
  return best;
}

Eigen::VectorXd EmbeddingTable::vector_for(std::string_view lemma) const {
  const std::string key(lemma);
  if (const auto it = vectors.find(key); it != vectors.end()) return it->second;
  // deterministic synthesis keyed by (seed, lemma): i.i.d. uniform(-0.5, 0.5)
  std::mt19937_64 rng(rng_seed ^ fnv1a64(key));
  Eigen::VectorXd v(dimension);
  for (int d = 0; d < dimension; ++d) {
    const std::uint64_t bits = rng() >> 11;  // 53 bits
    v[d] = static_cast<double>(bits) * (1.0 / 9007199254740992.0) - 0.5;
  }
  return v;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::uint64_t rng_seed) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open embedding file " + path.string());
  EmbeddingTable table;
  table.rng_seed = rng_seed;
  std::string line;
  std::size_t line_no = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> values;
    double v = 0;
    while (ss >> v) values.push_back(v);
    if (first_record && values.size() == 1 &&
        word.find_first_not_of("0123456789") == std::string::npos) {
      continue;  // word2vec "count dim" header
    }
    if (values.empty()) {
      throw MalformedLine(path.string(), line_no, "record without vector");
    }
    if (first_record) {
      table.dimension = static_cast<int>(values.size());
      first_record = false;
    } else if (static_cast<int>(values.size()) != table.dimension) {
      throw DimensionMismatch(path.string() + ":" + std::to_string(line_no) +
                              ": vector of dimension " +
                              std::to_string(values.size()) + ", table uses " +
                              std::to_string(table.dimension));
    }
    table.vectors[normalize_lemma(word)] =
        Eigen::Map<const Eigen::VectorXd>(values.data(),
                                          static_cast<Eigen::Index>(values.size()));
  }
  if (table.dimension == 0) {
    throw MalformedLine(path.string(), line_no, "no embedding records");
  }
  return table;
}

namespace {

Eigen::VectorXd label_vector(const EmbeddingTable& e, const LabelSpec& label) {
  const std::string& text = label.alias ? *label.alias : label.name;
  const auto words = split_words(text);
  if (words.empty()) {
    throw UnresolvableLabel("label '" + label.name + "' has no word content");
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(e.dimension);
  for (const auto& w : words) acc += e.vector_for(w);
  return acc / static_cast<double>(words.size());
}

double cosine_clamped(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::max(0.0, a.dot(b) / (na * nb));
}

}  // namespace

double embedding_similarity(const EmbeddingTable& e, const LabelSpec& a,
                            const LabelSpec& b) {
  return cosine_clamped(label_vector(e, a), label_vector(e, b));
}

SimilarityMatrix build_matrix(std::span<const LabelSpec> labels, const Taxonomy& t,
                              SimMethod method, SensePolicy policy, int threads) {
  if (method == SimMethod::identity) return identity_matrix(labels);
  if (method == SimMethod::embedding) {
    throw SchemaError("embedding method requires an embedding table backend");
  }
  const int n = static_cast<int>(labels.size());

  // resolve every label first so all offenders are reported together
  std::vector<std::vector<SynsetOffset>> senses(n);
  std::string failures;
  for (int i = 0; i < n; ++i) {
    try {
      senses[i] = resolve_label(t, labels[i]);
      if (policy == SensePolicy::first_sense) senses[i].resize(1);
    } catch (const UnresolvableLabel& e) {
      if (!failures.empty()) failures += "; ";
      failures += e.what();
    }
  }
  if (!failures.empty()) throw UnresolvableLabel(failures);

  // closure per distinct synset, then pairwise merges
  std::vector<SynsetOffset> distinct;
  for (const auto& s : senses) distinct.insert(distinct.end(), s.begin(), s.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::unordered_map<SynsetOffset, std::uint32_t> closure_index;
  std::vector<Taxonomy::Closure> closures(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    closure_index.emplace(distinct[i], static_cast<std::uint32_t>(i));
  }
  parallel_for(static_cast<int>(distinct.size()), threads, [&](int i) {
    closures[i] = t.hypernym_closure(distinct[i]);
  });

  const auto synset_pair = [&](SynsetOffset a, SynsetOffset b) {
    if (a == b) return 1.0;
    const auto& ca = closures[closure_index.at(a)];
    const auto& cb = closures[closure_index.at(b)];
    int dist = -1;
    SynsetOffset lcs = 0;
    std::size_t i = 0, j = 0;
    while (i < ca.size() && j < cb.size()) {
      if (ca[i].first < cb[j].first) {
        ++i;
      } else if (cb[j].first < ca[i].first) {
        ++j;
      } else {
        const int d = ca[i].second + cb[j].second;
        if (dist < 0 || d < dist) {
          dist = d;
          lcs = ca[i].first;
        }
        ++i;
        ++j;
      }
    }
    if (method == SimMethod::path) return 1.0 / (1.0 + dist);
    const double dd = 2.0 * static_cast<double>(t.depth(lcs));
    return dd / (dist + dd);
  };

  SimilarityMatrix m;
  m.labels.assign(labels.begin(), labels.end());
  m.method = to_string(method);
  m.values = Eigen::MatrixXd::Zero(n, n);
  parallel_for(n, threads, [&](int i) {
    m.values(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double best = 0.0;
      for (SynsetOffset x : senses[i]) {
        for (SynsetOffset y : senses[j]) {
          best = std::max(best, synset_pair(x, y));
          if (best == 1.0) break;
        }
        if (best == 1.0) break;
      }
      m.values(i, j) = best;
      m.values(j, i) = best;
    }
  });
  return m;
}

SimilarityMatrix build_matrix(std::span<const LabelSpec> labels,
                              const EmbeddingTable& e, int threads) {
  const int n = static_cast<int>(labels.size());
  std::vector<Eigen::VectorXd> vecs(n);
  for (int i = 0; i < n; ++i) vecs[i] = label_vector(e, labels[i]);

  SimilarityMatrix m;
  m.labels.assign(labels.begin(), labels.end());
  m.method = "embedding";
  m.values = Eigen::MatrixXd::Zero(n, n);
  parallel_for(n, threads, [&](int i) {
    m.values(i, i) = 1.0;  // forced, independent of vector content
    for (int j = i + 1; j < n; ++j) {
      const double s = cosine_clamped(vecs[i], vecs[j]);
      m.values(i, j) = s;
      m.values(j, i) = s;
    }
  });
  return m;
}

MatrixStats matrix_stats(const SimilarityMatrix& m, bool include_diagonal) {
  const auto& v = m.values;
  MatrixStats stats;
  if (include_diagonal) {
    stats.mean = v.mean();
    stats.stddev = std::sqrt((v.array() - stats.mean).square().mean());
    return stats;
  }
  const auto n = static_cast<double>(v.rows());
  const double count = n * n - n;
  if (count <= 0) return stats;
  const double sum = v.sum() - v.diagonal().sum();
  stats.mean = sum / count;
  double sq = 0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (i == j) continue;
      const double d = v(i, j) - stats.mean;
      sq += d * d;
    }
  }
  stats.stddev = std::sqrt(sq / count);
  return stats;
}

}  // namespace openmetrics
