#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "openmetrics/wordnet.hpp"

namespace openmetrics {

// Dataset category / label record. wnid pins the synset directly
// (ImageNet form "n01440764" or a bare 8-digit offset); alias substitutes a
// replacement lemma or offset for names absent from the taxonomy. wnid wins
// when both are present.
struct LabelSpec {
  std::string name;
  int id = 0;
  std::optional<SynsetOffset> wnid;
  std::optional<std::string> alias;
  std::optional<bool> isthing;  // panoptic thing/stuff attribute
};

enum class SimMethod { path, wup, embedding, identity };
enum class SensePolicy { max_sense, first_sense };

std::string to_string(SimMethod m);
SimMethod sim_method_from_string(std::string_view s);

// Symmetric label-similarity matrix with unit diagonal, entries in [0,1].
struct SimilarityMatrix {
  std::vector<LabelSpec> labels;
  Eigen::MatrixXd values;
  std::string method;

  int size() const { return static_cast<int>(labels.size()); }
  // row/column of a dataset category id; -1 when absent
  int index_of(int category_id) const;
  double at(int category_id_a, int category_id_b) const;
};

SimilarityMatrix identity_matrix(std::span<const LabelSpec> labels);

// Word vectors plus the seed used to synthesize deterministic vectors for
// words absent from the table.
struct EmbeddingTable {
  int dimension = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors;
  std::uint64_t rng_seed = 0;

  // known vector, or a synthesized one keyed by (rng_seed, lemma)
  Eigen::VectorXd vector_for(std::string_view lemma) const;
};

// text layout: one record per line, `word v1 v2 ... vd`. A leading
// two-integer header line (word2vec text export) is skipped.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::uint64_t rng_seed);

double path_similarity(const Taxonomy& t, SynsetOffset a, SynsetOffset b);
double wup_similarity(const Taxonomy& t, SynsetOffset a, SynsetOffset b);

// wnid / alias / normalized-name lookup; throws UnresolvableLabel
std::vector<SynsetOffset> resolve_label(const Taxonomy& t, const LabelSpec& label);

double label_similarity(const Taxonomy& t, const LabelSpec& a, const LabelSpec& b,
                        SimMethod method,
                        SensePolicy policy = SensePolicy::max_sense);

// cosine clamped below at zero; multiword labels average their word vectors
double embedding_similarity(const EmbeddingTable& e, const LabelSpec& a,
                            const LabelSpec& b);

// threads <= 0 selects the hardware concurrency
SimilarityMatrix build_matrix(std::span<const LabelSpec> labels, const Taxonomy& t,
                              SimMethod method,
                              SensePolicy policy = SensePolicy::max_sense,
                              int threads = 1);
SimilarityMatrix build_matrix(std::span<const LabelSpec> labels,
                              const EmbeddingTable& e, int threads = 1);

struct MatrixStats {
  double mean = 0;
  double stddev = 0;  // population
};
// over all (k+1)^2 entries; include_diagonal = false restricts to the
// off-diagonal entries
MatrixStats matrix_stats(const SimilarityMatrix& m, bool include_diagonal = true);

}  // namespace openmetrics
