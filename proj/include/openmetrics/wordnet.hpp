#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "openmetrics/errors.hpp"

namespace openmetrics {

using SynsetOffset = std::uint32_t;

struct Synset {
  SynsetOffset offset = 0;
  std::vector<std::string> lemmas;      // lowercase, underscore-joined
  std::string gloss;
  std::vector<SynsetOffset> hypernyms;  // "@" and "@i" pointers
};

// lowercase, spaces -> underscores
std::string normalize_lemma(std::string_view text);

// Immutable noun taxonomy parsed from WordNet grind files.
//
// data.noun lines:
//   offset lex_filenum ss_type w_cnt (word lex_id)* p_cnt
//   (ptr_symbol offset pos source/target)* | gloss
// with w_cnt and lex_id hexadecimal and p_cnt decimal. index.noun lines:
//   lemma pos synset_cnt ptr_cnt ptrs... sense_cnt tagsense_cnt offsets...
// Lines starting with two spaces (license header) are skipped in both files.
//
// Instance hypernyms ("@i") are treated as hypernyms. Synsets that cannot
// reach the root are reattached directly under it and reported through
// warnings(). Safe for unlimited concurrent readers once constructed.
class Taxonomy {
 public:
  struct PathResult {
    int distance = 0;       // steps(a->lcs) + steps(b->lcs)
    SynsetOffset lcs = 0;   // minimizing ancestor, smallest offset on ties
  };

  // (ancestor offset, min hypernym steps from the queried synset),
  // sorted by offset; includes the synset itself at distance 0.
  using Closure = std::vector<std::pair<SynsetOffset, int>>;

  std::size_t size() const { return synsets_.size(); }
  bool contains(SynsetOffset s) const { return index_.count(s) != 0; }
  const Synset& synset(SynsetOffset s) const;
  const std::vector<Synset>& synsets() const { return synsets_; }
  SynsetOffset root() const { return root_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // sense-ordered offsets per index.noun; empty when absent
  std::vector<SynsetOffset> lookup(std::string_view lemma) const;

  PathResult shortest_hypernym_distance(SynsetOffset a, SynsetOffset b) const;

  // shortest hypernym chain to root, counting nodes; depth(root) = 1
  int depth(SynsetOffset s) const;

  Closure hypernym_closure(SynsetOffset s) const;

  // Writes index.noun/data.noun back in grind format (lexicographer fields
  // are not retained and are written as zeros).
  void save_grind(const std::filesystem::path& dict_dir) const;

  friend Taxonomy parse_wordnet(const std::filesystem::path& dict_dir);

 private:
  std::size_t index_of(SynsetOffset s) const;

  std::vector<Synset> synsets_;  // ascending offset
  std::unordered_map<SynsetOffset, std::uint32_t> index_;
  std::unordered_map<std::string, std::vector<SynsetOffset>> lemma_index_;
  std::vector<int> depths_;
  SynsetOffset root_ = 0;
  std::vector<std::string> warnings_;
};

// Parses index.noun + data.noun from dict_dir. Other POS files are ignored.
Taxonomy parse_wordnet(const std::filesystem::path& dict_dir);

}  // namespace openmetrics
