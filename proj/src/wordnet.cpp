#include "openmetrics/wordnet.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace openmetrics {

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t parse_uint(const std::string& tok, int base, const std::string& file,
                         std::size_t line_no) {
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), value, base);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw MalformedLine(file, line_no, "cannot parse numeric field '" + tok + "'");
  }
  return value;
}

bool skip_line(const std::string& line) {
  return line.empty() || line.rfind("  ", 0) == 0;
}

}  // namespace

std::string normalize_lemma(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == ' ') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

const Synset& Taxonomy::synset(SynsetOffset s) const {
  return synsets_[index_of(s)];
}

std::size_t Taxonomy::index_of(SynsetOffset s) const {
  const auto it = index_.find(s);
  if (it == index_.end()) {
    throw UnknownSynset("unknown synset offset " + std::to_string(s));
  }
  return it->second;
}

std::vector<SynsetOffset> Taxonomy::lookup(std::string_view lemma) const {
  const auto it = lemma_index_.find(normalize_lemma(lemma));
  if (it == lemma_index_.end()) return {};
  return it->second;
}

Taxonomy::Closure Taxonomy::hypernym_closure(SynsetOffset s) const {
  index_of(s);  // validate
  std::unordered_map<SynsetOffset, int> dist;
  dist.emplace(s, 0);
  std::vector<SynsetOffset> frontier{s};
  while (!frontier.empty()) {
    std::vector<SynsetOffset> next;
    for (SynsetOffset u : frontier) {
      const int du = dist[u];
      for (SynsetOffset h : synsets_[index_of(u)].hypernyms) {
        const auto it = dist.find(h);
        if (it == dist.end() || du + 1 < it->second) {
          dist[h] = du + 1;
          next.push_back(h);
        }
      }
    }
    frontier = std::move(next);
  }
  Closure out(dist.begin(), dist.end());
  std::sort(out.begin(), out.end());
  return out;
}

Taxonomy::PathResult Taxonomy::shortest_hypernym_distance(SynsetOffset a,
                                                          SynsetOffset b) const {
  if (a == b) {
    index_of(a);
    return {0, a};
  }
  const Closure ca = hypernym_closure(a);
  const Closure cb = hypernym_closure(b);
  PathResult best{-1, 0};
  std::size_t i = 0, j = 0;
  while (i < ca.size() && j < cb.size()) {
    if (ca[i].first < cb[j].first) {
      ++i;
    } else if (cb[j].first < ca[i].first) {
      ++j;
    } else {
      const int d = ca[i].second + cb[j].second;
      // ascending offsets, so strict < keeps the smallest offset on ties
      if (best.distance < 0 || d < best.distance) {
        best = {d, ca[i].first};
      }
      ++i;
      ++j;
    }
  }
  if (best.distance < 0) {
    // cannot happen once every synset reaches the root
    throw UnknownSynset("no common hypernym ancestor");
  }
  return best;
}

int Taxonomy::depth(SynsetOffset s) const { return depths_[index_of(s)]; }

Taxonomy parse_wordnet(const std::filesystem::path& dict_dir) {
  const auto index_path = dict_dir / "index.noun";
  const auto data_path = dict_dir / "data.noun";
  if (!std::filesystem::exists(data_path)) {
    throw MissingFile("missing " + data_path.string());
  }
  if (!std::filesystem::exists(index_path)) {
    throw MissingFile("missing " + index_path.string());
  }

  Taxonomy t;

  {
    std::ifstream in(data_path);
    if (!in) throw MissingFile("cannot open " + data_path.string());
    const std::string fname = data_path.string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (skip_line(line)) continue;
      std::string_view body = line;
      std::string gloss;
      if (const auto bar = line.find(" | "); bar != std::string::npos) {
        body = std::string_view(line).substr(0, bar);
        gloss = line.substr(bar + 3);
        while (!gloss.empty() && (gloss.back() == ' ' || gloss.back() == '\r')) {
          gloss.pop_back();
        }
      }
      const auto tok = split_ws(body);
      if (tok.size() < 6) {
        throw MalformedLine(fname, line_no, "too few fields");
      }
      Synset s;
      s.offset = static_cast<SynsetOffset>(parse_uint(tok[0], 10, fname, line_no));
      s.gloss = std::move(gloss);
      const auto w_cnt = parse_uint(tok[3], 16, fname, line_no);
      if (w_cnt == 0) throw MalformedLine(fname, line_no, "synset without words");
      std::size_t pos = 4;
      for (std::uint64_t w = 0; w < w_cnt; ++w) {
        if (pos + 1 >= tok.size()) {
          throw MalformedLine(fname, line_no, "word count exceeds fields");
        }
        s.lemmas.push_back(normalize_lemma(tok[pos]));
        parse_uint(tok[pos + 1], 16, fname, line_no);  // lex_id
        pos += 2;
      }
      if (pos >= tok.size()) {
        throw MalformedLine(fname, line_no, "missing pointer count");
      }
      const auto p_cnt = parse_uint(tok[pos], 10, fname, line_no);
      ++pos;
      for (std::uint64_t p = 0; p < p_cnt; ++p) {
        if (pos + 3 >= tok.size()) {
          throw MalformedLine(fname, line_no, "pointer count exceeds fields");
        }
        const std::string& symbol = tok[pos];
        const auto target = parse_uint(tok[pos + 1], 10, fname, line_no);
        const std::string& ppos = tok[pos + 2];
        parse_uint(tok[pos + 3], 16, fname, line_no);  // source/target
        if ((symbol == "@" || symbol == "@i") && ppos == "n") {
          s.hypernyms.push_back(static_cast<SynsetOffset>(target));
        }
        pos += 4;
      }
      if (t.index_.count(s.offset)) {
        throw MalformedLine(fname, line_no,
                            "duplicate synset offset " + tok[0]);
      }
      t.index_.emplace(s.offset, static_cast<std::uint32_t>(t.synsets_.size()));
      t.synsets_.push_back(std::move(s));
    }
  }
  if (t.synsets_.empty()) {
    throw MalformedLine(data_path.string(), 0, "no synsets parsed");
  }

  // offsets ascending; rebuild the index after sort
  std::sort(t.synsets_.begin(), t.synsets_.end(),
            [](const Synset& a, const Synset& b) { return a.offset < b.offset; });
  t.index_.clear();
  for (std::size_t i = 0; i < t.synsets_.size(); ++i) {
    t.index_.emplace(t.synsets_[i].offset, static_cast<std::uint32_t>(i));
  }

  // drop hypernym references to unknown synsets, keeping a record
  for (auto& s : t.synsets_) {
    auto& hs = s.hypernyms;
    const auto bad = std::stable_partition(
        hs.begin(), hs.end(),
        [&](SynsetOffset h) { return t.index_.count(h) != 0; });
    for (auto it = bad; it != hs.end(); ++it) {
      t.warnings_.push_back("synset " + std::to_string(s.offset) +
                            ": dropped dangling hypernym " + std::to_string(*it));
    }
    hs.erase(bad, hs.end());
  }

  // root = parentless synset with the smallest offset
  SynsetOffset root = 0;
  bool have_root = false;
  for (const auto& s : t.synsets_) {
    if (s.hypernyms.empty()) {
      root = s.offset;
      have_root = true;
      break;
    }
  }
  if (!have_root) {
    throw MalformedLine(data_path.string(), 0,
                        "taxonomy has no parentless root synset");
  }
  t.root_ = root;
  for (auto& s : t.synsets_) {
    if (s.offset != root && s.hypernyms.empty()) {
      s.hypernyms.push_back(root);
      t.warnings_.push_back("synset " + std::to_string(s.offset) +
                            ": parentless, attached under root");
    }
  }

  // depths via iterative DFS; also detects hypernym cycles
  t.depths_.assign(t.synsets_.size(), -1);
  std::vector<std::uint8_t> state(t.synsets_.size(), 0);  // 0 new, 1 open, 2 done
  for (std::size_t start = 0; start < t.synsets_.size(); ++start) {
    if (t.depths_[start] >= 0) continue;
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      if (state[u] == 2) {
        stack.pop_back();
        continue;
      }
      if (t.synsets_[u].offset == root) {
        t.depths_[u] = 1;
        state[u] = 2;
        stack.pop_back();
        continue;
      }
      bool ready = true;
      if (state[u] == 0) {
        state[u] = 1;
        for (SynsetOffset h : t.synsets_[u].hypernyms) {
          const std::size_t hi = t.index_.at(h);
          if (state[hi] == 1) {
            throw MalformedLine(data_path.string(), 0,
                                "hypernym cycle involving offset " +
                                    std::to_string(t.synsets_[u].offset));
          }
          if (state[hi] == 0) {
            stack.push_back(hi);
            ready = false;
          }
        }
      }
      if (ready) {
        int best = -1;
        for (SynsetOffset h : t.synsets_[u].hypernyms) {
          const int dh = t.depths_[t.index_.at(h)];
          if (best < 0 || dh < best) best = dh;
        }
        t.depths_[u] = best + 1;
        state[u] = 2;
        stack.pop_back();
      }
    }
  }

  // unreachable synsets would have been parentless or cyclic; by now every
  // synset has a finite depth, i.e. reaches the root.

  {
    std::ifstream in(index_path);
    if (!in) throw MissingFile("cannot open " + index_path.string());
    const std::string fname = index_path.string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (skip_line(line)) continue;
      const auto tok = split_ws(line);
      if (tok.size() < 6) throw MalformedLine(fname, line_no, "too few fields");
      const std::string& lemma = tok[0];
      const auto synset_cnt = parse_uint(tok[2], 10, fname, line_no);
      const auto p_cnt = parse_uint(tok[3], 10, fname, line_no);
      const std::size_t off_start = 4 + p_cnt + 2;  // skip ptrs, sense counts
      if (off_start + synset_cnt > tok.size() + 0ull) {
        throw MalformedLine(fname, line_no, "offset list exceeds fields");
      }
      std::vector<SynsetOffset> offsets;
      offsets.reserve(synset_cnt);
      for (std::uint64_t i = 0; i < synset_cnt; ++i) {
        const auto off =
            parse_uint(tok[off_start + i], 10, fname, line_no);
        if (!t.index_.count(static_cast<SynsetOffset>(off))) {
          t.warnings_.push_back("index.noun:" + std::to_string(line_no) +
                                ": lemma '" + lemma +
                                "' references unknown synset " +
                                tok[off_start + i]);
          continue;
        }
        offsets.push_back(static_cast<SynsetOffset>(off));
      }
      if (!offsets.empty()) {
        t.lemma_index_.emplace(normalize_lemma(lemma), std::move(offsets));
      }
    }
  }

  return t;
}

void Taxonomy::save_grind(const std::filesystem::path& dict_dir) const {
  std::filesystem::create_directories(dict_dir);
  {
    std::ofstream out(dict_dir / "data.noun");
    if (!out) throw IoError("cannot write " + (dict_dir / "data.noun").string());
    char buf[16];
    for (const auto& s : synsets_) {
      std::snprintf(buf, sizeof(buf), "%08u", s.offset);
      out << buf << " 00 n ";
      std::snprintf(buf, sizeof(buf), "%02zx", s.lemmas.size());
      out << buf;
      for (const auto& w : s.lemmas) out << ' ' << w << " 0";
      out << ' ' << std::dec << s.hypernyms.size();
      for (SynsetOffset h : s.hypernyms) {
        std::snprintf(buf, sizeof(buf), "%08u", h);
        out << " @ " << buf << " n 0000";
      }
      out << " | " << s.gloss << '\n';
    }
  }
  {
    std::ofstream out(dict_dir / "index.noun");
    if (!out) throw IoError("cannot write " + (dict_dir / "index.noun").string());
    std::vector<std::string> lemmas;
    lemmas.reserve(lemma_index_.size());
    for (const auto& [lemma, _] : lemma_index_) lemmas.push_back(lemma);
    std::sort(lemmas.begin(), lemmas.end());
    char buf[16];
    for (const auto& lemma : lemmas) {
      const auto& offsets = lemma_index_.at(lemma);
      out << lemma << " n " << offsets.size() << " 0 " << offsets.size()
          << " 0";
      for (SynsetOffset off : offsets) {
        std::snprintf(buf, sizeof(buf), "%08u", off);
        out << ' ' << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace openmetrics
