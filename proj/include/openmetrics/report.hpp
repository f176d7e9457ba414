#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "openmetrics/errors.hpp"

namespace openmetrics {

inline constexpr const char* kToolVersion = "0.1.0";

// Evaluation output: summary values plus per-class breakdowns, with enough
// provenance to reproduce the run. Serialization is deterministic: sorted
// keys, floats rounded to 6 significant digits.
struct MetricReport {
  struct ClassRow {
    int id = 0;
    std::string name;
    std::map<std::string, double> values;
  };

  std::string task;                // semantic | instance | detection | panoptic
  std::string mode;                // vanilla | vanilla_agnostic | open
  std::string similarity_method;
  std::map<std::string, double> summary;
  std::vector<ClassRow> per_class;

  std::map<std::string, std::string> inputs;  // name -> sha256
  std::string tool_version = kToolVersion;
  std::optional<std::uint64_t> seed;
  std::string similarity_digest;  // required for open mode

  // open-mode reports must record the similarity digest they used
  void validate() const;
};

void write_report(const MetricReport& report, const std::filesystem::path& path);
MetricReport load_report(const std::filesystem::path& path);

// plain-text table: header + one row per class + summary
std::string render_report_table(const MetricReport& report);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

double round_6sig(double v);

// write temp + rename so readers never observe partial files
void atomic_write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace openmetrics
