#include "openmetrics/report.hpp"

#include <json.hpp>
#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace openmetrics {

using nlohmann::json;

double round_6sig(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(bytes.data(), bytes.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) {
    out.push_back(hex[b >> 4]);
    out.push_back(hex[b & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void MetricReport::validate() const {
  if (mode == "open" && similarity_digest.empty()) {
    throw SchemaError("open-mode report without similarity digest");
  }
}

void write_report(const MetricReport& report, const std::filesystem::path& path) {
  report.validate();
  json doc;
  doc["task"] = report.task;
  doc["mode"] = report.mode;
  doc["similarity_method"] = report.similarity_method;
  json summary = json::object();
  for (const auto& [key, value] : report.summary) summary[key] = round_6sig(value);
  doc["summary"] = std::move(summary);
  json per_class = json::array();
  for (const auto& row : report.per_class) {
    json jr;
    jr["id"] = row.id;
    jr["name"] = row.name;
    json values = json::object();
    for (const auto& [key, value] : row.values) values[key] = round_6sig(value);
    jr["values"] = std::move(values);
    per_class.push_back(std::move(jr));
  }
  doc["per_class"] = std::move(per_class);
  json prov;
  prov["inputs"] = report.inputs;
  prov["tool_version"] = report.tool_version;
  if (report.seed) prov["seed"] = *report.seed;
  if (!report.similarity_digest.empty()) {
    prov["similarity_digest"] = report.similarity_digest;
  }
  doc["provenance"] = std::move(prov);
  atomic_write_text(path, doc.dump(2) + "\n");
}

MetricReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  MetricReport r;
  r.task = doc.at("task").get<std::string>();
  r.mode = doc.at("mode").get<std::string>();
  r.similarity_method = doc.at("similarity_method").get<std::string>();
  for (const auto& [key, value] : doc.at("summary").items()) {
    r.summary[key] = value.get<double>();
  }
  for (const auto& row : doc.at("per_class")) {
    MetricReport::ClassRow cr;
    cr.id = row.at("id").get<int>();
    cr.name = row.at("name").get<std::string>();
    for (const auto& [key, value] : row.at("values").items()) {
      cr.values[key] = value.get<double>();
    }
    r.per_class.push_back(std::move(cr));
  }
  const auto& prov = doc.at("provenance");
  for (const auto& [key, value] : prov.at("inputs").items()) {
    r.inputs[key] = value.get<std::string>();
  }
  r.tool_version = prov.at("tool_version").get<std::string>();
  if (prov.contains("seed")) r.seed = prov["seed"].get<std::uint64_t>();
  if (prov.contains("similarity_digest")) {
    r.similarity_digest = prov["similarity_digest"].get<std::string>();
  }
  r.validate();
  return r;
}

std::string render_report_table(const MetricReport& report) {
  // collect the value columns present in any row
  std::vector<std::string> columns;
  for (const auto& row : report.per_class) {
    for (const auto& [key, _] : row.values) {
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) {
        columns.push_back(key);
      }
    }
  }
  std::sort(columns.begin(), columns.end());

  std::vector<std::vector<std::string>> cells;
  {
    std::vector<std::string> header{"id", "name"};
    header.insert(header.end(), columns.begin(), columns.end());
    cells.push_back(std::move(header));
  }
  const auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  for (const auto& row : report.per_class) {
    std::vector<std::string> line{std::to_string(row.id), row.name};
    for (const auto& col : columns) {
      const auto it = row.values.find(col);
      line.push_back(it != row.values.end() ? fmt(it->second) : "-");
    }
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(cells[0].size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      widths[c] = std::max(widths[c], line[c].size());
    }
  }
  std::ostringstream out;
  out << report.task << " / " << report.mode << " ("
      << report.similarity_method << ")\n";
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) out << "  ";
      out << line[c];
      out << std::string(widths[c] - line[c].size(), ' ');
    }
    out << '\n';
  }
  out << "--\n";
  for (const auto& [key, value] : report.summary) {
    out << key << " = " << fmt(value) << '\n';
  }
  return out.str();
}

}  // namespace openmetrics
