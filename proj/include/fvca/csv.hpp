#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "common.hpp"

namespace fvca {

inline constexpr const char* tool_version = "1.0.0";

// FNV-1a 64-bit, used to stamp outputs with the resolved-config hash
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// CSV with LF endings and a '#' comment header (tool version + config hash);
// all cells are numbers printed with 17 significant digits
struct CsvWriter {
  std::ofstream f;
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            std::uint64_t config_hash) {
    f.open(path, std::ios::binary);  // binary: LF on every platform
    if (!f) throw Error("cannot open " + path);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", (unsigned long long)config_hash);
    f << "# fvca " << tool_version << "\n";
    f << "# config-hash " << hash << "\n";
    for (size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
    f << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i) f << (i ? "," : "") << format_g17(vals[i]);
    f << "\n";
  }
};

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return (int)i;
    throw ConfigError("no CSV column named " + name);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
      have_header = true;
    } else {
      std::vector<double> vals;
      while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
      if (vals.size() != t.columns.size()) throw Error("ragged CSV row in " + path);
      t.rows.push_back(std::move(vals));
    }
  }
  return t;
}

}  // namespace fvca
