// Copyright 2026 The pnpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// output.hpp: CSV and JSON emitters for result tables.

#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pnpe/cli/config.hpp"

#ifndef PNPE_VERSION
#define PNPE_VERSION "0.0.0"
#endif

namespace pnpe::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
};

struct Table {
  std::string command;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add_row: width mismatch");
    rows.push_back(std::move(row));
  }
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& os, const Table& t, const RunConfig& cfg) {
  const std::string resolved = cfg.serialize();
  os << "# pnpe " << PNPE_VERSION << "\n";
  os << "# command: " << t.command << "\n";
  os << "# config_hash: fnv1a64:" << hex64(fnv1a64(resolved)) << "\n";
  os << "# units:";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : " ") << t.columns[i].name << "=" << t.columns[i].unit;
  os << "\n";
  for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << "\n";
  for (const auto& [k, v] : cfg.values()) os << "# config " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_quote(t.columns[i].name);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_quote(cell_text(row[i]));
    os << "\n";
  }
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return std::stod(format_number(*d));
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

inline void write_json(std::ostream& os, const Table& t, const RunConfig& cfg) {
  nlohmann::ordered_json meta;
  meta["artifact"] = "pnpe";
  meta["version"] = PNPE_VERSION;
  meta["command"] = t.command;
  meta["config_hash"] = "fnv1a64:" + hex64(fnv1a64(cfg.serialize()));
  nlohmann::ordered_json units = nlohmann::ordered_json::object();
  for (const auto& c : t.columns) units[c.name] = c.unit;
  meta["units"] = units;
  for (const auto& [k, v] : t.metadata) meta[k] = v;
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.values()) conf[k] = v;
  meta["config"] = conf;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i].name] = cell_json(row[i]);
    rows.push_back(std::move(r));
  }
  nlohmann::ordered_json doc;
  doc["metadata"] = meta;
  doc["rows"] = rows;
  os << doc.dump(2) << "\n";
}

inline void write_table(std::ostream& os, const Table& t, const RunConfig& cfg) {
  if (cfg.choice("run.format", {"csv", "json"}) == "json")
    write_json(os, t, cfg);
  else
    write_csv(os, t, cfg);
}

}  // namespace pnpe::cli
