#pragma once

#include <nlohmann/json.hpp>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wdist/core/format.hpp"
#include "wdist/data/dataset.hpp"

namespace wdist {

inline std::string sidecar_path(const std::string& csv_path) { return csv_path + ".json"; }

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

/// CSV (feature columns, then label,bin,provenance,split) plus a JSON sidecar
/// holding the layout and generation spec.
inline void write_dataset(const LabeledDataset& ds, const std::string& path) {
  const auto names = feature_names(ds.layout);
  std::string text;
  text.reserve(ds.size() * (ds.layout.total_length + 4) * 24 + 1024);
  for (const auto& name : names) {
    text += name;
    text += ',';
  }
  text += "label,bin,provenance,split\n";
  const char* split = to_string(ds.split);
  for (const auto& row : ds.rows) {
    if (row.features.size() != ds.layout.total_length)
      throw CompatibilityError("write_dataset: row width differs from layout");
    for (double v : row.features) {
      text += format_double(v);
      text += ',';
    }
    text += format_double(row.label);
    text += ',';
    text += std::to_string(row.bin);
    text += ',';
    text += row.provenance;
    text += ',';
    text += split;
    text += '\n';
  }
  write_text_file(path, text);

  nlohmann::json side = {{"format", "wdist-dataset"},
                         {"version", 1},
                         {"layout", to_json(ds.layout)},
                         {"layout_hash", hex64(layout_hash(ds.layout))},
                         {"split", split},
                         {"n_rows", ds.size()},
                         {"spec", ds.spec ? to_json(*ds.spec) : nlohmann::json(nullptr)},
                         {"seed", ds.spec ? nlohmann::json(ds.spec->seed) : nlohmann::json(nullptr)}};
  if (!ds.manifest.empty()) side["manifest"] = ds.manifest;
  write_json_file(sidecar_path(path), side);
}

inline LabeledDataset read_dataset(const std::string& path) {
  LabeledDataset ds;
  const nlohmann::json side = read_json_file(sidecar_path(path));
  std::size_t expected_rows = 0;
  try {
    if (side.at("format") != "wdist-dataset") throw ParseError("'" + sidecar_path(path) + "': not a dataset sidecar");
    ds.layout = layout_from_json(side.at("layout"));
    if (side.contains("spec") && !side["spec"].is_null()) ds.spec = generation_spec_from_json(side["spec"]);
    ds.manifest = side.value("manifest", "");
    expected_rows = side.at("n_rows").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + sidecar_path(path) + "': " + e.what());
  }

  const std::string text = read_text_file(path);
  std::size_t pos = 0;
  long line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    line = std::string_view(text).substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw ParseError("'" + path + "': empty dataset file", 1);
  const auto header = split_csv_line(line);
  const std::size_t width = ds.layout.total_length;
  if (header.size() != width + 4)
    throw CompatibilityError("'" + path + "': header has " + std::to_string(header.size()) +
                             " columns but the sidecar layout needs " + std::to_string(width + 4));
  const auto names = feature_names(ds.layout);
  for (std::size_t i = 0; i < width; ++i)
    if (header[i] != names[i])
      throw CompatibilityError("'" + path + "': column " + std::to_string(i) + " is '" + std::string(header[i]) +
                               "', layout expects '" + names[i] + "'");

  bool split_seen = false;
  while (next_line(line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != width + 4)
      throw ParseError("'" + path + "': expected " + std::to_string(width + 4) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no);
    DatasetRow row;
    row.features.resize(width);
    for (std::size_t i = 0; i < width; ++i)
      if (!parse_double(cells[i], row.features[i]))
        throw ParseError("'" + path + "': bad number '" + std::string(cells[i]) + "'", line_no);
    if (!parse_double(cells[width], row.label))
      throw ParseError("'" + path + "': bad label '" + std::string(cells[width]) + "'", line_no);
    double bin = 0.0;
    if (!parse_double(cells[width + 1], bin) || bin != std::floor(bin))
      throw ParseError("'" + path + "': bad bin '" + std::string(cells[width + 1]) + "'", line_no);
    row.bin = static_cast<int>(bin);
    row.provenance = std::string(cells[width + 2]);
    const std::string tag(cells[width + 3]);
    Split s = Split::none;
    if (tag == "train") s = Split::train;
    else if (tag == "val") s = Split::val;
    else if (tag == "test") s = Split::test;
    else if (tag != "none") throw ParseError("'" + path + "': unknown split tag '" + tag + "'", line_no);
    if (split_seen && s != ds.split) throw ParseError("'" + path + "': mixed split tags", line_no);
    ds.split = s;
    split_seen = true;
    ds.rows.push_back(std::move(row));
  }
  if (!split_seen) ds.split = split_from_string(side.value("split", "none"));
  if (ds.rows.size() != expected_rows)
    throw ParseError("'" + path + "': sidecar promises " + std::to_string(expected_rows) + " rows, file has " +
                     std::to_string(ds.rows.size()));
  return ds;
}

}  // namespace wdist
