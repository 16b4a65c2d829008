#include "fct/io.hpp"

#include <fstream>

#include <json.hpp>

#include "fct/error.hpp"

namespace fct {

using nlohmann::json;

SchemaConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + file.string());
  SchemaConfig cfg;
  try {
    const json root = json::parse(in);
    for (const auto& r : root.at("relations")) {
      RelationSpec spec;
      spec.name = r.at("name").get<std::string>();
      spec.file = r.value("file", spec.name + ".tsv");
      spec.columns = r.value("columns", std::vector<std::string>{});
      spec.key = r.value("key", std::string{});
      cfg.relations.push_back(std::move(spec));
    }
    for (const auto& e : root.value("edges", json::array())) {
      cfg.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                           e.at("fk_column").get<std::string>(),
                           e.value("from_column", std::string{})});
    }
    if (root.contains("stopwords")) {
      const auto& sw = root["stopwords"];
      if (sw.is_string()) {
        cfg.stopword_file = sw.get<std::string>();
      } else {
        cfg.stopword_list = sw.get<std::vector<std::string>>();
      }
    }
    cfg.seed = root.value("seed", std::uint64_t{1});
    cfg.rmax = root.value("rmax", static_cast<std::size_t>(KeywordQuery::kDefaultRmax));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, file.string() + ": " + e.what());
  }
  return cfg;
}

void save_config(const SchemaConfig& cfg, const std::filesystem::path& file) {
  json root;
  root["relations"] = json::array();
  for (const auto& r : cfg.relations) {
    root["relations"].push_back(
        {{"name", r.name}, {"file", r.file}, {"columns", r.columns}, {"key", r.key}});
  }
  root["edges"] = json::array();
  for (const auto& e : cfg.edges) {
    json edge{{"from", e.from}, {"to", e.to}, {"fk_column", e.fk_column}};
    if (!e.from_column.empty()) edge["from_column"] = e.from_column;
    root["edges"].push_back(std::move(edge));
  }
  if (cfg.stopword_file) {
    root["stopwords"] = *cfg.stopword_file;
  } else if (!cfg.stopword_list.empty()) {
    root["stopwords"] = cfg.stopword_list;
  }
  root["seed"] = cfg.seed;
  root["rmax"] = cfg.rmax;
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << root.dump(2) << '\n';
}

std::string tsv_escape(std::string_view cell) {
  std::string out;
  out.reserve(cell.size());
  for (char c : cell) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string tsv_unescape(std::string_view cell) { return unescape(cell); }

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cells.push_back(tsv_unescape(std::string_view(line).substr(
        start, tab == std::string::npos ? std::string::npos : tab - start)));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cells;
}

}  // namespace

Relation read_tsv(const std::filesystem::path& file, const std::string& name,
                  const std::string& key, const std::vector<std::string>& expected_columns) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::InvalidInput, file.string() + " has no header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto columns = split_tabs(line);
  if (!expected_columns.empty() && columns != expected_columns) {
    throw Error(ErrorCode::ConfigError, file.string() + " header does not match the columns configured for " + name);
  }
  std::vector<Row> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != columns.size()) {
      throw Error(ErrorCode::InvalidInput, file.string() + ":" + std::to_string(n) + ": " +
                                               std::to_string(cells.size()) + " cells, expected " +
                                               std::to_string(columns.size()));
    }
    rows.push_back(std::move(cells));
  }
  return Relation(name, std::move(columns), key, std::move(rows));
}

void write_tsv(const Relation& relation, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  auto write_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << '\t';
      out << tsv_escape(cells[i]);
    }
    out << '\n';
  };
  write_row(relation.columns());
  for (const auto& row : relation.rows()) write_row(row);
  if (!out) throw Error(ErrorCode::IoError, "write failed on " + file.string());
}

SchemaGraph load_schema(const SchemaConfig& config, const std::filesystem::path& data_dir) {
  std::vector<Relation> relations;
  for (const auto& spec : config.relations) {
    relations.push_back(read_tsv(data_dir / spec.file, spec.name, spec.key, spec.columns));
  }
  return SchemaGraph(std::move(relations), config.edges);
}

StopWords load_stopwords(const SchemaConfig& config, const std::filesystem::path& base_dir) {
  if (config.stopword_file) {
    std::filesystem::path p(*config.stopword_file);
    return StopWords::load(p.is_absolute() ? p : base_dir / p);
  }
  if (!config.stopword_list.empty()) {
    StopWords::WordSet words;
    for (const auto& w : config.stopword_list) {
      for (auto& t : tokenize(w)) words.insert(std::move(t));
    }
    return StopWords(std::move(words));
  }
  return StopWords::english();
}

}  // namespace fct
