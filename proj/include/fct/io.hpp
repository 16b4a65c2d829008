#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fct/schema.hpp"
#include "fct/text.hpp"

namespace fct {

struct RelationSpec {
  std::string name;
  std::string file;  // relative to the data directory
  std::vector<std::string> columns;
  std::string key;
};

/// JSON schema configuration:
///   {"relations": [{"name", "file", "columns", "key"}],
///    "edges": [{"from", "to", "fk_column", "from_column"?}],
///    "stopwords": "file" | ["word", ...], "seed": n, "rmax": n}
struct SchemaConfig {
  std::vector<RelationSpec> relations;
  std::vector<EdgeSpec> edges;
  std::optional<std::string> stopword_file;
  std::vector<std::string> stopword_list;
  std::uint64_t seed = 1;
  std::size_t rmax = KeywordQuery::kDefaultRmax;
};

SchemaConfig load_config(const std::filesystem::path& file);
void save_config(const SchemaConfig& config, const std::filesystem::path& file);

/// TSV with a header row. Cells escape backslash, tab, CR and LF.
Relation read_tsv(const std::filesystem::path& file, const std::string& name,
                  const std::string& key,
                  const std::vector<std::string>& expected_columns = {});
void write_tsv(const Relation& relation, const std::filesystem::path& file);

std::string tsv_escape(std::string_view cell);
std::string tsv_unescape(std::string_view cell);

/// Reads every relation file of the config from data_dir.
SchemaGraph load_schema(const SchemaConfig& config, const std::filesystem::path& data_dir);

/// Stop words named by the config; relative files resolve against
/// base_dir. The built-in English list when the config names none.
StopWords load_stopwords(const SchemaConfig& config, const std::filesystem::path& base_dir);

}  // namespace fct
