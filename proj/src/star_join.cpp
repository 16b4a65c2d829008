#include "fct/star_join.hpp"

#include <algorithm>

#include "fct/error.hpp"
#include "fct/text.hpp"

namespace fct {

Hypercube::Hypercube(std::vector<std::size_t> shares) : shares_(std::move(shares)) {
  for (auto s : shares_) {
    if (s < 1) throw Error(ErrorCode::InvalidInput, "share below 1");
    tasks_ *= s;
  }
}

std::size_t Hypercube::label(const std::vector<std::size_t>& digits) const {
  if (digits.size() != shares_.size()) {
    throw Error(ErrorCode::PatternMismatch, "label arity " + std::to_string(digits.size()) +
                                                " for " + std::to_string(shares_.size()) +
                                                " dimensions");
  }
  std::size_t out = 0;
  for (std::size_t i = 0; i < shares_.size(); ++i) {
    if (digits[i] >= shares_[i]) {
      throw Error(ErrorCode::PartitionOutOfRange,
                  "digit " + std::to_string(digits[i]) + " exceeds share " +
                      std::to_string(shares_[i]));
    }
    out = out * shares_[i] + digits[i];
  }
  return out;
}

std::vector<std::size_t> Hypercube::digits(std::size_t label) const {
  std::vector<std::size_t> out(shares_.size());
  for (std::size_t i = shares_.size(); i-- > 0;) {
    out[i] = label % shares_[i];
    label /= shares_[i];
  }
  return out;
}

std::string Hypercube::display(std::size_t label) const {
  bool compact = true;
  for (auto s : shares_) compact = compact && s <= 10;
  std::string out;
  auto d = digits(label);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!compact && i) out += ".";
    out += std::to_string(d[i]);
  }
  return out.empty() ? "0" : out;
}

std::size_t Hypercube::digit(std::size_t dim, std::string_view value) const {
  return static_cast<std::size_t>(key_hash(value) % shares_[dim]);
}

std::vector<double> StarInput::dimension_sizes() const {
  std::vector<double> out;
  for (const auto& d : dims) out.push_back(std::max<double>(1, static_cast<double>(d.rows.size())));
  return out;
}

StarInput make_star_input(const StarNetwork& star) {
  StarInput in;
  in.schema = &star.schema;
  const auto& cn = star.cn;
  in.fact_relation = cn.nodes[star.root]->relation;
  in.fact_rows = cn.nodes[star.root]->members;
  for (const auto& e : cn.edges) {
    const bool root_is_from = e.from_node == star.root;
    if (!root_is_from && e.to_node != star.root) {
      throw Error(ErrorCode::NotCollapsible, "edge not incident to the star root");
    }
    const std::size_t leaf = root_is_from ? e.to_node : e.from_node;
    StarInput::Dimension dim;
    dim.relation = cn.nodes[leaf]->relation;
    dim.rows = cn.nodes[leaf]->members;
    dim.column = root_is_from ? star.schema.fk_column(e.schema_edge)
                              : star.schema.from_column(e.schema_edge);
    dim.fact_column = root_is_from ? star.schema.from_column(e.schema_edge)
                                   : star.schema.fk_column(e.schema_edge);
    const auto& rel = star.schema.relation(dim.relation);
    dim.key_join = !rel.key().empty() && rel.columns()[dim.column] == rel.key();
    in.dims.push_back(std::move(dim));
  }
  return in;
}

}  // namespace fct
