#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fct/candidate_network.hpp"

namespace fct {

/// Mixed-radix reduce-task labels over integer shares. Digit 0 is the most
/// significant, so with shares (2,2,2) digits (1,0,0) are task 4, shown "100".
class Hypercube {
 public:
  Hypercube() = default;
  explicit Hypercube(std::vector<std::size_t> shares);

  const std::vector<std::size_t>& shares() const { return shares_; }
  std::size_t dimensions() const { return shares_.size(); }
  std::size_t tasks() const { return tasks_; }

  std::size_t label(const std::vector<std::size_t>& digits) const;
  std::vector<std::size_t> digits(std::size_t label) const;
  /// Digits concatenated when every share is at most 10, dot-joined otherwise.
  std::string display(std::size_t label) const;

  /// Bucket of a join value along dimension i: key_hash(value) mod share.
  std::size_t digit(std::size_t dim, std::string_view value) const;

 private:
  std::vector<std::size_t> shares_;
  std::size_t tasks_ = 1;
};

/// The relations of a star CN in the shape Job 1 consumes: the root plays
/// the fact role, every leaf is a dimension joined to it on one column pair.
struct StarInput {
  struct Dimension {
    std::size_t relation;
    std::vector<std::size_t> rows;
    std::size_t column;       // join column in the dimension relation
    std::size_t fact_column;  // matching column in the fact relation
    bool key_join;            // dimension joins on its primary key
  };

  const SchemaGraph* schema = nullptr;
  std::size_t fact_relation = 0;
  std::vector<std::size_t> fact_rows;
  std::vector<Dimension> dims;

  std::vector<double> dimension_sizes() const;
};

StarInput make_star_input(const StarNetwork& star);

}  // namespace fct
