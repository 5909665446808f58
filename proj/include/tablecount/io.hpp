#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tablecount/counting.hpp"
#include "tablecount/margins.hpp"
#include "tablecount/symmetric_lowrank.hpp"

namespace tablecount::io {

using nlohmann::json;

/// Matrix entries kept as text so they can be read as doubles or exact rationals.
using TextMatrix = std::vector<std::vector<std::string>>;

/// Everything a margins file may carry. `cols` is optional because a
/// column-set query only needs row sums.
struct ProblemInput {
  std::vector<unsigned> rows;
  std::optional<std::vector<unsigned>> cols;
  std::optional<TextMatrix> weights;
  std::optional<std::vector<std::set<unsigned>>> col_sets;
};

/// "2,2,2" -> {2,2,2}. Rejects empty items and anything but digits.
std::vector<unsigned> parse_uint_list(const std::string& text);

/// Column sets separated by ';', elements by ',', with inclusive ranges "a-b":
/// "0-2;1,3;2" -> {{0,1,2},{1,3},{2}}. An empty item is an empty set.
std::vector<std::set<unsigned>> parse_column_sets(const std::string& text);

/// JSON {"rows":[..],"cols":[..],"weights":[[..]],"col_sets":[[..]]} or CSV
/// (first line rows, second line cols), chosen by extension (.json or .csv).
ProblemInput read_problem(const std::string& path);
ProblemInput parse_problem_json(const json& doc);
ProblemInput parse_problem_csv(std::istream& in);

/// Matrix as CSV rows or JSON (an array of arrays, or an object holding one
/// under "weights" or "matrix").
TextMatrix read_matrix(const std::string& path);
TextMatrix parse_matrix_json(const json& doc);
TextMatrix parse_matrix_csv(std::istream& in);

std::vector<std::vector<double>> to_doubles(const TextMatrix& m);
std::vector<std::vector<Rational>> to_rationals(const TextMatrix& m);

void write_matrix_csv(std::ostream& out, const std::vector<std::vector<double>>& m);
json matrix_to_json(const std::vector<std::vector<double>>& m);

json to_json(const ApproxSymmetricPoly& approx);
ApproxSymmetricPoly approx_from_json(const json& doc);

json to_json(const CountEstimate& est);
json to_json(const LowRankEstimate& est);
json to_json(const VarianceReport& rep);
json to_json(const CoefficientReport& rep);

}  // namespace tablecount::io
