#include "tablecount/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "tablecount/errors.hpp"

namespace tablecount::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

unsigned parse_uint(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ValidationError("expected a non-negative integer, got '" + text + "'");
  }
  const unsigned long v = std::stoul(t);
  if (v > 1'000'000) throw ValidationError("integer " + t + " is out of range");
  return static_cast<unsigned>(v);
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read file '" + path + "'");
  return in;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json parse_json_file(const std::string& path) {
  auto in = open(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

std::vector<unsigned> uint_array(const json& v, const char* what) {
  if (!v.is_array()) throw ValidationError(std::string(what) + " must be an array of integers");
  std::vector<unsigned> out;
  for (const auto& x : v) {
    if (!x.is_number_unsigned()) throw ValidationError(std::string(what) + " must hold non-negative integers");
    out.push_back(x.get<unsigned>());
  }
  return out;
}

std::string entry_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw ValidationError("matrix entries must be numbers or strings");
}

json forms_json(const std::vector<LinearForm<double>>& forms) {
  json out = json::array();
  for (const auto& f : forms) out.push_back(f.coeffs);
  return out;
}

std::vector<LinearForm<double>> forms_from_json(const json& v, std::size_t n) {
  std::vector<LinearForm<double>> out;
  for (const auto& f : v) {
    LinearForm<double> form{f.get<std::vector<double>>()};
    if (form.coeffs.size() != n) throw ValidationError("form has the wrong number of coefficients");
    out.push_back(std::move(form));
  }
  return out;
}

}  // namespace

std::vector<unsigned> parse_uint_list(const std::string& text) {
  std::vector<unsigned> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_uint(item));
  if (out.empty()) throw ValidationError("empty integer list");
  return out;
}

std::vector<std::set<unsigned>> parse_column_sets(const std::string& text) {
  std::vector<std::set<unsigned>> out;
  for (const auto& group : split(text, ';')) {
    std::set<unsigned> s;
    if (!group.empty()) {
      for (const auto& item : split(group, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
          s.insert(parse_uint(item));
          continue;
        }
        const unsigned lo = parse_uint(item.substr(0, dash)), hi = parse_uint(item.substr(dash + 1));
        if (lo > hi) throw ValidationError("empty range '" + item + "'");
        for (unsigned v = lo; v <= hi; ++v) s.insert(v);
      }
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw ValidationError("no column sets given");
  return out;
}

ProblemInput parse_problem_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("rows")) throw ValidationError("margins JSON needs a \"rows\" array");
  ProblemInput p;
  p.rows = uint_array(doc["rows"], "rows");
  if (doc.contains("cols")) p.cols = uint_array(doc["cols"], "cols");
  if (doc.contains("weights")) p.weights = parse_matrix_json(doc["weights"]);
  if (doc.contains("col_sets")) {
    std::vector<std::set<unsigned>> sets;
    for (const auto& s : doc["col_sets"]) {
      const auto v = uint_array(s, "col_sets entries");
      sets.emplace_back(v.begin(), v.end());
    }
    p.col_sets = std::move(sets);
  }
  return p;
}

ProblemInput parse_problem_csv(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  if (lines.size() != 2) throw ValidationError("margins CSV needs exactly two lines: row sums, then column sums");
  ProblemInput p;
  p.rows = parse_uint_list(lines[0]);
  p.cols = parse_uint_list(lines[1]);
  return p;
}

ProblemInput read_problem(const std::string& path) {
  if (ends_with(path, ".json")) return parse_problem_json(parse_json_file(path));
  if (ends_with(path, ".csv")) {
    auto in = open(path);
    return parse_problem_csv(in);
  }
  throw ValidationError("margins file must end in .json or .csv: '" + path + "'");
}

TextMatrix parse_matrix_json(const json& doc) {
  const json* arr = &doc;
  if (doc.is_object()) {
    if (doc.contains("weights")) {
      arr = &doc["weights"];
    } else if (doc.contains("matrix")) {
      arr = &doc["matrix"];
    } else {
      throw ValidationError("matrix JSON object needs a \"weights\" or \"matrix\" field");
    }
  }
  if (!arr->is_array() || arr->empty()) throw ValidationError("matrix must be a non-empty array of rows");
  TextMatrix out;
  for (const auto& row : *arr) {
    if (!row.is_array()) throw ValidationError("matrix rows must be arrays");
    std::vector<std::string> r;
    for (const auto& v : row) r.push_back(entry_text(v));
    out.push_back(std::move(r));
  }
  return out;
}

TextMatrix parse_matrix_csv(std::istream& in) {
  TextMatrix out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    out.push_back(split(line, ','));
  }
  if (out.empty()) throw ValidationError("matrix CSV is empty");
  return out;
}

TextMatrix read_matrix(const std::string& path) {
  if (ends_with(path, ".json")) return parse_matrix_json(parse_json_file(path));
  auto in = open(path);
  return parse_matrix_csv(in);
}

std::vector<std::vector<double>> to_doubles(const TextMatrix& m) {
  std::vector<std::vector<double>> out;
  for (const auto& row : m) {
    std::vector<double> r;
    for (const auto& v : row) r.push_back(parse_rational(v).get_d());
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<Rational>> to_rationals(const TextMatrix& m) {
  std::vector<std::vector<Rational>> out;
  for (const auto& row : m) {
    std::vector<Rational> r;
    for (const auto& v : row) r.push_back(parse_rational(v));
    out.push_back(std::move(r));
  }
  return out;
}

void write_matrix_csv(std::ostream& out, const std::vector<std::vector<double>>& m) {
  for (const auto& row : m) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << to_string(row[j]);
    out << '\n';
  }
}

json matrix_to_json(const std::vector<std::vector<double>>& m) { return m; }

json to_json(const ApproxSymmetricPoly& approx) {
  json out = {{"kind", to_string(approx.kind)}, {"r", approx.r},
              {"n", approx.n},                  {"epsilon", approx.epsilon},
              {"seed", approx.seed},            {"scale", approx.scale()},
              {"normalizer", approx.normalizer}};
  if (approx.kind == SymmetricKind::complete) {
    out["kappa"] = approx.kappa;
    out["forms"] = forms_json(approx.forms);
  } else {
    json groups = json::array();
    for (const auto& g : approx.groups) groups.push_back(forms_json(g));
    out["forms"] = std::move(groups);
  }
  return out;
}

ApproxSymmetricPoly approx_from_json(const json& doc) {
  try {
    ApproxSymmetricPoly a;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind != "complete" && kind != "elementary") throw ValidationError("unknown kind '" + kind + "'");
    a.kind = kind == "complete" ? SymmetricKind::complete : SymmetricKind::elementary;
    a.r = doc.at("r").get<unsigned>();
    a.n = doc.at("n").get<std::size_t>();
    a.epsilon = doc.at("epsilon").get<double>();
    a.seed = doc.at("seed").get<std::uint64_t>();
    a.normalizer = doc.contains("normalizer") ? doc["normalizer"].get<double>() : 1.0 / doc.at("scale").get<double>();
    if (a.kind == SymmetricKind::complete) {
      a.kappa = doc.value("kappa", 0.0);
      a.forms = forms_from_json(doc.at("forms"), a.n);
    } else {
      for (const auto& g : doc.at("forms")) a.groups.push_back(forms_from_json(g, a.n));
    }
    return a;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed approximation JSON: ") + e.what());
  }
}

json to_json(const CountEstimate& est) {
  return {{"mean", est.mean},
          {"std_err", est.std_err},
          {"ci_low", est.ci_low},
          {"ci_high", est.ci_high},
          {"num_samples", est.num_samples},
          {"seed", est.seed},
          {"exact_divisor_applied", est.exact_divisor_applied},
          {"second_moment_ratio", est.second_moment_ratio}};
}

json to_json(const LowRankEstimate& est) {
  json samples = json::object();
  for (const auto& [r, m] : est.samples_per_degree) samples[std::to_string(r)] = m;
  return {{"value", est.value},
          {"band", {est.band_lower, est.band_upper}},
          {"rank", est.rank},
          {"route", to_string(est.route)},
          {"left_terms", est.left_terms},
          {"right_terms", est.right_terms},
          {"samples_per_degree", samples},
          {"repeat_values", est.repeat_values},
          {"seed", est.seed}};
}

json to_json(const VarianceReport& rep) {
  json out = {{"empirical_ratio", rep.empirical_ratio},
              {"ratio_std_err", rep.ratio_std_err},
              {"bound_part2", rep.bound_part2},
              {"within_part2", rep.within_part2()},
              {"bound_part3_exponent", rep.bound_part3_exponent.get_str()},
              {"part3_applicable", rep.part3_applicable},
              {"num_samples", rep.num_samples},
              {"seed", rep.seed}};
  if (rep.bound_part3) {
    out["bound_part3"] = *rep.bound_part3;
  } else {
    out["bound_part3"] = "exp(" + rep.bound_part3_exponent.get_str() + ")";
  }
  return out;
}

json to_json(const CoefficientReport& rep) {
  json violations = json::array();
  for (const auto& a : rep.violations) violations.push_back(a);
  return {{"min_ratio", rep.min_ratio}, {"max_ratio", rep.max_ratio},   {"lower_bound", rep.lower_bound},
          {"upper_bound", rep.upper_bound}, {"checked", rep.checked}, {"passed", rep.passed()},
          {"violations", violations}};
}

}  // namespace tablecount::io
