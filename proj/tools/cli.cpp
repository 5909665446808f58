#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tablecount/counting.hpp"
#include "tablecount/errors.hpp"
#include "tablecount/io.hpp"

namespace tablecount::cli {

namespace {

using io::json;

struct Config {
  std::string rows, cols, margins_file, weights_file, col_sets, matrix_file;
  std::string output = "json";
  std::string method;
  std::string kind = "complete";
  std::string route = "automatic";
  std::string weighting = "plain";
  std::string dump_poly, dump_json;
  double epsilon = 0.2;
  std::uint64_t samples = 10000;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> forms;
  unsigned repeats = 1;
  unsigned threads = 1;
  unsigned r = 2;
  std::size_t n = 10;
  std::size_t term_cap = kDefaultTermCap;
  std::size_t perm_cap = kDefaultPermanentCap;
};

std::uint64_t resolve_seed(const Config& cfg, const std::optional<std::string>& env_seed) {
  if (cfg.seed) return *cfg.seed;
  if (env_seed) {
    const std::string& s = *env_seed;
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 20) {
      throw ValidationError("TABLECOUNT_SEED must be a non-negative 64-bit integer, got '" + s + "'");
    }
    try {
      return std::stoull(s);
    } catch (const std::out_of_range&) {
      throw ValidationError("TABLECOUNT_SEED is out of range: '" + s + "'");
    }
  }
  return kDefaultSeed;
}

io::ProblemInput load_problem(const Config& cfg, bool need_cols = true) {
  io::ProblemInput p;
  if (!cfg.margins_file.empty()) {
    if (!cfg.rows.empty() || !cfg.cols.empty()) throw ValidationError("give either --margins-file or --rows/--cols");
    p = io::read_problem(cfg.margins_file);
  } else {
    if (cfg.rows.empty()) throw ValidationError("--rows is required");
    p.rows = io::parse_uint_list(cfg.rows);
    if (!cfg.cols.empty()) p.cols = io::parse_uint_list(cfg.cols);
  }
  if (!cfg.col_sets.empty()) p.col_sets = io::parse_column_sets(cfg.col_sets);
  if (!cfg.weights_file.empty()) p.weights = io::read_matrix(cfg.weights_file);
  if (need_cols && !p.cols) throw ValidationError("--cols is required");
  return p;
}

Margins margins_of(const io::ProblemInput& p) { return Margins(p.rows, *p.cols); }

json echo(const Margins& m) { return {{"rows", m.rows()}, {"cols", m.cols()}}; }

void require_samples(std::uint64_t s) {
  if (s < 2) throw ValidationError("--samples must be at least 2");
}

void require_epsilon(double e) {
  if (!(e > 0.0 && e < 1.0)) throw ValidationError("--epsilon must lie in (0, 1)");
}

PairingRoute parse_route(const std::string& s) {
  if (s == "automatic") return PairingRoute::automatic;
  if (s == "reduced") return PairingRoute::reduced;
  if (s == "direct") return PairingRoute::direct;
  throw ValidationError("unknown route '" + s + "'");
}

LowRankOptions lowrank_options(const Config& cfg) {
  LowRankOptions o;
  o.route = parse_route(cfg.route);
  o.term_cap = cfg.term_cap;
  o.repeats = cfg.repeats;
  o.samples = cfg.forms;
  return o;
}

MonteCarloOptions mc_options(const Config& cfg) { return {cfg.threads, cfg.perm_cap}; }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
}

void dump_approximations(const Config& cfg, const std::vector<unsigned>& rows, std::size_t n, std::uint64_t seed,
                         SymmetricKind kind) {
  if (cfg.dump_poly.empty()) return;
  std::ostringstream text;
  const auto opts = lowrank_options(cfg);
  std::vector<unsigned> degrees(rows);
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
  for (unsigned r : degrees) {
    const auto s = approximation_seed(seed, opts.repeats, 0, r);
    const auto a = kind == SymmetricKind::complete ? build_h_tilde(r, n, cfg.epsilon, s, cfg.forms)
                                                   : build_e_tilde(r, n, cfg.epsilon, s, cfg.forms);
    text << "# " << to_string(kind) << " r=" << r << "\n" << to_text(expand(a, cfg.term_cap));
  }
  write_text_file(cfg.dump_poly, text.str());
}

double relative_error(double value, double exact) { return exact == 0.0 ? std::abs(value) : std::abs(value / exact - 1.0); }

json cmd_count(const Config& cfg, bool zero_one) {
  const Margins m = margins_of(load_problem(cfg));
  json out = echo(m);
  if (zero_one) {
    out["count"] = exact_count_01(m).get_str();
  } else if (cfg.method.empty() || cfg.method == "dp") {
    out["count"] = exact_count_dp(m).get_str();
    out["method"] = "dp";
  } else if (cfg.method == "bruteforce") {
    out["count"] = exact_count_bruteforce(m).get_str();
    out["method"] = "bruteforce";
  } else {
    throw ValidationError("unknown --method '" + cfg.method + "' (expected dp or bruteforce)");
  }
  return out;
}

json cmd_fy(const Config& cfg) {
  const Margins m = margins_of(load_problem(cfg));
  json out = echo(m);
  const Rational v = fisher_yates_count(m);
  out["value"] = to_string(v);
  out["value_float"] = v.get_d();
  return out;
}

json cmd_bekessy(const Config& cfg) {
  const Margins m = margins_of(load_problem(cfg));
  json out = echo(m);
  out["value"] = bekessy_estimate(m);
  return out;
}

json cmd_estimate(const Config& cfg, std::uint64_t seed) {
  require_samples(cfg.samples);
  require_epsilon(cfg.epsilon);
  const Margins m = margins_of(load_problem(cfg));
  json out = echo(m);
  const auto est = mc_estimate_count(m, cfg.samples, seed, mc_options(cfg));
  out.update(io::to_json(est));
  out["epsilon"] = cfg.epsilon;
  out["chebyshev_samples"] = chebyshev_sample_count(est.second_moment_ratio, cfg.epsilon);
  return out;
}

json cmd_weighted(const Config& cfg, std::uint64_t seed) {
  const auto p = load_problem(cfg);
  if (!p.weights) throw ValidationError("weighted needs --weights-file or a \"weights\" field");
  const Margins m = margins_of(p);
  json out = echo(m);
  out["weights"] = *p.weights;
  const std::string method = cfg.method.empty() ? "fy" : cfg.method;
  if (method == "fy") {
    const auto w = ExactWeightMatrix::from_rows(io::to_rationals(*p.weights));
    const Rational v = weighted_fy_count(m, w, cfg.perm_cap);
    out["value"] = to_string(v);
    out["value_float"] = v.get_d();
  } else if (method == "mc") {
    require_samples(cfg.samples);
    const auto w = WeightMatrix::from_rows(io::to_doubles(*p.weights));
    out.update(io::to_json(mc_weighted_count(m, w, cfg.samples, seed, mc_options(cfg))));
  } else {
    throw ValidationError("unknown --method '" + method + "' (expected fy or mc)");
  }
  out["method"] = method;
  return out;
}

json cmd_lowrank(const Config& cfg, std::uint64_t seed, bool zero_one) {
  require_epsilon(cfg.epsilon);
  const auto p = load_problem(cfg);
  const Margins m = margins_of(p);
  json out = echo(m);
  out["epsilon"] = cfg.epsilon;
  LowRankEstimate est;
  if (p.weights) {
    if (zero_one) throw ValidationError("lowrank01 does not take weights");
    Weighting weighting;
    if (cfg.weighting == "plain") {
      weighting = Weighting::plain;
    } else if (cfg.weighting == "fisher-yates") {
      weighting = Weighting::fisher_yates;
    } else {
      throw ValidationError("unknown --weighting '" + cfg.weighting + "'");
    }
    const auto w = WeightMatrix::from_rows(io::to_doubles(*p.weights));
    est = lowrank_weighted_count(m, w, cfg.epsilon, seed, lowrank_options(cfg), weighting);
    out["weights"] = *p.weights;
    out["weighting"] = to_string(weighting);
  } else if (zero_one) {
    est = lowrank_01_count(m, cfg.epsilon, seed, lowrank_options(cfg));
    if (*std::max_element(m.rows().begin(), m.rows().end()) <= m.num_cols()) {
      dump_approximations(cfg, m.rows(), m.num_cols(), seed, SymmetricKind::elementary);
    }
  } else {
    est = lowrank_asymptotic_count(m, cfg.epsilon, seed, lowrank_options(cfg));
    dump_approximations(cfg, m.rows(), m.num_cols(), seed, SymmetricKind::complete);
  }
  out.update(io::to_json(est));
  return out;
}

json cmd_colsets(const Config& cfg, std::uint64_t seed) {
  require_epsilon(cfg.epsilon);
  const auto p = load_problem(cfg, false);
  if (!p.col_sets) throw ValidationError("lowrank-colsets needs --col-sets or a \"col_sets\" field");
  json sets = json::array();
  for (const auto& s : *p.col_sets) sets.push_back(std::vector<unsigned>(s.begin(), s.end()));
  json out = {{"rows", p.rows}, {"col_sets", sets}, {"epsilon", cfg.epsilon}};
  out.update(io::to_json(lowrank_column_sets_count(p.rows, *p.col_sets, cfg.epsilon, seed, lowrank_options(cfg))));
  dump_approximations(cfg, p.rows, p.col_sets->size(), seed, SymmetricKind::complete);
  return out;
}

json cmd_verify(const Config& cfg, std::uint64_t seed) {
  require_epsilon(cfg.epsilon);
  SymmetricKind kind;
  if (cfg.kind == "complete") {
    kind = SymmetricKind::complete;
  } else if (cfg.kind == "elementary") {
    kind = SymmetricKind::elementary;
  } else {
    throw ValidationError("unknown --kind '" + cfg.kind + "'");
  }
  const auto approx = kind == SymmetricKind::complete ? build_h_tilde(cfg.r, cfg.n, cfg.epsilon, seed, cfg.forms)
                                                      : build_e_tilde(cfg.r, cfg.n, cfg.epsilon, seed, cfg.forms);
  const auto poly = expand(approx, cfg.term_cap);
  json out = {{"kind", to_string(kind)}, {"r", cfg.r},   {"n", cfg.n},
              {"epsilon", cfg.epsilon},  {"seed", seed}, {"num_forms", approx.num_samples()}};
  if (kind == SymmetricKind::complete) out["kappa"] = approx.kappa;
  out.update(io::to_json(verify_coefficients(poly, kind, cfg.r, cfg.epsilon, cfg.term_cap)));
  if (!cfg.dump_poly.empty()) write_text_file(cfg.dump_poly, to_text(poly));
  if (!cfg.dump_json.empty()) write_text_file(cfg.dump_json, io::to_json(approx).dump() + "\n");
  return out;
}

json cmd_variance(const Config& cfg, std::uint64_t seed) {
  require_samples(cfg.samples);
  const auto p = load_problem(cfg);
  const Margins m = margins_of(p);
  json out = echo(m);
  if (p.weights) {
    const auto w = WeightMatrix::from_rows(io::to_doubles(*p.weights));
    out.update(io::to_json(weighted_variance_ratio_report(m, w, cfg.samples, seed, mc_options(cfg))));
  } else {
    out.update(io::to_json(variance_ratio_report(m, cfg.samples, seed, mc_options(cfg))));
  }
  return out;
}

json cmd_compare(const Config& cfg, std::uint64_t seed) {
  require_samples(cfg.samples);
  require_epsilon(cfg.epsilon);
  const Margins m = margins_of(load_problem(cfg));
  json out = echo(m);
  json methods = json::array();
  using Clock = std::chrono::steady_clock;
  const auto ms_since = [](Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };

  auto t0 = Clock::now();
  const Integer exact = exact_count_dp(m);
  const double exact_d = exact.get_d();
  methods.push_back({{"method", "exact"}, {"value", exact.get_str()}, {"rel_error", 0.0}, {"elapsed_ms", ms_since(t0)}});

  t0 = Clock::now();
  const double fy = fisher_yates_count(m).get_d();
  methods.push_back(
      {{"method", "fy"}, {"value", fy}, {"rel_error", relative_error(fy, exact_d)}, {"elapsed_ms", ms_since(t0)}});

  t0 = Clock::now();
  const double bk = bekessy_estimate(m);
  methods.push_back({{"method", "bekessy"},
                     {"value", bk},
                     {"rel_error", relative_error(bk, exact_d)},
                     {"elapsed_ms", ms_since(t0)}});

  // The randomized rows may be out of budget; report that instead of failing.
  t0 = Clock::now();
  try {
    const auto est = mc_estimate_count(m, cfg.samples, seed, mc_options(cfg));
    methods.push_back({{"method", "montecarlo"},
                       {"value", est.mean},
                       {"std_err", est.std_err},
                       {"rel_error", relative_error(est.mean, exact_d)},
                       {"elapsed_ms", ms_since(t0)}});
  } catch (const BudgetError& e) {
    methods.push_back({{"method", "montecarlo"}, {"skipped", e.what()}, {"elapsed_ms", ms_since(t0)}});
  }
  t0 = Clock::now();
  try {
    const auto est = lowrank_asymptotic_count(m, cfg.epsilon, seed, lowrank_options(cfg));
    methods.push_back({{"method", "lowrank"},
                       {"value", est.value},
                       {"band", {est.band_lower, est.band_upper}},
                       {"rel_error", relative_error(est.value, exact_d)},
                       {"elapsed_ms", ms_since(t0)}});
  } catch (const BudgetError& e) {
    methods.push_back({{"method", "lowrank"}, {"skipped", e.what()}, {"elapsed_ms", ms_since(t0)}});
  }
  out["methods"] = methods;
  return out;
}

json cmd_permanent(const Config& cfg) {
  if (cfg.matrix_file.empty()) throw ValidationError("permanent needs --matrix-file");
  const auto text = io::read_matrix(cfg.matrix_file);
  json out = {{"matrix", text}};
  if (cfg.method.empty() || cfg.method == "exact") {
    const auto v = permanent_exact(SquareMatrix<Rational>::from_rows(io::to_rationals(text)), cfg.perm_cap);
    out["permanent"] = to_string(v);
  } else if (cfg.method == "float") {
    out["permanent"] = permanent_exact(SquareMatrix<double>::from_rows(io::to_doubles(text)), cfg.perm_cap);
  } else {
    throw ValidationError("unknown --method '" + cfg.method + "' (expected exact or float)");
  }
  return out;
}

std::string scalar_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void print_table(std::ostream& out, const json& report) {
  std::size_t width = 0;
  for (const auto& [key, v] : report.items()) width = std::max(width, key.size());
  for (const auto& [key, v] : report.items()) {
    if (key == "methods") continue;
    out << std::left << std::setw(static_cast<int>(width) + 2) << key << scalar_text(v) << '\n';
  }
  if (report.contains("methods")) {
    out << '\n' << std::left << std::setw(12) << "method" << std::setw(24) << "value" << std::setw(24) << "rel_error"
        << "elapsed_ms\n";
    for (const auto& row : report["methods"]) {
      out << std::setw(12) << row["method"].get<std::string>();
      if (row.contains("skipped")) {
        out << "skipped: " << row["skipped"].get<std::string>() << '\n';
        continue;
      }
      out << std::setw(24) << scalar_text(row["value"]) << std::setw(24) << scalar_text(row["rel_error"])
          << scalar_text(row["elapsed_ms"]) << '\n';
    }
  }
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& env_seed) {
  CLI::App app{"Count contingency tables exactly, by Monte Carlo, or by low-rank approximation", "tablecount"};
  app.require_subcommand(1);
  Config cfg;

  const auto margins_opts = [&](CLI::App* sub) {
    sub->add_option("--rows", cfg.rows, "row sums, comma separated");
    sub->add_option("--cols", cfg.cols, "column sums, comma separated");
    sub->add_option("--margins-file", cfg.margins_file, "margins as .json or .csv");
    sub->add_option("--output", cfg.output, "json or table")->check(CLI::IsMember({"json", "table"}));
  };
  const auto seed_opt = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "64-bit seed (default 1729, or TABLECOUNT_SEED)");
  };
  const auto mc_opts = [&](CLI::App* sub) {
    seed_opt(sub);
    sub->add_option("--samples", cfg.samples, "Monte Carlo samples")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker threads, 0 = all cores")->capture_default_str();
    sub->add_option("--perm-cap", cfg.perm_cap, "largest permanent size")->capture_default_str();
  };
  const auto lowrank_opts = [&](CLI::App* sub) {
    seed_opt(sub);
    sub->add_option("--epsilon", cfg.epsilon, "approximation parameter in (0,1)")->capture_default_str();
    sub->add_option("--repeats", cfg.repeats, "independent repeats, median returned")->capture_default_str();
    sub->add_option("--m", cfg.forms, "forms per approximation (default: Azuma bound)");
    sub->add_option("--term-cap", cfg.term_cap, "polynomial term budget")->capture_default_str();
    sub->add_option("--route", cfg.route, "automatic, reduced or direct")->capture_default_str();
    sub->add_option("--dump-poly", cfg.dump_poly, "write expanded approximations as canonical text");
  };

  auto* count = app.add_subcommand("count", "exact number of tables");
  margins_opts(count);
  count->add_option("--method", cfg.method, "dp or bruteforce");
  auto* count01 = app.add_subcommand("count01", "exact number of 0-1 tables");
  margins_opts(count01);
  auto* fy = app.add_subcommand("fy", "Fisher-Yates weighted count N!/(prod r! prod c!)");
  margins_opts(fy);
  auto* bekessy = app.add_subcommand("bekessy", "asymptotic formula for tables with small margins");
  margins_opts(bekessy);
  auto* estimate = app.add_subcommand("estimate", "unbiased Monte Carlo estimate from block-matrix permanents");
  margins_opts(estimate);
  mc_opts(estimate);
  estimate->add_option("--epsilon", cfg.epsilon, "target relative error for the Chebyshev sample count")
      ->capture_default_str();
  auto* weighted = app.add_subcommand("weighted", "weighted counts: exact Fisher-Yates (fy) or Monte Carlo (mc)");
  margins_opts(weighted);
  mc_opts(weighted);
  weighted->add_option("--weights-file", cfg.weights_file, "weight matrix as .csv or .json");
  weighted->add_option("--method", cfg.method, "fy or mc");
  auto* lowrank = app.add_subcommand("lowrank", "low-rank asymptotic count");
  margins_opts(lowrank);
  lowrank_opts(lowrank);
  lowrank->add_option("--weights-file", cfg.weights_file, "low-rank weight matrix");
  lowrank->add_option("--weighting", cfg.weighting, "plain or fisher-yates")->capture_default_str();
  auto* lowrank01 = app.add_subcommand("lowrank01", "low-rank asymptotic count of 0-1 tables");
  margins_opts(lowrank01);
  lowrank_opts(lowrank01);
  auto* colsets = app.add_subcommand("lowrank-colsets", "tables whose column sums lie in given sets");
  margins_opts(colsets);
  lowrank_opts(colsets);
  colsets->add_option("--col-sets", cfg.col_sets, "sets split by ';', e.g. 0-2;1,3;2");
  auto* verify = app.add_subcommand("verify-coeffs", "build an approximation and check every coefficient");
  lowrank_opts(verify);
  verify->add_option("--kind", cfg.kind, "complete or elementary")->capture_default_str();
  verify->add_option("--r", cfg.r, "degree")->capture_default_str();
  verify->add_option("--n", cfg.n, "number of variables")->capture_default_str();
  verify->add_option("--dump-json", cfg.dump_json, "write the approximation as JSON");
  verify->add_option("--output", cfg.output, "json or table")->check(CLI::IsMember({"json", "table"}));
  auto* variance = app.add_subcommand("variance", "second-moment ratio against its bounds");
  margins_opts(variance);
  mc_opts(variance);
  variance->add_option("--weights-file", cfg.weights_file, "optional weight matrix");
  auto* compare = app.add_subcommand("compare", "exact, closed-form and randomized methods side by side");
  margins_opts(compare);
  mc_opts(compare);
  compare->add_option("--epsilon", cfg.epsilon, "low-rank approximation parameter")->capture_default_str();
  compare->add_option("--m", cfg.forms, "forms per approximation for the low-rank row");
  compare->add_option("--term-cap", cfg.term_cap, "polynomial term budget")->capture_default_str();
  auto* perm = app.add_subcommand("permanent", "permanent of a square matrix");
  perm->add_option("--matrix-file", cfg.matrix_file, "matrix as .csv or .json");
  perm->add_option("--method", cfg.method, "exact or float");
  perm->add_option("--perm-cap", cfg.perm_cap, "largest permanent size")->capture_default_str();
  perm->add_option("--output", cfg.output, "json or table")->check(CLI::IsMember({"json", "table"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kValidation;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    const std::uint64_t seed = resolve_seed(cfg, env_seed);
    const std::string name = app.get_subcommands().front()->get_name();
    json report;
    if (name == "count") {
      report = cmd_count(cfg, false);
    } else if (name == "count01") {
      report = cmd_count(cfg, true);
    } else if (name == "fy") {
      report = cmd_fy(cfg);
    } else if (name == "bekessy") {
      report = cmd_bekessy(cfg);
    } else if (name == "estimate") {
      report = cmd_estimate(cfg, seed);
    } else if (name == "weighted") {
      report = cmd_weighted(cfg, seed);
    } else if (name == "lowrank") {
      report = cmd_lowrank(cfg, seed, false);
    } else if (name == "lowrank01") {
      report = cmd_lowrank(cfg, seed, true);
    } else if (name == "lowrank-colsets") {
      report = cmd_colsets(cfg, seed);
    } else if (name == "verify-coeffs") {
      report = cmd_verify(cfg, seed);
    } else if (name == "variance") {
      report = cmd_variance(cfg, seed);
    } else if (name == "compare") {
      report = cmd_compare(cfg, seed);
    } else {
      report = cmd_permanent(cfg);
    }
    report["command"] = name;
    if (!report.contains("seed") && name != "count" && name != "count01" && name != "fy" && name != "bekessy" &&
        name != "permanent") {
      report["seed"] = seed;
    }
    report["elapsed_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (cfg.output == "table") {
      print_table(out, report);
    } else {
      out << report.dump() << '\n';
    }
    return kOk;
  } catch (const ValidationError& e) {
    report_error(err, "validation", e.what());
    return kValidation;
  } catch (const BudgetError& e) {
    report_error(err, "budget", e.what());
    return kBudget;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return kInternal;
  }
}

}  // namespace tablecount::cli
