#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "htmean/bounds.hpp"
#include "htmean/config.hpp"
#include "htmean/constants.hpp"
#include "htmean/estimators.hpp"
#include "htmean/experiments.hpp"
#include "htmean/space.hpp"

namespace {

using htmean::Config;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitTooFewSamples = 3;
constexpr int kExitAssertFailed = 4;

std::string join17(const htmean::Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += htmean::format_double17(v[i]);
  }
  return out;
}

// One vector per row, comma-separated decimal columns. Exits with row/column
// diagnostics on malformed input.
std::vector<htmean::Vec> read_vectors_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw htmean::ConfigError("cannot open input file: " + path);
  }
  std::vector<htmean::Vec> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    }
    if (blank) continue;
    htmean::Vec row;
    std::size_t pos = 0;
    int col = 0;
    while (pos <= line.size()) {
      ++col;
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      std::string cell = line.substr(pos, comma - pos);
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double val = std::strtod(begin, &end);
      while (end && *end != '\0' &&
             std::isspace(static_cast<unsigned char>(*end))) {
        ++end;
      }
      if (end == begin || *end != '\0') {
        throw htmean::ConfigError(path + ": row " + std::to_string(lineno) +
                                  ", column " + std::to_string(col) +
                                  ": not a number: '" + cell + "'");
      }
      row.push_back(val);
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw htmean::ConfigError(
          path + ": row " + std::to_string(lineno) + " has " +
          std::to_string(row.size()) + " columns, expected " +
          std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw htmean::ConfigError(path + ": no data rows");
  }
  return rows;
}

struct RunFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::string json_out;
  int64_t seed = -1;
  int64_t workers = -1;
  bool paper_scale = false;
  bool print_config = false;
  bool with_assert = false;
  bool timing = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "config file (key=value lines)");
  cmd->add_option("--set", f.sets, "override a config key (KEY=VALUE)")
      ->type_name("KEY=VALUE");
  cmd->add_option("--out", f.out, "output CSV path (default from config)");
  cmd->add_option("--json", f.json_out, "also write a JSON summary here");
  cmd->add_option("--seed", f.seed, "RNG seed (overrides exp.seed)");
  cmd->add_option("--workers", f.workers, "worker threads (0 = auto)");
  cmd->add_flag("--paper-scale", f.paper_scale,
                "use the published experiment scale instead of desk scale");
  cmd->add_flag("--print-config", f.print_config,
                "print the resolved configuration and exit");
  cmd->add_flag("--assert", f.with_assert,
                "exit nonzero if a built-in experiment assertion fails");
  cmd->add_flag("--timing", f.timing, "record wall-clock times in the CSV");
}

Config resolve_config(Config cfg, htmean::ExperimentKind kind,
                      const RunFlags& f) {
  if (!f.config_path.empty()) cfg.apply_file(f.config_path);
  if (f.paper_scale) htmean::apply_paper_scale(kind, cfg);
  for (const std::string& kv : f.sets) cfg.apply_override(kv);
  if (f.seed >= 0 && cfg.has("exp.seed")) cfg.set_int("exp.seed", f.seed);
  if (f.workers >= 0 && cfg.has("exp.workers")) {
    cfg.set_int("exp.workers", f.workers);
  }
  if (f.timing && cfg.has("exp.timing")) cfg.set("exp.timing", "1");
  if (!f.out.empty()) cfg.set("exp.out", f.out);
  if (!f.json_out.empty() && cfg.has("exp.json")) {
    cfg.set("exp.json", f.json_out);
  }
  return cfg;
}

int finish_run(const std::string& name,
               const std::vector<htmean::RunReport>& reports,
               const Config& cfg, const RunFlags& f) {
  htmean::RunReport merged;
  json summaries = json::array();
  for (const htmean::RunReport& r : reports) {
    merged.rows.insert(merged.rows.end(), r.rows.begin(), r.rows.end());
    merged.asserts.insert(merged.asserts.end(), r.asserts.begin(),
                          r.asserts.end());
    summaries.push_back(json::parse(r.summary_json));
  }
  merged.summary_json =
      reports.size() == 1 ? reports.front().summary_json : summaries.dump(2);
  const std::string out = cfg.get("exp.out");
  htmean::write_csv(merged, out);
  if (cfg.has("exp.json") && !cfg.get("exp.json").empty()) {
    std::ofstream js(cfg.get("exp.json"), std::ios::binary);
    if (!js) {
      std::cerr << "error: cannot open " << cfg.get("exp.json") << "\n";
      return kExitBadInput;
    }
    js << merged.summary_json << "\n";
  }
  std::cout << name << ": " << merged.rows.size() << " rows -> " << out
            << "\n";
  bool all_pass = true;
  for (const htmean::AssertResult& a : merged.asserts) {
    std::cout << "  [" << (a.pass ? "PASS" : "FAIL") << "] " << a.name << ": "
              << a.detail << "\n";
    all_pass = all_pass && a.pass;
  }
  if (f.with_assert && !all_pass) return kExitAssertFailed;
  return kExitOk;
}

int run_experiment_cmd(htmean::ExperimentKind kind, const RunFlags& f) {
  Config cfg = resolve_config(htmean::default_config(kind), kind, f);
  if (f.print_config) {
    std::cout << cfg.echo();
    return kExitOk;
  }
  return finish_run(htmean::to_string(kind), {htmean::run_experiment(kind, cfg)},
                    cfg, f);
}

int run_check_cmd(const std::string& which, const RunFlags& f) {
  if (which != "moment" && which != "ville" && which != "both") {
    std::cerr << "error: --kind must be moment|ville|both\n";
    return kExitBadInput;
  }
  // the union schema drives both checks; rows land in one CSV
  Config cfg = resolve_config(htmean::check_config(),
                              htmean::ExperimentKind::MomentCheck, f);
  if (f.print_config) {
    std::cout << cfg.echo();
    return kExitOk;
  }
  std::vector<htmean::RunReport> reports;
  if (which == "moment" || which == "both") {
    reports.push_back(htmean::run_moment_check(cfg));
  }
  if (which == "ville" || which == "both") {
    reports.push_back(htmean::run_ville_check(cfg));
  }
  return finish_run("check", reports, cfg, f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavy-tailed mean estimation in smooth Banach spaces"};
  app.require_subcommand(1);

  // estimate
  std::string est_input;
  double est_lambda = 1.0;
  int64_t est_k = 0;
  std::string est_center = "sample_mean";
  double est_gmom_delta = 1e-4;
  std::string est_space = "euclidean";
  double est_alpha = 2.0;
  CLI::App* est = app.add_subcommand(
      "estimate", "truncated-mean estimate from a CSV of vectors");
  est->add_option("input", est_input, "CSV file, one vector per row")
      ->required();
  est->add_option("--lambda", est_lambda, "truncation level (> 0)");
  est->add_option("--k", est_k, "samples reserved for the center");
  est->add_option("--center", est_center, "zero|sample_mean|gmom");
  est->add_option("--gmom-delta", est_gmom_delta,
                  "block-count confidence for gmom centers");
  est->add_option("--space", est_space, "euclidean|lp");
  est->add_option("--alpha", est_alpha, "lp exponent (alpha >= 2)");

  // bounds
  int64_t b_n = 100;
  int64_t b_k = 0;
  double b_p = 2.0;
  double b_v = 1.0;
  double b_delta = 0.05;
  double b_delta1 = -1.0;
  double b_delta2 = -1.0;
  double b_r = 0.0;
  std::string b_rate = "constant";
  double b_lambda = 0.0;
  double b_rho = 0.0;
  std::string b_space = "euclidean";
  double b_alpha = 2.0;
  bool b_raw = false;
  CLI::App* bnd =
      app.add_subcommand("bounds", "closed-form confidence widths");
  bnd->add_option("--n", b_n, "total sample count");
  bnd->add_option("--k", b_k, "center sample count");
  bnd->add_option("--p", b_p, "moment order in (1,2]");
  bnd->add_option("--v", b_v, "p-th moment bound");
  bnd->add_option("--delta", b_delta, "total failure probability");
  bnd->add_option("--delta1", b_delta1,
                  "explicit estimator share of delta (with --delta2)");
  bnd->add_option("--delta2", b_delta2, "explicit center share of delta");
  bnd->add_option("--r", b_r, "constant center deviation r");
  bnd->add_option("--rate", b_rate, "constant|sample_mean|gmom");
  bnd->add_option("--lambda", b_lambda,
                  "also print the line-crossing width at this level");
  bnd->add_option("--rho", b_rho, "smoothing parameter (0 = 1/beta)");
  bnd->add_option("--space", b_space, "euclidean|lp");
  bnd->add_option("--alpha", b_alpha, "lp exponent");
  bnd->add_flag("--raw", b_raw, "also print the raw-moment (k=0) path");

  // experiment runners
  RunFlags cov_flags, cmp_flags, dist_flags, chk_flags;
  CLI::App* cov = app.add_subcommand(
      "coverage", "empirical coverage of the time-uniform bound");
  add_run_flags(cov, cov_flags);
  CLI::App* cmp =
      app.add_subcommand("compare", "closed-form bound comparison table");
  add_run_flags(cmp, cmp_flags);
  CLI::App* dist = app.add_subcommand(
      "distances", "estimator distance-to-mean distributions");
  add_run_flags(dist, dist_flags);
  CLI::App* chk = app.add_subcommand(
      "check", "moment-inequality and e-process crossing checks");
  std::string chk_kind = "both";
  chk->add_option("--kind", chk_kind, "moment|ville|both");
  add_run_flags(chk, chk_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (est->parsed()) {
      const std::vector<htmean::Vec> rows = read_vectors_csv(est_input);
      const int64_t n = static_cast<int64_t>(rows.size());
      if (n <= est_k) {
        std::cerr << "error: need n > k samples (n=" << n << ", k=" << est_k
                  << ")\n";
        return kExitTooFewSamples;
      }
      const int64_t dim = static_cast<int64_t>(rows.front().size());
      const htmean::SpaceSpec space =
          est_space == "lp" ? htmean::SpaceSpec::lp(est_alpha, dim)
                            : htmean::SpaceSpec::euclidean(dim);
      htmean::EstimatorConfig ec;
      ec.lambda = est_lambda;
      ec.k = est_k;
      ec.center_method = htmean::center_method_from_string(est_center);
      ec.gmom_delta = est_gmom_delta;
      const htmean::TruncatedMeanResult res =
          htmean::truncated_mean(rows, ec, space);
      std::cout << "estimate: " << join17(res.estimate) << "\n"
                << "center: " << join17(res.center) << "\n"
                << "n: " << res.n << "\n"
                << "k: " << res.k << "\n";
      const json j = {{"estimate", res.estimate},
                      {"center", res.center},
                      {"n", res.n},
                      {"k", res.k}};
      std::cout << j.dump() << "\n";
      return kExitOk;
    }
    if (bnd->parsed()) {
      const htmean::SpaceSpec space =
          b_space == "lp" ? htmean::SpaceSpec::lp(b_alpha, 1)
                          : htmean::SpaceSpec::euclidean(1);
      const htmean::MomentAssumption assm{b_p, b_v, true};
      htmean::RateFunction rate;
      if (b_rate == "constant") {
        rate = htmean::RateFunction::constant(b_r);
      } else if (b_rate == "sample_mean") {
        rate = htmean::RateFunction::sample_mean();
      } else if (b_rate == "gmom") {
        rate = htmean::RateFunction::gmom();
      } else {
        std::cerr << "error: --rate must be constant|sample_mean|gmom\n";
        return kExitBadInput;
      }
      htmean::BoundQuery q;
      q.n = b_n;
      q.k = b_k;
      if (b_delta1 >= 0.0) {
        q.delta1 = b_delta1;
        q.delta2 = b_delta2 >= 0.0 ? b_delta2 : 0.0;
      } else {
        q.delta1 = b_delta / 2.0;
        q.delta2 = b_delta / 2.0;
      }
      q.rho = b_rho;
      const double lam = htmean::opt_lambda(q, assm, space, rate);
      const double w = htmean::optimized_width(q, assm, space, rate);
      std::cout << "lambda_opt: " << htmean::format_double17(lam) << "\n"
                << "width: " << htmean::format_double17(w) << "\n";
      if (b_lambda > 0.0) {
        q.lambda = b_lambda;
        std::cout << "width_at_lambda: "
                  << htmean::format_double17(
                         htmean::line_crossing_width(q, assm, space, rate))
                  << "\n";
      }
      if (b_raw) {
        const htmean::MomentAssumption raw{b_p, b_v, false};
        const htmean::LambdaWidth lw =
            htmean::noncentral_opt(b_n, b_delta, raw, space);
        std::cout << "raw_lambda_opt: " << htmean::format_double17(lw.lambda)
                  << "\n"
                  << "raw_width: " << htmean::format_double17(lw.width)
                  << "\n";
      }
      return kExitOk;
    }
    if (cov->parsed()) {
      return run_experiment_cmd(htmean::ExperimentKind::Coverage, cov_flags);
    }
    if (cmp->parsed()) {
      return run_experiment_cmd(htmean::ExperimentKind::BoundCompare,
                                cmp_flags);
    }
    if (dist->parsed()) {
      return run_experiment_cmd(htmean::ExperimentKind::EstDist, dist_flags);
    }
    if (chk->parsed()) {
      return run_check_cmd(chk_kind, chk_flags);
    }
  } catch (const htmean::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  std::cerr << "error: no subcommand\n";
  return kExitUsage;
}
