#pragma once

// Command-line front end. Parsing produces a RunConfig; run() executes it
// and writes CSV or JSON. Numbers are printed at 12 significant digits so
// fixtures diff cleanly across runs and worker counts.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "unruh/channelsim.hpp"
#include "unruh/error.hpp"
#include "unruh/model.hpp"
#include "unruh/regions.hpp"
#include "unruh/spectra.hpp"

namespace unruh::cli {

inline constexpr const char* kToolVersion = "unruh-capacity 0.1.0";

enum class Format { Csv, Json };

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsage = 2, kNumericGuard = 3 };

struct RunConfig {
  std::string command;  // "spectrum", "cq-curve", ..., "verify hadamard"
  int d = 2;
  std::optional<int> k;
  std::optional<double> z;
  int grid = 0;  // 0: default_grid(d)
  double truncation_eps = 1e-8;
  double log_base = 0.0;  // 0: d
  std::uint64_t seed = 0;
  std::string output;  // empty: stdout
  Format format = Format::Csv;
  double lambda = 0.0;
  double mu_weight = 0.0;
  int samples = 0;  // 0: per-check default

  double base() const { return log_base > 0.0 ? log_base : static_cast<double>(d); }
  int resolved_grid() const { return grid > 0 ? grid : default_grid(d); }
  UnruhConfig unruh() const { return {d, *z, truncation_eps, log_base}; }
  ChannelModel model() const { return z ? ChannelModel::unruh(unruh()) : ChannelModel::cloner(d, *k, log_base); }
};

/// Thrown for configurations that parse but are not meaningful.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// %.12g, with negative zero printed as 0.
inline std::string fmt(double x) {
  if (x == 0.0) x = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// The value that fmt() prints, as a double, for JSON emission.
inline double rounded(double x) { return std::strtod(fmt(x).c_str(), nullptr); }

namespace detail {

inline void require_mode(const RunConfig& c, bool k_allowed, bool z_allowed) {
  if (c.k && c.z) throw UsageError("pass exactly one of --k or --z");
  if (!c.k && !c.z) {
    if (k_allowed && z_allowed) throw UsageError("one of --k or --z is required");
    throw UsageError(k_allowed ? "--k is required" : "--z is required");
  }
  if (c.k && !k_allowed) throw UsageError("--k is not accepted by " + c.command);
  if (c.z && !z_allowed) throw UsageError("--z is not accepted by " + c.command);
}

inline void validate(const RunConfig& c) {
  if (c.d < 2) throw UsageError("--d must be >= 2");
  if (c.k && *c.k < 1) throw UsageError("--k must be >= 1");
  if (c.z && !(*c.z >= 0.0 && *c.z < 1.0)) throw UsageError("--z must lie in [0, 1)");
  if (c.grid < 0) throw UsageError("--grid must be >= 1");
  if (!(c.truncation_eps > 0.0 && c.truncation_eps < 1.0)) throw UsageError("--eps must lie in (0, 1)");
  if (c.log_base != 0.0 && !(c.log_base > 1.0)) throw UsageError("--log-base must be > 1");
  if (c.lambda < 0.0 || c.mu_weight < 0.0) throw UsageError("--lambda and --mu-weight must be >= 0");
  if (c.samples < 0) throw UsageError("--samples must be >= 1");

  const std::string& cmd = c.command;
  if (cmd == "spectrum" || cmd == "verify cloner-equivalence" || cmd == "verify ppt") {
    require_mode(c, true, false);
  } else if (cmd == "verify hadamard") {
    if (c.k || c.z) throw UsageError("verify hadamard takes only --d");
  } else {
    require_mode(c, true, true);
  }
}

/// Header lines shared by every output.
struct Meta {
  std::vector<std::pair<std::string, std::string>> fields;

  void add(const std::string& key, const std::string& value) { fields.emplace_back(key, value); }

  void write_csv(std::ostream& os) const {
    for (const auto& [k, v] : fields) os << "# " << k << ": " << v << '\n';
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : fields) j[k] = v;
    return j;
  }
};

inline Meta make_meta(const RunConfig& c, std::optional<int> horizon) {
  Meta m;
  m.add("tool", kToolVersion);
  m.add("command", c.command);
  m.add("d", std::to_string(c.d));
  if (c.k) m.add("k", std::to_string(*c.k));
  if (c.z) m.add("z", fmt(*c.z));
  m.add("log_base", fmt(c.base()));
  m.add("truncation_eps", fmt(c.truncation_eps));
  if (horizon) m.add("K", std::to_string(*horizon));
  m.add("seed", std::to_string(c.seed));
  return m;
}

inline std::vector<std::string> mu_columns(int d, const char* prefix) {
  std::vector<std::string> cols;
  for (int i = 1; i < d; ++i) cols.push_back(std::string(prefix) + std::to_string(i));
  return cols;
}

inline nlohmann::ordered_json json_reals(std::span<const double> xs) {
  auto arr = nlohmann::ordered_json::array();
  for (double x : xs) arr.push_back(rounded(x));
  return arr;
}

/// Rows of a table; every cell is pre-formatted text, numbers also kept for
/// JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::ordered_json>> rows;

  void write(std::ostream& os, const Meta& meta, Format format) const {
    if (format == Format::Csv) {
      meta.write_csv(os);
      for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
      os << '\n';
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          os << (i ? "," : "");
          const auto& cell = row[i];
          if (cell.is_number_float()) {
            os << fmt(cell.get<double>());
          } else if (cell.is_string()) {
            os << cell.get<std::string>();
          } else if (cell.is_boolean()) {
            os << (cell.get<bool>() ? 1 : 0);
          } else {
            os << cell.dump();
          }
        }
        os << '\n';
      }
      return;
    }
    nlohmann::ordered_json j;
    j["meta"] = meta.to_json();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < row.size(); ++i) {
        obj[columns[i]] = row[i].is_number_float() ? nlohmann::ordered_json(rounded(row[i].get<double>())) : row[i];
      }
      arr.push_back(std::move(obj));
    }
    j["rows"] = std::move(arr);
    os << j.dump(2) << '\n';
  }
};

inline void push_mu(std::vector<nlohmann::ordered_json>& row, const EnsembleParams& mu) {
  for (std::size_t i = 0; i + 1 < mu.weights().size(); ++i) row.emplace_back(mu[i]);
}

// ---------------------------------------------------------------------------
// subcommands

inline int run_spectrum(const RunConfig& c, std::ostream& os) {
  const Spectrum s = cloner_spectrum(c.d, *c.k);
  Table t{{"b", "eigenvalue", "multiplicity"}, {}};
  int b = 1;
  for (const Atom& a : s.atoms()) {
    t.rows.push_back({b++, a.probability, a.multiplicity});
  }
  Meta meta = make_meta(c, std::nullopt);
  meta.add("M", std::to_string(block_normalizer(c.d, *c.k)));
  t.write(os, meta, c.format);
  return kOk;
}

inline int run_curve(const RunConfig& c, std::ostream& os, bool ce) {
  const ChannelModel model = c.model();
  const int grid = c.resolved_grid();
  const auto points = sweep_lattice(model, grid);
  const auto samples = ce ? ce_samples(model, points) : cq_samples(model, points);
  const YSense sense = ce ? YSense::Minimize : YSense::Maximize;
  std::vector<RatePair> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) pts.push_back({s.rates[0], s.rates[1]});
  const auto hull = pareto_hull_indices(pts, sense);

  const auto near_hull = [&](const RatePair& p) {
    for (std::size_t h : hull) {
      if (std::abs(p.x - pts[h].x) <= 1e-12 && std::abs(p.y - pts[h].y) <= 1e-12) return true;
    }
    return false;
  };

  Table t{mu_columns(c.d, "mu_"), {}};
  t.columns.insert(t.columns.end(), {"rate_x", "rate_y", "on_hull"});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<nlohmann::ordered_json> row;
    push_mu(row, samples[i].ensemble);
    row.emplace_back(pts[i].x);
    row.emplace_back(pts[i].y);
    row.emplace_back(near_hull(pts[i]));
    t.rows.push_back(std::move(row));
  }
  Meta meta = make_meta(c, model.horizon());
  meta.add("grid", std::to_string(grid));
  meta.add("rate_x", "C");
  meta.add("rate_y", ce ? "E (entanglement consumed)" : "Q");
  t.write(os, meta, c.format);
  return kOk;
}

inline std::string ray_text(const std::array<double, 3>& r) {
  return "(" + fmt(r[0]) + "," + fmt(r[1]) + "," + fmt(r[2]) + ")";
}

inline int run_cqe(const RunConfig& c, std::ostream& os) {
  const ChannelModel model = c.model();
  const int grid = c.resolved_grid();
  const auto corners = region_surface_cqe(model, sweep_lattice(model, grid));
  Table t{mu_columns(c.d, "mu_"), {}};
  t.columns.insert(t.columns.end(), {"kind", "C", "Q", "E", "b1", "b2", "b3"});
  for (const CqeCorner& k : corners) {
    std::vector<nlohmann::ordered_json> row;
    push_mu(row, k.ensemble);
    row.emplace_back(k.kind);
    for (double x : k.point) row.emplace_back(x);
    row.emplace_back(k.bounds.b1);
    row.emplace_back(k.bounds.b2);
    row.emplace_back(k.bounds.b3);
    t.rows.push_back(std::move(row));
  }
  Meta meta = make_meta(c, model.horizon());
  meta.add("grid", std::to_string(grid));
  meta.add("constraints", "C+2Q<=b1, Q+E<=b2, C+Q+E<=b3; E<0 means entanglement consumed");
  meta.add("apex", "(b3-b2, (b2+b1-b3)/2, (b2-b1+b3)/2)");
  meta.add("ray_tp", ray_text(kTeleportationRay));
  meta.add("ray_sd", ray_text(kSuperDenseRay));
  meta.add("ray_ed", ray_text(kEntanglementDistributionRay));
  t.write(os, meta, c.format);
  return kOk;
}

inline int run_rps(const RunConfig& c, std::ostream& os) {
  const ChannelModel model = c.model();
  const int grid = c.resolved_grid();
  const auto points = sweep_lattice(model, grid);
  Table t{mu_columns(c.d, "nu_"), {}};
  t.columns.insert(t.columns.end(), {"rp", "ps", "rps"});
  for (const GridPoint& g : points) {
    const RpsBounds b = rps_bounds(g.entropies);
    std::vector<nlohmann::ordered_json> row;
    push_mu(row, g.ensemble);
    row.emplace_back(b.rp);
    row.emplace_back(b.ps);
    row.emplace_back(b.rps);
    t.rows.push_back(std::move(row));
  }
  Meta meta = make_meta(c, model.horizon());
  meta.add("grid", std::to_string(grid));
  meta.add("constraints", "R+P<=rp, P+S<=ps, R+P+S<=rps");
  t.write(os, meta, c.format);
  return kOk;
}

inline int run_dyncap(const RunConfig& c, std::ostream& os) {
  OptimizerOptions opts;
  opts.grid = c.resolved_grid();
  const DynamicCapacitySolver solver(c.model(), opts);
  const DynamicCapacityResult r = solver.solve({c.lambda, c.mu_weight});
  Meta meta = make_meta(c, solver.model().horizon());
  meta.add("grid", std::to_string(opts.grid));
  meta.add("lambda", fmt(c.lambda));
  meta.add("mu_weight", fmt(c.mu_weight));
  if (c.format == Format::Json) {
    nlohmann::ordered_json j;
    j["meta"] = meta.to_json();
    j["value"] = rounded(r.value);
    j["argmax"] = json_reals(r.argmax.weights());
    j["grid_value"] = rounded(r.grid_value);
    j["grid_argmax"] = json_reals(r.grid_argmax.weights());
    j["iterations"] = r.iterations;
    j["evaluations"] = r.evaluations;
    os << j.dump(2) << '\n';
    return kOk;
  }
  Table t{mu_columns(c.d, "mu_"), {}};
  t.columns.insert(t.columns.begin(), "value");
  t.columns.push_back("grid_value");
  std::vector<nlohmann::ordered_json> row{r.value};
  push_mu(row, r.argmax);
  row.emplace_back(r.grid_value);
  t.rows.push_back(std::move(row));
  t.write(os, meta, c.format);
  return kOk;
}

/// JSON report common to the verify subcommands.
struct VerificationReport {
  std::string check;
  int d = 2;
  std::optional<int> k;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> deviations;  // name -> value
  std::vector<std::pair<std::string, double>> tolerances;  // same names
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool pass() const {
    for (std::size_t i = 0; i < deviations.size(); ++i) {
      if (!(deviations[i].second < tolerances[i].second)) return false;
    }
    return true;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = kToolVersion;
    j["check"] = check;
    j["d"] = d;
    if (k) j["k"] = *k;
    j["seed"] = seed;
    for (const auto& [key, v] : extra.items()) j[key] = v;
    auto devs = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < deviations.size(); ++i) {
      devs[deviations[i].first] = {{"value", deviations[i].second}, {"tolerance", tolerances[i].second}};
    }
    j["deviations"] = std::move(devs);
    j["pass"] = pass();
    return j;
  }
};

inline int emit_report(const VerificationReport& rep, std::ostream& os) {
  // deviations are printed in %.3e style: exact digits of round-off noise
  // are platform dependent, the pass/fail verdict is what matters
  nlohmann::ordered_json j = rep.to_json();
  for (auto& [name, entry] : j["deviations"].items()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", entry["value"].get<double>());
    entry["value"] = std::strtod(buf, nullptr);
  }
  os << j.dump(2) << '\n';
  return rep.pass() ? kOk : kVerificationFailed;
}

inline int run_verify_hadamard(const RunConfig& c, std::ostream& os) {
  const int samples = c.samples > 0 ? c.samples : 100;
  const KrausReport r = verify_kraus(complementary_kraus_1to2(c.d), c.d, samples, c.seed);
  VerificationReport rep;
  rep.check = "hadamard";
  rep.d = c.d;
  rep.seed = c.seed;
  rep.extra["samples"] = samples;
  rep.extra["kraus_operators"] = r.operator_count;
  rep.deviations = {{"completeness", r.completeness_deviation},
                    {"channel_action", r.action_deviation},
                    {"second_singular_value", r.max_second_singular_value}};
  rep.tolerances = {{"completeness", 1e-10}, {"channel_action", 1e-9}, {"second_singular_value", 1e-10}};
  return emit_report(rep, os);
}

inline int run_verify_equivalence(const RunConfig& c, std::ostream& os) {
  const int samples = c.samples > 0 ? c.samples : 20;
  const EquivalenceReport r = verify_cloner_equivalence(c.d, *c.k, samples, c.seed);
  VerificationReport rep;
  rep.check = "cloner-equivalence";
  rep.d = c.d;
  rep.k = c.k;
  rep.seed = c.seed;
  rep.extra["samples"] = samples;
  rep.deviations = {{"spectrum", r.spectral_deviation}, {"matrix", r.matrix_deviation}};
  rep.tolerances = {{"spectrum", 1e-9}, {"matrix", 1e-9}};
  return emit_report(rep, os);
}

inline int run_verify_ppt(const RunConfig& c, std::ostream& os) {
  const PptReport r = choi_ppt_check(c.d, *c.k);
  VerificationReport rep;
  rep.check = "ppt";
  rep.d = c.d;
  rep.k = c.k;
  rep.seed = c.seed;
  rep.extra["choi_dim"] = r.choi_dim;
  // reported as the violation below zero
  rep.extra["min_partial_transpose_eigenvalue"] = rounded(r.min_partial_transpose_eigenvalue);
  rep.deviations = {{"negativity", std::max(0.0, -r.min_partial_transpose_eigenvalue)}};
  rep.tolerances = {{"negativity", 1e-9}};
  return emit_report(rep, os);
}

}  // namespace detail

inline int run(const RunConfig& c, std::ostream& os) {
  detail::validate(c);
  const std::string& cmd = c.command;
  if (cmd == "spectrum") return detail::run_spectrum(c, os);
  if (cmd == "cq-curve") return detail::run_curve(c, os, false);
  if (cmd == "ce-curve") return detail::run_curve(c, os, true);
  if (cmd == "cqe-region") return detail::run_cqe(c, os);
  if (cmd == "rps-region") return detail::run_rps(c, os);
  if (cmd == "dyncap") return detail::run_dyncap(c, os);
  if (cmd == "verify hadamard") return detail::run_verify_hadamard(c, os);
  if (cmd == "verify cloner-equivalence") return detail::run_verify_equivalence(c, os);
  if (cmd == "verify ppt") return detail::run_verify_ppt(c, os);
  throw UsageError("unknown command: " + cmd);
}

/// Parses argv into a RunConfig. Returns std::nullopt after printing help.
/// Throws CLI::ParseError or UsageError on bad input.
inline std::optional<RunConfig> parse(int argc, const char* const* argv, std::ostream& help_out) {
  CLI::App app{"Capacity trade-off regions of universal qudit cloners and the qudit Unruh channel",
               "unruh-capacity"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunConfig c;
  std::string format = "csv";
  int k = 0;
  double z = 0.0;

  struct Flags {
    CLI::Option* k = nullptr;
    CLI::Option* z = nullptr;
  };
  std::vector<std::pair<CLI::App*, Flags>> leaves;

  const auto common = [&](CLI::App* sub, bool with_grid, bool with_mode) {
    sub->add_option("--d", c.d, "Qudit dimension (>= 2)")->required();
    Flags f;
    if (with_mode) {
      f.k = sub->add_option("--k", k, "Number of clones (cloner mode)");
      f.z = sub->add_option("--z", z, "Acceleration parameter in [0,1) (Unruh mode)");
      f.k->excludes(f.z);
    }
    if (with_grid) sub->add_option("--grid", c.grid, "Simplex lattice resolution (default 64 for d<=3, else 16)");
    sub->add_option("--log-base", c.log_base, "Logarithm base (default d)");
    sub->add_option("--eps", c.truncation_eps, "Truncation tolerance for the Unruh block series")->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed for randomized checks")->capture_default_str();
    sub->add_option("--output,-o", c.output, "Output file (default stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    leaves.emplace_back(sub, f);
  };

  common(app.add_subcommand("spectrum", "Closed-form 1 -> k cloner output spectrum"), false, true);
  common(app.add_subcommand("cq-curve", "CQ trade-off samples with Pareto-hull flags"), true, true);
  common(app.add_subcommand("ce-curve", "CE trade-off samples with Pareto-hull flags"), true, true);
  common(app.add_subcommand("cqe-region", "CQE corner cloud with protocol rays"), true, true);
  common(app.add_subcommand("rps-region", "Private dynamic region bound triples"), true, true);
  CLI::App* dyn = app.add_subcommand("dyncap", "Maximize the dynamic capacity objective");
  common(dyn, true, true);
  dyn->add_option("--lambda", c.lambda, "Weight of the coherent information term")->capture_default_str();
  dyn->add_option("--mu-weight", c.mu_weight, "Weight of the I(X;B)+I(A>BX) term")->capture_default_str();
  CLI::App* verify = app.add_subcommand("verify", "Matrix-level verification runs");
  verify->require_subcommand(1);
  CLI::App* hadamard = verify->add_subcommand("hadamard", "Rank-one Kraus set of the 1 -> 2 complement");
  common(hadamard, false, false);
  hadamard->add_option("--samples", c.samples, "Random pure inputs (default 100)");
  CLI::App* equiv = verify->add_subcommand("cloner-equivalence", "Unruh block vs cloner output");
  common(equiv, false, true);
  equiv->add_option("--samples", c.samples, "Random pure inputs (default 20)");
  CLI::App* ppt = verify->add_subcommand("ppt", "Partial transpose of the complementary Choi matrix");
  common(ppt, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, help_out, help_out);
    return std::nullopt;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, help_out, help_out);
    return std::nullopt;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, help_out, help_out);
    return std::nullopt;
  }

  // dyncap and verify default to JSON; plain tables default to CSV
  for (const auto& [sub, flags] : leaves) {
    if (!sub->parsed()) continue;
    const bool json_default = sub == dyn || sub->get_parent() == verify;
    const bool format_given = sub->get_option("--format")->count() > 0;
    if (!format_given) format = json_default ? "json" : "csv";
    if (flags.k && flags.k->count()) c.k = k;
    if (flags.z && flags.z->count()) c.z = z;
    c.command = sub->get_parent() == verify ? "verify " + sub->get_name() : sub->get_name();
  }
  c.format = format == "json" ? Format::Json : Format::Csv;
  return c;
}

/// Full process behavior: parse, run, route output, map errors to exit codes.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  std::optional<RunConfig> config;
  try {
    config = parse(argc, argv, out);
    if (!config) return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsage;
  }
  try {
    detail::validate(*config);
    std::ostringstream buffer;
    const int status = run(*config, buffer);
    if (config->output.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(config->output, std::ios::binary | std::ios::trunc);
      if (!file) throw UsageError("cannot open output file: " + config->output);
      file << buffer.str();
    }
    return status;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericGuard& e) {
    nlohmann::ordered_json diag{{"error", "numeric_guard"}, {"kind", e.kind()}, {"message", e.what()}};
    err << diag.dump() << '\n';
    return kNumericGuard;
  }
}

}  // namespace unruh::cli
