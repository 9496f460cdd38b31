// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "unruh/channelsim.hpp"
#include "unruh/regions.hpp"

using namespace unruh;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Matrix-built Unruh blocks reproduce the closed-form cloner spectrum.
Verdict block_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int d = 2; d <= 4; ++d) {
    for (int k = 1; k <= 5; ++k) {
      const auto rep = verify_cloner_equivalence(d, k, 20, 1000u * d + k);
      worst = std::max(worst, rep.spectral_deviation);
    }
  }
  const double t = seconds_since(t0);
  return {worst < 1e-9 && t < 30.0, "max deviation " + num(worst) + ", " + num(t) + " s"};
}

// 2. Rank-one Kraus set of the 1 -> 2 complement.
Verdict kraus_set() {
  const auto t0 = std::chrono::steady_clock::now();
  double completeness = 0.0, action = 0.0, second = 0.0;
  for (int d = 2; d <= 5; ++d) {
    const auto rep = verify_kraus(complementary_kraus_1to2(d), d, 100, 17u * d);
    completeness = std::max(completeness, rep.completeness_deviation);
    action = std::max(action, rep.action_deviation);
    second = std::max(second, rep.max_second_singular_value);
  }
  const double t = seconds_since(t0);
  return {completeness < 1e-10 && action < 1e-9 && second < 1e-10 && t < 60.0,
          "completeness " + num(completeness) + ", action " + num(action) + ", second singular value " +
              num(second) + ", " + num(t) + " s"};
}

// 3. Truncated block weights keep all but eps of the mass.
Verdict weight_normalization() {
  double worst = 1.0;
  for (int d : {2, 3, 5}) {
    for (double z : {0.25, 0.5, 0.75}) {
      const UnruhConfig cfg{d, z};
      const auto w = unruh_weights(cfg, truncation_horizon(cfg));
      double s = 0.0;
      for (double x : w) s += x;
      worst = std::min(worst, s);
    }
  }
  return {worst >= 1.0 - 1e-8, "min truncated mass 1 - " + num(1.0 - worst)};
}

// 4. z = 0 reproduces the identity channel.
Verdict noiseless_limits() {
  double worst = 0.0;
  const auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  std::mt19937_64 rng(4);
  for (int d = 2; d <= 5; ++d) {
    const ChannelModel model = ChannelModel::unruh({d, 0.0});
    const auto grid = sweep_lattice(model, default_grid(d));
    const auto cq = cq_samples(model, grid);
    const auto boundary = boundary_polyline(cq, YSense::Maximize);
    if (boundary.size() != 2) worst = std::max(worst, 1.0);
    track(boundary.front().x, 0.0);
    track(boundary.front().y, 1.0);
    track(boundary.back().x, 1.0);
    track(boundary.back().y, 0.0);
    for (const RegionSample& s : cq) worst = std::max(worst, s.rates[0] + s.rates[1] - 1.0);

    const auto uniform = evaluate(model, EnsembleParams::uniform(d));
    const RatePair ce = ce_point(uniform.weighted);
    track(ce.x, 2.0);
    track(ce.y, 1.0);
    const CqeBounds b = cqe_bounds(uniform.weighted);
    track(b.b1, 2.0);
    track(b.b2, 1.0);
    track(b.b3, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      const EnsembleParams nu = testing_support::random_ensemble(d, rng);
      const RpsBounds r = rps_bounds(UnruhConfig{d, 0.0}, nu);
      track(r.rp, 1.0);
      track(r.ps, ensemble_conditional_entropy_A(nu, d).value);
      track(r.rps, 1.0);
    }
  }
  return {worst <= 1e-12, "max deviation " + num(worst)};
}

struct Gaps {
  double cq = 0.0, ce = 0.0, cq_relative = 0.0, ce_relative = 0.0;
};

Gaps boundary_gaps(int d, int k) {
  const ChannelModel model = ChannelModel::cloner(d, k);
  const auto grid = sweep_lattice(model, default_grid(d));
  const auto cq = boundary_polyline(cq_samples(model, grid), YSense::Maximize);
  const auto ce = boundary_polyline(ce_samples(model, grid), YSense::Minimize);
  Gaps g;
  g.cq = time_sharing_gap(cq, YSense::Maximize);
  g.ce = time_sharing_gap(ce, YSense::Minimize);
  g.cq_relative = g.cq / (0.5 * (cq.front().y + cq.back().y));
  g.ce_relative = g.ce / (0.5 * (ce.front().y + ce.back().y));
  return g;
}

// 5. Boundaries beat time-sharing, by more as k grows.
Verdict beats_time_sharing(std::string& info) {
  Verdict v;
  std::ostringstream detail, relative, broken;
  bool relative_monotone = true;
  for (int d : {2, 5}) {
    Gaps prev{-1.0, -1.0, -1.0, -1.0};
    for (int k : {2, 5, 10}) {
      const Gaps g = boundary_gaps(d, k);
      const bool listed = !(d == 5 && k == 2);
      if (listed && (g.cq <= 1e-3 || g.ce <= 1e-3)) v.pass = false;
      if (g.cq < prev.cq || g.ce < prev.ce) {
        v.pass = false;
        broken << " d=" << d << (g.cq < prev.cq ? " cq" : " ce") << " drops at k=" << k << ";";
      }
      if (g.cq_relative < prev.cq_relative || g.ce_relative < prev.ce_relative) relative_monotone = false;
      detail << " (" << d << "," << k << ") cq " << num(g.cq) << " ce " << num(g.ce) << ";";
      relative << " (" << d << "," << k << ") cq " << num(g.cq_relative) << " ce " << num(g.ce_relative) << ";";
      prev = g;
    }
  }
  v.detail = "gap above chord midpoint:" + detail.str();
  if (!broken.str().empty()) v.detail += " non-monotone:" + broken.str();
  info = std::string(relative_monotone ? "monotone" : "not monotone") + " relative gap (gap / chord ordinate):" +
         relative.str();
  return v;
}

// 6. Spectral mass identities and the b1 - b3 identity on sweeps.
Verdict entropy_identities() {
  std::mt19937_64 rng(6);
  double mass = 0.0;
  for (int d = 2; d <= 5; ++d) {
    for (int k = 1; k <= 8; ++k) {
      for (int trial = 0; trial < 100; ++trial) {
        const EnsembleParams mu = testing_support::random_ensemble(d, rng);
        mass = std::max(mass, std::abs(ensemble_spectrum_B(d, k, mu).mass() - 1.0));
        mass = std::max(mass, std::abs(ensemble_spectrum_E(d, k, mu).mass() - 1.0));
      }
    }
  }
  double identity = 0.0;
  std::size_t points = 0;
  const auto audit = [&](const ChannelModel& model, int n) {
    for (const GridPoint& g : sweep_lattice(model, n)) {
      const CqeBounds b = cqe_bounds(g.entropies.weighted);
      identity = std::max(identity, std::abs(b.b1 - b.b3 - g.entropies.weighted.h_A_given_X));
      ++points;
    }
  };
  for (int d : {2, 3}) {
    for (double z : {0.0, 0.25, 0.5, 0.75}) audit(ChannelModel::unruh({d, z}), default_grid(d));
  }
  for (int d = 2; d <= 5; ++d) {
    for (int k : {1, 2, 5, 10}) audit(ChannelModel::cloner(d, k), d <= 3 ? 32 : 8);
  }
  return {mass <= 1e-12 && identity <= 1e-12, "max mass deviation " + num(mass) + ", max identity deviation " +
                                                 num(identity) + " over " + std::to_string(points) + " sweep points"};
}

// 7. The optimizer's value dominates the objective at every grid ensemble.
Verdict supporting_hyperplanes() {
  std::mt19937_64 rng(7);
  double violation = 0.0;
  int solves = 0;
  for (int d : {2, 3}) {
    for (double z : {0.25, 0.75}) {
      const DynamicCapacitySolver solver(ChannelModel::unruh({d, z}));
      for (int pair = 0; pair < 20; ++pair) {
        const CapacityWeights w{2.0 * testing_support::uniform01(rng), 2.0 * testing_support::uniform01(rng)};
        const auto r = solver.solve(w);
        for (const GridPoint& g : solver.grid()) {
          violation = std::max(violation, dynamic_objective(g.entropies.weighted, w) - r.value);
        }
        ++solves;
      }
    }
  }
  return {violation <= 1e-9, std::to_string(solves) + " solves, max violation " + num(violation)};
}

// 8. The complementary Choi matrix stays positive under partial transpose.
Verdict ppt_witness() {
  double lowest = 1.0;
  for (int d : {2, 3}) {
    for (int k : {2, 3, 4}) lowest = std::min(lowest, choi_ppt_check(d, k).min_partial_transpose_eigenvalue);
  }
  return {lowest >= -1e-9, "min partial-transpose eigenvalue " + num(lowest)};
}

struct Capture {
  int status = -1;
  std::string out;
};

Capture run_binary(const std::string& args) {
  const std::string cmd = std::string(UNRUH_CLI_PATH) + " " + args + " 2>&1";
  Capture c;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return c;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) c.out.append(buf, n);
  const int raw = pclose(pipe);
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return c;
}

// 9. Identical configurations give byte-identical output.
Verdict determinism() {
  const std::vector<std::string> runs{
      "spectrum --d 3 --k 4",
      "cq-curve --d 2 --z 0.5",
      "ce-curve --d 3 --k 3 --format json",
      "cqe-region --d 3 --z 0.25 --grid 16",
      "rps-region --d 2 --z 0.75",
      "dyncap --d 2 --z 0.5 --lambda 0.5 --mu-weight 0.5",
      "verify hadamard --d 3 --seed 11",
      "verify cloner-equivalence --d 3 --k 3 --seed 5",
      "verify ppt --d 2 --k 3",
  };
  Verdict v;
  std::string mismatched;
  for (const std::string& args : runs) {
    const Capture a = run_binary(args);
    const Capture b = run_binary(args);
    if (a.status != 0 || b.status != 0 || a.out != b.out || a.out.empty()) {
      v.pass = false;
      mismatched += " [" + args + "]";
    }
  }
  v.detail = std::to_string(runs.size()) + " subcommands run twice" +
             (mismatched.empty() ? std::string(", all identical") : ", differing:" + mismatched);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  };
  std::string gap_info;
  const std::vector<Criterion> criteria{
      {"1 block/cloner spectral equivalence", block_equivalence},
      {"2 complementary Kraus set", kraus_set},
      {"3 weight normalization", weight_normalization},
      {"4 noiseless limits", noiseless_limits},
      {"5 trade-off beats time-sharing", [&] { return beats_time_sharing(gap_info); }},
      {"6 entropy identities", entropy_identities},
      {"7 supporting hyperplanes", supporting_hyperplanes},
      {"8 PPT witness", ppt_witness},
      {"9 determinism", determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << ": " << v.detail << std::endl;
    if (!gap_info.empty()) {
      std::cout << "INFO " << gap_info << std::endl;
      gap_info.clear();
    }
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
