#pragma once

// The check / psh / hull / approx pipelines behind the discalg tool, with
// their JSON and CSV reports.

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "approx.hpp"
#include "expr.hpp"
#include "grid.hpp"
#include "hull.hpp"
#include "hypotheses.hpp"
#include "levi.hpp"

namespace discalg {

inline constexpr const char* version = "0.1.0";
inline constexpr int schema_version = 1;
inline constexpr int max_degree_limit = 16;

using json = nlohmann::ordered_json;

/// Raised for invalid run configurations; the tool maps it to exit status 2.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct GridSize {
  int n_r;
  int n_theta;
};

struct RunConfig {
  std::string h = "conj(z)";
  std::string R = "0";
  double C = 0.5;
  GridSize grid{64, 256};        // hypotheses, sup norms, modulus, hull graph
  GridSize approx_grid{128, 512}; // density fits
  GridSize psh_grid{32, 128};    // z-grid of the Levi certificates
  GridSize w_grid{8, 32};        // w radii x angles
  std::vector<double> radii{0.5, 0.9, 0.99};
  int dmax = 8;
  std::vector<std::string> targets{"conj(z)"};
  LatticeParams lattice;
  FitMethod method = FitMethod::least_squares;
  double tau = default_tau;
  int lemma_samples = 1000;
  std::uint64_t seed = 42;
  double hull_threshold = 0.99;
  double decay_factor = 1.0 - 1e-3; // approx passes iff final error < decay_factor * first error
  bool timings = false;
};

inline void validate(const RunConfig& c) {
  if (!(c.C > 0.0 && c.C < 1.0)) throw ConfigError("C must lie in (0, 1)");
  if (c.dmax < 1 || c.dmax > max_degree_limit)
    throw ConfigError("dmax must lie in [1, " + std::to_string(max_degree_limit) + "]");
  for (double r : c.radii)
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("every r must lie in (0, 1)");
  for (const GridSize* g : {&c.grid, &c.approx_grid, &c.psh_grid})
    if (g->n_r < 2 || g->n_theta < 8) throw ConfigError("grids need n_r >= 2 and n_theta >= 8");
  if (c.w_grid.n_r < 1 || c.w_grid.n_theta < 8) throw ConfigError("w-grid needs >= 1 radius and >= 8 angles");
  if (c.lattice.z_side < 1 || c.lattice.w_radii < 1 || c.lattice.w_angles < 1 || !(c.lattice.tube >= 0.0))
    throw ConfigError("invalid hull lattice");
  if (!(c.tau > 0.0)) throw ConfigError("tau must be positive");
  if (c.lemma_samples < 1) throw ConfigError("lemma samples must be >= 1");
}

/// "NRxNT" or "AxB" pairs.
inline GridSize parse_grid_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw ConfigError("grid size must look like 64x256, got '" + s + "'");
  try {
    std::size_t used_a = 0, used_b = 0;
    const int a = std::stoi(s.substr(0, x), &used_a);
    const int b = std::stoi(s.substr(x + 1), &used_b);
    if (used_a != x || used_b != s.size() - x - 1) throw std::invalid_argument(s);
    return {a, b};
  } catch (const std::logic_error&) {
    throw ConfigError("grid size must look like 64x256, got '" + s + "'");
  }
}

// ---------------------------------------------------------------------------
// JSON

/// Non-finite values become the strings "inf", "-inf" and "nan".
inline json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline json to_json(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

inline json to_json(const RunConfig& c) {
  json j;
  j["h"] = c.h;
  j["R"] = c.R;
  j["C"] = c.C;
  j["grid"] = {c.grid.n_r, c.grid.n_theta};
  j["approx_grid"] = {c.approx_grid.n_r, c.approx_grid.n_theta};
  j["psh_grid"] = {c.psh_grid.n_r, c.psh_grid.n_theta};
  j["w_grid"] = {c.w_grid.n_r, c.w_grid.n_theta};
  j["r"] = c.radii;
  j["dmax"] = c.dmax;
  j["targets"] = c.targets;
  j["lattice"] = {{"z_side", c.lattice.z_side},
                  {"w_radii", c.lattice.w_radii},
                  {"w_angles", c.lattice.w_angles},
                  {"tube", c.lattice.tube}};
  j["method"] = to_string(c.method);
  j["tau"] = c.tau;
  j["lemma_samples"] = c.lemma_samples;
  j["seed"] = c.seed;
  return j;
}

inline json to_json(const HypothesisReport& h) {
  json j;
  j["harmonicity"] = {{"residual", num(h.harmonicity_residual)},
                      {"threshold", h.harmonicity_threshold},
                      {"harmonic", h.harmonic}};
  j["condition_a"] = {{"kind", "evidence, not proof"},
                      {"near_critical_fraction", num(h.condition_a.near_critical_fraction)},
                      {"tau", h.condition_a.tau},
                      {"threshold", h.condition_a.threshold},
                      {"pass", h.condition_a.pass}};
  j["condition_b"] = {{"max_ratio", num(h.condition_b.max_ratio)},
                      {"minimal_C", num(h.condition_b.minimal_C)},
                      {"C", h.condition_b.C},
                      {"worst_point", to_json(h.condition_b.worst_point)},
                      {"pass", h.condition_b.pass}};
  j["grid"] = {{"n_r", h.n_r}, {"n_theta", h.n_theta}, {"spacing", h.spacing}};
  j["M"] = num(h.M);
  j["delta0"] = num(h.delta0);
  j["pass"] = h.pass();
  return j;
}

inline json to_json(const LeviReport& l) {
  json j;
  j["r"] = l.r;
  j["polydisc"] = {{"z_radius", l.box.z_radius}, {"w_radius", l.box.w_radius}};
  j["z_grid"] = {l.grid.z_n_r, l.grid.z_n_theta};
  j["w_grid"] = {l.grid.w_radii, l.grid.w_angles};
  j["points"] = l.points;
  j["min_eigenvalue"] = num(l.min_eigenvalue);
  j["argmin"] = {{"z", to_json(l.argmin_z)}, {"w", to_json(l.argmin_w)}};
  j["tolerance"] = l.tolerance;
  j["sufficient_fraction"] = num(l.sufficient_fraction);
  j["condition_b_pass"] = l.condition_b ? json(l.condition_b->pass) : json(nullptr);
  j["pass"] = l.pass;
  return j;
}

inline json to_json(const SweepSummary& s) {
  json j;
  j["queries"] = s.queries;
  j["excluded"] = s.excluded;
  j["on_graph"] = s.on_graph;
  j["inconclusive"] = s.inconclusive;
  j["outside_box"] = s.outside_box;
  j["modulus_failed"] = s.modulus_failed;
  j["psh_failed"] = s.psh_failed;
  j["decidable"] = s.decidable();
  j["excluded_fraction"] = num(s.excluded_fraction());
  j["radii"] = s.radii;
  json certs = json::array();
  for (const auto& c : s.certificates) certs.push_back({{"r", c.r}, {"min_eigenvalue", num(c.min_eigenvalue)}, {"pass", c.pass}});
  j["certificates"] = certs;
  return j;
}

inline json to_json(const ContinuityModulus& m) {
  json table = json::array();
  for (const auto& e : m.table) table.push_back({{"epsilon", e.epsilon}, {"delta", e.delta}, {"certified", e.certified}});
  json dev = json::array();
  for (std::size_t k = 0; k < m.deltas.size(); ++k) dev.push_back({{"delta", m.deltas[k]}, {"deviation", num(m.deviation[k])}});
  return {{"safety", m.safety}, {"grid", {m.n_r, m.n_theta}}, {"table", table}, {"deviation", dev}};
}

inline json to_json(const ApproxResult& a) {
  json curve = json::array();
  for (const auto& e : a.curve) {
    json coef = json::array();
    for (Eigen::Index k = 0; k < e.coefficients.size(); ++k) coef.push_back(to_json(e.coefficients(k)));
    curve.push_back({{"degree", e.degree},
                     {"sup_error", num(e.sup_error)},
                     {"ls_error", num(e.ls_error)},
                     {"rank", e.rank},
                     {"dependent_columns", e.dependent_columns},
                     {"iterations", e.iterations},
                     {"coefficients", coef}});
  }
  return {{"target", a.target},
          {"method", to_string(a.method)},
          {"ls_monotone", a.ls_monotone()},
          {"sup_monotone", a.sup_monotone()},
          {"curve", curve}};
}

inline std::string to_csv(const ApproxResult& a) {
  std::ostringstream os;
  os.precision(17);
  os << "degree,sup_error,ls_error\n";
  for (const auto& e : a.curve) os << e.degree << ',' << e.sup_error << ',' << e.ls_error << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

struct CommandOutput {
  int exit_code = 0;
  json report;
  std::vector<ApproxResult> curves;
};

namespace detail {

class StageClock {
public:
  explicit StageClock(json& sink, bool enabled) : sink_(sink), enabled_(enabled) {}
  template <class F>
  auto run(const char* stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto out = f();
    if (enabled_)
      sink_[stage] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }

private:
  json& sink_;
  bool enabled_;
};

inline json header(const char* command, const RunConfig& c) {
  json j;
  j["schema"] = schema_version;
  j["tool"] = "discalg";
  j["version"] = version;
  j["command"] = command;
  j["config"] = to_json(c);
  return j;
}

inline DiscFunction build_checked(const RunConfig& c, const DiscGrid& g) {
  validate(c);
  return build(parse(c.h), parse(c.R), c.C, g);
}

inline void finish(CommandOutput& out, json& timings, const RunConfig& c) {
  if (c.timings) out.report["timings_ms"] = timings;
  out.report["exit"] = out.exit_code;
}

} // namespace detail

inline CommandOutput cmd_check(const RunConfig& c) {
  CommandOutput out{0, detail::header("check", c), {}};
  json timings;
  detail::StageClock clock(timings, c.timings);
  const DiscGrid g = make_grid(c.grid.n_r, c.grid.n_theta);
  const DiscFunction d = clock.run("build", [&] { return detail::build_checked(c, g); });
  const HypothesisReport rep = clock.run("hypotheses", [&] { return check_hypotheses(d, g, c.tau); });
  out.report["hypotheses"] = to_json(rep);
  out.exit_code = rep.pass() ? 0 : 1;
  detail::finish(out, timings, c);
  return out;
}

inline CommandOutput cmd_psh(const RunConfig& c) {
  CommandOutput out{0, detail::header("psh", c), {}};
  json timings;
  detail::StageClock clock(timings, c.timings);
  const DiscGrid g = make_grid(c.grid.n_r, c.grid.n_theta);
  const DiscFunction d = clock.run("build", [&] { return detail::build_checked(c, g); });
  std::optional<ConditionB> cb;
  if (d.M() > 0.0) cb = check_condition_b(d, g);
  const LeviGridParams params{c.psh_grid.n_r, c.psh_grid.n_theta, c.w_grid.n_r, c.w_grid.n_theta};
  std::mt19937_64 rng(c.seed);
  json certs = json::array();
  bool all = true;
  clock.run("certify", [&] {
    for (double r : c.radii) {
      const PsiFunction psi(d, r);
      const LeviReport rep = certify_psh(psi, params, cb);
      const LemmaCheck lemma = verify_lemma_bound(psi, c.lemma_samples, rng);
      json j = to_json(rep);
      j["lemma"] = {{"samples", lemma.samples},
                    {"min_gap", num(lemma.min_gap)},
                    {"max_identity_error", num(lemma.max_identity_error)},
                    {"pass", lemma.pass}};
      certs.push_back(j);
      all = all && rep.pass;
    }
    return 0;
  });
  out.report["M"] = num(d.M());
  out.report["delta0"] = num(d.delta0);
  out.report["condition_b"] = cb ? json{{"minimal_C", num(cb->minimal_C)}, {"pass", cb->pass}} : json(nullptr);
  out.report["certificates"] = certs;
  out.exit_code = all ? 0 : 1;
  detail::finish(out, timings, c);
  return out;
}

inline CommandOutput cmd_hull(const RunConfig& c) {
  CommandOutput out{0, detail::header("hull", c), {}};
  json timings;
  detail::StageClock clock(timings, c.timings);
  const DiscGrid g = make_grid(c.grid.n_r, c.grid.n_theta);
  const DiscFunction d = clock.run("build", [&] { return detail::build_checked(c, g); });
  const ContinuityModulus mod =
      clock.run("modulus", [&] { return continuity_modulus(d.f_p, g, {1e-3, 1e-2, 1e-1, 1.0}); });
  const LeviGridParams params{c.psh_grid.n_r, c.psh_grid.n_theta, c.w_grid.n_r, c.w_grid.n_theta};
  const SweepSummary s = clock.run("sweep", [&] {
    return sweep(d, mod, default_lattice(d, c.lattice), g, SweepOptions{params});
  });
  out.report["M"] = num(d.M());
  out.report["delta0"] = num(d.delta0);
  out.report["modulus"] = to_json(mod);
  out.report["sweep"] = to_json(s);
  out.report["threshold"] = c.hull_threshold;
  out.exit_code = s.excluded_fraction() >= c.hull_threshold ? 0 : 1;
  detail::finish(out, timings, c);
  return out;
}

inline CommandOutput cmd_approx(const RunConfig& c) {
  CommandOutput out{0, detail::header("approx", c), {}};
  json timings;
  detail::StageClock clock(timings, c.timings);
  const DiscGrid g = make_grid(c.grid.n_r, c.grid.n_theta);
  const DiscFunction d = clock.run("build", [&] { return detail::build_checked(c, g); });
  std::vector<Expr> targets;
  for (const auto& t : c.targets) targets.push_back(parse(t));
  const DiscGrid ag = make_grid(c.approx_grid.n_r, c.approx_grid.n_theta);
  if (ag.size() < 2 * GeneratorBasis::columns_for(c.dmax))
    throw ConfigError("approximation grid too coarse for dmax " + std::to_string(c.dmax));
  bool all = true;
  json curves = json::array();
  clock.run("fits", [&] {
    for (std::size_t k = 0; k < targets.size(); ++k) {
      ApproxResult res = density_curve(d, targets[k], c.dmax, ag, c.method);
      res.target = c.targets[k];
      const bool decays = res.curve.back().sup_error < c.decay_factor * res.curve.front().sup_error;
      json j = to_json(res);
      j["decays"] = decays;
      curves.push_back(j);
      all = all && decays;
      out.curves.push_back(std::move(res));
    }
    return 0;
  });
  const WermerDiagnostic wd = wermer_set(d, ag, c.tau);
  out.report["curves"] = curves;
  out.report["decay_factor"] = c.decay_factor;
  const ConditionA ca = check_condition_a(d, ag, c.tau);
  out.report["wermer"] = {{"fraction", num(wd.fraction)},
                          {"tau", wd.tau},
                          {"near_critical_fraction", num(ca.near_critical_fraction)},
                          {"consistent", std::abs(wd.fraction + ca.near_critical_fraction - 1.0) <= 1e-12}};
  out.exit_code = all ? 0 : 1;
  detail::finish(out, timings, c);
  return out;
}

inline CommandOutput run_command(const std::string& cmd, const RunConfig& c) {
  if (cmd == "check") return cmd_check(c);
  if (cmd == "psh") return cmd_psh(c);
  if (cmd == "hull") return cmd_hull(c);
  if (cmd == "approx") return cmd_approx(c);
  throw ConfigError("unknown command '" + cmd + "'");
}

} // namespace discalg
