#pragma once

// Verification runs: a configuration selects a hypersurface (catalog entry or
// user chart), a grid and a set of suites; every check is evaluated at every
// grid point and collected into a report.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qgv/ads_hypersurface.hpp"
#include "qgv/example_catalog.hpp"
#include "qgv/expression.hpp"
#include "qgv/lagrangian_gauss.hpp"
#include "qgv/quadric_geometry.hpp"

namespace qgv {

inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// logging

enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

/// Verbosity from QGV_LOG (quiet, warn, info, debug or 0-3); default warn.
inline LogLevel log_level() {
  const char* env = std::getenv("QGV_LOG");
  if (!env) return LogLevel::warn;
  const std::string v = env;
  if (v == "quiet" || v == "0") return LogLevel::quiet;
  if (v == "info" || v == "2") return LogLevel::info;
  if (v == "debug" || v == "3") return LogLevel::debug;
  return LogLevel::warn;
}

inline void log(LogLevel level, const std::string& msg) {
  static std::mutex mu;
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(mu);
  static const char* tags[] = {"", "warn", "info", "debug"};
  std::cerr << "[qgv " << tags[static_cast<int>(level)] << "] " << msg << "\n";
}

// ---------------------------------------------------------------------------
// check registry

struct CheckInfo {
  std::string id;
  std::string suite;
  std::string anchor;
  double tolerance;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"basic",     "angles",        "palmer",  "curvature",
                                              "gauss_codazzi", "parallel", "gauge"};
  return names;
}

inline const std::vector<CheckInfo>& check_registry() {
  static const std::vector<CheckInfo> reg{
      {"ads_point", "basic", "⟨a,a⟩₂ = −1", 1e-9},
      {"unit_normal", "basic", "⟨b,b⟩₂ = −1, ⟨b,a⟩₂ = ⟨b,da⟩₂ = 0", 1e-8},
      {"lift_on_quadric", "basic", "h(G̃,G̃) = −1, q(G̃) = 0", 1e-9},
      {"lift_horizontal", "basic", "Re h(dG̃, iG̃) = 0", 1e-7},
      {"lagrangian", "basic", "g(J dG e_i, dG e_j) = 0", 1e-6},
      {"golden_lambda", "basic", "closed-form principal curvatures", 1e-5},
      {"closed_form_lift", "basic", "G = [(i,p)], G = [ψ(ip,q)]", 1e-6},
      {"theta_lambda", "angles", "λ_j = cot θ_j", 1e-5},
      {"theta_lambda_pairs", "angles", "cot(θ_j − θ_k) = ±(λ_jλ_k + 1)/(λ_j − λ_k)", 1e-4},
      {"golden_angles", "angles", "cot θ_j = closed-form λ_j", 1e-5},
      {"structure_algebra", "angles", "A² = id, AJ = −JA, g(AX,Y) = g(X,AY)", 1e-6},
      {"bc_relations", "angles", "B² + C² = id, BC = CB", 1e-6},
      {"adapted_frame", "angles", "Ae_j = cos(2θ_j)e_j − sin(2θ_j)Je_j", 1e-6},
      {"theta_derivatives", "angles", "e_i(θ_j − θ_k) = h_jj^i − h_kk^i", 1e-4},
      {"omega_relation", "angles", "sin(θ_j − θ_k) ω_j^k(e_i) = cos(θ_j − θ_k) h_ij^k", 1e-4},
      {"palmer", "palmer", "g(JH,·) = (1/n) d(Σ arctan λ_j)", 1e-5},
      {"minimal", "palmer", "H = 0 when every λ_j is constant", 1e-6},
      {"sff_symmetry", "curvature", "h_ij^k totally symmetric", 1e-6},
      {"totally_geodesic", "curvature", "h = 0 for the homogeneous families", 1e-6},
      {"sectional_formula", "curvature",
       "K(e_i,e_j) = −2cos²(θ_i − θ_j) + g(h(e_i,e_i),h(e_j,e_j)) − g(h(e_i,e_j),h(e_i,e_j))", 1e-4},
      {"sectional_constant", "curvature", "K ≡ −2 (umbilic), K ≡ 0 (product, n = 2)", 1e-5},
      {"gauss", "gauss_codazzi", "g(R(X,Y)Z,W) = g(R̃(X,Y)Z,W) + g(h(Y,Z),h(X,W)) − g(h(X,Z),h(Y,W))", 1e-4},
      {"codazzi", "gauss_codazzi", "(∇h)(X,Y,Z) − (∇h)(Y,X,Z) = (R̃(X,Y)Z)^⊥", 1e-4},
      {"parallel_gauss_map", "parallel", "cos t·a + sin t·b has the same Gauss map", 1e-6},
      {"gauge_shift", "gauge", "θ_j ↦ θ_j − φ/2 under A ↦ cos φ·A + sin φ·JA", 1e-6},
      {"gauge_normalize", "gauge", "θ_1 + ··· + θ_n = 0 mod π", 1e-7},
      {"gauge_consistency", "gauge", "normalized angles reproduced by the rotated structure", 1e-6},
  };
  return reg;
}

inline const CheckInfo& check_info(const std::string& id) {
  for (const auto& c : check_registry())
    if (c.id == id) return c;
  throw ContractViolation("unregistered check '" + id + "'");
}

inline void require_suite(const std::string& s) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), s) == names.end())
    throw UnknownSuiteError("unknown suite '" + s + "'");
}

/// Comma-separated suite list; empty or "all" selects every suite.
inline std::vector<std::string> parse_suites(const std::string& csv) {
  if (csv.empty() || csv == "all") return suite_names();
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    require_suite(item);
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
  }
  if (out.empty()) throw UnknownSuiteError("empty suite list");
  return out;
}

/// Registered checks, optionally restricted to some suites.
inline std::vector<CheckInfo> list_checks(const std::vector<std::string>& suites = {}) {
  for (const auto& s : suites) require_suite(s);
  std::vector<CheckInfo> out;
  for (const auto& c : check_registry())
    if (suites.empty() || std::find(suites.begin(), suites.end(), c.suite) != suites.end()) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// configuration

struct ExternalChartSpec {
  std::vector<std::string> parameters;
  std::vector<std::string> components;  // n + 2 expressions
  std::map<std::string, double> constants;
  int orientation = 1;
};

struct RunConfig {
  std::string example;  // catalog id, or empty with `chart`
  std::optional<ExternalChartSpec> chart;
  std::optional<int> n;
  double alpha = std::numbers::pi / 4;
  int k = 1;
  std::string profile;  // profile kind for rotation families; "random" uses the seed
  std::map<std::string, double> profile_params;
  int grid = 5;
  std::vector<std::pair<double, double>> box;  // empty: [0.3, 1.3] per axis
  std::vector<std::string> suites;              // empty: all
  std::map<std::string, double> tolerances;     // per suite
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string report;
  std::string format = "json";
  std::string dump_fields;

  std::vector<std::string> selected_suites() const { return suites.empty() ? suite_names() : suites; }

  double tolerance(const CheckInfo& c) const {
    auto it = tolerances.find(c.suite);
    return it == tolerances.end() ? c.tolerance : it->second;
  }

  void validate() const {
    if (!n) throw ConfigError("missing required field 'n'");
    if (*n < 1) throw ConfigError("'n' must be positive");
    if (example.empty() == !chart.has_value())
      throw ConfigError("exactly one of 'example' and 'chart' must be given");
    if (!example.empty()) parse_family(example);
    if (chart) {
      if (static_cast<int>(chart->parameters.size()) != *n)
        throw ConfigError("chart needs exactly n parameters");
      if (static_cast<int>(chart->components.size()) != *n + 2)
        throw ConfigError("chart needs exactly n + 2 components");
      if (chart->orientation != 1 && chart->orientation != -1)
        throw ConfigError("chart orientation must be 1 or -1");
    }
    if (grid < 3) throw ConfigError("'grid' must be at least 3");
    if (!box.empty() && static_cast<int>(box.size()) != 1 && static_cast<int>(box.size()) != *n)
      throw ConfigError("'box' needs one interval or one per parameter");
    for (const auto& [a, b] : box)
      if (!(a < b)) throw ConfigError("box intervals need a < b");
    for (const auto& s : suites) require_suite(s);
    for (const auto& [s, v] : tolerances) {
      require_suite(s);
      if (!(v > 0)) throw ConfigError("tolerance for '" + s + "' must be positive");
    }
    if (jobs < 1) throw ConfigError("'jobs' must be positive");
    if (format != "json" && format != "csv") throw ConfigError("'format' must be json or csv");
  }

  Box domain() const {
    const int d = n.value_or(0);
    if (box.empty()) return Box::uniform(d, 0.3, 1.3);
    Box b{VectorXd(d), VectorXd(d)};
    for (int i = 0; i < d; ++i) {
      const auto& iv = box.size() == 1 ? box[0] : box[i];
      b.lo(i) = iv.first;
      b.hi(i) = iv.second;
    }
    return b;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    if (!example.empty()) j["example"] = example;
    if (chart) {
      j["chart"] = {{"parameters", chart->parameters},
                    {"components", chart->components},
                    {"constants", chart->constants},
                    {"orientation", chart->orientation}};
    }
    if (n) j["n"] = *n;
    j["alpha"] = alpha;
    j["k"] = k;
    if (!profile.empty() || !profile_params.empty()) {
      nlohmann::json p = profile_params;
      p["kind"] = profile.empty() ? "default" : profile;
      j["profile"] = p;
    }
    j["grid"] = grid;
    nlohmann::json bx = nlohmann::json::array();
    for (const auto& [a, b] : box) bx.push_back({a, b});
    j["box"] = bx;
    j["suites"] = selected_suites();
    j["tolerances"] = tolerances;
    j["seed"] = seed;
    j["jobs"] = jobs;
    j["format"] = format;
    if (!report.empty()) j["report"] = report;
    return j;
  }

  /// Reads the JSON form; unknown keys and wrong types are ConfigErrors.
  static RunConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known{"example", "chart", "n",      "alpha",  "k",
                                                "profile", "grid",  "box",    "suites", "tolerances",
                                                "seed",    "jobs",  "report", "format", "dump_fields"};
    for (auto it = j.begin(); it != j.end(); ++it)
      if (std::find(known.begin(), known.end(), it.key()) == known.end())
        throw ConfigError("unknown config key '" + it.key() + "'");
    RunConfig c;
    try {
      if (j.contains("example")) c.example = j.at("example").get<std::string>();
      if (j.contains("chart")) {
        const auto& cj = j.at("chart");
        ExternalChartSpec spec;
        spec.parameters = cj.at("parameters").get<std::vector<std::string>>();
        spec.components = cj.at("components").get<std::vector<std::string>>();
        if (cj.contains("constants")) spec.constants = cj.at("constants").get<std::map<std::string, double>>();
        if (cj.contains("orientation")) spec.orientation = cj.at("orientation").get<int>();
        c.chart = spec;
      }
      if (j.contains("n")) c.n = j.at("n").get<int>();
      if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
      if (j.contains("k")) c.k = j.at("k").get<int>();
      if (j.contains("profile")) {
        for (auto it = j.at("profile").begin(); it != j.at("profile").end(); ++it) {
          if (it.key() == "kind") c.profile = it.value().get<std::string>();
          else c.profile_params[it.key()] = it.value().get<double>();
        }
      }
      if (j.contains("grid")) c.grid = j.at("grid").get<int>();
      if (j.contains("box"))
        for (const auto& iv : j.at("box")) {
          if (!iv.is_array() || iv.size() != 2) throw ConfigError("box entries must be [a, b]");
          c.box.emplace_back(iv[0].get<double>(), iv[1].get<double>());
        }
      if (j.contains("suites")) {
        for (const auto& s : j.at("suites")) c.suites.push_back(s.get<std::string>());
      }
      if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
      if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
      if (j.contains("report")) c.report = j.at("report").get<std::string>();
      if (j.contains("format")) c.format = j.at("format").get<std::string>();
      if (j.contains("dump_fields")) c.dump_fields = j.at("dump_fields").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
  }
};

// ---------------------------------------------------------------------------
// subject of a run

struct Subject {
  HypersurfacePatch patch;
  std::optional<CatalogEntry> entry;
};

inline HypersurfacePatch external_patch(const ExternalChartSpec& spec, const Box& domain) {
  std::vector<Expression> comps;
  for (const auto& text : spec.components) comps.push_back(Expression::parse(text, spec.parameters, spec.constants));
  HypersurfacePatch patch;
  patch.n = static_cast<int>(spec.parameters.size());
  patch.orientation = spec.orientation;
  patch.chart = {[comps](const VectorXd& u) {
                   VectorXd a(comps.size());
                   for (std::size_t i = 0; i < comps.size(); ++i) a(i) = comps[i](u.data());
                   return a;
                 },
                 domain};
  return patch;
}

inline Subject make_subject(const RunConfig& cfg) {
  cfg.validate();
  Subject s;
  const Box domain = cfg.domain();
  if (cfg.chart) {
    s.patch = external_patch(*cfg.chart, domain);
    return s;
  }
  const Family fam = parse_family(cfg.example);
  std::optional<Profile> profile;
  if (is_rotation(fam)) {
    if (cfg.profile == "random") {
      std::mt19937_64 rng(cfg.seed);
      profile = random_profile(fam, rng);
    } else {
      profile = make_profile(fam, cfg.profile, cfg.profile_params);
    }
  }
  s.entry = make_entry(fam, *cfg.n, cfg.alpha, cfg.k, profile, domain);
  s.patch = instantiate(*s.entry);
  return s;
}

// ---------------------------------------------------------------------------
// report

struct CheckRecord {
  std::string check;
  std::string suite;
  std::string anchor;
  VectorXd point;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string error_kind;  // empty when the check ran
  std::string error_message;
  std::string note;  // e.g. skipped relations
};

struct SuiteSummary {
  int total = 0;
  int passed = 0;
  double max_residual = 0.0;
};

struct VerificationReport {
  RunConfig config;
  std::vector<CheckRecord> checks;
  double wall_time = 0.0;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& r) { return r.pass; });
  }

  std::map<std::string, SuiteSummary> by_suite() const {
    std::map<std::string, SuiteSummary> out;
    for (const auto& r : checks) {
      auto& s = out[r.suite];
      ++s.total;
      if (r.pass) ++s.passed;
      if (r.error_kind.empty()) s.max_residual = std::max(s.max_residual, r.residual);
    }
    return out;
  }

  double max_residual(const std::string& check_id) const {
    double m = 0.0;
    for (const auto& r : checks)
      if (r.check == check_id) m = std::max(m, r.residual);
    return m;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["config"] = config.to_json();
    nlohmann::json arr = nlohmann::json::array();
    int errors = 0, passed = 0;
    for (const auto& r : checks) {
      nlohmann::json c;
      c["check"] = r.check;
      c["suite"] = r.suite;
      c["anchor"] = r.anchor;
      c["point"] = std::vector<double>(r.point.data(), r.point.data() + r.point.size());
      c["residual"] = std::isfinite(r.residual) ? nlohmann::json(r.residual) : nlohmann::json(nullptr);
      c["tolerance"] = r.tolerance;
      c["pass"] = r.pass;
      if (r.error_kind.empty()) {
        c["error"] = nullptr;
      } else {
        c["error"] = {{"kind", r.error_kind}, {"message", r.error_message}};
        ++errors;
      }
      if (!r.note.empty()) c["note"] = r.note;
      if (r.pass) ++passed;
      arr.push_back(c);
    }
    j["checks"] = arr;
    nlohmann::json suites = nlohmann::json::object();
    for (const auto& [name, s] : by_suite())
      suites[name] = {{"total", s.total}, {"passed", s.passed}, {"max_residual", s.max_residual}};
    j["summary"] = {{"total", static_cast<int>(checks.size())},
                    {"passed", passed},
                    {"failed", static_cast<int>(checks.size()) - passed},
                    {"errors", errors},
                    {"all_pass", all_pass()},
                    {"suites", suites},
                    {"wall_time_s", wall_time}};
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "check,suite,point,residual,tolerance,pass,error\n";
    for (const auto& r : checks) {
      os << r.check << ',' << r.suite << ",\"";
      for (Eigen::Index i = 0; i < r.point.size(); ++i) os << (i ? " " : "") << r.point(i);
      os << "\"," << r.residual << ',' << r.tolerance << ',' << (r.pass ? "true" : "false") << ','
         << r.error_kind << '\n';
    }
    return os.str();
  }
};

/// Writes `content` to a temporary file next to `path` and renames it over
/// `path`, so readers never see a partial file.
inline void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write report '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("failed writing report '" + path + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot move report into place: " + ec.message());
  }
}

inline void write_report(const VerificationReport& rep, const std::string& path, const std::string& format) {
  write_atomically(path, format == "csv" ? rep.to_csv() : rep.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

// Quantities shared by several checks at one point, computed on demand.
class PointContext {
 public:
  PointContext(const Subject& s, const VectorXd& p) : s_(s), p_(p) {}

  const VectorXd& point() const { return p_; }
  const Subject& subject() const { return s_; }
  const GaussMapField& gauss() {
    if (!gm_) gm_ = build_gauss_map(s_.patch);
    return *gm_;
  }
  const ShapeData& shape() {
    if (!shape_) shape_ = shape_operator(s_.patch, p_);
    return *shape_;
  }
  const AngleSpectrum& spectrum() {
    if (!spec_) spec_ = angle_spectrum(gauss(), GaugeAt{}, p_);
    return *spec_;
  }
  const LagrangianSFF& sff() {
    if (!sff_) sff_ = second_fundamental_form(gauss(), spectrum(), p_);
    return *sff_;
  }
  const GaussCodazziReport& gauss_codazzi() {
    if (!gc_) gc_ = verify_gauss_codazzi(gauss(), spectrum(), sff(), p_);
    return *gc_;
  }
  const ThetaDerivativeReport& theta_derivatives() {
    if (!td_) td_ = verify_theta_derivatives(gauss(), spectrum(), sff(), p_);
    return *td_;
  }
  const LiftFrame& frame() {
    if (!lf_) lf_ = lift_frame(gauss(), p_);
    return *lf_;
  }
  bool homogeneous() const {
    return s_.entry && (s_.entry->family == Family::umbilic || s_.entry->family == Family::product);
  }

 private:
  const Subject& s_;
  VectorXd p_;
  std::optional<GaussMapField> gm_;
  std::optional<ShapeData> shape_;
  std::optional<AngleSpectrum> spec_;
  std::optional<LagrangianSFF> sff_;
  std::optional<GaussCodazziReport> gc_;
  std::optional<ThetaDerivativeReport> td_;
  std::optional<LiftFrame> lf_;
};

struct Outcome {
  double residual;
  std::string note;
};

using CheckFn = std::function<std::optional<Outcome>(PointContext&)>;  // nullopt: not applicable

inline double structure_algebra_residual(PointContext& ctx) {
  const LiftFrame& lf = ctx.frame();
  const MatrixXcd E = lf.X * orthonormal_coefficients(lf.g).cast<cplx>();
  const cplx I(0.0, 1.0);
  std::vector<CVector> basis;
  for (Eigen::Index i = 0; i < E.cols(); ++i) {
    basis.push_back(E.col(i));
    basis.push_back(I * E.col(i));
  }
  const GaugeAt gauge{};
  double worst = 0.0;
  auto norm = [](const CVector& v) { return std::sqrt(std::max(0.0, hermitian_real(v, v))); };
  for (const auto& X : basis) {
    const CVector AX = apply_A(gauge, {lf.z, X}).w;
    const CVector AAX = apply_A(gauge, {lf.z, AX}).w;
    worst = std::max(worst, norm(AAX - X));
    const CVector AJX = apply_A(gauge, {lf.z, CVector(I * X)}).w;
    worst = std::max(worst, norm(AJX + I * AX));
    for (const auto& Y : basis) {
      const CVector AY = apply_A(gauge, {lf.z, Y}).w;
      worst = std::max(worst, std::abs(hermitian_real(AX, Y) - hermitian_real(X, AY)));
    }
  }
  return worst;
}

inline std::vector<double> expected_sectional(PointContext& ctx, int i, int j) {
  // umbilic: -2 on every plane; product: -2 inside a factor, 0 across
  if (ctx.subject().entry->family == Family::umbilic) return {-2.0};
  const auto& th = ctx.spectrum().theta;
  return {dist_mod_pi(th(i), th(j)) < 1e-3 ? -2.0 : 0.0};
}

inline const std::map<std::string, CheckFn>& check_functions() {
  static const std::map<std::string, CheckFn> fns{
      {"ads_point",
       [](PointContext& c) -> std::optional<Outcome> {
         const VectorXd a = c.subject().patch.chart(c.point());
         return Outcome{std::abs(ads_inner(a, a) + 1.0), ""};
       }},
      {"unit_normal",
       [](PointContext& c) -> std::optional<Outcome> {
         const ShapeData& sd = c.shape();
         double r = std::max(std::abs(ads_inner(sd.b, sd.b) + 1.0), std::abs(ads_inner(sd.b, sd.a)));
         for (Eigen::Index i = 0; i < sd.da.cols(); ++i) r = std::max(r, std::abs(ads_inner(sd.b, sd.da.col(i))));
         return Outcome{r, ""};
       }},
      {"lift_on_quadric",
       [](PointContext& c) -> std::optional<Outcome> {
         const CVector z = c.gauss().lift(c.point());
         return Outcome{std::max(std::abs(hermitian_form(z, z) + 1.0), std::abs(quadric_residual(z))), ""};
       }},
      {"lift_horizontal",
       [](PointContext& c) -> std::optional<Outcome> {
         return Outcome{lift_horizontality(c.gauss(), c.point()), ""};
       }},
      {"lagrangian",
       [](PointContext& c) -> std::optional<Outcome> {
         return Outcome{lagrangian_residual(c.gauss(), c.point()), ""};
       }},
      {"golden_lambda",
       [](PointContext& c) -> std::optional<Outcome> {
         if (!c.subject().entry) return std::nullopt;
         VectorXd g = golden_lambdas(*c.subject().entry, c.point());
         std::sort(g.data(), g.data() + g.size());
         return Outcome{(c.shape().lambdas - g).cwiseAbs().maxCoeff(), ""};
       }},
      {"closed_form_lift",
       [](PointContext& c) -> std::optional<Outcome> {
         if (!c.subject().entry) return std::nullopt;
         auto z = closed_form_gauss_lift(*c.subject().entry, c.point());
         if (!z) return std::nullopt;
         return Outcome{same_point(*z, c.gauss().lift(c.point())).residual, ""};
       }},
      {"theta_lambda",
       [](PointContext& c) -> std::optional<Outcome> {
         return Outcome{verify_theta_lambda(c.gauss(), c.point()).direct.maxCoeff(), ""};
       }},
      {"theta_lambda_pairs",
       [](PointContext& c) -> std::optional<Outcome> {
         const auto rep = verify_theta_lambda(c.gauss(), c.point(), GaugeAt{}, 1e-3);
         double r = 0.0;
         int infinite = 0;
         for (const auto& pr : rep.pairs) {
           if (pr.infinite) ++infinite;
           r = std::max(r, pr.residual);
         }
         return Outcome{r, infinite ? std::to_string(infinite) + " pair(s) in the infinite case" : ""};
       }},
      {"golden_angles",
       [](PointContext& c) -> std::optional<Outcome> {
         if (!c.subject().entry) return std::nullopt;
         const VectorXd cot = golden_cot_theta(*c.subject().entry, c.point());
         std::vector<double> expected, got;
         for (Eigen::Index j = 0; j < cot.size(); ++j) expected.push_back(std::atan2(1.0, cot(j)));
         const auto& th = c.spectrum().theta;
         got.assign(th.data(), th.data() + th.size());
         return Outcome{angle_multiset_distance(got, expected), ""};
       }},
      {"structure_algebra",
       [](PointContext& c) -> std::optional<Outcome> { return Outcome{structure_algebra_residual(c), ""}; }},
      {"bc_relations",
       [](PointContext& c) -> std::optional<Outcome> {
         const auto& s = c.spectrum();
         return Outcome{std::max({s.commutator, s.pythagoras, s.asymmetry}), ""};
       }},
      {"adapted_frame",
       [](PointContext& c) -> std::optional<Outcome> {
         const auto& s = c.spectrum();
         const MatrixXd& g = c.frame().g;
         const auto n = s.frame.cols();
         const double ortho =
             (s.frame.transpose() * g * s.frame - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
         return Outcome{std::max(ortho, adapted_frame_residual(c.gauss(), s)), ""};
       }},
      {"theta_derivatives",
       [](PointContext& c) -> std::optional<Outcome> {
         const auto& td = c.theta_derivatives();
         return Outcome{td.max_derivative(),
                        td.skipped.empty() ? "" : std::to_string(td.skipped.size()) + " skipped: " + td.skipped.front()};
       }},
      {"omega_relation",
       [](PointContext& c) -> std::optional<Outcome> {
         const auto& td = c.theta_derivatives();
         return Outcome{td.max_omega(), ""};
       }},
      {"palmer",
       [](PointContext& c) -> std::optional<Outcome> {
         return Outcome{verify_palmer(c.gauss(), c.point()).residual(), ""};
       }},
      {"minimal",
       [](PointContext& c) -> std::optional<Outcome> {
         if (!c.homogeneous()) return std::nullopt;
         const auto rep = verify_palmer(c.gauss(), c.point());
         return Outcome{std::max(rep.lhs.cwiseAbs().maxCoeff(), rep.rhs.cwiseAbs().maxCoeff()), ""};
       }},
      {"sff_symmetry",
       [](PointContext& c) -> std::optional<Outcome> { return Outcome{c.sff().symmetry_residual(), ""}; }},
      {"totally_geodesic",
       [](PointContext& c) -> std::optional<Outcome> {
         if (!c.homogeneous()) return std::nullopt;
         return Outcome{c.sff().max_abs(), ""};
       }},
      {"sectional_formula",
       [](PointContext& c) -> std::optional<Outcome> {
         const int n = c.sff().n;
         if (n < 2) return std::nullopt;
         const auto& gc = c.gauss_codazzi();
         double r = 0.0;
         for (int i = 0; i < n; ++i)
           for (int j = i + 1; j < n; ++j)
             r = std::max(r, std::abs(gc.sectional(i, j) - sectional_curvature(c.spectrum(), c.sff(), i, j)));
         return Outcome{r, ""};
       }},
      {"sectional_constant",
       [](PointContext& c) -> std::optional<Outcome> {
         if (!c.homogeneous()) return std::nullopt;
         const int n = c.sff().n;
         if (n < 2) return std::nullopt;
         const auto& gc = c.gauss_codazzi();
         double r = 0.0;
         for (int i = 0; i < n; ++i)
           for (int j = i + 1; j < n; ++j) {
             const double expected = expected_sectional(c, i, j).front();
             r = std::max({r, std::abs(gc.sectional(i, j) - expected),
                           std::abs(sectional_curvature(c.spectrum(), c.sff(), i, j) - expected)});
           }
         return Outcome{r, ""};
       }},
      {"gauss",
       [](PointContext& c) -> std::optional<Outcome> { return Outcome{c.gauss_codazzi().gauss_residual, ""}; }},
      {"codazzi",
       [](PointContext& c) -> std::optional<Outcome> { return Outcome{c.gauss_codazzi().codazzi_residual, ""}; }},
      {"parallel_gauss_map",
       [](PointContext& c) -> std::optional<Outcome> {
         // d(cos t a + sin t b) = da (cos t - sin t S); singular where some cos t = lambda sin t
         double r = 0.0;
         std::string note = "t in {0.2, 0.5, 1.0}";
         const CVector z = c.gauss().lift(c.point());
         for (double t : {0.2, 0.5, 1.0}) {
           const VectorXd factors = std::cos(t) - std::sin(t) * c.shape().lambdas.array();
           if (factors.cwiseAbs().minCoeff() < 1e-3) {
             note += "; t = " + std::to_string(t) + " skipped (focal)";
             continue;
           }
           const GaussMapField gt = build_gauss_map(parallel_patch(c.subject().patch, t, c.point()));
           r = std::max(r, same_point(z, gt.lift(c.point())).residual);
         }
         return Outcome{r, note};
       }},
      {"gauge_shift",
       [](PointContext& c) -> std::optional<Outcome> {
         const auto& base = c.spectrum();
         double r = 0.0;
         for (double phi : {0.3, std::numbers::pi / 2, std::numbers::pi}) {
           const AngleSpectrum rot = angle_spectrum(c.gauss(), GaugeAt{phi}, c.point());
           std::vector<double> expected, got;
           for (Eigen::Index j = 0; j < base.theta.size(); ++j) {
             expected.push_back(base.theta(j) - 0.5 * phi);
             got.push_back(rot.theta(j));
           }
           r = std::max(r, angle_multiset_distance(got, expected));
         }
         return Outcome{r, "phi in {0.3, pi/2, pi}"};
       }},
      {"gauge_normalize",
       [](PointContext& c) -> std::optional<Outcome> {
         return Outcome{angle_sum_residual(gauge_normalize(c.spectrum()).theta), ""};
       }},
      {"gauge_consistency",
       [](PointContext& c) -> std::optional<Outcome> {
         const AngleSpectrum norm = gauge_normalize(c.spectrum());
         const AngleSpectrum again = angle_spectrum(c.gauss(), norm.gauge, c.point());
         std::vector<double> a(norm.theta.data(), norm.theta.data() + norm.theta.size());
         std::vector<double> b(again.theta.data(), again.theta.data() + again.theta.size());
         return Outcome{angle_multiset_distance(a, b), ""};
       }},
  };
  return fns;
}

inline std::vector<CheckRecord> evaluate_point(const Subject& subject, const RunConfig& cfg, const VectorXd& p,
                                               const std::vector<CheckInfo>& checks) {
  PointContext ctx(subject, p);
  std::vector<CheckRecord> out;
  for (const auto& info : checks) {
    CheckRecord rec{info.id, info.suite, info.anchor, p, 0.0, cfg.tolerance(info), false, "", "", ""};
    try {
      const auto outcome = check_functions().at(info.id)(ctx);
      if (!outcome) continue;
      rec.residual = outcome->residual;
      rec.note = outcome->note;
      rec.pass = std::isfinite(rec.residual) && rec.residual <= rec.tolerance;
    } catch (const Error& e) {
      rec.residual = std::numeric_limits<double>::quiet_NaN();
      rec.error_kind = e.kind();
      rec.error_message = e.what();
    } catch (const std::exception& e) {
      rec.residual = std::numeric_limits<double>::quiet_NaN();
      rec.error_kind = "InternalError";
      rec.error_message = e.what();
    }
    log(LogLevel::debug, rec.check + " residual " + std::to_string(rec.residual));
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

/// Runs the configured suites over the grid. Geometric failures become
/// failed records; configuration problems throw ConfigError.
inline VerificationReport run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Subject subject = make_subject(cfg);
  const auto checks = list_checks(cfg.selected_suites());
  const auto points = grid_points(subject.patch.domain(), cfg.grid);
  log(LogLevel::info, "running " + std::to_string(checks.size()) + " checks on " + std::to_string(points.size()) +
                          " points with " + std::to_string(cfg.jobs) + " job(s)");

  std::vector<std::vector<CheckRecord>> per_point(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++)
      per_point[i] = detail::evaluate_point(subject, cfg, points[i], checks);
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(points.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  VerificationReport rep;
  rep.config = cfg;
  // order: by registry, then by grid point
  for (const auto& info : checks)
    for (const auto& recs : per_point)
      for (const auto& r : recs)
        if (r.check == info.id) rep.checks.push_back(r);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Per-point fields (principal curvatures, angles, mean curvature, both sides
/// of the mean-curvature identity) as CSV, for external plotting.
inline std::string dump_fields(const RunConfig& cfg) {
  const Subject subject = make_subject(cfg);
  const auto points = grid_points(subject.patch.domain(), cfg.grid);
  const int n = subject.patch.n;
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < n; ++i) os << "u" << i << ',';
  for (int i = 0; i < n; ++i) os << "lambda" << i << ',';
  for (int i = 0; i < n; ++i) os << "theta" << i << ',';
  for (int i = 0; i < n; ++i) os << "JH" << i << ',';
  for (int i = 0; i < n; ++i) os << "palmer_lhs" << i << ',' << "palmer_rhs" << i << (i + 1 < n ? "," : "\n");
  const GaussMapField gm = build_gauss_map(subject.patch);
  for (const auto& p : points) {
    const ShapeData sd = shape_operator(subject.patch, p);
    const AngleSpectrum spec = angle_spectrum(gm, GaugeAt{}, p);
    const LagrangianSFF sff = second_fundamental_form(gm, spec, p);
    const PalmerReport pr = verify_palmer(gm, p);
    for (int i = 0; i < n; ++i) os << p(i) << ',';
    for (int i = 0; i < n; ++i) os << sd.lambdas(i) << ',';
    for (int i = 0; i < n; ++i) os << spec.theta(i) << ',';
    for (int i = 0; i < n; ++i) os << sff.JH(i) << ',';
    for (int i = 0; i < n; ++i) os << pr.lhs(i) << ',' << pr.rhs(i) << (i + 1 < n ? "," : "\n");
  }
  return os.str();
}

}  // namespace qgv
