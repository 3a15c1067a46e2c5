// qgv: run verification suites on spacelike hypersurfaces of anti-de Sitter
// space and their Gauss maps.
//
// Exit status: 0 all checks pass, 1 some check fails, 2 configuration or
// usage error.

#include <CLI11.hpp>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "qgv/qgv.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::pair<std::string, double> split_assignment(const std::string& text, const char* what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw qgv::ConfigError(std::string(what) + " expects key=value, got '" + text + "'");
  try {
    return {text.substr(0, eq), std::stod(text.substr(eq + 1))};
  } catch (const std::exception&) {
    throw qgv::ConfigError(std::string(what) + " has a non-numeric value in '" + text + "'");
  }
}

std::pair<double, double> parse_interval(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw qgv::ConfigError("--box expects a,b, got '" + text + "'");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw qgv::ConfigError("--box has a non-numeric bound in '" + text + "'");
  }
}

void print_summary(const qgv::VerificationReport& rep) {
  std::cout << std::setprecision(3);
  for (const auto& [suite, s] : rep.by_suite())
    std::cout << std::left << std::setw(14) << suite << std::right << std::setw(6) << s.passed << "/" << s.total
              << "  max residual " << std::scientific << s.max_residual << std::defaultfloat << "\n";
  int shown = 0;
  for (const auto& r : rep.checks) {
    if (r.pass) continue;
    if (shown++ == 10) {
      std::cout << "  ...\n";
      break;
    }
    std::cout << "  FAIL " << r.check << " at (";
    for (Eigen::Index i = 0; i < r.point.size(); ++i) std::cout << (i ? ", " : "") << r.point(i);
    std::cout << ")";
    if (r.error_kind.empty())
      std::cout << " residual " << std::scientific << r.residual << " > " << r.tolerance << std::defaultfloat;
    else
      std::cout << " " << r.error_kind << ": " << r.error_message;
    std::cout << "\n";
  }
  std::cout << (rep.all_pass() ? "PASS" : "FAIL") << " (" << rep.checks.size() << " checks, " << std::fixed
            << std::setprecision(2) << rep.wall_time << " s)" << std::defaultfloat << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify the Gauss-map correspondence for spacelike hypersurfaces of anti-de Sitter space"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "run verification suites on a chart");
  std::string config_path, example, suites, report, format, dump, profile;
  double alpha = 0.0;
  int k = 1, n = 0, grid = 5, jobs = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> boxes, tols, profile_params;
  verify->add_option("--config", config_path, "JSON run configuration");
  auto* o_example = verify->add_option("--example", example, "catalog id");
  auto* o_alpha = verify->add_option("--alpha", alpha, "angle parameter of the umbilic and product families");
  auto* o_k = verify->add_option("--k", k, "dimension of the first factor (product family)");
  auto* o_n = verify->add_option("--n", n, "hypersurface dimension");
  auto* o_grid = verify->add_option("--grid", grid, "grid points per axis (>= 3)");
  auto* o_box = verify->add_option("--box", boxes, "parameter interval a,b; once for all axes or once per axis");
  auto* o_suites = verify->add_option("--suites", suites, "comma-separated suites, or all");
  verify->add_option("--tol", tols, "tolerance override suite=value");
  auto* o_seed = verify->add_option("--seed", seed, "seed for randomized profiles");
  auto* o_jobs = verify->add_option("--jobs", jobs, "worker threads");
  auto* o_report = verify->add_option("--report", report, "report path");
  auto* o_format = verify->add_option("--format", format, "report format: json or csv");
  auto* o_profile = verify->add_option("--profile", profile, "profile kind for rotation families");
  verify->add_option("--profile-param", profile_params, "profile parameter key=value");
  auto* o_dump = verify->add_option("--dump-fields", dump, "write per-point fields as CSV");

  auto* list = app.add_subcommand("list", "list registered checks");
  std::string list_suites;
  list->add_option("--suites", list_suites, "restrict to these suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (list->parsed()) {
      const auto chosen = list_suites.empty() ? std::vector<std::string>{} : qgv::parse_suites(list_suites);
      for (const auto& c : qgv::list_checks(chosen)) std::cout << c.id << ": " << c.anchor << "  [" << c.suite << "]\n";
      return kExitPass;
    }

    qgv::RunConfig cfg = config_path.empty() ? qgv::RunConfig{} : qgv::RunConfig::load(config_path);
    if (o_example->count()) cfg.example = example;
    if (o_alpha->count()) cfg.alpha = alpha;
    if (o_k->count()) cfg.k = k;
    if (o_n->count()) cfg.n = n;
    if (o_grid->count()) cfg.grid = grid;
    if (o_box->count()) {
      cfg.box.clear();
      for (const auto& b : boxes) cfg.box.push_back(parse_interval(b));
    }
    if (o_suites->count()) cfg.suites = qgv::parse_suites(suites);
    for (const auto& t : tols) {
      const auto [suite, value] = split_assignment(t, "--tol");
      cfg.tolerances[suite] = value;
    }
    if (o_seed->count()) cfg.seed = seed;
    if (o_jobs->count()) cfg.jobs = jobs;
    if (o_report->count()) cfg.report = report;
    if (o_format->count()) cfg.format = format;
    if (o_profile->count()) cfg.profile = profile;
    for (const auto& p : profile_params) {
      const auto [key, value] = split_assignment(p, "--profile-param");
      cfg.profile_params[key] = value;
    }
    if (o_dump->count()) cfg.dump_fields = dump;
    cfg.validate();

    qgv::VerificationReport rep;
    try {
      rep = qgv::run(cfg);
    } catch (const qgv::ConfigError&) {
      throw;
    } catch (const qgv::ConstraintError& e) {
      throw qgv::ConfigError(e.what());
    } catch (const qgv::DegenerateProfileError& e) {
      throw qgv::ConfigError(e.what());
    } catch (const qgv::Error& e) {
      std::cerr << "qgv: " << e.kind() << ": " << e.what() << "\n";
      return kExitFail;
    }
    if (!cfg.report.empty()) qgv::write_report(rep, cfg.report, cfg.format);
    if (!cfg.dump_fields.empty()) qgv::write_atomically(cfg.dump_fields, qgv::dump_fields(cfg));
    print_summary(rep);
    return rep.all_pass() ? kExitPass : kExitFail;
  } catch (const qgv::ConfigError& e) {
    std::cerr << "qgv: ConfigError: " << e.what() << "\n";
  } catch (const qgv::UnknownSuiteError& e) {
    std::cerr << "qgv: UnknownSuiteError: " << e.what() << "\n";
  } catch (const qgv::ParseError& e) {
    std::cerr << "qgv: ParseError: " << e.what() << "\n";
  }
  return kExitUsage;
}
