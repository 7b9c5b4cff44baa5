#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <type_traits>

#include <CLI11.hpp>
#include <json.hpp>

#include "splinelab/bspline.hpp"
#include "splinelab/csv.hpp"
#include "splinelab/error.hpp"
#include "splinelab/gram.hpp"
#include "splinelab/maximal.hpp"
#include "splinelab/mesh.hpp"
#include "splinelab/projection.hpp"
#include "splinelab/remez.hpp"
#include "splinelab/rng.hpp"
#include "splinelab/saks.hpp"

namespace splinelab::cli {

namespace {

using nlohmann::json;

struct HelpRequested {
  std::string text;
};

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorCode::UsageError, msg); }

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
T json_value(const json& j, const std::string& key) {
  if constexpr (is_vector<T>::value) {
    using V = typename T::value_type;
    T out;
    if (j.is_array()) {
      for (const auto& e : j) out.push_back(json_value<V>(e, key));
    } else {
      out.push_back(json_value<V>(j, key));
    }
    return out;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) usage("config key '" + key + "' must be a string");
    return j.get<std::string>();
  } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
    if (!j.is_number_unsigned()) usage("config key '" + key + "' must be a non-negative integer");
    return j.get<T>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) usage("config key '" + key + "' must be an integer");
    return j.get<T>();
  } else {
    if (!j.is_number()) usage("config key '" + key + "' must be a number");
    return j.get<T>();
  }
}

// One configurable parameter: its flag, its config-file key and how to move
// a value between the parsed flags and the merged config.
struct Key {
  std::string name;
  CLI::Option* option = nullptr;
  std::function<void(ExperimentConfig&, const json&)> from_json;
  std::function<void(ExperimentConfig&, const ExperimentConfig&)> from_flags;
};

template <class T>
void bind_key(CLI::App& app, std::vector<Key>& keys, ExperimentConfig& flags,
                  T ExperimentConfig::*member, const std::string& name, const std::string& help,
                  const std::string& alias = "") {
  const std::string spec = alias.empty() ? "--" + name : "--" + alias + ",--" + name;
  auto* opt = app.add_option(spec, flags.*member, help);
  if constexpr (is_vector<T>::value) opt->delimiter(',')->allow_extra_args(false);
  Key key{name, opt,
          [member, name](ExperimentConfig& c, const json& j) { c.*member = json_value<T>(j, name); },
          [member](ExperimentConfig& c, const ExperimentConfig& f) { c.*member = f.*member; }};
  keys.push_back(std::move(key));
  if (!alias.empty()) {
    keys.push_back({alias, opt, keys.back().from_json, keys.back().from_flags});
  }
}

json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) usage(what + ": cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    usage(what + ": invalid JSON in '" + path + "': " + e.what());
  }
}

StepFunction load_step_file(const std::string& path) {
  const auto j = read_json_file(path, "--step-file");
  if (!j.is_object() || !j.contains("breaks") || !j.contains("values")) {
    usage("--step-file: expected an object with 'breaks' and 'values'");
  }
  try {
    return StepFunction(j.at("breaks").get<std::vector<std::vector<double>>>(),
                        j.at("values").get<std::vector<double>>());
  } catch (const json::exception& e) {
    usage(std::string("--step-file: ") + e.what());
  } catch (const Error& e) {
    usage(std::string("--step-file: ") + e.what());
  }
}

const std::vector<std::string>& smooth_functions() {
  static const std::vector<std::string> names{"sin2pi", "runge", "abs", "exp"};
  return names;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

bool wants_step(const std::string& command) {
  return command == "dominate" || command == "weaktype";
}

void resolve_defaults(ExperimentConfig& c) {
  if (c.k.empty()) c.k = c.command == "remez" ? std::vector<int>{1, 2, 3, 4} : std::vector<int>{2};
  if (c.n.empty()) {
    if (c.command == "decay") c.n = {20, 40, 80, 160};
    else if (c.command == "lebesgue" || c.command == "converge") c.n = {10, 20, 40, 80};
    else if (c.command == "dominate") c.n = {8, 16, 32};
    else c.n = {20};
  }
  if (c.function.empty()) c.function = wants_step(c.command) ? "step" : "sin2pi";
  if (c.dim == 0) {
    if (c.command == "remez") c.dim = 1;
    else if (c.k.size() > 1) c.dim = c.k.size();
    else c.dim = wants_step(c.command) ? 2 : 1;
  }
  if (c.out.empty()) {
    const char* env = std::getenv("SPLINELAB_OUT_DIR");
    c.out = env && *env ? env : ".";
  }
}

void validate(ExperimentConfig& c) {
  if (c.command.empty()) usage("missing subcommand");
  if (!contains(subcommands(), c.command)) usage("unknown subcommand '" + c.command + "'");
  parse_mesh_kind(c.mesh);
  if (c.dim < 1 || c.dim > 3) usage("--dim must be 1, 2 or 3");
  for (int k : c.k) {
    if (k < 1 || k > 10) usage("--k must be between 1 and 10");
  }
  if (c.command != "remez") {
    if (c.k.size() == 1) c.k.assign(c.dim, c.k[0]);
    if (c.k.size() != c.dim) usage("--k needs one entry or one per axis (--dim)");
  }
  const int kmax = *std::max_element(c.k.begin(), c.k.end());
  for (std::size_t n : c.n) {
    if (n < static_cast<std::size_t>(kmax)) usage("--n must be at least the order k");
    if (n > 100000) usage("--n is capped at 100000");
    if (c.command == "decay" && n > kDefaultInverseCap) {
      usage("--n is capped at " + std::to_string(kDefaultInverseCap) + " for decay");
    }
  }
  if (!(c.ratio > 0.0) || !std::isfinite(c.ratio)) usage("--ratio must be positive");
  if (!c.step_file.empty()) {
    const auto f = load_step_file(c.step_file);
    if (f.dim() != c.dim) usage("--step-file dimension differs from --dim");
    c.function = "step";
  } else if (c.function != "step" && !contains(smooth_functions(), c.function)) {
    usage("--function: unknown function '" + c.function + "'");
  }
  if (wants_step(c.command) && c.function != "step") {
    usage("--function must be 'step' (or --step-file) for " + c.command);
  }
  if (c.samples < 1) usage("--samples must be positive");
  if (c.meshes < 1) usage("--meshes must be positive");
  if (!(c.tol > 0.0)) usage("--tol must be positive");
  if (!(c.alpha >= 2.0) || c.alpha > 64.0) usage("--alpha must be in [2, 64]");
  if (c.levels < 1 || c.levels > 4) usage("--levels must be between 1 and 4");
  if (c.orders.size() != 2) usage("--orders needs two entries");
  for (int k : c.orders) {
    if (k < 1 || k > 4) usage("--orders entries must be between 1 and 4");
  }
  if (c.points < 1 || c.points > 1024) usage("--points must be between 1 and 1024");
  if (c.lambdas.empty()) usage("--lambdas must not be empty");
  for (double l : c.lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) usage("--lambdas must be positive");
  }
  if (c.resolution < 1 || c.resolution > 4096) usage("--resolution must be between 1 and 4096");
  if (!(c.rho > 0.0 && c.rho < 1.0)) usage("--rho must be in (0, 1)");
  if (c.trials < 8) usage("--trials must be at least 8");
}

// ---------------------------------------------------------------------------

ScalarField named_function(const std::string& name, std::size_t d) {
  if (name == "sin2pi") {
    return ScalarField(d, [](std::span<const double> x) {
      double v = 1.0;
      for (double t : x) v *= std::sin(2.0 * std::numbers::pi * t);
      return v;
    });
  }
  if (name == "runge") {
    return ScalarField(d, [](std::span<const double> x) {
      double r2 = 0.0;
      for (double t : x) r2 += (t - 0.5) * (t - 0.5);
      return 1.0 / (1.0 + 25.0 * r2);
    });
  }
  if (name == "abs") {
    return ScalarField(d, [](std::span<const double> x) {
      double v = 1.0;
      for (double t : x) v *= std::abs(t - 1.0 / 3.0);
      return v;
    });
  }
  return ScalarField(d, [](std::span<const double> x) {
    double s = 0.0;
    for (double t : x) s += t;
    return std::exp(s);
  });
}

StepFunction random_step(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> breaks(d);
  std::size_t cells = 1;
  for (auto& b : breaks) {
    b = {0.0, 1.0};
    for (int i = 0; i < 6; ++i) b.push_back(rng.uniform(0.02, 0.98));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    cells *= b.size() - 1;
  }
  std::vector<double> values(cells);
  for (double& v : values) v = rng.uniform(0.0, 2.0);
  return StepFunction(std::move(breaks), std::move(values));
}

StepFunction step_function(const ExperimentConfig& c) {
  if (!c.step_file.empty()) return load_step_file(c.step_file);
  return random_step(c.dim, derive_seed(c.seed, 1));
}

ScalarField field(const ExperimentConfig& c) {
  if (c.function == "step") return ScalarField(step_function(c));
  return named_function(c.function, c.dim);
}

TensorMesh make_mesh(const ExperimentConfig& c, std::size_t n, std::size_t draw) {
  const auto kind = parse_mesh_kind(c.mesh);
  std::vector<KnotVector> axes;
  for (std::size_t mu = 0; mu < c.dim; ++mu) {
    const auto stream = 1000 + 64 * (n * 1024 + draw) + mu;
    axes.push_back(generate_mesh(kind, n, c.k[mu], c.ratio, derive_seed(c.seed, stream)));
  }
  return TensorMesh(std::move(axes));
}

std::size_t draws(const ExperimentConfig& c) {
  return parse_mesh_kind(c.mesh) == MeshKind::Random ? c.meshes : 1;
}

struct Context {
  const ExperimentConfig& config;
  std::filesystem::path dir;
  std::ostream& log;
  RunResult result;
  json failures = json::array();

  void write(const std::string& name, const std::string& content) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    result.files.push_back(path.string());
    log << "wrote " << path.string() << "\n";
  }
  void write(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void expect(bool ok, const std::string& assertion, json detail = json::object()) {
    if (ok) return;
    failures.push_back({{"assertion", assertion}, {"detail", std::move(detail)}});
  }
};

void run_decay(Context& ctx) {
  const auto& c = ctx.config;
  CsvWriter summary({"n", "draw", "k", "K", "gamma"});
  CsvWriter profile({"n", "draw", "r", "m_r", "envelope"});
  for (std::size_t n : c.n) {
    for (std::size_t d = 0; d < draws(c); ++d) {
      const auto mesh = make_mesh(c, n, d);
      const auto fit = fit_decay(mesh.axis(0));
      summary.row({double(n), double(d), double(c.k[0]), fit.K, fit.gamma});
      for (std::size_t r = 0; r < fit.m.size(); ++r) {
        profile.row({double(n), double(d), double(r), fit.m[r],
                      fit.K * std::pow(fit.gamma, double(r))});
      }
      ctx.expect(fit.gamma < 1.0, "gamma < 1", {{"n", n}, {"draw", d}, {"gamma", fit.gamma}});
    }
  }
  ctx.write("decay.csv", summary.str());
  ctx.write("decay_profile.csv", profile.str());
}

void run_lebesgue(Context& ctx) {
  const auto& c = ctx.config;
  CsvWriter csv({"n", "draw", "lambda", "lambda_axis1", "lambda_axis2", "lambda_axis3"});
  const bool piecewise_constant =
      std::all_of(c.k.begin(), c.k.end(), [](int k) { return k == 1; });
  for (std::size_t n : c.n) {
    for (std::size_t d = 0; d < draws(c); ++d) {
      const auto rep = lebesgue_constant(make_mesh(c, n, d));
      std::vector<double> row{double(n), double(d), rep.lambda};
      for (std::size_t mu = 0; mu < 3; ++mu) row.push_back(mu < c.dim ? rep.per_axis[mu] : 0.0);
      csv.row(row);
      const json where{{"n", n}, {"draw", d}, {"lambda", rep.lambda}};
      ctx.expect(std::isfinite(rep.lambda) && rep.lambda >= 1.0 - 1e-12, "1 <= lambda < inf",
                 where);
      if (piecewise_constant) {
        ctx.expect(std::abs(rep.lambda - 1.0) <= c.tol, "lambda = 1 for k = 1", where);
      }
    }
  }
  ctx.write("lebesgue.csv", csv.str());
}

void run_project(Context& ctx) {
  const auto& c = ctx.config;
  const auto f = field(c);
  const auto mesh = make_mesh(c, c.n.front(), 0);
  const auto pf = project_tensor(mesh, f);
  const double err = sup_error(pf, f, c.samples, derive_seed(c.seed, 3));
  json out;
  out["function"] = c.function;
  out["mesh"] = mesh_to_json(mesh);
  out["coeffs"] = coeffs_to_json(pf);
  out["sup_error"] = err;
  out["samples"] = c.samples;
  ctx.write("project.json", out);
  ctx.expect(std::isfinite(err), "sup_error finite", {{"sup_error", err}});
}

void run_converge(Context& ctx) {
  const auto& c = ctx.config;
  const auto f = field(c);
  CsvWriter csv({"n", "diameter", "sup_error"});
  double prev = INFINITY;
  for (std::size_t n : c.n) {
    const auto mesh = make_mesh(c, n, 0);
    const double err = sup_error(mesh, f, c.samples, derive_seed(c.seed, 3));
    csv.row({double(n), mesh_diameter(mesh), err});
    ctx.expect(err < prev, "sup_error strictly decreasing", {{"n", n}, {"sup_error", err}});
    prev = err;
  }
  ctx.write("converge.csv", csv.str());
}

void run_dominate(Context& ctx) {
  const auto& c = ctx.config;
  const auto f = step_function(c);
  Rng rng(derive_seed(c.seed, 2));
  std::vector<std::vector<double>> points(c.samples, std::vector<double>(c.dim));
  for (auto& p : points) {
    for (double& x : p) x = rng.uniform();
  }
  std::vector<double> ms;
  ms.reserve(points.size());
  for (const auto& p : points) ms.push_back(strong_maximal(f, p));
  const bool piecewise_constant =
      std::all_of(c.k.begin(), c.k.end(), [](int k) { return k == 1; });

  CsvWriter summary({"n", "draw", "max_ratio"});
  DominationReport last;
  for (std::size_t n : c.n) {
    for (std::size_t d = 0; d < draws(c); ++d) {
      last = domination_ratio(Projector(make_mesh(c, n, d)), f, points, ms);
      summary.row({double(n), double(d), last.max_ratio});
      const json where{{"n", n}, {"draw", d}, {"max_ratio", last.max_ratio}};
      const bool finite = std::all_of(last.samples.begin(), last.samples.end(),
                                      [](const auto& s) { return std::isfinite(s.ratio); });
      ctx.expect(finite, "ratios finite", where);
      if (piecewise_constant) {
        ctx.expect(last.max_ratio <= 1.0 + c.tol, "max ratio <= 1 for k = 1", where);
      }
    }
  }
  ctx.write("dominate.csv", summary.str());
  ctx.write("dominate_points.csv", domination_csv(last));
}

void run_weaktype(Context& ctx) {
  const auto& c = ctx.config;
  const auto rep = weak_type_ratio(step_function(c), c.lambdas, c.resolution);
  CsvWriter csv({"lambda", "measured", "rhs", "ratio"});
  for (std::size_t i = 0; i < rep.lambda.size(); ++i) {
    csv.row({rep.lambda[i], rep.measured[i], rep.rhs[i], rep.ratio[i]});
    ctx.expect(std::isfinite(rep.ratio[i]), "ratio finite", {{"lambda", rep.lambda[i]}});
  }
  ctx.write("weaktype.csv", csv.str());
}

void run_bohr(Context& ctx) {
  const auto& c = ctx.config;
  const auto dec = bohr_decompose(unit_square(), c.alpha);
  // The direct route builds psi on a mesh of every corner; past a few
  // thousand groups the exact per-generation check is used instead.
  const bool direct = dec.materialized() && dec.rectangle_count() <= 20000;
  const auto rep = direct ? verify_psi(build_psi(dec), dec) : verify_psi(dec);
  json out;
  out["decomposition"] = bohr_to_json(dec);
  out["report"] = psi_report_to_json(rep);
  ctx.write("bohr.json", out);
  const auto report = psi_report_to_json(rep);
  ctx.expect(rep.values_ok, "values in {0, alpha}", report);
  ctx.expect(rep.orlicz_ok, "psi log+ psi integral <= 9|S|", report);
  ctx.expect(rep.averages_ok, "average of psi >= 1 on every rectangle", report);
  ctx.expect(rep.coverage_ok, "coverage", report);
  ctx.expect(rep.remainder_ok, "remainder < |S|/N^2", report);
}

void run_saks(Context& ctx) {
  const auto& c = ctx.config;
  std::vector<std::array<double, 2>> points;
  for (std::size_t i = 0; i < c.points; ++i) {
    for (std::size_t j = 0; j < c.points; ++j) {
      points.push_back({(i + 0.5) / double(c.points), (j + 0.5) / double(c.points)});
    }
  }
  const auto rep = divergence_curve(SaksSchedule::standard(c.levels),
                                    {c.orders[0], c.orders[1]}, points, c.levels);
  ctx.write("saks.csv", divergence_csv(rep));
  ctx.expect(rep.c1 > 0.0, "min |B_i| > 0", {{"c1", rep.c1}});
  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    ctx.expect(rep.levels[i].median_growth > rep.levels[i - 1].median_growth,
               "median growth strictly increasing",
               {{"level", rep.levels[i].level}, {"median", rep.levels[i].median_growth}});
  }
}

void run_remez(Context& ctx) {
  const auto& c = ctx.config;
  json estimates = json::array();
  for (int k : c.k) {
    const auto est = estimate_remez(k, c.rho, c.trials, c.seed);
    estimates.push_back({{"k", k},
                         {"c_hat", est.c_hat},
                         {"c_k", est.c_hat * 1.01},
                         {"witness", est.witness.coeffs}});
    ctx.expect(std::isfinite(est.c_hat) && est.c_hat >= 1.0, "1 <= c_hat < inf",
               {{"k", k}, {"c_hat", est.c_hat}});
  }
  json out;
  out["rho"] = c.rho;
  out["trials"] = c.trials;
  out["seed"] = c.seed;
  out["estimates"] = std::move(estimates);
  ctx.write("remez.json", out);
}

json config_to_json(const ExperimentConfig& c) {
  return {{"command", c.command}, {"mesh", c.mesh},       {"k", c.k},
          {"dim", c.dim},         {"n", c.n},             {"ratio", c.ratio},
          {"function", c.function}, {"step-file", c.step_file}, {"seed", c.seed},
          {"samples", c.samples}, {"meshes", c.meshes},   {"tol", c.tol},
          {"alpha", c.alpha},     {"levels", c.levels},   {"orders", c.orders},
          {"points", c.points},   {"lambdas", c.lambdas}, {"resolution", c.resolution},
          {"rho", c.rho},         {"trials", c.trials}};
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"decay",    "lebesgue", "project",
                                              "converge", "dominate", "weaktype",
                                              "bohr",     "saks",     "remez"};
  return names;
}

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Spline projection laboratory", "splinelab"};
  ExperimentConfig flags;
  std::vector<Key> keys;
  std::string config_file;

  auto* cmd = app.add_option("command", flags.command, "Subcommand: decay, lebesgue, project, "
                                                       "converge, dominate, weaktype, bohr, "
                                                       "saks, remez");
  keys.push_back({"command", cmd,
                  [](ExperimentConfig& c, const json& j) {
                    c.command = json_value<std::string>(j, "command");
                  },
                  [](ExperimentConfig& c, const ExperimentConfig& f) { c.command = f.command; }});
  app.add_option("--config", config_file, "JSON file with default values for any flag");
  bind_key(app, keys, flags, &ExperimentConfig::mesh, "mesh", "uniform | random | geometric");
  bind_key(app, keys, flags, &ExperimentConfig::k, "k", "Order per axis, comma separated");
  bind_key(app, keys, flags, &ExperimentConfig::dim, "dim", "Dimension");
  bind_key(app, keys, flags, &ExperimentConfig::n, "n", "Basis counts, comma separated");
  bind_key(app, keys, flags, &ExperimentConfig::ratio, "ratio", "Geometric mesh ratio");
  bind_key(app, keys, flags, &ExperimentConfig::function, "function",
       "sin2pi | runge | abs | exp | step", "f");
  bind_key(app, keys, flags, &ExperimentConfig::step_file, "step-file",
       "JSON step function {breaks, values}");
  bind_key(app, keys, flags, &ExperimentConfig::seed, "seed", "Master seed");
  bind_key(app, keys, flags, &ExperimentConfig::out, "out", "Output directory");
  bind_key(app, keys, flags, &ExperimentConfig::samples, "samples", "Sample points");
  bind_key(app, keys, flags, &ExperimentConfig::meshes, "meshes", "Random meshes per n");
  bind_key(app, keys, flags, &ExperimentConfig::tol, "tol", "Tolerance for exact checks");
  bind_key(app, keys, flags, &ExperimentConfig::alpha, "alpha", "Bohr parameter");
  bind_key(app, keys, flags, &ExperimentConfig::levels, "levels", "Saks levels");
  bind_key(app, keys, flags, &ExperimentConfig::orders, "orders", "Projection orders k1,k2");
  bind_key(app, keys, flags, &ExperimentConfig::points, "points", "Divergence grid per axis");
  bind_key(app, keys, flags, &ExperimentConfig::lambdas, "lambdas", "Weak-type levels");
  bind_key(app, keys, flags, &ExperimentConfig::resolution, "resolution", "Weak-type grid");
  bind_key(app, keys, flags, &ExperimentConfig::rho, "rho", "Remez set fraction");
  bind_key(app, keys, flags, &ExperimentConfig::trials, "trials", "Remez trials");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    usage(e.what());
  }

  ExperimentConfig merged;
  if (!config_file.empty()) {
    const auto j = read_json_file(config_file, "--config");
    if (!j.is_object()) usage("--config: expected a JSON object");
    for (const auto& [name, value] : j.items()) {
      const auto it = std::find_if(keys.begin(), keys.end(),
                                   [&](const Key& k) { return k.name == name; });
      if (it == keys.end()) usage("--config: unknown key '" + name + "'");
      it->from_json(merged, value);
    }
  }
  for (const auto& key : keys) {
    if (key.option->count() > 0) key.from_flags(merged, flags);
  }
  resolve_defaults(merged);
  validate(merged);
  return merged;
}

RunResult run(const ExperimentConfig& config, std::ostream& log) {
  Context ctx{config, std::filesystem::path(config.out), log, {}, json::array()};
  std::filesystem::create_directories(ctx.dir);
  static const std::map<std::string, std::function<void(Context&)>> table{
      {"decay", run_decay},       {"lebesgue", run_lebesgue}, {"project", run_project},
      {"converge", run_converge}, {"dominate", run_dominate}, {"weaktype", run_weaktype},
      {"bohr", run_bohr},         {"saks", run_saks},         {"remez", run_remez}};
  json record;
  try {
    table.at(config.command)(ctx);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UsageError) throw;
    record["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  }
  if (ctx.failures.empty() && record.is_null()) return std::move(ctx.result);

  record["command"] = config.command;
  record["config"] = config_to_json(config);
  if (!ctx.failures.empty()) record["failures"] = ctx.failures;
  ctx.write("failure.json", record);
  ctx.result.exit_code = 1;
  return std::move(ctx.result);
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const auto config = parse_config(args);
    const auto result = run(config, out);
    if (result.exit_code != 0) {
      std::ifstream in(std::filesystem::path(config.out) / "failure.json");
      err << in.rdbuf();
    }
    return result.exit_code;
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UsageError) throw;
    err << e.what() << "\n";
    return 2;
  }
}

}  // namespace splinelab::cli
