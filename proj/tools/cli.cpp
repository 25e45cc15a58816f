#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "finsler/comparison.hpp"
#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/measures.hpp"
#include "finsler/spray.hpp"
#include "finsler/suite.hpp"
#include "finsler/zoo.hpp"

namespace finsler::cli {

using nlohmann::json;

int RunConfig::resolved_dim() const {
  if (dim) return *dim;
  return metric == "berwald_product" ? 3 : 2;
}

namespace {

template <class T>
T take(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigurationError("config key '" + key + "' has the wrong type");
  }
}

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigurationError("config '" + where + "' must be an object");
}

}  // namespace

void apply_json(RunConfig& cfg, const json& j) {
  expect_object(j, "<root>");
  for (const auto& [key, v] : j.items()) {
    if (key == "metric") cfg.metric = take<std::string>(v, key);
    else if (key == "dim") cfg.dim = take<int>(v, key);
    else if (key == "domain") cfg.domain = take<std::string>(v, key);
    else if (key == "samples") cfg.samples = take<int>(v, key);
    else if (key == "seed") cfg.seed = take<std::uint64_t>(v, key);
    else if (key == "mc_samples") cfg.mc_samples = take<long long>(v, key);
    else if (key == "jobs") cfg.jobs = take<int>(v, key);
    else if (key == "output_dir") cfg.output_dir = take<std::string>(v, key);
    else if (key == "params") {
      expect_object(v, key);
      for (const auto& [p, pv] : v.items()) cfg.params[p] = take<double>(pv, key + "." + p);
    } else if (key == "tolerances") {
      expect_object(v, key);
      for (const auto& [p, pv] : v.items()) cfg.tolerances[p] = take<double>(pv, key + "." + p);
    } else if (key == "geodesic") {
      expect_object(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        if (k == "from") cfg.from = take<std::vector<double>>(x, name);
        else if (k == "dir") cfg.dir = take<std::vector<double>>(x, name);
        else if (k == "t") cfg.t = take<double>(x, name);
        else if (k == "dt") cfg.dt = take<double>(x, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      }
    } else if (key == "volume") {
      expect_object(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        if (k == "radii") cfg.radii = take<std::vector<double>>(x, name);
        else if (k == "source") cfg.source = take<std::string>(x, name);
        else if (k == "center") cfg.center = take<std::vector<double>>(x, name);
        else if (k == "angles") cfg.angles = take<int>(x, name);
        else if (k == "polar_z") cfg.polar_z = take<int>(x, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      }
    } else if (key == "model") {
      expect_object(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        if (k == "lambda") cfg.lambda = take<double>(x, name);
        else if (k == "delta") cfg.delta = take<double>(x, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      }
    } else if (key == "compare") {
      expect_object(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        if (k == "conjugate_dir") cfg.conjugate_dir = take<std::vector<double>>(x, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      }
    } else {
      throw ConfigurationError("unknown config key '" + key + "'");
    }
  }
}

json to_json(const RunConfig& cfg) {
  json j;
  j["metric"] = cfg.metric;
  j["dim"] = cfg.resolved_dim();
  j["params"] = cfg.params;
  j["domain"] = cfg.domain;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed;
  j["mc_samples"] = cfg.mc_samples;
  j["jobs"] = cfg.jobs;
  j["tolerances"] = cfg.tolerances;
  j["output_dir"] = cfg.output_dir;
  j["geodesic"] = {{"from", cfg.from}, {"dir", cfg.dir}, {"t", cfg.t}, {"dt", cfg.dt}};
  json vol = {{"radii", cfg.radii}, {"center", cfg.center}, {"angles", cfg.angles},
              {"polar_z", cfg.polar_z}};
  if (cfg.source) vol["source"] = *cfg.source;
  j["volume"] = vol;
  json model = json::object();
  if (cfg.lambda) model["lambda"] = *cfg.lambda;
  if (cfg.delta) model["delta"] = *cfg.delta;
  j["model"] = model;
  j["compare"] = {{"conjugate_dir", cfg.conjugate_dir}};
  return j;
}

std::string default_output_dir() {
  const char* env = std::getenv("FINSLER_OUTPUT_DIR");
  return env && *env ? env : ".";
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

// results come back in index order whatever the job count
template <class F>
auto parallel_map(int count, int jobs, F f) -> std::vector<decltype(f(0))> {
  using R = decltype(f(0));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&](int first) {
    for (int i = first; i < count; i += std::max(1, jobs)) {
      try {
        slots[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs <= 1 || count <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < std::min(jobs, count); ++k) pool.emplace_back(worker, k);
    for (auto& t : pool) t.join();
  }
  std::vector<R> out;
  for (int i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

// config with the fields that do not change results removed
json embedded(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  j.erase("jobs");
  j["command"] = cfg.command;
  return j;
}

std::string csv_preamble(const std::string& table, const RunConfig& cfg) {
  return "# finsler-" + table + " v1\n# config: " + embedded(cfg).dump() + "\n";
}

std::filesystem::path write_file(const RunConfig& cfg, const std::string& name,
                                 const std::string& text) {
  const std::filesystem::path dir = cfg.output_dir.empty() ? default_output_dir() : cfg.output_dir;
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigurationError("cannot write " + path.string());
  f << text;
  return path;
}

Vec to_vec(const std::vector<double>& v, int n, const std::string& what, Vec fallback) {
  if (v.empty()) return fallback;
  if (static_cast<int>(v.size()) != n)
    throw ConfigurationError(what + " needs " + std::to_string(n) + " components");
  return Eigen::Map<const Vec>(v.data(), n);
}

std::pair<double, double> default_model(const FinslerMetric& m) {
  const int n = m.dim();
  if (m.id() == "funk") return {-0.25, (n + 1) / (2.0 * (n - 1))};
  if (m.id() == "hilbert" || m.id() == "hyperbolic") return {-1.0, 0.0};
  if (m.id() == "sphere") return {1.0, 0.0};
  return {0.0, 0.0};
}

DistanceSource resolve_source(RunConfig& cfg) {
  if (!cfg.source) {
    if (cfg.domain == "ball" && cfg.metric == "funk") cfg.source = "funk_closed_form";
    else if (cfg.domain == "ball" && cfg.metric == "hilbert") cfg.source = "hilbert_closed_form";
    else cfg.source = "geodesic_polar";
  }
  return parse_distance_source(*cfg.source);
}

MetricPtr build_metric(const RunConfig& cfg) {
  if (cfg.metric.empty()) throw ConfigurationError("no metric given (--metric or config 'metric')");
  return make_metric(cfg.metric, cfg.resolved_dim(), cfg.params, cfg.domain);
}

VolumeOptions volume_options(const RunConfig& cfg) {
  VolumeOptions o;
  o.samples = cfg.mc_samples;
  o.seed = cfg.seed;
  o.angles = cfg.angles;
  o.polar_z = cfg.polar_z;
  return o;
}

int cmd_verify(RunConfig& cfg, bool timings, std::ostream& out) {
  auto m = build_metric(cfg);
  SuiteConfig sc;
  sc.samples = cfg.samples;
  sc.seed = cfg.seed;
  sc.mc_samples = cfg.mc_samples;
  sc.tolerances = cfg.tolerances;
  const SuiteReport rep = run_verify(*m, sc);

  json j;
  j["config"] = embedded(cfg);
  j["metric"] = rep.metric;
  j["checks"] = json::array();
  std::ostringstream csv;
  csv << csv_preamble("verify", cfg) << "id,status,value,tolerance,anchor,note\n";
  for (const auto& c : rep.checks) {
    json row = {{"id", c.id},       {"anchor", c.anchor},       {"status", to_string(c.status)},
                {"value", c.value}, {"tolerance", c.tolerance}, {"note", c.note}};
    if (timings) row["runtime_s"] = c.runtime_s;
    j["checks"].push_back(row);
    csv << c.id << "," << to_string(c.status) << "," << num(c.value) << "," << num(c.tolerance)
        << "," << csv_field(c.anchor) << "," << csv_field(c.note) << "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %-8s %11.3e <= %9.2e  %7.2fs", c.id.c_str(),
                  to_string(c.status).c_str(), c.value, c.tolerance, c.runtime_s);
    out << line << (c.note.empty() ? "" : "  " + c.note) << "\n";
  }
  j["failures"] = rep.failures();
  j["integrity_error"] = rep.integrity_error;
  const std::string stem = "verify_" + cfg.metric;
  write_file(cfg, stem + ".json", j.dump(2) + "\n");
  write_file(cfg, stem + ".csv", csv.str());
  out << rep.metric << ": " << rep.checks.size() << " checks, " << rep.failures()
      << " failed\n";
  if (rep.integrity_error) return integrity_error;
  return rep.ok() ? ok : check_failure;
}

int cmd_curvature(RunConfig& cfg, std::ostream& out) {
  auto m = build_metric(cfg);
  const int n = m->dim();
  const auto samples = halton_samples(*m, cfg.samples);
  const DensityField field = bh_density_field(*m);
  const auto rows = parallel_map(static_cast<int>(samples.size()), cfg.jobs, [&](int i) {
    const TangentSample& s = samples[i];
    const CurvatureReport r = riemann_curvature(*m, s);
    const double F = m->eval(s.x, s.y);
    std::ostringstream os;
    os << i;
    for (int k = 0; k < n; ++k) os << "," << num(s.x[k]);
    for (int k = 0; k < n; ++k) os << "," << num(s.y[k]);
    os << "," << num(F) << "," << num(r.ricci / (F * F));
    os << "," << (r.principal.empty() ? "" : num(r.principal.front()));
    os << "," << (r.principal.empty() ? "" : num(r.principal.back()));
    os << "," << (r.flag_constant ? num(*r.flag_constant) : "");
    os << "," << num(r.ry_y) << "," << num(r.self_adjoint_defect);
    os << "," << num(s_curvature_jet(*m, s, field.value(s.x), field.gradient(s.x)) / F) << "\n";
    return os.str();
  });
  std::ostringstream csv;
  csv << csv_preamble("curvature", cfg) << "sample";
  for (int k = 0; k < n; ++k) csv << ",x" << k + 1;
  for (int k = 0; k < n; ++k) csv << ",y" << k + 1;
  csv << ",F,ricci_over_F2,kappa_min,kappa_max,kappa_constant,ry_y,self_adjoint_defect,"
         "S_over_F\n";
  for (const auto& r : rows) csv << r;
  const auto path = write_file(cfg, "curvature_" + cfg.metric + ".csv", csv.str());
  out << m->describe() << ": " << rows.size() << " samples -> " << path.string() << "\n";
  return ok;
}

int cmd_geodesic(RunConfig& cfg, std::ostream& out) {
  auto m = build_metric(cfg);
  const int n = m->dim();
  const Vec x = to_vec(cfg.from, n, "--from", Vec::Zero(n));
  const Vec y = to_vec(cfg.dir, n, "--dir", Vec::Unit(n, 0));
  if (cfg.dt < 0.0) throw ConfigurationError("--dt must be >= 0");
  make_sample(*m, x, y);
  const GeodesicPath path = integrate_geodesic(*m, x, y, cfg.t);
  std::string body = path_csv(*m, path, cfg.dt);
  const auto nl = body.find('\n');
  body.insert(nl + 1, "# config: " + embedded(cfg).dump() + "\n");
  const auto file = write_file(cfg, "geodesic_" + cfg.metric + ".csv", body);
  out << m->describe() << ": t_end = " << num(path.t_end)
      << (path.exited ? " (left the chart)" : "") << " -> " << file.string() << "\n";
  return ok;
}

int cmd_volume(RunConfig& cfg, std::ostream& out) {
  auto m = build_metric(cfg);
  const int n = m->dim();
  if (cfg.radii.empty()) cfg.radii = {0.5, 1.0, 2.0};
  const DistanceSource src = resolve_source(cfg);
  const Vec c = to_vec(cfg.center, n, "--center", Vec::Zero(n));
  const auto [dl, dd] = default_model(*m);
  if (!cfg.lambda) cfg.lambda = dl;
  if (!cfg.delta) cfg.delta = dd;
  const ModelVolume model{*cfg.lambda, *cfg.delta, n};
  const VolumeOptions vo = volume_options(cfg);

  const auto rows = parallel_map(static_cast<int>(cfg.radii.size()), cfg.jobs, [&](int i) {
    const double r = cfg.radii[i];
    const MeasureEstimate v = ball_volume(*m, {c, r, src, cfg.domain}, vo);
    std::string note = v.note;
    double mv = std::nan("");
    if (r <= model.max_radius()) mv = model.value(r);
    else note += (note.empty() ? "" : "; ") + std::string("radius beyond the model range");
    std::ostringstream os;
    os << num(r) << "," << num(v.value) << "," << num(v.stderr_) << "," << to_string(v.method)
       << "," << num(mv) << "," << num(v.value / mv) << "," << (v.flagged ? 1 : 0) << ","
       << csv_field(note) << "\n";
    return os.str();
  });
  std::ostringstream csv;
  csv << csv_preamble("volume", cfg) << "r,mu,stderr,method,model,ratio,flagged,note\n";
  for (const auto& r : rows) csv << r;
  const auto path = write_file(cfg, "volume_" + cfg.metric + ".csv", csv.str());
  out << csv.str().substr(csv.str().find('\n', csv.str().find("# config")) + 1);
  out << "-> " << path.string() << "\n";
  return ok;
}

int cmd_compare(RunConfig& cfg, std::ostream& out) {
  auto m = build_metric(cfg);
  const int n = m->dim();
  if (cfg.radii.empty()) cfg.radii = {0.25, 0.5, 1.0, 2.0};
  const DistanceSource src = resolve_source(cfg);
  const Vec c = to_vec(cfg.center, n, "--center", Vec::Zero(n));
  const auto [dl, dd] = default_model(*m);
  if (!cfg.lambda) cfg.lambda = dl;
  if (!cfg.delta) cfg.delta = dd;
  RatioOptions ro;
  ro.source = src;
  ro.domain = cfg.domain;
  ro.volume = volume_options(cfg);
  ro.sweep_samples = cfg.samples;
  const RatioReport rep = ratio_monotonicity_check(*m, c, *cfg.lambda, *cfg.delta, cfg.radii, ro);

  std::ostringstream csv;
  csv << csv_preamble("compare", cfg) << "r,mu,stderr,model,ratio,flagged\n";
  json rows = json::array();
  for (const auto& r : rep.rows) {
    csv << num(r.r) << "," << num(r.volume) << "," << num(r.volume_err) << "," << num(r.model)
        << "," << num(r.ratio) << "," << (r.flagged ? 1 : 0) << "\n";
    rows.push_back({{"r", r.r}, {"mu", r.volume}, {"stderr", r.volume_err}, {"model", r.model},
                    {"ratio", r.ratio}, {"flagged", r.flagged}});
  }
  json j;
  j["config"] = embedded(cfg);
  j["metric"] = m->describe();
  j["sweep"] = {{"ok", rep.sweep.ok},
                {"samples", rep.sweep.samples},
                {"min_ricci_over_F2", rep.sweep.min_ricci},
                {"min_S_over_F", rep.sweep.min_s},
                {"failure", rep.sweep.failure}};
  j["ratio"] = {{"skipped", rep.skipped},
                {"non_increasing", rep.non_increasing},
                {"max_increase", rep.max_increase},
                {"note", rep.note},
                {"rows", rows}};

  bool failed = !rep.skipped && !rep.non_increasing;
  json cp = {{"applicable", *cfg.lambda > 0.0}};
  if (*cfg.lambda > 0.0) {
    Vec fallback = Vec::Unit(n, n > 1 ? 1 : 0);
    const Vec dir = to_vec(cfg.conjugate_dir, n, "--conj-dir", fallback);
    try {
      const ConjugatePoint p = conjugate_point_bound(*m, c, dir, *cfg.lambda, cfg.samples);
      cp.update({{"found", p.found},
                 {"inconclusive", p.inconclusive},
                 {"t", p.t},
                 {"bound", p.bound},
                 {"within_bound", p.within_bound},
                 {"note", p.note}});
      failed = failed || (p.found && !p.within_bound);
    } catch (const PreconditionError& e) {
      cp["note"] = e.what();
    }
  } else {
    cp["note"] = "needs lambda > 0";
  }
  j["conjugate_point"] = cp;
  const std::string stem = "compare_" + cfg.metric;
  write_file(cfg, stem + ".csv", csv.str());
  write_file(cfg, stem + ".json", j.dump(2) + "\n");

  out << m->describe() << "  lambda = " << num(*cfg.lambda) << "  delta = " << num(*cfg.delta)
      << "\n";
  if (rep.skipped) out << rep.note << "\n";
  for (const auto& r : rep.rows)
    out << "  r = " << num(r.r) << "  ratio = " << num(r.ratio) << (r.flagged ? "  (flagged)" : "")
        << "\n";
  if (!rep.skipped) out << (rep.non_increasing ? "ratio non-increasing\n" : "ratio INCREASES\n");
  if (cp.contains("found") && cp["found"].get<bool>())
    out << "conjugate point at t = " << num(cp["t"].get<double>()) << " (bound "
        << num(cp["bound"].get<double>()) << ")\n";
  else if (cp.contains("note"))
    out << "conjugate point: " << cp["note"].get<std::string>() << "\n";
  return failed ? check_failure : ok;
}

void print_catalog(std::ostream& err) {
  err << "available metrics:\n";
  for (const auto& e : catalog()) err << "  " << e.id << "  " << e.summary << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finsler geometry experiment runner"};
  app.require_subcommand(1);

  // flag values, applied over the config file only when given
  std::string config_path, metric, domain, out_dir, source;
  int dim = 0, samples = 0, jobs = 1, angles = 0, polar_z = 0;
  std::uint64_t seed = 1;
  long long mc = 0;
  double t = 0, dt = 0, lambda = 0, delta = 0;
  std::vector<std::string> params, tols;
  std::vector<double> from, dir, radii, center, conj;
  bool timings = false;

  std::vector<std::pair<CLI::App*, std::vector<CLI::Option*>>> subs;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    s->add_option("--metric", metric, "catalog metric id");
    s->add_option("--dim", dim, "dimension");
    s->add_option("--domain", domain, "Funk/Hilbert domain: ball or quartic:<eps>");
    s->add_option("--param", params, "metric parameter key=value (repeatable)");
    s->add_option("--samples", samples, "sample count");
    s->add_option("--seed", seed, "random seed");
    s->add_option("--mc-samples", mc, "Monte Carlo samples per volume");
    s->add_option("--jobs", jobs, "worker threads");
    s->add_option("--tol", tols, "tolerance override check_id=value (repeatable)");
    s->add_option("--out", out_dir, "output directory (default $FINSLER_OUTPUT_DIR or .)");
  };
  auto volume_flags = [&](CLI::App* s) {
    s->add_option("--radii", radii, "radius grid")->delimiter(',');
    s->add_option("--source", source,
                  "funk_closed_form, hilbert_closed_form or geodesic_polar");
    s->add_option("--center", center, "ball centre")->delimiter(',');
    s->add_option("--angles", angles, "angular nodes (n = 2)");
    s->add_option("--polar-z", polar_z, "polar nodes (n = 3)");
    s->add_option("--lambda", lambda, "Ricci lower bound lambda");
    s->add_option("--delta", delta, "S-curvature lower bound delta");
  };

  auto* verify = app.add_subcommand("verify", "identity suite for one metric");
  common(verify);
  verify->add_flag("--timings", timings, "include per-check runtimes in the JSON");
  auto* curvature = app.add_subcommand("curvature", "curvature table over sample points");
  common(curvature);
  auto* geodesic = app.add_subcommand("geodesic", "geodesic path dump");
  common(geodesic);
  geodesic->add_option("--from", from, "start point")->delimiter(',');
  geodesic->add_option("--dir", dir, "initial velocity")->delimiter(',');
  geodesic->add_option("--t", t, "parameter length");
  geodesic->add_option("--dt", dt, "output spacing (0: integrator steps)");
  auto* volume = app.add_subcommand("volume", "ball volume table");
  common(volume);
  volume_flags(volume);
  auto* compare = app.add_subcommand("compare", "volume ratio and conjugate point comparison");
  common(compare);
  volume_flags(compare);
  compare->add_option("--conj-dir", conj, "direction for the conjugate point")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const std::string& name) {
    try {
      return sub->count(name) > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };

  RunConfig cfg;
  cfg.command = sub->get_name();
  try {
    if (given("--config")) {
      std::ifstream f(config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ConfigurationError(std::string("config is not valid JSON: ") + e.what());
      }
      apply_json(cfg, j);
    }
    if (given("--metric")) cfg.metric = metric;
    if (given("--dim")) cfg.dim = dim;
    if (given("--domain")) cfg.domain = domain;
    if (given("--samples")) cfg.samples = samples;
    if (given("--seed")) cfg.seed = seed;
    if (given("--mc-samples")) cfg.mc_samples = mc;
    if (given("--jobs")) cfg.jobs = jobs;
    if (given("--out")) cfg.output_dir = out_dir;
    auto split = [](const std::string& kv, const std::string& flag) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigurationError(flag + " expects key=value, got '" + kv + "'");
      try {
        return std::pair{kv.substr(0, eq), std::stod(kv.substr(eq + 1))};
      } catch (const std::exception&) {
        throw ConfigurationError(flag + " value is not a number in '" + kv + "'");
      }
    };
    for (const auto& p : params) {
      const auto [k, v] = split(p, "--param");
      cfg.params[k] = v;
    }
    for (const auto& p : tols) {
      const auto [k, v] = split(p, "--tol");
      cfg.tolerances[k] = v;
    }
    if (given("--from")) cfg.from = from;
    if (given("--dir")) cfg.dir = dir;
    if (given("--t")) cfg.t = t;
    if (given("--dt")) cfg.dt = dt;
    if (given("--radii")) cfg.radii = radii;
    if (given("--source")) cfg.source = source;
    if (given("--center")) cfg.center = center;
    if (given("--angles")) cfg.angles = angles;
    if (given("--polar-z")) cfg.polar_z = polar_z;
    if (given("--lambda")) cfg.lambda = lambda;
    if (given("--delta")) cfg.delta = delta;
    if (given("--conj-dir")) cfg.conjugate_dir = conj;

    if (cfg.samples < 1) throw ConfigurationError("samples must be >= 1");
    if (cfg.jobs < 1) throw ConfigurationError("jobs must be >= 1");
    if (!cfg.metric.empty()) {
      bool known = false;
      for (const auto& e : catalog()) known = known || e.id == cfg.metric;
      if (!known) {
        err << "error: unknown metric id '" << cfg.metric << "'\n";
        print_catalog(err);
        return usage_error;
      }
    }

    if (cfg.command == "verify") return cmd_verify(cfg, timings, out);
    if (cfg.command == "curvature") return cmd_curvature(cfg, out);
    if (cfg.command == "geodesic") return cmd_geodesic(cfg, out);
    if (cfg.command == "volume") return cmd_volume(cfg, out);
    if (cfg.command == "compare") return cmd_compare(cfg, out);
    return usage_error;
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << "\n";
    if (std::string(e.what()).find("metric") != std::string::npos) print_catalog(err);
    return usage_error;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const NumericalIntegrityError& e) {
    err << "numerical integrity error: " << e.what() << "\n";
    return integrity_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return check_failure;
  }
}

}  // namespace finsler::cli
