// chaosqfi: experiment runner for QFI growth and saturation in chaotic spin models.

#include "chaosqfi/experiments.hpp"
#include "chaosqfi/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace chaosqfi;

namespace {

enum class Kind { Int, Double, String, Bool, IntList, DoubleList };

struct OptionSpec {
  std::string key;
  Kind kind;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
  std::function<json(ModelKind)> defaults;
  std::function<json(const json& settings, const fs::path& out, json& outputs)> run;
  bool has_model = true;
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

long long parse_int(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ArgumentError("--" + key + ": expected an integer, got '" + s + "'");
  return v;
}

double parse_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ArgumentError("--" + key + ": expected a number, got '" + s + "'");
  return v;
}

json convert(const OptionSpec& o, const std::string& raw) {
  switch (o.kind) {
    case Kind::Int: return parse_int(o.key, raw);
    case Kind::Double: return parse_double(o.key, raw);
    case Kind::String: return raw;
    case Kind::Bool:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw ArgumentError("--" + o.key + ": expected true or false");
    case Kind::IntList: {
      json a = json::array();
      for (const auto& p : split(raw, ',')) a.push_back(parse_int(o.key, p));
      return a;
    }
    case Kind::DoubleList: {
      json a = json::array();
      for (const auto& p : split(raw, ',')) a.push_back(parse_double(o.key, p));
      return a;
    }
  }
  return raw;
}

template <typename T>
T get(const json& s, const std::string& key) {
  if (!s.contains(key) || s.at(key).is_null()) throw ArgumentError("missing setting '" + key + "'");
  try {
    return s.at(key).get<T>();
  } catch (const json::exception&) {
    throw ArgumentError("setting '" + key + "' has the wrong type");
  }
}

unsigned threads_of(const json& s) {
  const auto t = get<long long>(s, "threads");
  if (t < 1 || t > 1024) throw ArgumentError("--threads must lie in [1, 1024]");
  return static_cast<unsigned>(t);
}

std::uint64_t seed_of(const json& s) {
  const auto v = get<long long>(s, "seed");
  if (v < 0) throw ArgumentError("--seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

int positive_int(const json& s, const std::string& key) {
  const auto v = get<long long>(s, key);
  if (v < 1 || v > 1000000) throw ArgumentError("setting '" + key + "' must be a positive integer");
  return static_cast<int>(v);
}

ModelSpec model_spec(const json& s, int n) {
  ModelSpec spec{parse_model(get<std::string>(s, "model")), n, {}};
  for (const auto& [k, v] : s.at("params").items()) spec.params[k] = v.get<double>();
  spec.validate();
  return spec;
}

std::ofstream open_output(const fs::path& out, const std::string& name, json& outputs) {
  std::ofstream f(out / name);
  if (!f) throw ArgumentError("cannot write " + (out / name).string());
  outputs.push_back(name);
  return f;
}

// ---------------------------------------------------------------------------
// defaults

int default_n(const std::string& cmd, ModelKind m) {
  const bool levels = cmd == "levels";
  switch (m) {
    case ModelKind::KickedTopCOE:
    case ModelKind::KickedTopCUE: return levels ? 400 : 100;
    case ModelKind::KickedTopCSE: return levels ? 401 : 101;
    case ModelKind::ChaoticIsing: return 12;
    case ModelKind::LMG: return levels ? 400 : 100;
  }
  return 10;
}

json common_defaults(const std::string& cmd, ModelKind m) {
  json p = json::object();
  for (const auto& [k, v] : default_parameters(m)) p[k] = v;
  return {{"model", to_string(m)}, {"n", default_n(cmd, m)}, {"seed", 1},  {"threads", 1},
          {"out", "out-" + cmd},   {"params", p}};
}

json evolve_defaults(ModelKind m) {
  const auto o = default_evolve_options(m);
  return {{"axes", "xyz"},
          {"t_start", o.window.t_start},
          {"step", o.window.step},
          {"steps", static_cast<long long>(std::llround(o.window.t_end / o.window.step))},
          {"early_step", o.early_step},
          {"sector", o.sector},
          {"growth_floor", nullptr},
          {"growth_ceiling_fraction", o.growth.ceiling_fraction}};
}

EvolveOptions evolve_options(const json& s) {
  EvolveOptions o;
  const auto steps = get<long long>(s, "steps");
  if (steps < 1) throw ArgumentError("--steps must be positive");
  o.window.t_start = get<double>(s, "t_start");
  o.window.step = get<double>(s, "step");
  if (!(o.window.step > 0.0)) throw ArgumentError("--step must be positive");
  o.window.t_end = static_cast<double>(steps) * o.window.step;
  if (o.window.t_end < o.window.t_start) throw ArgumentError("evolution ends before the averaging window starts");
  o.early_step = get<double>(s, "early_step");
  o.sector = get<std::string>(s, "sector");
  o.axes.clear();
  for (char c : get<std::string>(s, "axes")) o.axes.push_back(parse_axis(c));
  if (o.axes.empty()) throw ArgumentError("--axes must name at least one of x, y, z");
  if (s.contains("growth_floor") && !s.at("growth_floor").is_null()) o.growth.floor = get<double>(s, "growth_floor");
  o.growth.ceiling_fraction = get<double>(s, "growth_ceiling_fraction");
  return o;
}

const std::vector<OptionSpec> evolve_option_specs{
    {"axes", Kind::String, "generators, any of x, y, z"},
    {"t_start", Kind::Double, "start of the averaging window"},
    {"step", Kind::Double, "sampling step inside the window"},
    {"steps", Kind::Int, "number of steps; the window ends at steps*step"},
    {"early_step", Kind::Double, "sampling step before the window"},
    {"sector", Kind::String, "auto, none or <reflection|parity|flip>-<even|odd>"},
    {"growth_floor", Kind::Double, "lower QFI edge of the growth fit"},
    {"growth_ceiling_fraction", Kind::Double, "upper edge of the growth fit as a fraction of max QFI"},
};

const char* axis_color(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c"};
  return colors[k % 3];
}

// ---------------------------------------------------------------------------
// subcommands

json run_levels_cmd(const json& s, const fs::path& out, json& outputs) {
  const auto spec = model_spec(s, positive_int(s, "n"));
  LevelsOptions o;
  o.sector = get<std::string>(s, "sector");
  o.unfold.degree = positive_int(s, "unfold_degree");
  o.unfold.trim_fraction = get<double>(s, "trim_fraction");
  o.kramers_merge_tol = get<double>(s, "kramers_merge_tol");
  o.accept_threshold = get<double>(s, "accept_threshold");
  o.bins = positive_int(s, "bins");
  o.hist_max = get<double>(s, "hist_max");
  const auto r = run_levels(spec, o);

  {
    auto f = open_output(out, "levels_histogram.csv", outputs);
    write_histogram_csv(f, r.histogram);
  }
  {
    auto f = open_output(out, "levels_spacings.csv", outputs);
    f << "spacing\n";
    for (double x : r.sample.spacings) f << fmt(x) << '\n';
  }
  {
    auto f = open_output(out, "levels_ks.csv", outputs);
    f << "ensemble,ks_distance\n";
    for (auto e : all_ensembles) f << to_string(e) << ',' << fmt(r.test.ks_of(e)) << '\n';
  }
  {
    auto f = open_output(out, "levels_histogram.svg", outputs);
    std::vector<double> l, rr, d, ref;
    for (const auto& b : r.histogram) {
      l.push_back(b.left);
      rr.push_back(b.right);
      d.push_back(b.density);
      ref.push_back(b.surmise);
    }
    svg::histogram_plot(f, l, rr, d, ref, std::string("surmise ") + to_string(r.test.best),
                        {std::string(to_string(spec.model)) + " N=" + std::to_string(spec.n) + " (" + r.sector + ")",
                         "S", "P(S)"});
  }
  json summary = {{"spacings", r.sample.size()},
                  {"source", r.sample.source},
                  {"sector_dimensions", r.sector_dimensions},
                  {"best", to_string(r.test.best)},
                  {"verdict", r.test.verdict ? to_string(*r.test.verdict) : "none"}};
  for (auto e : all_ensembles) summary[std::string("ks_") + to_string(e)] = r.test.ks_of(e);
  std::cout << "levels: " << r.sample.size() << " spacings, verdict " << summary["verdict"].get<std::string>()
            << " (KS COE " << fmt(r.test.ks[0]) << ", CUE " << fmt(r.test.ks[1]) << ", CSE " << fmt(r.test.ks[2])
            << ")\n";
  return summary;
}

json run_qfi_evolve_cmd(const json& s, const fs::path& out, json& outputs) {
  const auto spec = model_spec(s, positive_int(s, "n"));
  const auto r = run_qfi_evolve(spec, evolve_options(s), threads_of(s));
  {
    auto f = open_output(out, "qfi_trace.csv", outputs);
    write_qfi_csv(f, r.trace);
  }
  json axes = json::array();
  {
    auto f = open_output(out, "qfi_summary.csv", outputs);
    f << "axis,mean,stddev,prediction,ratio,growth_rate,growth_valid,growth_t_begin,growth_t_end\n";
    for (std::size_t k = 0; k < r.trace.labels.size(); ++k) {
      const auto& g = r.growth[k];
      f << r.trace.labels[k] << ',' << fmt(r.trace.mean[k]) << ',' << fmt(r.trace.stddev[k]) << ','
        << fmt(r.prediction) << ',' << fmt(r.trace.mean[k] / r.prediction) << ',' << fmt(g.rate) << ','
        << (g.valid ? 1 : 0) << ',' << fmt(g.t_begin) << ',' << fmt(g.t_end) << '\n';
      axes.push_back({{"axis", r.trace.labels[k]},
                      {"mean", r.trace.mean[k]},
                      {"ratio", r.trace.mean[k] / r.prediction},
                      {"growth_rate", g.valid ? json(g.rate) : json(nullptr)}});
      std::cout << "qfi-evolve: axis " << r.trace.labels[k] << " plateau " << fmt(r.trace.mean[k]) << " = "
                << fmt(r.trace.mean[k] / r.prediction) << " x prediction " << fmt(r.prediction);
      if (g.valid) std::cout << ", growth rate " << fmt(g.rate);
      std::cout << '\n';
    }
  }
  {
    auto f = open_output(out, "qfi_trace.svg", outputs);
    std::vector<svg::Series> series;
    for (std::size_t k = 0; k < r.trace.labels.size(); ++k)
      series.push_back({"F[J" + r.trace.labels[k] + "]", r.trace.times, r.trace.qfi[k], axis_color(k)});
    series.push_back({"prediction", {r.trace.times.front(), r.trace.times.back()}, {r.prediction, r.prediction},
                      "#d62728", true});
    svg::line_plot(f, series, {std::string(to_string(spec.model)) + " N=" + std::to_string(spec.n), "t", "QFI",
                               false, true});
  }
  return {{"prediction", r.prediction}, {"sector", r.sector}, {"dimension", r.dimension}, {"axes", axes}};
}

json run_scaling_cmd(const json& s, const fs::path& out, json& outputs) {
  std::vector<int> sizes;
  for (const auto& v : s.at("n")) {
    const auto n = v.get<long long>();
    if (n < 1 || n > 100000) throw ArgumentError("sizes must be positive");
    sizes.push_back(static_cast<int>(n));
  }
  const auto model = parse_model(get<std::string>(s, "model"));
  std::map<std::string, double> params;
  for (const auto& [k, v] : s.at("params").items()) params[k] = v.get<double>();
  for (int n : sizes) ModelSpec{model, n, params}.validate();
  const auto r = run_scaling_sweep(model, sizes, params, evolve_options(s), threads_of(s));
  {
    auto f = open_output(out, "scaling.csv", outputs);
    f << "N";
    for (const auto& l : r.labels) f << ",F_" << l << ",sigma_" << l;
    f << ",prediction\n";
    for (const auto& p : r.points) {
      f << p.n;
      for (std::size_t k = 0; k < r.labels.size(); ++k) f << ',' << fmt(p.mean[k]) << ',' << fmt(p.stddev[k]);
      f << ',' << fmt(p.prediction) << '\n';
    }
  }
  json fits = json::array();
  {
    auto f = open_output(out, "scaling_fit.csv", outputs);
    f << "axis,prefactor,exponent\n";
    for (std::size_t k = 0; k < r.labels.size(); ++k) {
      f << r.labels[k] << ',' << fmt(r.fits[k].prefactor) << ',' << fmt(r.fits[k].exponent) << '\n';
      fits.push_back({{"axis", r.labels[k]}, {"prefactor", r.fits[k].prefactor}, {"exponent", r.fits[k].exponent}});
      std::cout << "scaling-sweep: F[J" << r.labels[k] << "] ~ " << fmt(r.fits[k].prefactor) << " N^"
                << fmt(r.fits[k].exponent) << '\n';
    }
  }
  {
    auto f = open_output(out, "scaling.svg", outputs);
    std::vector<svg::Series> series;
    std::vector<double> ns, pred;
    for (const auto& p : r.points) {
      ns.push_back(p.n);
      pred.push_back(p.prediction);
    }
    for (std::size_t k = 0; k < r.labels.size(); ++k) {
      std::vector<double> y;
      for (const auto& p : r.points) y.push_back(p.mean[k]);
      series.push_back({"F[J" + r.labels[k] + "]", ns, y, axis_color(k)});
    }
    series.push_back({"prediction", ns, pred, "#d62728", true});
    svg::line_plot(f, series, {std::string(to_string(model)) + " averaged QFI", "N", "QFI", true, true});
  }
  return {{"fits", fits}};
}

json run_phase_cmd(const json& s, const fs::path& out, json& outputs) {
  if (get<std::string>(s, "model") != "coe") throw ArgumentError("phase-diagram scans the coe top only");
  PhaseDiagramOptions o;
  o.a_min = get<double>(s, "a_min");
  o.a_max = get<double>(s, "a_max");
  o.c_min = get<double>(s, "c_min");
  o.c_max = get<double>(s, "c_max");
  o.a_points = positive_int(s, "a_points");
  o.c_points = positive_int(s, "c_points");
  o.n = positive_int(s, "n");
  const auto e = evolve_options(s);
  o.window = e.window;
  o.lyapunov.points = static_cast<std::size_t>(positive_int(s, "le_points"));
  o.lyapunov.n_iter = static_cast<std::size_t>(positive_int(s, "le_iterations"));
  o.lyapunov.n_transient = static_cast<std::size_t>(get<long long>(s, "le_transient"));
  o.lyapunov.seed = seed_of(s);
  o.le_threshold = get<double>(s, "le_threshold");
  o.qfi_threshold = get<double>(s, "qfi_threshold");
  const auto pd = phase_diagram_scan(o, threads_of(s));
  {
    auto f = open_output(out, "phase_diagram.csv", outputs);
    write_phase_diagram_csv(f, pd);
  }
  Eigen::MatrixXd le(o.a_points, o.c_points), q(o.a_points, o.c_points);
  for (std::size_t i = 0; i < pd.cells.size(); ++i) {
    le(static_cast<Index>(i / o.c_points), static_cast<Index>(i % o.c_points)) = pd.cells[i].lambda_le;
    q(static_cast<Index>(i / o.c_points), static_cast<Index>(i % o.c_points)) = pd.cells[i].qfi_over_prediction;
  }
  {
    auto f = open_output(out, "phase_summary.csv", outputs);
    f << "mask_correlation,le_threshold,qfi_threshold\n"
      << fmt(pd.mask_correlation) << ',' << fmt(o.le_threshold) << ',' << fmt(o.qfi_threshold) << '\n';
  }
  {
    auto f = open_output(out, "phase_le.svg", outputs);
    svg::heatmap(f, le, o.c_min, o.c_max, o.a_min, o.a_max, {"classical Lyapunov exponent", "C", "A"}, false);
  }
  {
    auto f = open_output(out, "phase_qfi.svg", outputs);
    svg::heatmap(f, q, o.c_min, o.c_max, o.a_min, o.a_max, {"averaged QFI / N(N+2)/3", "C", "A"}, false);
  }
  std::cout << "phase-diagram: " << pd.cells.size() << " cells, mask correlation " << fmt(pd.mask_correlation)
            << '\n';
  return {{"mask_correlation", std::isfinite(pd.mask_correlation) ? json(pd.mask_correlation) : json(nullptr)}};
}

json run_random_cmd(const json& s, const fs::path& out, json& outputs) {
  const auto k = get<long long>(s, "k");
  if (k < 2 || k > 100000) throw ArgumentError("--k must lie in [2, 100000]");
  const auto samples = get<long long>(s, "samples");
  if (samples < 100) throw ArgumentError("--samples must be at least 100");
  const auto e = parse_ensemble(get<std::string>(s, "ensemble"));
  const auto r = run_random_qfi(k, e, static_cast<std::size_t>(samples), seed_of(s), threads_of(s));
  const double z = (r.estimate.mean - r.exact) / r.estimate.standard_error;
  {
    auto f = open_output(out, "random_qfi.csv", outputs);
    f << "K,ensemble,samples,mean,standard_error,exact,universal,z_score\n"
      << k << ',' << to_string(e) << ',' << samples << ',' << fmt(r.estimate.mean) << ','
      << fmt(r.estimate.standard_error) << ',' << fmt(r.exact) << ',' << fmt(r.universal) << ',' << fmt(z) << '\n';
  }
  std::cout << "random-qfi: K=" << k << ' ' << to_string(e) << " mean " << fmt(r.estimate.mean) << " +- "
            << fmt(r.estimate.standard_error) << ", exact " << fmt(r.exact) << '\n';
  return {{"mean", r.estimate.mean}, {"standard_error", r.estimate.standard_error}, {"exact", r.exact}};
}

json run_wigner_cmd(const json& s, const fs::path& out, json& outputs) {
  const auto spec = model_spec(s, positive_int(s, "n"));
  if (model_representation(spec.model) != Representation::Symmetric)
    throw ArgumentError("wigner needs a collective (symmetric) model");
  const int n_theta = positive_int(s, "n_theta"), n_phi = positive_int(s, "n_phi");
  const unsigned threads = threads_of(s);
  const auto sd = diagonalize(build_model(spec));
  const auto psi0 = default_initial_state(spec.model, spec.n);
  std::vector<std::pair<std::string, StateVector>> states;
  for (const auto& tv : s.at("times")) {
    const double t = tv.get<double>();
    if (t < 0.0) throw ArgumentError("times must be non-negative");
    if (is_floquet(spec.model) && t != std::floor(t)) throw ArgumentError("Floquet times must be integers");
    states.emplace_back("t" + fmt(t), evolve(psi0, sd, t));
  }
  if (get<bool>(s, "include_random")) {
    Rng rng = shard_rng(seed_of(s), 0);
    states.emplace_back("random", sample_random_state(psi0.basis(), Ensemble::CUE, rng));
  }
  auto widths = open_output(out, "wigner_widths.csv", outputs);
  widths << "state,axis,width,crossed\n";
  json summary = json::array();
  for (const auto& [label, psi] : states) {
    const auto field = wigner_grid(psi, n_theta, n_phi, threads);
    {
      auto f = open_output(out, "wigner_" + label + ".csv", outputs);
      write_field_csv(f, field);
    }
    {
      auto f = open_output(out, "wigner_" + label + ".svg", outputs);
      svg::heatmap(f, field.values, 0.0, 2.0 * std::numbers::pi, 0.0, std::numbers::pi,
                   {"Wigner function, state " + label, "phi", "theta"});
    }
    json w = {{"state", label}, {"integral", field.integral()}};
    for (Axis a : all_axes) {
      const auto rw = rotation_fidelity_width(psi, a);
      widths << label << ',' << axis_name(a) << ',' << fmt(rw.angle) << ',' << (rw.crossed ? 1 : 0) << '\n';
      w[std::string("width_") + axis_name(a)] = rw.angle;
    }
    summary.push_back(w);
  }
  std::cout << "wigner: " << states.size() << " fields written\n";
  return {{"states", summary}};
}

json run_krylov_cmd(const json& s, const fs::path& out, json& outputs) {
  const auto spec = model_spec(s, positive_int(s, "n"));
  KrylovOptions o;
  o.tol = get<double>(s, "tol");
  o.merge_tol = get<double>(s, "merge_tol");
  const auto r = run_krylov_dim(spec, o);
  {
    auto f = open_output(out, "krylov.csv", outputs);
    f << "model,N,hilbert_dimension,K_initial_state,K_eigenstate\n"
      << to_string(spec.model) << ',' << spec.n << ',' << r.hilbert_dimension << ',' << r.from_initial_state << ','
      << r.from_eigenstate << '\n';
  }
  std::cout << "krylov-dim: K = " << r.from_initial_state << " of " << r.hilbert_dimension << " (eigenstate "
            << r.from_eigenstate << ")\n";
  return {{"K_initial_state", r.from_initial_state}, {"K_eigenstate", r.from_eigenstate}};
}

std::vector<Command> commands() {
  std::vector<Command> c;
  c.push_back({"levels",
               "level-spacing statistics against the Wigner surmises",
               {{"sector", Kind::String, "auto, none or <reflection|parity|flip>-<even|odd|pooled>"},
                {"unfold_degree", Kind::Int, "staircase polynomial degree"},
                {"trim_fraction", Kind::Double, "fraction trimmed at each spectral edge"},
                {"kramers_merge_tol", Kind::Double, "phase tolerance for Kramers doublets"},
                {"accept_threshold", Kind::Double, "KS distance below which a verdict is given"},
                {"bins", Kind::Int, "histogram bins"},
                {"hist_max", Kind::Double, "upper histogram edge"}},
               [](ModelKind m) {
                 auto d = common_defaults("levels", m);
                 d.update({{"sector", "auto"},
                           {"unfold_degree", 10},
                           {"trim_fraction", 0.1},
                           {"kramers_merge_tol", 1e-8},
                           {"accept_threshold", 0.1},
                           {"bins", 60},
                           {"hist_max", 4.0}});
                 return d;
               },
               run_levels_cmd});
  c.push_back({"qfi-evolve", "QFI time evolution, plateau and growth rate", evolve_option_specs,
               [](ModelKind m) {
                 auto d = common_defaults("qfi-evolve", m);
                 d.update(evolve_defaults(m));
                 return d;
               },
               run_qfi_evolve_cmd});
  c.push_back({"scaling-sweep", "averaged QFI versus N with a power-law fit (--n takes a list)", evolve_option_specs,
               [](ModelKind m) {
                 auto d = common_defaults("scaling-sweep", m);
                 d.update(evolve_defaults(m));
                 switch (m) {
                   case ModelKind::KickedTopCSE: d["n"] = {21, 41, 61, 81, 101, 121, 141, 161, 181, 201}; break;
                   case ModelKind::ChaoticIsing: d["n"] = {8, 10, 12}; break;
                   case ModelKind::LMG: d["n"] = {50, 100, 200, 400}; break;
                   default: d["n"] = {20, 40, 60, 80, 100, 120, 140, 160, 180, 200};
                 }
                 return d;
               },
               run_scaling_cmd});
  auto phase_specs = evolve_option_specs;
  phase_specs.insert(phase_specs.end(), {{"a_min", Kind::Double, "smallest A"},
                                         {"a_max", Kind::Double, "largest A"},
                                         {"c_min", Kind::Double, "smallest C"},
                                         {"c_max", Kind::Double, "largest C"},
                                         {"a_points", Kind::Int, "grid points along A"},
                                         {"c_points", Kind::Int, "grid points along C"},
                                         {"le_points", Kind::Int, "initial points per Lyapunov ensemble"},
                                         {"le_iterations", Kind::Int, "kicks per Lyapunov orbit"},
                                         {"le_transient", Kind::Int, "discarded transient kicks"},
                                         {"le_threshold", Kind::Double, "chaotic mask threshold on the LE"},
                                         {"qfi_threshold", Kind::Double, "chaotic mask threshold on QFI/prediction"}});
  c.push_back({"phase-diagram", "classical LE and averaged QFI over the (A, C) plane of the coe top", phase_specs,
               [](ModelKind) {
                 auto d = common_defaults("phase-diagram", ModelKind::KickedTopCOE);
                 d.update(evolve_defaults(ModelKind::KickedTopCOE));
                 d.erase("params");
                 PhaseDiagramOptions o;
                 d.update({{"n", o.n},
                           {"a_min", o.a_min},
                           {"a_max", o.a_max},
                           {"c_min", o.c_min},
                           {"c_max", o.c_max},
                           {"a_points", o.a_points},
                           {"c_points", o.c_points},
                           {"le_points", o.lyapunov.points},
                           {"le_iterations", o.lyapunov.n_iter},
                           {"le_transient", o.lyapunov.n_transient},
                           {"le_threshold", o.le_threshold},
                           {"qfi_threshold", o.qfi_threshold}});
                 return d;
               },
               run_phase_cmd});
  c.push_back({"random-qfi",
               "Monte-Carlo QFI of Jz over random states (--model picks the ensemble, --n sets K = n + 1)",
               {{"k", Kind::Int, "Hilbert-space dimension K"},
                {"ensemble", Kind::String, "coe, cue or cse"},
                {"samples", Kind::Int, "number of random states"}},
               [](ModelKind) {
                 return json{{"k", 101}, {"ensemble", "cue"}, {"samples", 10000}, {"seed", 1},
                             {"threads", 1}, {"out", "out-random-qfi"}};
               },
               run_random_cmd, false});
  c.push_back({"wigner", "Wigner fields and rotation widths of evolved states",
               {{"times", Kind::DoubleList, "comma-separated evolution times"},
                {"n_theta", Kind::Int, "polar grid points"},
                {"n_phi", Kind::Int, "azimuthal grid points"},
                {"include_random", Kind::Bool, "add a random state for comparison"}},
               [](ModelKind m) {
                 auto d = common_defaults("wigner", m);
                 d.update({{"times", {0, 3, 2000}}, {"n_theta", 64}, {"n_phi", 128}, {"include_random", true}});
                 return d;
               },
               run_wigner_cmd});
  c.push_back({"krylov-dim", "Krylov dimension of the initial state and of an eigenstate",
               {{"tol", Kind::Double, "weight threshold (amplitude)"},
                {"merge_tol", Kind::Double, "eigenvalue merge tolerance"}},
               [](ModelKind m) {
                 auto d = common_defaults("krylov-dim", m);
                 KrylovOptions o;
                 d.update({{"tol", o.tol}, {"merge_tol", o.merge_tol}});
                 return d;
               },
               run_krylov_cmd});
  return c;
}

json load_config(const std::string& path, const std::string& cmd) {
  std::ifstream f(path);
  if (!f) throw ArgumentError("cannot read config file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ArgumentError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config file must hold a JSON object");
  // a manifest from an earlier run is accepted as a config
  if (j.contains("settings")) {
    if (j.contains("command") && j["command"] != cmd)
      throw ArgumentError("manifest belongs to subcommand " + j["command"].get<std::string>());
    j = j["settings"];
  }
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"Quantum Fisher information in chaotic spin models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CHAOSQFI_VERSION);
  const auto cmds = commands();

  struct Raw {
    std::map<std::string, std::string> values;
    std::vector<std::string> params;
    std::string config;
    std::map<std::string, CLI::Option*> opts;
  };
  std::vector<Raw> raws(cmds.size());
  std::vector<CLI::App*> subs;
  const std::vector<OptionSpec> common{{"model", Kind::String, "coe, cue, cse, ising or lmg"},
                                       {"n", Kind::String, "number of qubits N"},
                                       {"seed", Kind::Int, "random seed"},
                                       {"out", Kind::String, "output directory"},
                                       {"threads", Kind::Int, "worker threads"}};
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    auto& raw = raws[i];
    auto add = [&](const OptionSpec& o) {
      std::string flag = "--" + o.key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      raw.opts[o.key] = sub->add_option(flag, raw.values[o.key], o.help);
    };
    for (const auto& o : common) add(o);
    for (const auto& o : cmds[i].options) add(o);
    sub->add_option("--param", raw.params, "model parameter as name=value (repeatable)");
    sub->add_option("--config", raw.config, "JSON config file or manifest of an earlier run");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::BadArguments);
  }

  std::size_t ci = 0;
  while (!subs[ci]->parsed()) ++ci;
  const Command& cmd = cmds[ci];
  const Raw& raw = raws[ci];
  auto given = [&](const std::string& key) { return raw.opts.at(key)->count() > 0; };

  const json config = raw.config.empty() ? json::object() : load_config(raw.config, cmd.name);
  for (const auto& [k, v] : config.items()) {
    const bool known = k == "params" || raw.opts.count(k);
    if (!known) throw ArgumentError("unknown config key '" + k + "' for " + cmd.name);
  }

  // model first: it selects the remaining defaults
  ModelKind model = ModelKind::KickedTopCOE;
  json settings;
  if (cmd.has_model) {
    std::string name = "coe";
    if (config.contains("model")) name = config["model"].get<std::string>();
    if (given("model")) name = raw.values.at("model");
    model = parse_model(name);
    settings = cmd.defaults(model);
  } else {
    settings = cmd.defaults(model);
  }

  for (const auto& [k, v] : config.items())
    if (k == "params") {
      if (!settings.contains("params")) throw ArgumentError(cmd.name + " takes no model parameters");
      for (const auto& [pk, pv] : v.items()) settings["params"][pk] = pv;
    } else {
      settings[k] = v;
    }

  std::vector<OptionSpec> all = common;
  all.insert(all.end(), cmd.options.begin(), cmd.options.end());
  for (const auto& o : all) {
    if (!given(o.key)) continue;
    const std::string& v = raw.values.at(o.key);
    if (o.key == "model") {
      if (cmd.has_model) settings["model"] = v;
      else settings["ensemble"] = v;
    } else if (o.key == "n") {
      if (cmd.name == "scaling-sweep") settings["n"] = convert({o.key, Kind::IntList, ""}, v);
      else if (!cmd.has_model) settings["k"] = parse_int("n", v) + 1;
      else settings["n"] = parse_int("n", v);
    } else {
      settings[o.key] = convert(o, v);
    }
  }
  for (const auto& p : raw.params) {
    if (!settings.contains("params")) throw ArgumentError(cmd.name + " takes no model parameters");
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw ArgumentError("--param expects name=value, got '" + p + "'");
    settings["params"][p.substr(0, eq)] = parse_double("param", p.substr(eq + 1));
  }
  if (settings.contains("params")) {
    std::map<std::string, double> params;
    for (const auto& [k, v] : settings["params"].items()) {
      if (!v.is_number()) throw ArgumentError("parameter '" + k + "' must be a number");
      params[k] = v.get<double>();
    }
    ModelSpec{model, 3, params}.validate_parameters();
  }

  const fs::path out = get<std::string>(settings, "out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ArgumentError("cannot create output directory " + out.string());

  json manifest = {{"tool", "chaosqfi"},
                   {"version", CHAOSQFI_VERSION},
                   {"command", cmd.name},
                   {"settings", settings},
                   {"started_utc", utc_now()},
                   {"status", "running"},
                   {"outputs", json::array()}};
  auto write_manifest = [&] {
    std::ofstream f(out / "manifest.json");
    if (!f) throw ArgumentError("cannot write manifest to " + out.string());
    f << manifest.dump(2) << '\n';
  };
  write_manifest();
  json outputs = json::array();
  try {
    manifest["summary"] = cmd.run(settings, out, outputs);
    manifest["status"] = "ok";
  } catch (const Error& e) {
    manifest["status"] = "failed";
    manifest["error"] = e.what();
    manifest["outputs"] = outputs;
    manifest["finished_utc"] = utc_now();
    write_manifest();
    throw;
  }
  manifest["outputs"] = outputs;
  manifest["finished_utc"] = utc_now();
  write_manifest();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return static_cast<int>(ExitCode::Capacity);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::Numerical);
  }
}
