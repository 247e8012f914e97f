#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csl/io.hpp"

namespace csl::cli {

using io::Json;

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"trajectory", "ensemble",  "born",        "heating",
                                              "master",     "exclusion", "td-conserve", "td-boost"};
  return names;
}

/// Command-line values that replace the corresponding file entries.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_traj;
  std::optional<double> dt;
  std::optional<std::size_t> n_steps;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

struct RunBlock {
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::size_t n_traj = 1;
  std::uint64_t base_seed = 0;
  std::size_t snapshot_stride = 1;
};

struct HamiltonianBlock {
  HamiltonianKind kind = HamiltonianKind::Zero;
  KineticScheme kinetic = KineticScheme::Spectral;
  double omega = 0.0;
  double center = 0.0;
};

struct StateBlock {
  enum class Kind { Gaussian, TwoGaussian };
  Kind kind = Kind::Gaussian;
  double center = 0.0;
  double sigma = 0.0;
  double k0 = 0.0;
  cplx alpha{1.0 / std::numbers::sqrt2, 0.0};
  cplx beta{1.0 / std::numbers::sqrt2, 0.0};
  double separation = 0.0;
};

struct BornBlock {
  double alpha2 = 0.5;
  double separation = 0.0;  // absolute; 0 means 6 r_C
  BornOptions options{};
};

struct ExclusionBlock {
  LogAxis lambda_axis{1e-20, 1e-4, 33};
  LogAxis r_C_axis{1e-9, 1e-5, 9};
  std::optional<std::string> bounds_file;
  std::vector<BoundRecord> records;
};

struct TdBlock {
  long n = 8;
  std::size_t dofs = 3;
  double quadratic = 0.0;
  double quartic = 1.0;
  double dt = 1e-3;
  std::size_t n_steps = 10000;
  std::size_t n_vectors = 100;
  double eta_min = -2.0;
  double eta_max = 2.0;
  std::size_t n_eta = 41;
  double amplitude = 0.5;  // scale of random initial matrices
};

struct RunConfig {
  std::string subcommand;
  std::optional<Grid1D> grid;
  std::optional<CslParams> params;
  bool lambda_given = false;
  RunBlock run;
  HamiltonianBlock hamiltonian;
  StateBlock state;
  std::vector<Observable> observables{Observable::Norm, Observable::PositionMean, Observable::PositionVariance,
                                      Observable::Energy};
  BornBlock born;
  ExclusionBlock exclusion;
  TdBlock td;
  std::string out = "out";
  unsigned workers = 1;  // never echoed: outputs must not depend on it
  Json echo;
};

inline Error config_error(const std::string& path, const std::string& reason) {
  return Error(ErrorCode::ConfigError, path + ": " + reason);
}

namespace detail {

// Typed access to an optional member of a JSON object with a field path
// for diagnostics.
class Node {
 public:
  Node(const Json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) throw config_error(path_, "expected an object");
  }

  bool present() const { return j_ != nullptr; }
  bool has(const char* key) const { return j_ && j_->contains(key); }
  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  Node child(const char* key) const {
    return Node(has(key) ? &j_->at(key) : nullptr, path(key));
  }

  const Json& raw(const char* key) const { return j_->at(key); }

  double number(const char* key) const {
    require_key(key);
    const Json& v = j_->at(key);
    if (!v.is_number()) throw config_error(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw config_error(path(key), "must be finite");
    return d;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_int(const char* key) const {
    require_key(key);
    const Json& v = j_->at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw config_error(path(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t unsigned_int(const char* key, std::uint64_t fallback) const {
    return has(key) ? unsigned_int(key) : fallback;
  }

  std::string string(const char* key) const {
    require_key(key);
    const Json& v = j_->at(key);
    if (!v.is_string()) throw config_error(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const char* key, const std::string& fallback) const { return has(key) ? string(key) : fallback; }

  cplx complex(const char* key, cplx fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
      return {v[0].get<double>(), v[1].get<double>()};
    throw config_error(path(key), "expected a number or a [re, im] pair");
  }

  void require_key(const char* key) const {
    if (!has(key)) throw config_error(path(key), "missing");
  }

 private:
  const Json* j_;
  std::string path_;
};

inline void positive(const std::string& path, double v) {
  if (!(v > 0.0)) throw config_error(path, "must be > 0");
}

inline LogAxis read_axis(const Node& n, LogAxis fallback) {
  if (!n.present()) return fallback;
  LogAxis a{n.number("lo", fallback.lo), n.number("hi", fallback.hi), n.unsigned_int("n", fallback.n)};
  positive(n.path("lo"), a.lo);
  positive(n.path("hi"), a.hi);
  return a;
}

inline Json axis_json(const LogAxis& a) { return Json{{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}}; }

inline bool needs_physics(const std::string& sub) {
  return sub == "trajectory" || sub == "ensemble" || sub == "born" || sub == "heating" || sub == "master";
}

inline bool needs_grid(const std::string& sub) {
  return sub == "trajectory" || sub == "ensemble" || sub == "heating" || sub == "master";
}

}  // namespace detail

/// Resolves a parsed config document plus command-line overrides into a
/// validated RunConfig. Every failure is a ConfigError naming the field.
inline RunConfig parse_config(const Json& doc, const std::string& subcommand, const Overrides& flags = {}) {
  using detail::Node;
  if (!doc.is_object()) throw config_error("<root>", "config must be a JSON object");
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), subcommand) == subs.end())
    throw config_error("subcommand", "unknown subcommand '" + subcommand + "'");

  RunConfig c;
  c.subcommand = subcommand;
  const Node root(&doc, "");
  Json echo{{"subcommand", subcommand}};

  // params
  const Node pn = root.child("params");
  if (detail::needs_physics(subcommand)) {
    if (!pn.present()) throw config_error("params", "missing");
    const bool has_gamma = pn.has("gamma"), has_lambda = pn.has("lambda");
    if (has_gamma && has_lambda) throw config_error("params", "give exactly one of gamma and lambda, not both");
    if (!has_gamma && !has_lambda) throw config_error("params", "one of gamma and lambda is required");
    const double r_C = pn.number("r_C");
    detail::positive(pn.path("r_C"), r_C);
    const auto dim = static_cast<int>(pn.unsigned_int("dim", 1));
    if (dim < 1 || dim > 3) throw config_error(pn.path("dim"), "must be 1, 2 or 3");
    CslParams p;
    p.r_C = r_C;
    p.dim = dim;
    p.m = pn.number("m", 1.0);
    p.m0 = pn.number("m0", 1.0);
    p.hbar = pn.number("hbar", 1.0);
    detail::positive(pn.path("m"), p.m);
    detail::positive(pn.path("m0"), p.m0);
    detail::positive(pn.path("hbar"), p.hbar);
    if (has_gamma) {
      p.gamma = pn.number("gamma");
      if (p.gamma < 0.0) throw config_error(pn.path("gamma"), "must be >= 0");
    } else {
      const double lambda = pn.number("lambda");
      if (lambda < 0.0) throw config_error(pn.path("lambda"), "must be >= 0");
      p.gamma = gamma_from_lambda(lambda, r_C, dim);
      c.lambda_given = true;
    }
    c.params = p;
    Json pe = io::params_json(p);
    pe["given"] = has_gamma ? "gamma" : "lambda";
    echo["params"] = pe;
  }

  // grid
  const Node gn = root.child("grid");
  if (detail::needs_grid(subcommand) || (subcommand == "born" && gn.present())) {
    if (!gn.present()) throw config_error("grid", "missing");
    const auto n_sites = gn.unsigned_int("n_sites");
    if (n_sites < Grid1D::kMinSites) throw config_error(gn.path("n_sites"), "must be at least 8");
    const double dx = gn.number("dx");
    detail::positive(gn.path("dx"), dx);
    const double x_min = gn.number("x_min", -0.5 * static_cast<double>(n_sites) * dx);
    c.grid = Grid1D(n_sites, dx, x_min);
    echo["grid"] = io::grid_json(*c.grid);
  }

  // run
  const Node rn = root.child("run");
  c.run.dt = flags.dt ? *flags.dt : rn.number("dt", 0.0);
  c.run.n_steps = flags.n_steps ? *flags.n_steps : rn.unsigned_int("n_steps", 0);
  c.run.n_traj = flags.n_traj ? *flags.n_traj : rn.unsigned_int("n_traj", 1);
  c.run.base_seed = flags.seed ? *flags.seed : rn.unsigned_int("base_seed", 0);
  c.run.snapshot_stride = rn.unsigned_int("snapshot_stride", 1);
  if (c.run.snapshot_stride == 0) throw config_error(rn.path("snapshot_stride"), "must be >= 1");
  if (c.run.n_traj == 0) throw config_error(rn.path("n_traj"), "must be >= 1");
  if (detail::needs_grid(subcommand)) {
    if (!(c.run.dt > 0.0)) throw config_error(rn.path("dt"), "must be > 0");
    if (c.run.n_steps == 0) throw config_error(rn.path("n_steps"), "must be >= 1");
  }
  if (subcommand == "heating" && c.run.n_traj < 100)
    throw config_error(rn.path("n_traj"), "heating needs at least 100 trajectories");
  echo["run"] = Json{{"dt", c.run.dt},
                     {"n_steps", c.run.n_steps},
                     {"n_traj", c.run.n_traj},
                     {"base_seed", c.run.base_seed},
                     {"snapshot_stride", c.run.snapshot_stride}};

  // hamiltonian
  const Node hn = root.child("hamiltonian");
  {
    const std::string def = subcommand == "heating" ? "free" : "zero";
    const std::string kind = hn.string("kind", def);
    if (kind == "zero")
      c.hamiltonian.kind = HamiltonianKind::Zero;
    else if (kind == "free")
      c.hamiltonian.kind = HamiltonianKind::Free;
    else if (kind == "harmonic")
      c.hamiltonian.kind = HamiltonianKind::Harmonic;
    else
      throw config_error(hn.path("kind"), "expected zero, free or harmonic");
    if (subcommand == "heating" && c.hamiltonian.kind != HamiltonianKind::Free)
      throw config_error(hn.path("kind"), "heating runs use the free Hamiltonian");
    const std::string scheme = hn.string("kinetic", "spectral");
    if (scheme == "spectral")
      c.hamiltonian.kinetic = KineticScheme::Spectral;
    else if (scheme == "stencil")
      c.hamiltonian.kinetic = KineticScheme::Stencil;
    else
      throw config_error(hn.path("kinetic"), "expected spectral or stencil");
    if (c.hamiltonian.kind == HamiltonianKind::Harmonic) {
      c.hamiltonian.omega = hn.number("omega");
      detail::positive(hn.path("omega"), c.hamiltonian.omega);
      c.hamiltonian.center = hn.number("center", 0.0);
    }
    if (detail::needs_grid(subcommand))
      echo["hamiltonian"] = Json{{"kind", to_string(c.hamiltonian.kind)},
                                 {"kinetic", to_string(c.hamiltonian.kinetic)},
                                 {"omega", c.hamiltonian.omega},
                                 {"center", c.hamiltonian.center}};
  }

  // initial state
  const Node sn = root.child("initial_state");
  if (detail::needs_grid(subcommand)) {
    const double r_C = c.params->r_C;
    const std::string kind = sn.string("kind", subcommand == "heating" ? "gaussian" : "two_gaussian");
    auto& s = c.state;
    s.sigma = sn.number("sigma", 0.5 * r_C);
    detail::positive(sn.path("sigma"), s.sigma);
    if (kind == "gaussian") {
      s.kind = StateBlock::Kind::Gaussian;
      s.center = sn.number("center", 0.0);
      s.k0 = sn.number("k0", 0.0);
    } else if (kind == "two_gaussian") {
      s.kind = StateBlock::Kind::TwoGaussian;
      s.separation = sn.number("separation", 6.0 * r_C);
      detail::positive(sn.path("separation"), s.separation);
      s.alpha = sn.complex("alpha", s.alpha);
      s.beta = sn.complex("beta", s.beta);
      if (std::abs(s.alpha) + std::abs(s.beta) == 0.0)
        throw config_error(sn.path("alpha"), "alpha and beta cannot both vanish");
    } else {
      throw config_error(sn.path("kind"), "expected gaussian or two_gaussian");
    }
    Json se{{"kind", kind}, {"sigma", s.sigma}};
    if (s.kind == StateBlock::Kind::Gaussian) {
      se["center"] = s.center;
      se["k0"] = s.k0;
    } else {
      se["separation"] = s.separation;
      se["alpha"] = {s.alpha.real(), s.alpha.imag()};
      se["beta"] = {s.beta.real(), s.beta.imag()};
    }
    echo["initial_state"] = se;
  }

  // observables
  if (root.has("observables")) {
    const Json& arr = root.raw("observables");
    if (!arr.is_array()) throw config_error("observables", "expected an array of names");
    c.observables.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "observables[" + std::to_string(i) + "]";
      if (!arr[i].is_string()) throw config_error(at, "expected a string");
      const auto name = arr[i].get<std::string>();
      if (name == "norm")
        c.observables.push_back(Observable::Norm);
      else if (name == "position_mean")
        c.observables.push_back(Observable::PositionMean);
      else if (name == "position_variance")
        c.observables.push_back(Observable::PositionVariance);
      else if (name == "energy")
        c.observables.push_back(Observable::Energy);
      else if (name == "region_probabilities")
        c.observables.push_back(Observable::RegionProbabilities);
      else
        throw config_error(at, "unknown observable '" + name + "'");
    }
  }
  if (subcommand == "trajectory" || subcommand == "ensemble") {
    Json oe = Json::array();
    for (auto o : c.observables) oe.push_back(to_string(o));
    echo["observables"] = oe;
  }

  // born
  if (subcommand == "born") {
    const Node bn = root.child("born");
    auto& b = c.born;
    b.alpha2 = bn.number("alpha2", 0.5);
    if (b.alpha2 < 0.0 || b.alpha2 > 1.0) throw config_error(bn.path("alpha2"), "must lie in [0, 1]");
    b.separation = bn.number("separation", 6.0 * c.params->r_C);
    auto& o = b.options;
    if (c.grid) {
      o.n_sites = c.grid->size();
      o.dx_over_rc = c.grid->dx() / c.params->r_C;
    }
    o.sigma_over_rc = bn.number("sigma_over_rc", o.sigma_over_rc);
    o.dt_gamma = bn.number("dt_gamma", o.dt_gamma);
    o.t_max_gamma = bn.number("t_max_gamma", o.t_max_gamma);
    o.sample_gamma = bn.number("sample_gamma", o.sample_gamma);
    o.epsilon = bn.number("epsilon", o.epsilon);
    detail::positive(bn.path("sigma_over_rc"), o.sigma_over_rc);
    detail::positive(bn.path("dt_gamma"), o.dt_gamma);
    detail::positive(bn.path("t_max_gamma"), o.t_max_gamma);
    detail::positive(bn.path("sample_gamma"), o.sample_gamma);
    if (!(o.epsilon > 0.0 && o.epsilon < 0.5)) throw config_error(bn.path("epsilon"), "must lie in (0, 0.5)");
    echo["born"] = Json{{"alpha2", b.alpha2},
                        {"separation", b.separation},
                        {"n_sites", o.n_sites},
                        {"dx_over_rc", o.dx_over_rc},
                        {"sigma_over_rc", o.sigma_over_rc},
                        {"dt_gamma", o.dt_gamma},
                        {"t_max_gamma", o.t_max_gamma},
                        {"sample_gamma", o.sample_gamma},
                        {"epsilon", o.epsilon}};
  }

  // exclusion
  if (subcommand == "exclusion") {
    const Node en = root.child("exclusion");
    auto& e = c.exclusion;
    e.lambda_axis = detail::read_axis(en.child("lambda_axis"), e.lambda_axis);
    e.r_C_axis = detail::read_axis(en.child("r_C_axis"), e.r_C_axis);
    if (en.has("bounds_file")) {
      e.bounds_file = en.string("bounds_file");
      Json bj;
      try {
        bj = Json::parse(io::read_text(*e.bounds_file));
      } catch (const nlohmann::json::exception& ex) {
        throw config_error(en.path("bounds_file"), std::string("malformed JSON: ") + ex.what());
      } catch (const Error& ex) {
        throw config_error(en.path("bounds_file"), ex.detail());
      }
      e.records = io::bound_records_from_json(bj);
      if (e.records.empty()) throw config_error(en.path("bounds_file"), "no bound records");
    } else {
      e.records = builtin_bounds();
    }
    Json recs = Json::array();
    for (const auto& r : e.records) recs.push_back(io::bound_record_json(r));
    echo["exclusion"] = Json{{"lambda_axis", detail::axis_json(e.lambda_axis)},
                             {"r_C_axis", detail::axis_json(e.r_C_axis)},
                             {"records", recs},
                             {"amplification", "point-like (m/m0)^2 only; structure factors not modelled"}};
  }

  // trace dynamics
  if (subcommand == "td-conserve" || subcommand == "td-boost") {
    const Node tn = root.child("td");
    auto& t = c.td;
    t.n = static_cast<long>(tn.unsigned_int("n", subcommand == "td-boost" ? 4 : 8));
    if (t.n < 2 || t.n > 64) throw config_error(tn.path("n"), "must lie in [2, 64]");
    t.amplitude = tn.number("amplitude", t.amplitude);
    detail::positive(tn.path("amplitude"), t.amplitude);
    Json te{{"n", t.n}, {"amplitude", t.amplitude}};
    if (subcommand == "td-conserve") {
      t.dofs = tn.unsigned_int("dofs", t.dofs);
      if (t.dofs == 0) throw config_error(tn.path("dofs"), "must be >= 1");
      t.quadratic = tn.number("quadratic", t.quadratic);
      t.quartic = tn.number("quartic", t.quartic);
      t.dt = flags.dt ? *flags.dt : tn.number("dt", t.dt);
      t.n_steps = flags.n_steps ? *flags.n_steps : tn.unsigned_int("n_steps", t.n_steps);
      detail::positive(tn.path("dt"), t.dt);
      if (t.n_steps == 0) throw config_error(tn.path("n_steps"), "must be >= 1");
      te["dofs"] = t.dofs;
      te["quadratic"] = t.quadratic;
      te["quartic"] = t.quartic;
      te["dt"] = t.dt;
      te["n_steps"] = t.n_steps;
    } else {
      t.n_vectors = tn.unsigned_int("n_vectors", t.n_vectors);
      t.eta_min = tn.number("eta_min", t.eta_min);
      t.eta_max = tn.number("eta_max", t.eta_max);
      t.n_eta = tn.unsigned_int("n_eta", t.n_eta);
      if (t.n_vectors == 0) throw config_error(tn.path("n_vectors"), "must be >= 1");
      if (t.n_eta < 2) throw config_error(tn.path("n_eta"), "must be >= 2");
      if (!(t.eta_max > t.eta_min)) throw config_error(tn.path("eta_max"), "must exceed eta_min");
      te["n_vectors"] = t.n_vectors;
      te["eta_min"] = t.eta_min;
      te["eta_max"] = t.eta_max;
      te["n_eta"] = t.n_eta;
    }
    echo["td"] = te;
  }

  // output
  const Node on = root.child("output");
  c.out = flags.out ? *flags.out : on.string("path", "out");
  if (c.out.empty()) throw config_error(on.path("path"), "must not be empty");
  c.workers = flags.workers ? *flags.workers : static_cast<unsigned>(rn.unsigned_int("workers", default_worker_count()));
  if (c.workers == 0) c.workers = 1;

  c.echo = std::move(echo);
  return c;
}

/// Reads and parses a config file. A missing or malformed file is a
/// ConfigError.
inline Json load_config_file(const std::string& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    throw config_error("--config", e.detail());
  }
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("--config", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace csl::cli
