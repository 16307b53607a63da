#pragma once

// Command-line driver: verify, simulate and bracket-table over JSON configs.
//
// Exit codes: 0 success, 1 a verification residual above its threshold or a
// numerical failure, 2 malformed config or usage error.

#include <lpext/integrate.hpp>
#include <lpext/io.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace lpext::cli {

using io::json;

inline constexpr const char* output_dir_env = "LPEXT_OUTPUT_DIR";

// ---------------------------------------------------------------------------
// Check lists

struct Check {
  std::string name;
  double residual;
  double threshold;
  bool pass() const { return residual < threshold; }
};

class CheckList {
 public:
  void add(std::string name, double residual, double threshold) {
    checks_.push_back({std::move(name), residual, threshold});
  }
  void add_flag(std::string name, bool ok) { add(std::move(name), ok ? 0.0 : 1.0, 0.5); }

  /// Restricts to the checks named in the config's "checks" list (prefix
  /// match) and applies any threshold overrides given there.
  void apply_selection(const json& cfg) {
    const json* sel = io::optional_field(cfg, "checks");
    if (!sel) return;
    if (!sel->is_array()) io::config_error("checks", "expected an array");
    std::vector<Check> kept;
    std::vector<std::pair<std::string, std::optional<double>>> wanted;
    for (std::size_t k = 0; k < sel->size(); ++k) {
      const json& e = (*sel)[k];
      const std::string path = io::join("checks", k);
      if (e.is_string()) {
        wanted.emplace_back(e.get<std::string>(), std::nullopt);
      } else {
        std::optional<double> thr;
        if (const json* t = io::optional_field(e, "threshold")) thr = io::as_double(*t, io::join(path, "threshold"));
        wanted.emplace_back(io::as_string(io::field(e, path, "name"), io::join(path, "name")), thr);
      }
    }
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      bool matched = false;
      for (const Check& c : checks_)
        if (c.name.rfind(wanted[k].first, 0) == 0) matched = true;
      if (!matched) io::config_error(io::join("checks", k), "no check named '" + wanted[k].first + "'");
    }
    for (Check c : checks_)
      for (const auto& [prefix, thr] : wanted)
        if (c.name.rfind(prefix, 0) == 0) {
          if (thr) c.threshold = *thr;
          kept.push_back(c);
          break;
        }
    checks_ = std::move(kept);
  }

  bool all_pass() const {
    for (const auto& c : checks_)
      if (!c.pass()) return false;
    return true;
  }
  const std::vector<Check>& checks() const { return checks_; }

  json to_json() const {
    json arr = json::array();
    for (const auto& c : checks_)
      arr.push_back({{"name", c.name}, {"residual", c.residual}, {"threshold", c.threshold}, {"pass", c.pass()}});
    return arr;
  }

 private:
  std::vector<Check> checks_;
};

// ---------------------------------------------------------------------------
// Config helpers

inline json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "field '<file>': cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("field '<root>': invalid JSON: ") + e.what());
  }
}

inline std::string system_of(const json& cfg) {
  const std::string s = io::as_string(io::field(cfg, "", "system"), "system");
  for (const char* known : {"extension", "restricted", "semidirect_qm", "rigid_body", "sequence"})
    if (s == known) return s;
  io::config_error("system", "unknown system '" + s + "'");
}

inline bool complex_field(const json& cfg) {
  const json* f = io::optional_field(cfg, "field");
  if (!f) return false;
  const std::string s = io::as_string(*f, "field");
  if (s != "real" && s != "complex") io::config_error("field", "expected 'real' or 'complex'");
  return s == "complex";
}

inline IntegratorConfig parse_integrator(const json& cfg) {
  IntegratorConfig ic;
  const json* j = io::optional_field(cfg, "integrator");
  if (!j) return ic;
  const std::string p = "integrator";
  if (!j->is_object()) io::config_error(p, "expected an object");
  if (const json* m = io::optional_field(*j, "method")) {
    try {
      ic.method = parse_method(io::as_string(*m, io::join(p, "method")));
    } catch (const Error&) {
      io::config_error(io::join(p, "method"), "expected 'rk4' or 'implicit_midpoint'");
    }
  }
  if (const json* v = io::optional_field(*j, "dt")) ic.dt = io::as_double(*v, io::join(p, "dt"));
  if (const json* v = io::optional_field(*j, "steps")) ic.steps = static_cast<int>(io::as_positive(*v, io::join(p, "steps")));
  if (const json* v = io::optional_field(*j, "newton_tol")) ic.newton_tol = io::as_double(*v, io::join(p, "newton_tol"));
  if (const json* v = io::optional_field(*j, "newton_max_iter"))
    ic.newton_max_iter = static_cast<int>(io::as_positive(*v, io::join(p, "newton_max_iter")));
  if (!(ic.dt > 0)) io::config_error(io::join(p, "dt"), "must be positive");
  if (!(ic.newton_tol > 0)) io::config_error(io::join(p, "newton_tol"), "must be positive");
  return ic;
}

inline std::string function_name(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (const json* f = io::optional_field(j, "function")) return io::as_string(*f, io::join(path, "function"));
  if (const json* f = io::optional_field(j, "name")) return io::as_string(*f, io::join(path, "name"));
  io::config_error(path, "expected a function name or an object with \"function\"");
}

/// Builtin functions on a Lie-Poisson space of dimension `dim`: "linear"
/// (coeffs), "quadratic" (matrix, default identity), "trace_poly"
/// (coefficients, n), "rigid_body" (inertia), "norm2", "zero".
template <Scalar T>
SmoothFunction<T> parse_function(const json& j, const std::string& path, const DualPairing<T>& pairing) {
  const Eigen::Index dim = pairing.dim();
  const std::string name = function_name(j, path);
  if (name == "linear") {
    Vec<T> x = io::as_vector<T>(io::field(j, path, "coeffs"), io::join(path, "coeffs"));
    if (x.size() != dim) io::config_error(io::join(path, "coeffs"), "expected " + std::to_string(dim) + " entries");
    return functions::linear<T>(x, pairing);
  }
  if (name == "quadratic") {
    const json* m = io::optional_field(j, "matrix");
    Mat<T> a = m ? io::as_square<T>(*m, io::join(path, "matrix"), dim) : Mat<T>(Mat<T>::Identity(dim, dim));
    return functions::quadratic<T>(a, pairing);
  }
  if (name == "trace_poly") {
    const Eigen::Index n = io::as_positive(io::field(j, path, "n"), io::join(path, "n"));
    if (n * n != dim) io::config_error(io::join(path, "n"), "n*n must equal the space dimension " + std::to_string(dim));
    Vec<T> co = io::as_vector<T>(io::field(j, path, "coefficients"), io::join(path, "coefficients"));
    return functions::trace_poly<T>(std::vector<T>(co.data(), co.data() + co.size()), n, pairing);
  }
  if (name == "rigid_body") {
    Vec<T> in = io::as_vector<T>(io::field(j, path, "inertia"), io::join(path, "inertia"));
    if (in.size() != dim) io::config_error(io::join(path, "inertia"), "expected " + std::to_string(dim) + " entries");
    for (Eigen::Index k = 0; k < in.size(); ++k)
      if (std::abs(in(k)) == 0.0) io::config_error(io::join(io::join(path, "inertia"), static_cast<std::size_t>(k)), "must be nonzero");
    return functions::rigid_body<T>(in, pairing);
  }
  if (name == "norm2") {
    SmoothFunction<T> f;
    f.eval = [](const Vec<T>& b) { return b.squaredNorm(); };
    f.grad = [pairing](const Vec<T>& b) { return pairing.solve(Vec<T>(T(2) * b.conjugate())); };
    return f;
  }
  if (name == "zero") return functions::constant<T>(0.0);
  io::config_error(path, "unknown function '" + name + "'");
}

// ---------------------------------------------------------------------------
// Simulation models on realified coordinates

struct Model {
  std::vector<std::string> labels;
  Eigen::VectorXd state0;
  VectorField field;
  ScalarObservable hamiltonian;
  std::vector<std::pair<std::string, ScalarObservable>> casimirs;
};

template <Scalar T>
Eigen::VectorXd to_real(const Vec<T>& v) {
  if constexpr (is_complex<T>::value)
    return realify(v);
  else
    return v;
}

template <Scalar T>
Vec<T> from_real(const Eigen::VectorXd& r) {
  if constexpr (is_complex<T>::value)
    return complexify(r);
  else
    return r;
}

template <Scalar T>
std::vector<std::string> real_labels(const std::vector<std::string>& names) {
  if constexpr (!is_complex<T>::value) {
    return names;
  } else {
    std::vector<std::string> out;
    for (const auto& n : names) {
      out.push_back(n + "_re");
      out.push_back(n + "_im");
    }
    return out;
  }
}

inline std::string casimir_name(const json& e, const std::string& path) {
  if (e.is_string()) return e.get<std::string>();
  if (const json* n = io::optional_field(e, "name")) return io::as_string(*n, io::join(path, "name"));
  return function_name(e, path);
}

/// Casimir entries are strings naming builtin functions or objects
/// {"name": column, "function": builtin, ...params}; `make` maps one entry to
/// an observable of the complex or real coordinates.
template <class Make>
std::vector<std::pair<std::string, ScalarObservable>> parse_casimirs(const json& cfg, const json& fallback, Make make) {
  const json* c = io::optional_field(cfg, "casimirs");
  const json& list = c ? *c : fallback;
  if (!list.is_array()) io::config_error("casimirs", "expected an array");
  std::vector<std::pair<std::string, ScalarObservable>> out;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string path = io::join("casimirs", k);
    out.emplace_back("casimir_" + casimir_name(list[k], path), make(list[k], path));
  }
  return out;
}

inline const json& hamiltonian_config(const json& cfg) { return io::field(cfg, "", "hamiltonian"); }

inline Model rigid_body_model(const json& cfg) {
  Vec<double> inertia = io::as_vector<double>(io::field(cfg, "", "inertia"), "inertia");
  if (inertia.size() != 3) io::config_error("inertia", "expected 3 entries");
  for (Eigen::Index k = 0; k < 3; ++k)
    if (!(inertia(k) > 0)) io::config_error(io::join("inertia", static_cast<std::size_t>(k)), "must be positive");
  Vec<double> b0 = io::as_vector<double>(io::field(cfg, "", "state0"), "state0");
  if (b0.size() != 3) io::config_error("state0", "expected 3 entries");
  const LiePoissonSpace<double> space(so3<double>(), DualPairing<double>::identity(3));
  const SmoothFunction<double> h = functions::rigid_body<double>(inertia, space.pairing);
  Model m;
  m.labels = {"b1", "b2", "b3"};
  m.state0 = b0;
  m.field = [h, space](const Eigen::VectorXd& b) { return hamiltonian_vector_field(h, Vec<double>(b), space); };
  m.hamiltonian = [h](const Eigen::VectorXd& b) { return h(b); };
  m.casimirs = parse_casimirs(cfg, json::array({{{"name", "b2"}, {"function", "norm2"}}}),
                              [&space](const json& e, const std::string& path) -> ScalarObservable {
                                const SmoothFunction<double> f = parse_function<double>(e, path, space.pairing);
                                return [f](const Eigen::VectorXd& b) { return f(b); };
                              });
  return m;
}

template <Scalar T>
Model extension_model(const json& cfg) {
  const ExtensionSpec<T> spec = io::parse_extension<T>(cfg, "");
  const CompatibilityReport rep = check_compatibility(spec);
  if (rep.max_residual() >= tol::compat_pass)
    throw Error(ErrorKind::invalid_extension, "extension data fail compatibility: derivation " +
                                                  std::to_string(rep.derivation) + ", cocycle " +
                                                  std::to_string(rep.cocycle) + ", representation " +
                                                  std::to_string(rep.representation));
  const DualPairing<T> pairing = spec.sum_pairing();
  Vec<T> x0 = io::as_vector<T>(io::field(cfg, "", "state0"), "state0");
  if (x0.size() != spec.dim()) io::config_error("state0", "expected " + std::to_string(spec.dim()) + " entries");
  const SmoothFunction<T> h = parse_function<T>(hamiltonian_config(cfg), "hamiltonian", pairing);
  std::vector<std::string> names;
  for (const auto& l : spec.n.labels()) names.push_back("c_" + l);
  for (const auto& l : spec.h.labels()) names.push_back("a_" + l);
  Model m;
  m.labels = real_labels<T>(names);
  m.state0 = to_real<T>(x0);
  m.field = [h, spec](const Eigen::VectorXd& x) {
    return to_real<T>(extension_hamiltonian_field(h, from_real<T>(x), spec));
  };
  m.hamiltonian = [h](const Eigen::VectorXd& x) { return h(from_real<T>(x)); };
  m.casimirs = parse_casimirs(cfg, json::array(), [&pairing](const json& e, const std::string& path) -> ScalarObservable {
    const SmoothFunction<T> f = parse_function<T>(e, path, pairing);
    return [f](const Eigen::VectorXd& x) { return f(from_real<T>(x)); };
  });
  return m;
}

inline double trace_power(const Mat<cdouble>& m, long long k) {
  Mat<cdouble> p = Mat<cdouble>::Identity(m.rows(), m.cols());
  for (long long i = 0; i < k; ++i) p = p * m;
  return p.trace().real();
}

inline std::uint64_t config_seed(const json& cfg, std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) return *cli_seed;
  if (const json* s = io::optional_field(cfg, "seed")) {
    const long long v = io::as_int(*s, "seed");
    if (v < 0) io::config_error("seed", "must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }
  return 0;
}

// Restricted system

inline std::vector<cdouble> complex_list(const json& j, const std::string& path) {
  Vec<cdouble> v = io::as_vector<cdouble>(j, path);
  return std::vector<cdouble>(v.data(), v.data() + v.size());
}

/// "linear" (y0, x0 blocks), "trace_poly" (a, b), "coupling" (A, B), "norm2".
inline restricted::RestrictedFunction parse_restricted_function(const json& j, const std::string& path,
                                                                restricted::BlockDims d) {
  using namespace restricted;
  const std::string name = function_name(j, path);
  if (name == "linear") {
    const CMat y0 = io::as_square<cdouble>(io::field(j, path, "y0"), io::join(path, "y0"), d.plus);
    const BlockOperator x0 = io::parse_blocks<OperatorTag>(io::field(j, path, "x0"), io::join(path, "x0"), d);
    return restricted::functions::linear(y0, x0);
  }
  if (name == "trace_poly") {
    std::vector<cdouble> a, b;
    if (const json* v = io::optional_field(j, "a")) a = complex_list(*v, io::join(path, "a"));
    if (const json* v = io::optional_field(j, "b")) b = complex_list(*v, io::join(path, "b"));
    return restricted::functions::trace_poly(d, a, b);
  }
  if (name == "coupling") {
    const CMat a = io::as_square<cdouble>(io::field(j, path, "A"), io::join(path, "A"), d.plus);
    const CMat b = io::as_square<cdouble>(io::field(j, path, "B"), io::join(path, "B"), d.plus);
    return restricted::functions::coupling(d, a, b);
  }
  if (name == "norm2") {
    return make_function(
        d, [](const RestrictedState& s) { return to_coords(s).squaredNorm(); },
        [](const RestrictedState& s) {
          return RestrictedGradient{CMat(2.0 * s.kappa.adjoint()),
                                    BlockOperator::from_full(CMat(2.0 * s.sigma.full().adjoint()), s.dims())};
        });
  }
  if (name == "trace_power") {
    const std::string slot = io::as_string(io::field(j, path, "slot"), io::join(path, "slot"));
    const long long k = io::as_positive(io::field(j, path, "k"), io::join(path, "k"));
    if (slot != "kappa" && slot != "sigma") io::config_error(io::join(path, "slot"), "expected 'kappa' or 'sigma'");
    return make_function(d, [slot, k](const RestrictedState& s) {
      return trace_power(slot == "kappa" ? s.kappa : s.sigma.full(), k);
    });
  }
  io::config_error(path, "unknown function '" + name + "'");
}

/// state0: {"constructor": "random_block", "seed", "scale"} |
/// {"constructor": "diagonal_block", "kappa", "plus", "minus"} (diagonals) |
/// {"kappa": matrix, "sigma": blocks}.
inline restricted::RestrictedState parse_restricted_state(const json& j, const std::string& path,
                                                          restricted::BlockDims d, std::uint64_t seed) {
  using namespace restricted;
  if (const json* c = io::optional_field(j, "constructor")) {
    const std::string kind = io::as_string(*c, io::join(path, "constructor"));
    if (kind == "random_block") {
      std::uint64_t s = seed;
      if (const json* v = io::optional_field(j, "seed")) s = static_cast<std::uint64_t>(io::as_int(*v, io::join(path, "seed")));
      double scale = 1.0;
      if (const json* v = io::optional_field(j, "scale")) scale = io::as_double(*v, io::join(path, "scale"));
      std::mt19937_64 rng(s);
      return RestrictedState::random(d, rng, scale);
    }
    if (kind == "diagonal_block") {
      auto diag = [&](const char* key, Eigen::Index n) {
        CVec v = io::as_vector<cdouble>(io::field(j, path, key), io::join(path, key));
        if (v.size() != n) io::config_error(io::join(path, key), "expected " + std::to_string(n) + " entries");
        return v;
      };
      const CVec k = diag("kappa", d.plus), p = diag("plus", d.plus), m = diag("minus", d.minus);
      return {CMat(k.asDiagonal()), BlockPredual::diagonal(p, m)};
    }
    io::config_error(io::join(path, "constructor"), "expected 'random_block' or 'diagonal_block'");
  }
  RestrictedState s{io::as_square<cdouble>(io::field(j, path, "kappa"), io::join(path, "kappa"), d.plus),
                    io::parse_blocks<PredualTag>(io::field(j, path, "sigma"), io::join(path, "sigma"), d)};
  return s;
}

inline std::vector<std::string> restricted_labels(restricted::BlockDims d) {
  std::vector<std::string> names;
  auto block = [&](const std::string& tag, Eigen::Index r, Eigen::Index c) {
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) names.push_back(tag + std::to_string(i + 1) + std::to_string(j + 1));
  };
  block("kappa", d.plus, d.plus);
  block("s_pp", d.plus, d.plus);
  block("s_mm", d.minus, d.minus);
  block("s_pm", d.plus, d.minus);
  block("s_mp", d.minus, d.plus);
  return real_labels<cdouble>(names);
}

inline Model restricted_model(const json& cfg, std::uint64_t seed) {
  using namespace restricted;
  const BlockDims d = io::parse_block_dims(io::field(cfg, "", "dims"), "dims");
  const RestrictedState s0 = parse_restricted_state(io::field(cfg, "", "state0"), "state0", d, seed);
  const RestrictedFunction h = parse_restricted_function(hamiltonian_config(cfg), "hamiltonian", d);
  Model m;
  m.labels = restricted_labels(d);
  m.state0 = realify(to_coords(s0));
  m.field = [h, d](const Eigen::VectorXd& x) {
    return realify(to_coords(restricted_hamiltonian_field(h, state_from_coords(complexify(x), d))));
  };
  m.hamiltonian = [h](const Eigen::VectorXd& x) { return h(complexify(x)); };
  m.casimirs = parse_casimirs(cfg, json::array(), [d](const json& e, const std::string& path) -> ScalarObservable {
    const RestrictedFunction f = parse_restricted_function(e, path, d);
    return [f](const Eigen::VectorXd& x) { return f(complexify(x)); };
  });
  return m;
}

// Semidirect quantum system

/// "linear_rho" (H0), "quadratic_v" (A), "coupled" (H0, A, lambda), "norm2",
/// "trace_power" (slot "rho", k), "vnorm2".
inline qm::QFunction parse_qm_function(const json& j, const std::string& path, Eigen::Index n) {
  using namespace qm;
  const std::string name = function_name(j, path);
  auto square = [&](const char* key) { return io::as_square<cdouble>(io::field(j, path, key), io::join(path, key), n); };
  auto guarded = [&](const char* key, auto make) {
    try {
      return make();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::invalid_input) io::config_error(io::join(path, key), e.what());
      throw;
    }
  };
  if (name == "linear_rho") return hamiltonians::linear_rho(square("H0"));
  if (name == "quadratic_v") {
    const CMat a = square("A");
    return guarded("A", [&] { return hamiltonians::quadratic_v(a); });
  }
  if (name == "coupled") {
    const CMat h0 = square("H0"), a = square("A");
    const double lambda = io::as_double(io::field(j, path, "lambda"), io::join(path, "lambda"));
    return guarded("A", [&] { return hamiltonians::coupled(h0, a, lambda); });
  }
  if (name == "norm2")
    return make_function(n, [](const QState& s) { return s.v.squaredNorm() + s.rho.squaredNorm(); });
  if (name == "vnorm2") return make_function(n, [](const QState& s) { return s.v.squaredNorm(); });
  if (name == "trace_power") {
    const long long k = io::as_positive(io::field(j, path, "k"), io::join(path, "k"));
    return make_function(n, [k](const QState& s) { return trace_power(s.rho, k); });
  }
  io::config_error(path, "unknown function '" + name + "'");
}

/// Realified (v, rho) with v itself (not conjugated) for readable output.
inline Eigen::VectorXd qstate_to_real(const qm::QState& s) {
  Vec<cdouble> c(s.n() + s.n() * s.n());
  c << s.v, flatten<cdouble>(s.rho);
  return realify(c);
}

inline qm::QState qstate_from_real(const Eigen::VectorXd& x, Eigen::Index n) {
  const Vec<cdouble> c = complexify(x);
  return {c.head(n), unflatten<cdouble>(c.tail(n * n), n, n)};
}

inline qm::QState parse_qm_state(const json& cfg, Eigen::Index n, std::uint64_t seed) {
  const json& j = io::field(cfg, "", "state0");
  if (const json* c = io::optional_field(j, "constructor")) {
    const std::string kind = io::as_string(*c, "state0.constructor");
    if (kind != "random") io::config_error("state0.constructor", "expected 'random'");
    std::uint64_t s = seed;
    if (const json* v = io::optional_field(j, "seed")) s = static_cast<std::uint64_t>(io::as_int(*v, "state0.seed"));
    double scale = 1.0;
    if (const json* v = io::optional_field(j, "scale")) scale = io::as_double(*v, "state0.scale");
    std::mt19937_64 rng(s);
    return qm::QState::random(n, rng, scale);
  }
  qm::QState s = io::parse_qstate(j, "state0");
  if (s.n() != n) io::config_error("state0.v", "expected " + std::to_string(n) + " entries");
  return s;
}

inline Model qm_model(const json& cfg, std::uint64_t seed) {
  const Eigen::Index n = io::as_positive(io::field(cfg, "", "n"), "n");
  const qm::QState s0 = parse_qm_state(cfg, n, seed);
  const qm::QFunction h = parse_qm_function(hamiltonian_config(cfg), "hamiltonian", n);
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < n; ++k) names.push_back("v" + std::to_string(k + 1));
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) names.push_back("rho" + std::to_string(a + 1) + std::to_string(b + 1));
  Model m;
  m.labels = real_labels<cdouble>(names);
  m.state0 = qstate_to_real(s0);
  m.field = [h, n](const Eigen::VectorXd& x) { return qstate_to_real(qm::qm_hamilton_rhs(h, qstate_from_real(x, n))); };
  m.hamiltonian = [h, n](const Eigen::VectorXd& x) { return h(qm::to_coords(qstate_from_real(x, n))); };
  m.casimirs = parse_casimirs(cfg, json::array(), [n](const json& e, const std::string& path) -> ScalarObservable {
    const qm::QFunction f = parse_qm_function(e, path, n);
    return [f, n](const Eigen::VectorXd& x) { return f(qm::to_coords(qstate_from_real(x, n))); };
  });
  return m;
}

// ---------------------------------------------------------------------------
// Verification

constexpr int default_draws = 20;

template <Scalar T>
Vec<T> random_vec(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec<T> v(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if constexpr (is_complex<T>::value)
      v(k) = T(nd(rng), nd(rng));
    else
      v(k) = nd(rng);
  }
  return v;
}

template <Scalar T>
void add_structure_checks(CheckList& out, const std::string& tag, const LieAlgebra<T>& alg) {
  const StructureReport r = alg.check_structure();
  out.add("structure." + tag + ".antisymmetry", r.antisymmetry, tol::construction);
  out.add("structure." + tag + ".jacobi", r.jacobi, tol::construction);
}

/// Compatibility, Jacobi of the built bracket, coadjoint duality, the
/// extension bracket against the built algebra, and predual closure.
template <Scalar T>
void add_extension_checks(CheckList& out, const ExtensionSpec<T>& spec, std::mt19937_64& rng, int draws,
                          const std::optional<std::pair<Mat<T>, Mat<T>>>& predual = std::nullopt) {
  add_structure_checks(out, "n", spec.n);
  add_structure_checks(out, "h", spec.h);
  const CompatibilityReport rep = check_compatibility(spec);
  out.add("compatibility.derivation", rep.derivation, tol::compat_pass);
  out.add("compatibility.cocycle", rep.cocycle, tol::compat_pass);
  out.add("compatibility.representation", rep.representation, tol::compat_pass);
  const Extension<T> ext = build_extension(spec, true);
  out.add("extension.jacobi", ext.algebra.check_structure().jacobi, tol::verification);

  const DualPairing<T> pairing = spec.sum_pairing();
  const LiePoissonSpace<T> space(ext.algebra, pairing);
  double duality = 0.0, bracket = 0.0;
  for (int t = 0; t < draws; ++t) {
    const Vec<T> x = random_vec<T>(spec.dim(), rng), b = random_vec<T>(spec.dim(), rng), y = random_vec<T>(spec.dim(), rng);
    const T lhs = pairing.pair(coadjoint_extension(spec, x, b), y);
    const T rhs = pairing.pair(b, ext.algebra.bracket(x, y));
    duality = std::max(duality, std::abs(lhs - rhs));
    const SmoothFunction<T> f = functions::linear<T>(x, pairing), g = functions::linear<T>(y, pairing);
    bracket = std::max(bracket, std::abs(extension_poisson_bracket(f, g, b, spec) - lie_poisson_bracket(f, g, b, space)));
  }
  out.add("coadjoint.duality", duality, tol::verification);
  out.add("poisson.extension_vs_built", bracket, tol::verification);

  const ClosureReport cl = predual ? check_predual_closure(spec, predual->first, predual->second)
                                   : check_predual_closure(spec, Mat<T>(Mat<T>::Identity(spec.dim_n(), spec.dim_n())),
                                                           Mat<T>(Mat<T>::Identity(spec.dim_h(), spec.dim_h())));
  out.add("predual_closure.phi_star", cl.phi_star, tol::verification);
  out.add("predual_closure.phi_dot_star", cl.phi_dot_star, tol::verification);
  out.add("predual_closure.omega_star", cl.omega_star, tol::verification);
}

inline int draws_of(const json& cfg) {
  if (const json* d = io::optional_field(cfg, "draws")) return static_cast<int>(io::as_positive(*d, "draws"));
  return default_draws;
}

template <Scalar T>
void verify_extension(const json& cfg, CheckList& out, std::mt19937_64& rng) {
  const ExtensionSpec<T> spec = io::parse_extension<T>(cfg, "");
  std::optional<std::pair<Mat<T>, Mat<T>>> predual;
  if (const json* p = io::optional_field(cfg, "predual")) {
    Mat<T> c = io::as_matrix<T>(io::field(*p, "predual", "c_basis"), "predual.c_basis");
    Mat<T> a = io::as_matrix<T>(io::field(*p, "predual", "a_basis"), "predual.a_basis");
    if (c.rows() != spec.dim_n()) io::config_error("predual.c_basis", "columns must have length dim n");
    if (a.rows() != spec.dim_h()) io::config_error("predual.a_basis", "columns must have length dim h");
    predual.emplace(std::move(c), std::move(a));
  }
  add_extension_checks(out, spec, rng, draws_of(cfg), predual);
}

inline void verify_restricted(const json& cfg, CheckList& out, std::mt19937_64& rng) {
  using namespace restricted;
  const BlockDims d = io::parse_block_dims(io::field(cfg, "", "dims"), "dims");
  const int draws = draws_of(cfg);
  const ExtensionSpec<cdouble> spec = restricted_spec(d);
  add_extension_checks(out, spec, rng, draws);
  out.add("restricted.dual_maps", dual_maps_residual(d, rng, draws), tol::construction);

  // closed forms against the generic extension formulas
  double bracket = 0.0, field = 0.0, antisym = 0.0;
  std::normal_distribution<double> nd;
  auto cm = [&](Eigen::Index n) {
    CMat a(n, n);
    for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = cdouble(nd(rng), nd(rng));
    return a;
  };
  for (int t = 0; t < draws; ++t) {
    const RestrictedState s = RestrictedState::random(d, rng);
    const RestrictedFunction f = restricted::functions::trace_poly(d, {0.0, cdouble(nd(rng), nd(rng)), cdouble(nd(rng), 0)},
                                                       {0.0, 0.0, cdouble(nd(rng), nd(rng))}) +
                                 restricted::functions::coupling(d, cm(d.plus), cm(d.plus));
    const RestrictedFunction g = restricted::functions::linear(cm(d.plus), BlockOperator::random(d, rng)) +
                                 restricted::functions::trace_poly(d, {0.0, 0.0, cdouble(nd(rng), 0)}, {0.0, 0.0, 0.0, 1.0});
    const CVec x = to_coords(s);
    const double r1 = restricted_poisson_bracket(f, g, s);
    bracket = std::max(bracket, std::abs(r1 - extension_poisson_bracket(f, g, x, spec)));
    antisym = std::max(antisym, std::abs(r1 + restricted_poisson_bracket(g, f, s)));
    field = std::max(field, max_abs(CVec(to_coords(restricted_hamiltonian_field(f, s)) -
                                         extension_hamiltonian_field(f, x, spec))));
  }
  out.add("restricted.bracket_vs_generic", bracket, tol::verification);
  out.add("restricted.field_vs_generic", field, tol::verification);
  out.add("restricted.antisymmetry", antisym, tol::verification);
}

inline void verify_qm(const json& cfg, CheckList& out, std::mt19937_64& rng) {
  using namespace qm;
  const Eigen::Index n = io::as_positive(io::field(cfg, "", "n"), "n");
  const int draws = draws_of(cfg);
  const ExtensionSpec<cdouble> spec = qm_spec(n);
  add_extension_checks(out, spec, rng, draws);
  double rep = 0.0, bracket = 0.0, rhs = 0.0;
  std::optional<QFunction> h;
  if (io::optional_field(cfg, "hamiltonian")) h = parse_qm_function(hamiltonian_config(cfg), "hamiltonian", n);
  for (int t = 0; t < draws; ++t) {
    const CVec v = random_vec<cdouble>(n, rng), w = random_vec<cdouble>(n, rng);
    rep = std::max(rep, representing_residual(v, w));
    const QState s = QState::random(n, rng);
    const QFunction f = hamiltonians::coupled(QState::random(n, rng).rho, CMat::Identity(n, n), 0.5);
    const QFunction g = hamiltonians::linear_rho(QState::random(n, rng).rho);
    bracket = std::max(bracket, std::abs(qm_bracket(f, g, s) - extension_poisson_bracket(f, g, to_coords(s), spec)));
    rhs = std::max(rhs, rhs_consistency(h ? *h : f, s));
  }
  out.add("qm.representing_element", rep, tol::construction);
  out.add("qm.bracket_vs_generic", bracket, tol::verification);
  out.add("qm.rhs_consistency", rhs, 1e-8);
}

inline void verify_rigid_body(const json& cfg, CheckList& out, std::mt19937_64& rng) {
  const Model m = rigid_body_model(cfg);
  add_structure_checks(out, "so3", so3<double>());
  const LiePoissonSpace<double> space(so3<double>(), DualPairing<double>::identity(3));
  Vec<double> inertia = io::as_vector<double>(io::field(cfg, "", "inertia"), "inertia");
  const SmoothFunction<double> h = functions::rigid_body<double>(inertia, space.pairing);
  SmoothFunction<double> c;
  c.eval = [](const Vec<double>& b) { return b.squaredNorm(); };
  c.grad = [](const Vec<double>& b) { return Vec<double>(2 * b); };
  double cas = 0.0, energy = 0.0;
  for (int t = 0; t < draws_of(cfg); ++t) {
    const Vec<double> b = random_vec<double>(3, rng);
    cas = std::max(cas, std::abs(lie_poisson_bracket(c, h, b, space)));
    energy = std::max(energy, std::abs(lie_poisson_bracket(h, h, b, space)));
  }
  out.add("rigid_body.casimir_bracket", cas, tol::verification);
  out.add("rigid_body.energy_self_bracket", energy, tol::verification);
  (void)m;
}

template <Scalar T>
void verify_sequence(const json& cfg, CheckList& out, std::mt19937_64& rng) {
  const SequenceSpec<T> seq = io::parse_sequence<T>(cfg, "");
  const ExactnessReport r = check_exact_sequence(seq);
  out.add_flag("sequence.injective", r.injective);
  out.add_flag("sequence.surjective", r.surjective);
  out.add("sequence.im_ker", r.im_ker, tol::subspace_angle);
  if (r.first_homomorphism) out.add("sequence.first_homomorphism", *r.first_homomorphism, tol::verification);
  if (r.second_homomorphism) out.add("sequence.second_homomorphism", *r.second_homomorphism, tol::verification);
  const SequenceSpec<T> dual = dual_sequence(seq);
  const ExactnessReport rd = check_exact_sequence(dual);
  out.add_flag("dual.injective", rd.injective);
  out.add_flag("dual.surjective", rd.surjective);
  out.add("dual.im_ker", rd.im_ker, tol::subspace_angle);
  double adj = 0.0;
  for (const LinearMapRec<T>* m : {&seq.first, &seq.second}) {
    const LinearMapRec<T> dm = dual_map(*m);
    for (int t = 0; t < draws_of(cfg); ++t) {
      const Vec<T> y = random_vec<T>(m->target_dim(), rng), x = random_vec<T>(m->source_dim(), rng);
      adj = std::max(adj, std::abs(m->source_pairing.pair(Vec<T>(dm.matrix * y), x) -
                                   m->target_pairing.pair(y, Vec<T>(m->matrix * x))));
    }
  }
  out.add("dual.adjoint_identity", adj, tol::verification);
  if (const json* w = io::optional_field(cfg, "wstar")) {
    const json& sj = io::field(*w, "wstar", "sizes");
    if (!sj.is_array() || sj.empty()) io::config_error("wstar.sizes", "expected a nonempty array");
    std::vector<Eigen::Index> sizes, offsets;
    Eigen::Index total = 0;
    for (std::size_t k = 0; k < sj.size(); ++k) {
      sizes.push_back(io::as_positive(sj[k], io::join("wstar.sizes", k)));
      offsets.push_back(total);
      total += sizes.back();
    }
    const json& ij = io::field(*w, "wstar", "ideal_blocks");
    if (!ij.is_array()) io::config_error("wstar.ideal_blocks", "expected an array of block indices");
    std::vector<Eigen::Index> positions;
    for (std::size_t k = 0; k < ij.size(); ++k) {
      const Eigen::Index b = io::as_index(ij[k], io::join("wstar.ideal_blocks", k), static_cast<Eigen::Index>(sizes.size()));
      for (Eigen::Index p = 0; p < sizes[static_cast<std::size_t>(b)]; ++p) positions.push_back(offsets[static_cast<std::size_t>(b)] + p);
    }
    const WStarSplitReport ws = wstar_central_split(sizes, positions, rng);
    out.add("wstar.idempotent", ws.idempotent, tol::construction);
    out.add("wstar.self_adjoint", ws.self_adjoint, tol::construction);
    out.add("wstar.central", ws.central, tol::construction);
    out.add("wstar.image", ws.image, tol::construction);
    out.add("wstar.complement_ideal", ws.complement_ideal, tol::construction);
    out.add("wstar.cross_product", ws.cross_product, tol::construction);
    out.add("wstar.bracket_split", ws.bracket_split, tol::construction);
    out.add("wstar.quotient_iso", ws.quotient_iso, tol::construction);
  }
}

inline json run_verify(const json& cfg, std::uint64_t seed, bool& all_pass) {
  const std::string system = system_of(cfg);
  std::mt19937_64 rng(seed);
  CheckList checks;
  const bool cplx = complex_field(cfg);
  if (system == "extension") {
    cplx ? verify_extension<cdouble>(cfg, checks, rng) : verify_extension<double>(cfg, checks, rng);
  } else if (system == "restricted") {
    verify_restricted(cfg, checks, rng);
  } else if (system == "semidirect_qm") {
    verify_qm(cfg, checks, rng);
  } else if (system == "rigid_body") {
    verify_rigid_body(cfg, checks, rng);
  } else {
    cplx ? verify_sequence<cdouble>(cfg, checks, rng) : verify_sequence<double>(cfg, checks, rng);
  }
  checks.apply_selection(cfg);
  all_pass = checks.all_pass();
  json report = {{"system", system}, {"seed", seed}, {"checks", checks.to_json()}, {"all_pass", all_pass}};
  if (system != "sequence" && system != "rigid_body") report["cocycle_convention"] = "cyclic";
  std::vector<std::string> failed;
  for (const auto& c : checks.checks())
    if (!c.pass()) failed.push_back(c.name);
  report["failed"] = failed;
  return report;
}

// ---------------------------------------------------------------------------
// Simulation and bracket tables

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline Model build_model(const json& cfg, std::uint64_t seed) {
  const std::string system = system_of(cfg);
  if (system == "rigid_body") return rigid_body_model(cfg);
  if (system == "extension") return complex_field(cfg) ? extension_model<cdouble>(cfg) : extension_model<double>(cfg);
  if (system == "restricted") return restricted_model(cfg, seed);
  if (system == "semidirect_qm") return qm_model(cfg, seed);
  io::config_error("system", "system '" + system + "' has no dynamics to simulate");
}

inline std::string run_simulate(const json& cfg, std::uint64_t seed) {
  const Model m = build_model(cfg, seed);
  const IntegratorConfig ic = parse_integrator(cfg);
  std::vector<std::pair<std::string, ScalarObservable>> obs{{"H", m.hamiltonian}};
  obs.insert(obs.end(), m.casimirs.begin(), m.casimirs.end());
  const Trajectory traj = integrate_flow(m.field, m.state0, ic, obs);
  std::ostringstream os;
  os << "t";
  for (const auto& l : m.labels) os << "," << l;
  for (const auto& [name, s] : traj.tracked) os << "," << name;
  os << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    const Eigen::VectorXd& x = traj.states[k];
    for (Eigen::Index i = 0; i < x.size(); ++i) os << "," << format_double(x(i));
    for (const auto& [name, s] : traj.tracked) os << "," << format_double(s[k]);
    os << "\n";
  }
  return os.str();
}

inline json run_bracket_table(const json& cfg) {
  const std::string system = system_of(cfg);
  auto table = [](const auto& spec) {
    const auto ext = build_extension(spec);
    return json{{"algebra", io::algebra_json(ext.algebra)},
                {"layout", "n coordinates first"},
                {"dim_n", spec.dim_n()},
                {"dim_h", spec.dim_h()},
                {"compatibility", io::compatibility_json(ext.report)}};
  };
  if (system == "extension")
    return complex_field(cfg) ? table(io::parse_extension<cdouble>(cfg, "")) : table(io::parse_extension<double>(cfg, ""));
  if (system == "restricted") return table(restricted::restricted_spec(io::parse_block_dims(io::field(cfg, "", "dims"), "dims")));
  if (system == "semidirect_qm") return table(qm::qm_spec(io::as_positive(io::field(cfg, "", "n"), "n")));
  if (system == "rigid_body") return json{{"algebra", io::algebra_json(so3<double>())}};
  io::config_error("system", "system '" + system + "' has no bracket table");
}

// ---------------------------------------------------------------------------
// Entry point

/// Resolves where output goes: an explicit --out (relative to the output
/// directory override when set), else <override>/<config stem><suffix>, else
/// stdout (empty path).
inline std::string output_path(const std::string& out, const std::string& config, const std::string& suffix) {
  const char* env = std::getenv(output_dir_env);
  const std::string dir = env ? env : "";
  namespace fs = std::filesystem;
  if (!out.empty()) {
    const fs::path p(out);
    return (p.is_relative() && !dir.empty()) ? (fs::path(dir) / p).string() : p.string();
  }
  if (!dir.empty()) return (fs::path(dir) / (fs::path(config).stem().string() + suffix)).string();
  return "";
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::config, "field '--out': cannot write '" + path + "'");
  f << text;
}

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::invalid_input:
    case ErrorKind::pairing_degenerate:
    case ErrorKind::unsupported_presentation:
    case ErrorKind::not_an_ideal:
    case ErrorKind::section_inconsistency:
      return 2;
    default:
      return 1;
  }
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Lie-Poisson extension toolkit"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Seed for randomized draws (overrides the config)");
  std::string config, out_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "JSON config")->required();
    sub->add_option("--out", out_path, "Output file (default stdout)");
  };
  CLI::App* verify = app.add_subcommand("verify", "Run structural and residual checks");
  CLI::App* simulate = app.add_subcommand("simulate", "Integrate the configured Hamiltonian flow to CSV");
  CLI::App* table = app.add_subcommand("bracket-table", "Emit the structure constants of the built algebra");
  for (CLI::App* s : {verify, simulate, table}) add_common(s);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const json cfg = load_config(config);
    if (!cfg.is_object()) io::config_error("<root>", "expected an object");
    const std::uint64_t s = config_seed(cfg, seed);
    if (verify->parsed()) {
      bool ok = false;
      const json report = run_verify(cfg, s, ok);
      for (const auto& c : report["checks"])
        if (!c["pass"].get<bool>())
          err << "FAIL " << c["name"].get<std::string>() << " residual " << c["residual"].get<double>()
              << " >= threshold " << c["threshold"].get<double>() << "\n";
      emit(report.dump(2) + "\n", output_path(out_path, config, ".verify.json"), out);
      return ok ? 0 : 1;
    }
    if (simulate->parsed()) {
      emit(run_simulate(cfg, s), output_path(out_path, config, ".csv"), out);
      return 0;
    }
    emit(run_bracket_table(cfg).dump(2) + "\n", output_path(out_path, config, ".table.json"), out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return 2;
  }
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args);
}

}  // namespace lpext::cli
