#pragma once

// Fixed-step integration of Hamiltonian flows on realified state vectors, with
// tracked scalar series and drift diagnostics.

#include <lpext/common.hpp>

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lpext {

enum class Method { rk4, implicit_midpoint };

inline Method parse_method(const std::string& s) {
  if (s == "rk4" || s == "explicit-RK4" || s == "explicit_rk4") return Method::rk4;
  if (s == "midpoint" || s == "implicit-midpoint" || s == "implicit_midpoint") return Method::implicit_midpoint;
  throw Error(ErrorKind::config, "unknown integrator method '" + s + "'");
}

struct IntegratorConfig {
  Method method = Method::implicit_midpoint;
  double dt = 1e-2;
  int steps = 100;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;

  void validate() const {
    require(dt > 0 && std::isfinite(dt), ErrorKind::config, "integrator.dt must be positive");
    require(steps >= 1, ErrorKind::config, "integrator.steps must be at least 1");
    require(newton_tol > 0, ErrorKind::config, "integrator.newton_tol must be positive");
    require(newton_max_iter >= 1, ErrorKind::config, "integrator.newton_max_iter must be at least 1");
  }
};

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ScalarObservable = std::function<double(const Eigen::VectorXd&)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  /// Series in insertion order (name, values).
  std::vector<std::pair<std::string, std::vector<double>>> tracked;

  std::size_t size() const { return times.size(); }

  const std::vector<double>& series(const std::string& name) const {
    for (const auto& [n, s] : tracked)
      if (n == name) return s;
    throw Error(ErrorKind::invalid_input, "no tracked series named '" + name + "'");
  }
};

namespace detail {

inline Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd j(n, n);
  Eigen::VectorXd p = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = 1e-7 * std::max(1.0, std::abs(x(k)));
    p(k) = x(k) + h;
    const Eigen::VectorXd fp = f(p);
    p(k) = x(k) - h;
    const Eigen::VectorXd fm = f(p);
    p(k) = x(k);
    j.col(k) = (fp - fm) / (2 * h);
  }
  return j;
}

inline Eigen::VectorXd rk4_step(const VectorField& f, const Eigen::VectorXd& x, double dt) {
  const Eigen::VectorXd k1 = f(x);
  const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = f(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Solves y = x + dt f((x + y) / 2) by Newton's method with a
/// finite-difference Jacobian refreshed every iteration.
inline Eigen::VectorXd midpoint_step(const VectorField& f, const Eigen::VectorXd& x, double dt,
                                     const IntegratorConfig& cfg, int step) {
  Eigen::VectorXd y = x + dt * f(x);
  const Eigen::Index n = x.size();
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    const Eigen::VectorXd mid = 0.5 * (x + y);
    const Eigen::VectorXd g = y - x - dt * f(mid);
    const double scale = std::max(1.0, y.lpNorm<Eigen::Infinity>());
    if (g.lpNorm<Eigen::Infinity>() <= cfg.newton_tol * scale) return y;
    const Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * fd_jacobian(f, mid);
    const Eigen::VectorXd delta = jac.partialPivLu().solve(g);
    y -= delta;
    require(y.allFinite(), ErrorKind::numeric_blowup, "non-finite Newton iterate at step " + std::to_string(step));
    if (delta.lpNorm<Eigen::Infinity>() <= cfg.newton_tol * scale) return y;
  }
  throw Error(ErrorKind::integrator_failure,
              "implicit midpoint Newton did not converge at step " + std::to_string(step));
}

}  // namespace detail

/// Fixed-step integration; the observables are recorded at every step
/// including t = 0.
inline Trajectory integrate_flow(const VectorField& field, const Eigen::VectorXd& state0, const IntegratorConfig& cfg,
                                 const std::vector<std::pair<std::string, ScalarObservable>>& observables = {}) {
  cfg.validate();
  require(state0.allFinite(), ErrorKind::numeric_blowup, "initial state is not finite");
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  for (const auto& [name, obs] : observables) traj.tracked.emplace_back(name, std::vector<double>{});
  auto record = [&](double t, const Eigen::VectorXd& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    for (std::size_t k = 0; k < observables.size(); ++k) traj.tracked[k].second.push_back(observables[k].second(x));
  };
  Eigen::VectorXd x = state0;
  record(0.0, x);
  for (int s = 1; s <= cfg.steps; ++s) {
    x = cfg.method == Method::rk4 ? detail::rk4_step(field, x, cfg.dt) : detail::midpoint_step(field, x, cfg.dt, cfg, s);
    require(x.allFinite(), ErrorKind::numeric_blowup, "state became non-finite at step " + std::to_string(s));
    record(s * cfg.dt, x);
  }
  return traj;
}

struct SeriesDrift {
  double max_drift = 0.0;       // max |s(t) - s(0)|
  double relative_drift = 0.0;  // max_drift / max(1, |s(0)|)
  double slope = 0.0;           // least-squares slope of s against t
};

inline SeriesDrift series_drift(const std::vector<double>& t, const std::vector<double>& s) {
  require(!s.empty() && t.size() == s.size(), ErrorKind::invalid_input, "series must be nonempty and aligned");
  SeriesDrift d;
  for (double v : s) d.max_drift = std::max(d.max_drift, std::abs(v - s.front()));
  d.relative_drift = d.max_drift / std::max(1.0, std::abs(s.front()));
  if (s.size() > 1) {
    const double n = static_cast<double>(s.size());
    double mt = 0, ms = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      mt += t[k];
      ms += s[k];
    }
    mt /= n;
    ms /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      sxy += (t[k] - mt) * (s[k] - ms);
      sxx += (t[k] - mt) * (t[k] - mt);
    }
    d.slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  return d;
}

inline std::map<std::string, SeriesDrift> conservation_report(const Trajectory& traj) {
  require(traj.size() > 0, ErrorKind::invalid_input, "empty trajectory");
  std::map<std::string, SeriesDrift> out;
  for (const auto& [name, s] : traj.tracked) out[name] = series_drift(traj.times, s);
  return out;
}

/// Packs complex coordinates as (re_0, im_0, re_1, im_1, ...).
inline Eigen::VectorXd realify(const Vec<cdouble>& v) {
  Eigen::VectorXd r(2 * v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    r(2 * k) = v(k).real();
    r(2 * k + 1) = v(k).imag();
  }
  return r;
}

inline Vec<cdouble> complexify(const Eigen::VectorXd& r) {
  require(r.size() % 2 == 0, ErrorKind::invalid_input, "realified vector must have even length");
  Vec<cdouble> v(r.size() / 2);
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = cdouble(r(2 * k), r(2 * k + 1));
  return v;
}

}  // namespace lpext
