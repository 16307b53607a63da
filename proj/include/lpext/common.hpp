#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace lpext {

using cdouble = std::complex<double>;

template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <class T>
struct is_complex : std::false_type {};
template <class R>
struct is_complex<std::complex<R>> : std::true_type {};

template <class T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, cdouble>;

/// Numerical thresholds shared by every module.
namespace tol {
inline constexpr double construction = 1e-12;   // exactly-specified constants
inline constexpr double verification = 1e-10;   // generic identity checks
inline constexpr double compat_pass = 1e-8;     // compatibility residual: pass below
inline constexpr double compat_fail = 1e-6;     // compatibility residual: fail above
inline constexpr double pairing_cond = 1e-10;   // sigma_min / sigma_max of a gram
inline constexpr double rank = 1e-10;           // relative singular-value cutoff
inline constexpr double subspace_angle = 1e-8;  // im = ker principal angle
inline constexpr double fd_step = 1e-5;         // relative finite-difference step
}  // namespace tol

enum class ErrorKind {
  invalid_input,
  pairing_degenerate,
  not_an_ideal,
  section_inconsistency,
  invalid_extension,
  numeric_domain,
  integrator_failure,
  numeric_blowup,
  unsupported_presentation,
  config,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::pairing_degenerate: return "pairing-degenerate";
    case ErrorKind::not_an_ideal: return "not-an-ideal";
    case ErrorKind::section_inconsistency: return "section-inconsistency";
    case ErrorKind::invalid_extension: return "invalid-extension";
    case ErrorKind::numeric_domain: return "numeric-domain";
    case ErrorKind::integrator_failure: return "integrator-failure";
    case ErrorKind::numeric_blowup: return "numeric-blowup";
    case ErrorKind::unsupported_presentation: return "unsupported-presentation";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

inline double real_part(double x) { return x; }
inline double real_part(const cdouble& x) { return x.real(); }

/// Max-abs entry of a vector or matrix; 0 for empty.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Threshold verdict for residuals that have a pass band, a fail band and an
/// indeterminate band in between.
enum class Verdict { pass, indeterminate, fail };

inline Verdict classify(double residual, double pass_below = tol::compat_pass,
                        double fail_above = tol::compat_fail) {
  if (!(residual == residual)) return Verdict::fail;  // NaN
  if (residual < pass_below) return Verdict::pass;
  if (residual > fail_above) return Verdict::fail;
  return Verdict::indeterminate;
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::indeterminate: return "indeterminate";
    case Verdict::fail: return "fail";
  }
  return "unknown";
}

/// Orthonormal basis of the column span of `a` (thin SVD, relative cutoff).
template <Scalar T>
Mat<T> orthonormal_span(const Mat<T>& a, double rel_tol = tol::rank) {
  if (a.cols() == 0 || a.rows() == 0) return Mat<T>(a.rows(), 0);
  Eigen::JacobiSVD<Mat<T>> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of the nullspace of `a` (full SVD, relative cutoff).
template <Scalar T>
Mat<T> nullspace(const Mat<T>& a, double rel_tol = tol::rank) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Mat<T>::Identity(n, n);
  Eigen::JacobiSVD<Mat<T>> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return svd.matrixV().rightCols(n - r);
}

/// Numerical rank with a relative cutoff.
template <Scalar T>
Eigen::Index numerical_rank(const Mat<T>& a, double rel_tol = tol::rank) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat<T>> svd(a);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, s(0));
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return r;
}

/// Projector onto the orthogonal complement of span(q), q orthonormal.
template <Scalar T>
Mat<T> complement_projector(const Mat<T>& q, Eigen::Index n) {
  return Mat<T>::Identity(n, n) - q * q.adjoint();
}

/// Row-major flattening of a square or rectangular matrix.
template <Scalar T>
Vec<T> flatten(const Mat<T>& m) {
  Vec<T> v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

template <Scalar T, class Derived>
Mat<T> unflatten(const Eigen::MatrixBase<Derived>& v, Eigen::Index rows, Eigen::Index cols) {
  Mat<T> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(i * cols + j);
  return m;
}

}  // namespace lpext
