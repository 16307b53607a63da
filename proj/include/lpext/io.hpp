#pragma once

// JSON ingestion of algebras, extension data, block operators, quantum states
// and sequences, plus serialization of reports. Indices in JSON are 0-based.
// Malformed input raises Error(ErrorKind::config) naming the offending field.

#include <lpext/extension.hpp>
#include <lpext/restricted.hpp>
#include <lpext/semidirect_qm.hpp>
#include <lpext/sequences.hpp>

#include <json.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace lpext::io {

using json = nlohmann::json;

[[noreturn]] inline void config_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::config, "field '" + path + "': " + msg);
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
inline std::string join(const std::string& path, std::size_t idx) { return path + "[" + std::to_string(idx) + "]"; }

inline const json& field(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) config_error(join(path, key), "missing");
  return *it;
}

inline const json* optional_field(const json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(path, "must be finite");
  return v;
}

inline long long as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_error(path, "expected an integer");
  return j.get<long long>();
}

inline Eigen::Index as_index(const json& j, const std::string& path, Eigen::Index bound) {
  const long long v = as_int(j, path);
  if (v < 0 || v >= bound) config_error(path, "index " + std::to_string(v) + " out of range [0, " + std::to_string(bound) + ")");
  return static_cast<Eigen::Index>(v);
}

inline Eigen::Index as_positive(const json& j, const std::string& path) {
  const long long v = as_int(j, path);
  if (v <= 0) config_error(path, "must be positive");
  return static_cast<Eigen::Index>(v);
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) config_error(path, "expected a string");
  return j.get<std::string>();
}

/// A number, or [re, im] for complex values.
template <Scalar T>
T as_scalar(const json& j, const std::string& path) {
  if (j.is_number()) return T(as_double(j, path));
  if (j.is_array() && j.size() == 2) {
    const double re = as_double(j[0], join(path, 0)), im = as_double(j[1], join(path, 1));
    if constexpr (is_complex<T>::value) {
      return T(re, im);
    } else {
      if (im != 0.0) config_error(path, "complex value given for a real field");
      return re;
    }
  }
  config_error(path, "expected a number or an [re, im] pair");
}

template <Scalar T>
Vec<T> as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array");
  Vec<T> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = as_scalar<T>(j[k], join(path, k));
  return v;
}

template <Scalar T>
Mat<T> as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_error(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) config_error(join(path, 0), "expected a row array");
  const std::size_t cols = j[0].size();
  Mat<T> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = join(path, r);
    if (!j[r].is_array() || j[r].size() != cols) config_error(rp, "rows must all have length " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_scalar<T>(j[r][c], join(rp, c));
  }
  return m;
}

template <Scalar T>
Mat<T> as_square(const json& j, const std::string& path, Eigen::Index n) {
  Mat<T> m = as_matrix<T>(j, path);
  if (m.rows() != n || m.cols() != n) config_error(path, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  return m;
}

template <Scalar T>
json scalar_json(const T& v) {
  if constexpr (is_complex<T>::value)
    return json::array({v.real(), v.imag()});
  else
    return v;
}

template <Scalar T>
json vector_json(const Vec<T>& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(scalar_json(v(k)));
  return out;
}

template <Scalar T>
json matrix_json(const Mat<T>& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json<T>(m.row(r).transpose()));
  return out;
}

// ---------------------------------------------------------------------------
// Algebras

template <Scalar T>
struct AlgebraRef {
  LieAlgebra<T> algebra;
  std::optional<DualPairing<T>> pairing;
};

inline std::string field_name(bool complex_field) { return complex_field ? "complex" : "real"; }

template <Scalar T>
DualPairing<T> parse_gram(const json& j, const std::string& path, Eigen::Index n) {
  Mat<T> g = as_square<T>(j, path, n);
  try {
    return DualPairing<T>(std::move(g));
  } catch (const Error& e) {
    config_error(path, e.what());
  }
}

/// An algebra reference: a builtin name ("so3", "heisenberg"), an object
/// {"builtin": "gl" | "abelian" | "matrix_blocks", "n" | "sizes", "sign",
/// "pairing": "identity" | "trace"}, or an explicit definition
/// {"name", "field", "dim", "structure_constants": [[k, i, j, v], ...], "gram"}.
/// Explicit constants are accepted without validation; verification reports them.
template <Scalar T>
AlgebraRef<T> parse_algebra(const json& j, const std::string& path) {
  constexpr bool cplx = is_complex<T>::value;
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "so3") return {so3<T>(), std::nullopt};
    if (name == "heisenberg") return {heisenberg<T>(), std::nullopt};
    if (name == "gl" || name == "abelian" || name == "matrix_blocks")
      config_error(path, "builtin '" + name + "' needs parameters; use {\"builtin\": \"" + name + "\", ...}");
    config_error(path, "unknown builtin algebra '" + name + "'");
  }
  if (!j.is_object()) config_error(path, "expected a builtin name or an algebra object");

  if (const json* b = optional_field(j, "builtin")) {
    const std::string name = as_string(*b, join(path, "builtin"));
    std::string pairing = "identity";
    if (const json* p = optional_field(j, "pairing")) pairing = as_string(*p, join(path, "pairing"));
    if (pairing != "identity" && pairing != "trace") config_error(join(path, "pairing"), "expected 'identity' or 'trace'");
    AlgebraRef<T> out;
    if (name == "so3") {
      out.algebra = so3<T>();
    } else if (name == "heisenberg") {
      out.algebra = heisenberg<T>();
    } else if (name == "abelian") {
      out.algebra = abelian<T>(as_positive(field(j, path, "n"), join(path, "n")));
    } else if (name == "gl") {
      const Eigen::Index n = as_positive(field(j, path, "n"), join(path, "n"));
      double sign = 1.0;
      if (const json* s = optional_field(j, "sign")) sign = as_double(*s, join(path, "sign"));
      if (sign != 1.0 && sign != -1.0) config_error(join(path, "sign"), "must be 1 or -1");
      out.algebra = gl<T>(n, sign);
      if (pairing == "trace") out.pairing = trace_pairing<T>(n);
    } else if (name == "matrix_blocks") {
      const json& s = field(j, path, "sizes");
      if (!s.is_array() || s.empty()) config_error(join(path, "sizes"), "expected a nonempty array");
      std::vector<Eigen::Index> sizes;
      for (std::size_t k = 0; k < s.size(); ++k) sizes.push_back(as_positive(s[k], join(join(path, "sizes"), k)));
      out.algebra = matrix_blocks<T>(sizes);
      if (pairing == "trace") out.pairing = matrix_blocks_trace_pairing<T>(sizes);
    } else {
      config_error(join(path, "builtin"), "unknown builtin algebra '" + name + "'");
    }
    if (pairing == "trace" && !out.pairing) config_error(join(path, "pairing"), "trace pairing needs a matrix algebra");
    if (const json* g = optional_field(j, "gram")) out.pairing = parse_gram<T>(*g, join(path, "gram"), out.algebra.dim());
    return out;
  }

  std::string name = "custom";
  if (const json* nm = optional_field(j, "name")) name = as_string(*nm, join(path, "name"));
  if (const json* f = optional_field(j, "field")) {
    const std::string fs = as_string(*f, join(path, "field"));
    if (fs != "real" && fs != "complex") config_error(join(path, "field"), "expected 'real' or 'complex'");
    if (fs != field_name(cplx))
      config_error(join(path, "field"), "algebra field '" + fs + "' does not match the system field '" + field_name(cplx) + "'");
  }
  const Eigen::Index dim = as_positive(field(j, path, "dim"), join(path, "dim"));
  const std::string sp = join(path, "structure_constants");
  const json& sc = field(j, path, "structure_constants");
  if (!sc.is_array()) config_error(sp, "expected an array of [k, i, j, value] triplets");
  std::vector<Triplet<T>> triplets;
  for (std::size_t t = 0; t < sc.size(); ++t) {
    const std::string tp = join(sp, t);
    if (!sc[t].is_array() || sc[t].size() != 4) config_error(tp, "expected [k, i, j, value]");
    Triplet<T> tr{as_index(sc[t][0], join(tp, 0), dim), as_index(sc[t][1], join(tp, 1), dim),
                  as_index(sc[t][2], join(tp, 2), dim), as_scalar<T>(sc[t][3], join(tp, 3))};
    if (tr.i == tr.j && tr.value != T(0)) config_error(tp, "diagonal structure constant must vanish");
    triplets.push_back(tr);
  }
  std::vector<std::string> labels;
  if (const json* l = optional_field(j, "labels")) {
    if (!l->is_array() || static_cast<Eigen::Index>(l->size()) != dim)
      config_error(join(path, "labels"), "expected " + std::to_string(dim) + " labels");
    for (std::size_t k = 0; k < l->size(); ++k) labels.push_back(as_string((*l)[k], join(join(path, "labels"), k)));
  }
  AlgebraRef<T> out{LieAlgebra<T>::from_triplets(name, dim, triplets, labels, Validation::unchecked), std::nullopt};
  if (const json* g = optional_field(j, "gram")) out.pairing = parse_gram<T>(*g, join(path, "gram"), dim);
  return out;
}

template <Scalar T>
json algebra_json(const LieAlgebra<T>& alg) {
  json sc = json::array();
  const auto& c = alg.constants();
  for (Eigen::Index i = 0; i < alg.dim(); ++i)
    for (Eigen::Index j = i + 1; j < alg.dim(); ++j)
      for (Eigen::Index k = 0; k < alg.dim(); ++k)
        if (c(k, i, j) != T(0)) sc.push_back(json::array({k, i, j, scalar_json(c(k, i, j))}));
  return json{{"name", alg.name()},
              {"field", alg.field()},
              {"dim", alg.dim()},
              {"labels", alg.labels()},
              {"structure_constants", sc}};
}

// ---------------------------------------------------------------------------
// Extension data

/// {"n": algebra, "h": algebra, "omega": [[a, i, j, v], ...], "phi": [matrix, ...]}.
/// Omega triplets give the antisymmetric half; phi defaults to zero.
template <Scalar T>
ExtensionSpec<T> parse_extension(const json& j, const std::string& path) {
  AlgebraRef<T> n = parse_algebra<T>(field(j, path, "n"), join(path, "n"));
  AlgebraRef<T> h = parse_algebra<T>(field(j, path, "h"), join(path, "h"));
  const Eigen::Index dn = n.algebra.dim(), dh = h.algebra.dim();

  Rank3<T> w(dn, dh, dh);
  if (const json* om = optional_field(j, "omega")) {
    const std::string op = join(path, "omega");
    if (!om->is_array()) config_error(op, "expected an array of [a, i, j, value] triplets");
    for (std::size_t t = 0; t < om->size(); ++t) {
      const json& e = (*om)[t];
      const std::string tp = join(op, t);
      if (!e.is_array() || e.size() != 4) config_error(tp, "expected [a, i, j, value]");
      const Eigen::Index a = as_index(e[0], join(tp, 0), dn), i = as_index(e[1], join(tp, 1), dh),
                         jj = as_index(e[2], join(tp, 2), dh);
      const T v = as_scalar<T>(e[3], join(tp, 3));
      if (i == jj && v != T(0)) config_error(tp, "omega must be skew: diagonal entry must vanish");
      w(a, i, jj) = v;
      w(a, jj, i) = -v;
    }
  }

  std::vector<Mat<T>> mats(static_cast<std::size_t>(dh), Mat<T>::Zero(dn, dn));
  if (const json* ph = optional_field(j, "phi")) {
    const std::string pp = join(path, "phi");
    if (!ph->is_array() || static_cast<Eigen::Index>(ph->size()) != dh)
      config_error(pp, "expected " + std::to_string(dh) + " matrices, one per basis element of h");
    for (std::size_t i = 0; i < ph->size(); ++i) mats[i] = as_square<T>((*ph)[i], join(pp, i), dn);
  }
  return ExtensionSpec<T>(std::move(n.algebra), std::move(h.algebra), BilinearMapToN<T>(std::move(w)),
                          DerivationValuedMap<T>(std::move(mats), dn), std::move(n.pairing), std::move(h.pairing));
}

template <Scalar T>
json extension_spec_json(const ExtensionSpec<T>& spec) {
  json om = json::array();
  const Eigen::Index dn = spec.dim_n(), dh = spec.dim_h();
  for (Eigen::Index i = 0; i < dh; ++i)
    for (Eigen::Index j = i + 1; j < dh; ++j)
      for (Eigen::Index a = 0; a < dn; ++a) {
        const T v = spec.omega.coeffs()(a, i, j);
        if (v != T(0)) om.push_back(json::array({a, i, j, scalar_json(v)}));
      }
  json ph = json::array();
  for (Eigen::Index i = 0; i < dh; ++i) ph.push_back(matrix_json<T>(spec.phi.on_basis(i)));
  return json{{"n", algebra_json(spec.n)}, {"h", algebra_json(spec.h)}, {"omega", om}, {"phi", ph}};
}

inline json compatibility_json(const CompatibilityReport& r) {
  return json{{"derivation", r.derivation},
              {"cocycle", r.cocycle},
              {"representation", r.representation},
              {"cocycle_convention", r.cocycle_convention},
              {"verdict", to_string(r.verdict())}};
}

inline json closure_json(const ClosureReport& r) {
  return json{{"phi_star", r.phi_star},
              {"phi_dot_star", r.phi_dot_star},
              {"omega_star", r.omega_star},
              {"n_coadjoint", r.n_coadjoint},
              {"h_coadjoint", r.h_coadjoint}};
}

// ---------------------------------------------------------------------------
// Restricted block data

inline restricted::BlockDims parse_block_dims(const json& j, const std::string& path) {
  if (j.is_array() && j.size() == 2)
    return {as_positive(j[0], join(path, 0)), as_positive(j[1], join(path, 1))};
  if (j.is_object())
    return {as_positive(field(j, path, "plus"), join(path, "plus")),
            as_positive(field(j, path, "minus"), join(path, "minus"))};
  config_error(path, "expected [n_plus, n_minus] or {\"plus\", \"minus\"}");
}

/// {"dims": [n+, n-], "pp", "mm", "pm", "mp"}; missing blocks are zero.
template <class Tag>
restricted::Blocks<Tag> parse_blocks(const json& j, const std::string& path, std::optional<restricted::BlockDims> expect = {}) {
  using restricted::CMat;
  const restricted::BlockDims d = parse_block_dims(field(j, path, "dims"), join(path, "dims"));
  if (expect && !(*expect == d)) config_error(join(path, "dims"), "block dims do not match the system dims");
  auto block = [&](const char* key, Eigen::Index r, Eigen::Index c) -> CMat {
    const json* b = optional_field(j, key);
    if (!b) return CMat::Zero(r, c);
    CMat m = as_matrix<cdouble>(*b, join(path, key));
    if (m.rows() != r || m.cols() != c)
      config_error(join(path, key), "expected a " + std::to_string(r) + "x" + std::to_string(c) + " block");
    return m;
  };
  return restricted::Blocks<Tag>(block("pp", d.plus, d.plus), block("mm", d.minus, d.minus),
                                 block("pm", d.plus, d.minus), block("mp", d.minus, d.plus));
}

template <class Tag>
json blocks_json(const restricted::Blocks<Tag>& b) {
  return json{{"dims", json::array({b.dims().plus, b.dims().minus})},
              {"pp", matrix_json<cdouble>(b.pp)},
              {"mm", matrix_json<cdouble>(b.mm)},
              {"pm", matrix_json<cdouble>(b.pm)},
              {"mp", matrix_json<cdouble>(b.mp)}};
}

// ---------------------------------------------------------------------------
// Quantum state

/// {"v": [[re, im], ...], "rho": [[[re, im], ...], ...]}.
inline qm::QState parse_qstate(const json& j, const std::string& path) {
  qm::QState s{as_vector<cdouble>(field(j, path, "v"), join(path, "v")), qm::CMat()};
  if (s.v.size() == 0) config_error(join(path, "v"), "must be nonempty");
  s.rho = as_square<cdouble>(field(j, path, "rho"), join(path, "rho"), s.v.size());
  return s;
}

inline json qstate_json(const qm::QState& s) {
  return json{{"v", vector_json<cdouble>(s.v)}, {"rho", matrix_json<cdouble>(s.rho)}};
}

// ---------------------------------------------------------------------------
// Sequences

/// {"first": matrix, "second": matrix, optional grams "source_gram",
/// "middle_gram", "target_gram", optional "attach_algebras": {"source",
/// "middle", "target"}}.
template <Scalar T>
SequenceSpec<T> parse_sequence(const json& j, const std::string& path) {
  Mat<T> first = as_matrix<T>(field(j, path, "first"), join(path, "first"));
  Mat<T> second = as_matrix<T>(field(j, path, "second"), join(path, "second"));
  if (second.cols() != first.rows())
    config_error(join(path, "second"), "has " + std::to_string(second.cols()) + " columns but first has " +
                                           std::to_string(first.rows()) + " rows");
  auto gram = [&](const char* key, Eigen::Index n) {
    const json* g = optional_field(j, key);
    return g ? parse_gram<T>(*g, join(path, key), n) : DualPairing<T>::identity(n);
  };
  const DualPairing<T> gs = gram("source_gram", first.cols()), gm = gram("middle_gram", first.rows()),
                       gt = gram("target_gram", second.rows());
  SequenceSpec<T> seq(LinearMapRec<T>(std::move(first), gs, gm), LinearMapRec<T>(std::move(second), gm, gt));
  if (const json* a = optional_field(j, "attach_algebras")) {
    const std::string ap = join(path, "attach_algebras");
    auto attach = [&](const char* key, Eigen::Index n) -> std::optional<LieAlgebra<T>> {
      const json* r = optional_field(*a, key);
      if (!r) return std::nullopt;
      LieAlgebra<T> alg = parse_algebra<T>(*r, join(ap, key)).algebra;
      if (alg.dim() != n) config_error(join(ap, key), "algebra dimension " + std::to_string(alg.dim()) + " does not match " + std::to_string(n));
      return alg;
    };
    if (!a->is_object()) config_error(ap, "expected an object with source/middle/target");
    seq.source_algebra = attach("source", seq.first.source_dim());
    seq.middle_algebra = attach("middle", seq.first.target_dim());
    seq.target_algebra = attach("target", seq.second.target_dim());
  }
  return seq;
}

inline json exactness_json(const ExactnessReport& r) {
  json out = {{"first_rank", r.first_rank},
              {"second_rank", r.second_rank},
              {"injective", r.injective},
              {"surjective", r.surjective},
              {"composition", r.composition},
              {"im_ker", r.im_ker},
              {"exact", r.exact()}};
  if (r.first_homomorphism) out["first_homomorphism"] = *r.first_homomorphism;
  if (r.second_homomorphism) out["second_homomorphism"] = *r.second_homomorphism;
  return out;
}

inline json wstar_json(const WStarSplitReport& r) {
  return json{{"z", matrix_json<cdouble>(r.z)},
              {"idempotent", r.idempotent},
              {"self_adjoint", r.self_adjoint},
              {"central", r.central},
              {"image", r.image},
              {"complement_ideal", r.complement_ideal},
              {"cross_product", r.cross_product},
              {"bracket_split", r.bracket_split},
              {"quotient_iso", r.quotient_iso}};
}

}  // namespace lpext::io
