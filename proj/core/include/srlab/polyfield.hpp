#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "srlab/errors.hpp"

namespace srlab {

/// Exact rational scalar. Bracket towers must not accumulate float error
/// when deciding ranks, so all symbolic algebra runs over the rationals and
/// is converted to double only at the numeric boundary.
using Rational = boost::multiprecision::cpp_rational;

using Exponents = std::vector<int>;

/// Graded lexicographic monomial order (total degree first, then lex).
/// Fixed once so serialized polynomials are byte-stable.
struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    int da = 0, db = 0;
    for (int e : a) da += e;
    for (int e : b) db += e;
    if (da != db) return da < db;
    return a < b;
  }
};

/// Sparse multivariate polynomial with exact rational coefficients.
/// Invariant: no stored zero coefficients, so structural equality is
/// mathematical equality.
class Polynomial {
 public:
  using TermMap = std::map<Exponents, Rational, GradedLexLess>;

  explicit Polynomial(int dim = 0) : dim_(dim) {}

  static Polynomial zero(int dim) { return Polynomial(dim); }
  static Polynomial constant(int dim, const Rational& c);
  /// The coordinate monomial x_{var} (0-based).
  static Polynomial coordinate(int dim, int var);
  static Polynomial monomial(int dim, Exponents exps, const Rational& c);

  int dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }

  void add_term(const Exponents& exps, const Rational& c);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(const Rational& c) const;
  Polynomial operator-() const { return *this * Rational(-1); }

  bool operator==(const Polynomial& o) const {
    return dim_ == o.dim_ && terms_ == o.terms_;
  }

  /// d/dx_{var}, exact.
  Polynomial derivative(int var) const;

  double evaluate(const Eigen::VectorXd& p) const;
  Rational evaluate_exact(const std::vector<Rational>& p) const;

  /// `p/q * x1^a1 x2^a2 + ...`; zero polynomial prints as `0`.
  std::string to_string() const;
  static Polynomial parse(const std::string& text, int dim);

 private:
  int dim_;
  TermMap terms_;
};

/// A vector field on R^n with polynomial components (component j multiplies
/// d/dx_j). Immutable in practice: all operations return new values.
class PolyVectorField {
 public:
  explicit PolyVectorField(int dim = 0);
  explicit PolyVectorField(std::vector<Polynomial> components);

  /// Constant coordinate field d/dx_{var}.
  static PolyVectorField coordinate(int dim, int var);
  static PolyVectorField zero(int dim) { return PolyVectorField(dim); }

  int dim() const { return dim_; }
  const Polynomial& component(int j) const { return components_[j]; }
  const std::vector<Polynomial>& components() const { return components_; }
  bool is_zero() const;

  PolyVectorField operator+(const PolyVectorField& o) const;
  PolyVectorField operator-(const PolyVectorField& o) const;
  PolyVectorField operator*(const Rational& c) const;
  bool operator==(const PolyVectorField& o) const;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& p) const;
  /// Jacobian J_{jk} = d(component j)/dx_k at p.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const;

  std::string to_string() const;  // one component per line
  static PolyVectorField parse(const std::string& text, int dim);

 private:
  int dim_;
  std::vector<Polynomial> components_;
};

/// Weights (w_1..w_n) of a privileged coordinate system: w_1 = 1,
/// nondecreasing positive integers.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<int> w);

  int dim() const { return static_cast<int>(weights_.size()); }
  int operator[](int j) const { return weights_[j]; }
  const std::vector<int>& values() const { return weights_; }
  int max_weight() const { return weights_.empty() ? 0 : weights_.back(); }

  bool operator==(const WeightVector& o) const { return weights_ == o.weights_; }

 private:
  std::vector<int> weights_;
};

/// [X,Y] = DY.X - DX.Y with exact coefficients.
PolyVectorField lie_bracket(const PolyVectorField& X, const PolyVectorField& Y);

/// Splits X into (homogeneous, remainder) by weighted degree, where the
/// monomial x^a d/dx_j has weighted degree <a,w> - w_j. The homogeneous part
/// collects exactly the degree -1 terms. Terms of degree < -1 mean the
/// coordinates are not privileged for w.
std::pair<PolyVectorField, PolyVectorField> weighted_split(const PolyVectorField& X,
                                                           const WeightVector& w);

/// Exact pullback under the dilation d_l(x) = (l^{w_1} x_1, ..., l^{w_n} x_n)
/// for a rational l: (d_l^* X)_j(x) = l^{-w_j} X_j(d_l x). A field is
/// delta-homogeneous of degree -1 iff d_l^* X == X * (1/l).
PolyVectorField dilation_pullback(const PolyVectorField& X, const WeightVector& w,
                                  const Rational& lambda);

}  // namespace srlab
