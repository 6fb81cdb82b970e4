#include "srlab/polyfield.hpp"

#include <cmath>
#include <sstream>

namespace srlab {

namespace {

void check_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

Rational pow_rational(const Rational& base, int e) {
  Rational r(1);
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

Polynomial Polynomial::constant(int dim, const Rational& c) {
  Polynomial p(dim);
  p.add_term(Exponents(dim, 0), c);
  return p;
}

Polynomial Polynomial::coordinate(int dim, int var) {
  Exponents e(dim, 0);
  e[var] = 1;
  return monomial(dim, std::move(e), Rational(1));
}

Polynomial Polynomial::monomial(int dim, Exponents exps, const Rational& c) {
  Polynomial p(dim);
  p.add_term(exps, c);
  return p;
}

void Polynomial::add_term(const Exponents& exps, const Rational& c) {
  if (static_cast<int>(exps.size()) != dim_) {
    throw DimensionError("monomial exponent vector has wrong length");
  }
  if (c == 0) return;
  auto it = terms_.find(exps);
  if (it == terms_.end()) {
    terms_.emplace(exps, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  check_same_dim(dim_, o.dim_, "poly add");
  Polynomial r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  check_same_dim(dim_, o.dim_, "poly sub");
  Polynomial r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  check_same_dim(dim_, o.dim_, "poly mul");
  Polynomial r(dim_);
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : o.terms_) {
      Exponents e(dim_);
      for (int i = 0; i < dim_; ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::operator*(const Rational& c) const {
  Polynomial r(dim_);
  if (c == 0) return r;
  for (const auto& [e, k] : terms_) r.add_term(e, k * c);
  return r;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial r(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponents d = e;
    d[var] -= 1;
    r.add_term(d, c * e[var]);
  }
  return r;
}

double Polynomial::evaluate(const Eigen::VectorXd& p) const {
  if (p.size() != dim_) throw DimensionError("evaluation point has wrong dimension");
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = static_cast<double>(c);
    for (int i = 0; i < dim_; ++i) {
      for (int k = 0; k < e[i]; ++k) t *= p[i];
    }
    acc += t;
  }
  return acc;
}

Rational Polynomial::evaluate_exact(const std::vector<Rational>& p) const {
  if (static_cast<int>(p.size()) != dim_) {
    throw DimensionError("evaluation point has wrong dimension");
  }
  Rational acc(0);
  for (const auto& [e, c] : terms_) {
    Rational t = c;
    for (int i = 0; i < dim_; ++i) t *= pow_rational(p[i], e[i]);
    acc += t;
  }
  return acc;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c.str();
    bool any = false;
    for (int i = 0; i < dim_; ++i) {
      if (e[i] > 0) any = true;
    }
    if (any) {
      os << " *";
      for (int i = 0; i < dim_; ++i) {
        if (e[i] > 0) os << " x" << (i + 1) << "^" << e[i];
      }
    }
  }
  return os.str();
}

Polynomial Polynomial::parse(const std::string& text, int dim) {
  Polynomial p(dim);
  // Terms are joined by " + "; a coefficient's own sign is attached to it.
  std::string s = text;
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t plus = s.find(" + ", pos);
    if (plus == std::string::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, plus - pos));
    pos = plus + 3;
  }
  for (auto& part : parts) {
    std::istringstream is(part);
    std::string tok;
    if (!(is >> tok)) continue;
    if (tok == "0") continue;
    Rational coeff;
    Exponents e(dim, 0);
    bool coeff_set = false;
    auto parse_factor = [&](const std::string& f) {
      if (f == "*") return;
      if (f.size() >= 2 && f[0] == 'x') {
        std::size_t caret = f.find('^');
        int var = 0, exp = 1;
        if (caret == std::string::npos) {
          var = std::stoi(f.substr(1));
        } else {
          var = std::stoi(f.substr(1, caret - 1));
          exp = std::stoi(f.substr(caret + 1));
        }
        if (var < 1 || var > dim) throw ArgumentError("bad variable in polynomial: " + f);
        e[var - 1] += exp;
      } else {
        coeff = Rational(f);
        coeff_set = true;
      }
    };
    parse_factor(tok);
    while (is >> tok) parse_factor(tok);
    if (!coeff_set) coeff = Rational(1);
    p.add_term(e, coeff);
  }
  return p;
}

PolyVectorField::PolyVectorField(int dim)
    : dim_(dim), components_(dim, Polynomial(dim)) {}

PolyVectorField::PolyVectorField(std::vector<Polynomial> components)
    : dim_(static_cast<int>(components.size())), components_(std::move(components)) {
  for (const auto& c : components_) {
    check_same_dim(c.dim(), dim_, "vector field component");
  }
}

PolyVectorField PolyVectorField::coordinate(int dim, int var) {
  PolyVectorField f(dim);
  f.components_[var] = Polynomial::constant(dim, Rational(1));
  return f;
}

bool PolyVectorField::is_zero() const {
  for (const auto& c : components_) {
    if (!c.is_zero()) return false;
  }
  return true;
}

PolyVectorField PolyVectorField::operator+(const PolyVectorField& o) const {
  check_same_dim(dim_, o.dim_, "field add");
  std::vector<Polynomial> comps;
  comps.reserve(dim_);
  for (int j = 0; j < dim_; ++j) comps.push_back(components_[j] + o.components_[j]);
  return PolyVectorField(std::move(comps));
}

PolyVectorField PolyVectorField::operator-(const PolyVectorField& o) const {
  check_same_dim(dim_, o.dim_, "field sub");
  std::vector<Polynomial> comps;
  comps.reserve(dim_);
  for (int j = 0; j < dim_; ++j) comps.push_back(components_[j] - o.components_[j]);
  return PolyVectorField(std::move(comps));
}

PolyVectorField PolyVectorField::operator*(const Rational& c) const {
  std::vector<Polynomial> comps;
  comps.reserve(dim_);
  for (int j = 0; j < dim_; ++j) comps.push_back(components_[j] * c);
  return PolyVectorField(std::move(comps));
}

bool PolyVectorField::operator==(const PolyVectorField& o) const {
  return dim_ == o.dim_ && components_ == o.components_;
}

Eigen::VectorXd PolyVectorField::evaluate(const Eigen::VectorXd& p) const {
  Eigen::VectorXd v(dim_);
  for (int j = 0; j < dim_; ++j) v[j] = components_[j].evaluate(p);
  return v;
}

Eigen::MatrixXd PolyVectorField::jacobian(const Eigen::VectorXd& p) const {
  Eigen::MatrixXd J(dim_, dim_);
  for (int j = 0; j < dim_; ++j) {
    for (int k = 0; k < dim_; ++k) J(j, k) = components_[j].derivative(k).evaluate(p);
  }
  return J;
}

std::string PolyVectorField::to_string() const {
  std::ostringstream os;
  for (int j = 0; j < dim_; ++j) {
    os << components_[j].to_string();
    if (j + 1 < dim_) os << "\n";
  }
  return os.str();
}

PolyVectorField PolyVectorField::parse(const std::string& text, int dim) {
  std::istringstream is(text);
  std::vector<Polynomial> comps;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    comps.push_back(Polynomial::parse(line, dim));
  }
  if (static_cast<int>(comps.size()) != dim) {
    throw DimensionError("vector field text has " + std::to_string(comps.size()) +
                         " components, expected " + std::to_string(dim));
  }
  return PolyVectorField(std::move(comps));
}

WeightVector::WeightVector(std::vector<int> w) : weights_(std::move(w)) {
  if (weights_.empty()) throw ArgumentError("empty weight vector");
  if (weights_[0] != 1) throw ArgumentError("weights must start at 1");
  for (std::size_t j = 0; j + 1 < weights_.size(); ++j) {
    if (weights_[j + 1] < weights_[j]) throw ArgumentError("weights must be nondecreasing");
  }
  for (int w : weights_) {
    if (w < 1) throw ArgumentError("weights must be positive");
  }
}

PolyVectorField lie_bracket(const PolyVectorField& X, const PolyVectorField& Y) {
  check_same_dim(X.dim(), Y.dim(), "lie_bracket");
  const int n = X.dim();
  std::vector<Polynomial> comps;
  comps.reserve(n);
  for (int j = 0; j < n; ++j) {
    Polynomial acc(n);
    for (int i = 0; i < n; ++i) {
      acc = acc + X.component(i) * Y.component(j).derivative(i);
      acc = acc - Y.component(i) * X.component(j).derivative(i);
    }
    comps.push_back(std::move(acc));
  }
  return PolyVectorField(std::move(comps));
}

std::pair<PolyVectorField, PolyVectorField> weighted_split(const PolyVectorField& X,
                                                           const WeightVector& w) {
  check_same_dim(X.dim(), w.dim(), "weighted_split");
  const int n = X.dim();
  std::vector<Polynomial> hom(n, Polynomial(n)), rem(n, Polynomial(n));
  for (int j = 0; j < n; ++j) {
    for (const auto& [e, c] : X.component(j).terms()) {
      int deg = -w[j];
      for (int i = 0; i < n; ++i) deg += e[i] * w[i];
      if (deg < -1) {
        throw NotPrivilegedError("component " + std::to_string(j + 1) +
                                 " has a term of weighted degree " + std::to_string(deg));
      }
      if (deg == -1) {
        hom[j].add_term(e, c);
      } else {
        rem[j].add_term(e, c);
      }
    }
  }
  return {PolyVectorField(std::move(hom)), PolyVectorField(std::move(rem))};
}

PolyVectorField dilation_pullback(const PolyVectorField& X, const WeightVector& w,
                                  const Rational& lambda) {
  check_same_dim(X.dim(), w.dim(), "dilation_pullback");
  if (lambda <= 0) throw ArgumentError("dilation factor must be positive");
  const int n = X.dim();
  std::vector<Polynomial> comps(n, Polynomial(n));
  for (int j = 0; j < n; ++j) {
    for (const auto& [e, c] : X.component(j).terms()) {
      int k = -w[j];
      for (int i = 0; i < n; ++i) k += e[i] * w[i];
      Rational scale = k >= 0 ? pow_rational(lambda, k) : Rational(1) / pow_rational(lambda, -k);
      comps[j].add_term(e, c * scale);
    }
  }
  return PolyVectorField(std::move(comps));
}

}  // namespace srlab
