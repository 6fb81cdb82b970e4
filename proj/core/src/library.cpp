#include "srlab/library.hpp"

#include <fstream>
#include <sstream>

#include "srlab/errors.hpp"

namespace srlab {

namespace {

Polynomial c1(int dim) { return Polynomial::constant(dim, Rational(1)); }

}  // namespace

SubRiemannianStructure grushin() {
  const int n = 2;
  PolyVectorField X1({c1(n), Polynomial(n)});
  PolyVectorField X2({Polynomial(n), Polynomial::coordinate(n, 0)});
  return SubRiemannianStructure({X1, X2}, "grushin", Box::cube(n, 8.0));
}

SubRiemannianStructure perturbed_grushin() {
  const int n = 2;
  PolyVectorField X1({c1(n), Polynomial(n)});
  Polynomial x = Polynomial::coordinate(n, 0);
  PolyVectorField X2({Polynomial(n), x + x * x});
  return SubRiemannianStructure({X1, X2}, "perturbed_grushin", Box::cube(n, 8.0));
}

SubRiemannianStructure martinet() {
  const int n = 3;
  PolyVectorField X1({c1(n), Polynomial(n), Polynomial(n)});
  Polynomial x = Polynomial::coordinate(n, 0);
  PolyVectorField X2({Polynomial(n), c1(n), x * x});
  return SubRiemannianStructure({X1, X2}, "martinet", Box::cube(n, 8.0));
}

SubRiemannianStructure heisenberg() {
  const int n = 3;
  PolyVectorField X1({c1(n), Polynomial(n), Polynomial(n)});
  PolyVectorField X2({Polynomial(n), c1(n), Polynomial::coordinate(n, 0)});
  return SubRiemannianStructure({X1, X2}, "heisenberg", Box::cube(n, 8.0));
}

SubRiemannianStructure euclidean(int n) {
  if (n < 1) throw ArgumentError("euclidean: dimension must be >= 1");
  std::vector<PolyVectorField> gens;
  for (int j = 0; j < n; ++j) gens.push_back(PolyVectorField::coordinate(n, j));
  std::ostringstream label;
  label << "euclidean(" << n << ")";
  return SubRiemannianStructure(std::move(gens), label.str(), Box::cube(n, 16.0));
}

SubRiemannianStructure grushin_at(double x0) {
  const int n = 2;
  PolyVectorField X1({c1(n), Polynomial(n)});
  // exact only for rational x0; callers pass simple values like 1 or -1/2
  Rational r0(x0);
  Polynomial shifted = Polynomial::constant(n, r0) + Polynomial::coordinate(n, 0);
  PolyVectorField X2({Polynomial(n), shifted});
  std::ostringstream label;
  label << "grushin_at(" << x0 << ")";
  return SubRiemannianStructure({X1, X2}, label.str(), Box::cube(n, 8.0));
}

SubRiemannianStructure structure_by_name(const std::string& name) {
  if (name == "grushin") return grushin();
  if (name == "perturbed_grushin") return perturbed_grushin();
  if (name == "martinet") return martinet();
  if (name == "heisenberg") return heisenberg();
  if (name.rfind("euclidean(", 0) == 0 && name.back() == ')') {
    int n = std::stoi(name.substr(10, name.size() - 11));
    return euclidean(n);
  }
  std::ifstream in(name);
  if (!in) throw ArgumentError("unknown structure and unreadable file: " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return SubRiemannianStructure::from_file_text(ss.str(), name);
}

}  // namespace srlab
