#pragma once

#include <string>

#include "srlab/structure.hpp"

namespace srlab {

/// Grushin plane on R^2: {d/dx, x d/dy}. Singular line {x = 0}.
SubRiemannianStructure grushin();

/// Perturbed Grushin plane: {d/dx, (x + x^2) d/dy}. Its nilpotent
/// approximation at 0 with weights (1,2) is the Grushin plane.
SubRiemannianStructure perturbed_grushin();

/// Martinet structure on R^3: {d/dx, d/dy + x^2 d/dz}.
SubRiemannianStructure martinet();

/// Heisenberg group frame on R^3 (polarized coordinates): {d/dx, d/dy + x d/dz}.
SubRiemannianStructure heisenberg();

/// Euclidean R^n: the n coordinate fields.
SubRiemannianStructure euclidean(int n);

/// Grushin structure recentered at a regular base point (x0, 0), x0 != 0:
/// generators {d/dx, (x0 + x) d/dy} in coordinates centered at the point.
SubRiemannianStructure grushin_at(double x0);

/// Resolves a named structure: one of the shipped labels above,
/// "euclidean(N)", or a path to a structure file.
SubRiemannianStructure structure_by_name(const std::string& name);

}  // namespace srlab
