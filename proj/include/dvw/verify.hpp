// Mechanical checks of the SBP operator families: summation-by-parts
// identities, polynomial exactness, definiteness and the borrowing estimate.
#pragma once

#include <string>
#include <vector>

namespace dvw {

struct InvariantCheck {
    std::string name;
    double residual = 0.0;   // measured quantity (relative where it makes sense)
    double tolerance = 0.0;  // pass iff residual <= tolerance
    bool pass = false;
    std::string detail;
};

// Runs every operator invariant for one order.  `pairs` random vector pairs
// are drawn from a generator seeded with `seed`.
std::vector<InvariantCheck> verify_operators(int order, int pairs = 50, unsigned seed = 20240611u);

// Interior and boundary degrees up to which each operator is exact.
struct ExactnessRow {
    std::string op;
    int interior_degree = 0, boundary_degree = 0;  // expected
    double interior_error = 0.0, boundary_error = 0.0;  // worst relative error up to that degree
};
std::vector<ExactnessRow> exactness_table(int order);

}  // namespace dvw
