#pragma once

#include <dissect/rational.hpp>

#include <memory>
#include <string>
#include <vector>

namespace dissect {

// 2, 4, 7, 11, 16, 22, ... ; rho(0) = 1
long rho(long ell);

// index ell >= 1 with 1/rho(ell+1) < sigma <= 1/rho(ell); 0 when sigma > 1/2.
// sigma must lie in (0, 1].
long level(const Rational& sigma);

// time exponent for space budget sigma: piecewise-linear, 1/2 on [1/4, 1]
Rational tau(const Rational& sigma);

// the same exponent by direct recursion over the split
// (base 1/2 for sigma >= 1/4); equals tau everywhere
Rational time_exponent_recursive(const Rational& sigma);

// one-list/two-list time exponent at the same space budget, for comparison:
// 1 - 2*sigma below 1/4, flat 1/2 beyond
Rational tau_schroeppel_shamir(const Rational& sigma);

struct CurvePoint {
    long ell = 0;
    long rho = 1;
    Rational tau;
    Rational alpha;  // 1 - tau: left branch share
    Rational beta;   // alpha - sigma: loop exponent share
};

CurvePoint curve_point(const Rational& sigma);

struct DissectNode {
    std::string path;  // "" for the root, then 'L'/'R' steps
    Rational sigma;
    Rational tau, alpha, beta;
    Rational gamma;       // beta_v * sigma_top / sigma_v
    Rational exact_size;  // pre-rounding size; sigma * exact_size is invariant
    int n = 0;            // rounded item count
    int first = 0, last = 0;  // item index range [first, last)
    std::unique_ptr<DissectNode> left, right;
    bool leaf() const { return !left; }
};

struct DissectionTree {
    Rational sigma_top;
    int n_top = 0;
    std::unique_ptr<DissectNode> root;
    std::vector<const DissectNode*> nodes;  // preorder
    std::vector<Rational> gamma_levels;     // distinct internal gammas, ascending
    std::vector<Rational> deltas;           // gamma_levels first differences
};

// Recursion stops when sigma_v >= 1/4 or n_v <= 8 items. Left child gets
// round(alpha*n) items (ties to even, clamped to [1, n-1]) off the front.
DissectionTree plan_tree(const Rational& sigma, int n);

struct CostPrediction {
    Rational time_exponent;   // computed recursively over the tree shape
    Rational space_exponent;  // sigma_top
};

// throws std::logic_error if the recursive exponent disagrees with tau
CostPrediction predict_cost(const DissectionTree& tree);

}  // namespace dissect
