#include <dissect/curve.hpp>

#include <algorithm>
#include <stdexcept>

namespace dissect {

namespace {
const Rational kHalf(1, 2);
const Rational kQuarter(1, 4);

void check_sigma(const Rational& sigma) {
    if (sigma <= Rational(0) || sigma > Rational(1))
        throw std::domain_error("sigma must lie in (0, 1]");
}
}  // namespace

long rho(long ell) {
    if (ell < 0) throw std::domain_error("rho needs ell >= 0");
    return 1 + ell * (ell + 1) / 2;
}

long level(const Rational& sigma) {
    check_sigma(sigma);
    if (sigma > kHalf) return 0;
    long ell = 1;
    // rho grows quadratically, so this terminates after O(sqrt(1/sigma)) steps
    while (!(Rational(1, rho(ell + 1)) < sigma && sigma <= Rational(1, rho(ell)))) ++ell;
    return ell;
}

Rational tau(const Rational& sigma) {
    check_sigma(sigma);
    if (sigma > kHalf) return kHalf;
    long ell = level(sigma);
    return Rational(1) - Rational(1, ell + 1) - Rational(rho(ell) - 2, ell + 1) * sigma;
}

Rational time_exponent_recursive(const Rational& sigma) {
    check_sigma(sigma);
    if (sigma >= kQuarter) return kHalf;
    Rational a = Rational(1) - tau(sigma);
    Rational b = a - sigma;
    return b + std::max(a * time_exponent_recursive(sigma / a),
                        (Rational(1) - a) * time_exponent_recursive(sigma / (Rational(1) - a)));
}

Rational tau_schroeppel_shamir(const Rational& sigma) {
    check_sigma(sigma);
    if (sigma >= kQuarter) return kHalf;
    return Rational(1) - Rational(2) * sigma;
}

CurvePoint curve_point(const Rational& sigma) {
    CurvePoint p;
    p.ell = level(sigma);
    p.rho = rho(p.ell);
    p.tau = tau(sigma);
    p.alpha = Rational(1) - p.tau;
    p.beta = p.alpha - sigma;
    return p;
}

namespace {

std::unique_ptr<DissectNode> build_node(const Rational& sigma, const Rational& exact_size,
                                        int n, int first, const Rational& sigma_top,
                                        const std::string& path) {
    auto v = std::make_unique<DissectNode>();
    v->path = path;
    v->sigma = sigma;
    v->exact_size = exact_size;
    v->n = n;
    v->first = first;
    v->last = first + n;
    CurvePoint p = curve_point(sigma);
    v->tau = p.tau;
    v->alpha = p.alpha;
    v->beta = p.beta;
    v->gamma = v->beta * sigma_top / sigma;
    if (sigma >= kQuarter || n <= 8) return v;  // leaf
    Int nl_r = (v->alpha * Rational(n)).round_half_even();
    long nl = std::clamp(nl_r.get_si(), 1L, long(n - 1));
    v->left = build_node(sigma / v->alpha, exact_size * v->alpha, int(nl), first, sigma_top,
                         path + "L");
    v->right = build_node(sigma / v->tau, exact_size * v->tau, n - int(nl), first + int(nl),
                          sigma_top, path + "R");
    return v;
}

void collect(const DissectNode* v, std::vector<const DissectNode*>& out) {
    out.push_back(v);
    if (!v->leaf()) {
        collect(v->left.get(), out);
        collect(v->right.get(), out);
    }
}

}  // namespace

DissectionTree plan_tree(const Rational& sigma, int n) {
    check_sigma(sigma);
    if (n < 1) throw std::domain_error("plan_tree needs n >= 1");
    DissectionTree t;
    t.sigma_top = sigma;
    t.n_top = n;
    t.root = build_node(sigma, Rational(n), n, 0, sigma, "");
    collect(t.root.get(), t.nodes);
    for (const DissectNode* v : t.nodes)
        if (!v->leaf()) t.gamma_levels.push_back(v->gamma);
    std::sort(t.gamma_levels.begin(), t.gamma_levels.end());
    t.gamma_levels.erase(std::unique(t.gamma_levels.begin(), t.gamma_levels.end()),
                         t.gamma_levels.end());
    Rational prev(0);
    for (const Rational& g : t.gamma_levels) {
        t.deltas.push_back(g - prev);
        prev = g;
    }
    return t;
}

CostPrediction predict_cost(const DissectionTree& tree) {
    CostPrediction c;
    c.time_exponent = time_exponent_recursive(tree.sigma_top);
    c.space_exponent = tree.sigma_top;
    if (c.time_exponent != tau(tree.sigma_top))
        throw std::logic_error("recursive time exponent disagrees with the closed form");
    return c;
}

}  // namespace dissect
