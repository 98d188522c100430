#pragma once

#include <cstddef>
#include <vector>

namespace wgreen::quad {

/// Gauss-Legendre rule on [-1,1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Rule of the given order, computed once by Newton iteration on the
/// Legendre recurrence and cached. Thread-safe.
const GaussLegendre& gauss_legendre(int n);

/// Nodes/weights of a composite rule: `panels` equal panels of `order`
/// points each, covering [a,b]. Nodes are strictly interior to [a,b].
struct PanelRule {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

PanelRule composite(double a, double b, int panels, int order);

/// Composite Gauss-Legendre integration of f over [a,b].
template <typename Fn>
double integrate(Fn&& f, double a, double b, int panels, int order) {
    const PanelRule rule = composite(a, b, panels, order);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.w[i] * f(rule.x[i]);
    return acc;
}

} // namespace wgreen::quad
