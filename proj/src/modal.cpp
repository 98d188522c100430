#include "wgreen/modal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wgreen/errors.hpp"
#include "wgreen/quadrature.hpp"

namespace wgreen::modal {

namespace {

constexpr int kScanPoints = 10000;

/// cos-like and sinc-like solutions of y'' = -w y:
///   c(x) = cos(sqrt(w) x)            (cosh for w < 0)
///   s(x) = sin(sqrt(w) x)/sqrt(w)    (sinh(..)/sqrt(-w) for w < 0)
/// Series near w = 0 keeps both branches smooth.
struct Oscillator {
    double c, s;
};

Oscillator osc(double w, double x) {
    const double wx2 = w * x * x;
    if (std::abs(wx2) < 1e-12) {
        const double x2 = x * x;
        return {1.0 - 0.5 * w * x2 * (1.0 - w * x2 / 12.0),
                x * (1.0 - w * x2 / 6.0 * (1.0 - w * x2 / 20.0))};
    }
    if (w > 0.0) {
        const double u = std::sqrt(w);
        return {std::cos(u * x), std::sin(u * x) / u};
    }
    const double u = std::sqrt(-w);
    return {std::cosh(u * x), std::sinh(u * x) / u};
}

struct State {
    double phi, dphi;
};

State initial_state(Parity parity, double lambda) {
    if (parity == Parity::symmetric) return {1.0, 0.0};
    return {0.0, std::sqrt(lambda)};
}

int rk4_steps(const WaveguideProfile& profile, double lambda) {
    // Base resolution h/512; refined for large lambda so the oscillation
    // sqrt(lambda)*h stays resolved.
    const double theta = profile.h() * std::sqrt(std::max(lambda, 0.0));
    return std::max(512, static_cast<int>(std::ceil(8.0 * theta)));
}

/// One RK4 pass over [0, x_end] for phi'' = (q(x) - lambda) phi.
/// Visits the sorted points in `xs` (all within [0, x_end]) with cubic
/// Hermite interpolation inside steps; returns the state at x_end.
State integrate_core(const WaveguideProfile& profile, Parity parity, double lambda,
                     double x_end, std::span<const double> xs, std::span<double> out_phi,
                     std::span<double> out_dphi) {
    const int n = rk4_steps(profile, lambda);
    const double dx = x_end / n;
    if (!(dx > std::numeric_limits<double>::min() * 1e6) && x_end > 0.0) {
        throw NumericalError("transverse ODE step size underflow", dx);
    }
    auto rhs = [&](double x, const State& y) -> State {
        return {y.dphi, (profile.q(x) - lambda) * y.phi};
    };
    State y = initial_state(parity, lambda);
    std::size_t next = 0;
    auto emit_in_step = [&](double x0, const State& y0, const State& y1, double step) {
        while (next < xs.size() && xs[next] <= x0 + step + 1e-14) {
            const double t = std::clamp((xs[next] - x0) / step, 0.0, 1.0);
            // Cubic Hermite on (phi, phi').
            const double t2 = t * t, t3 = t2 * t;
            const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
            const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
            if (!out_phi.empty())
                out_phi[next] = h00 * y0.phi + h10 * step * y0.dphi + h01 * y1.phi +
                                h11 * step * y1.dphi;
            if (!out_dphi.empty()) {
                const double d00 = (6 * t2 - 6 * t) / step, d10 = 3 * t2 - 4 * t + 1;
                const double d01 = (-6 * t2 + 6 * t) / step, d11 = 3 * t2 - 2 * t;
                out_dphi[next] = d00 * y0.phi + d10 * step * y0.dphi + d01 * y1.phi +
                                 d11 * step * y1.dphi;
            }
            ++next;
        }
    };
    for (int i = 0; i < n; ++i) {
        const double x0 = i * dx;
        const State k1 = rhs(x0, y);
        const State k2 = rhs(x0 + 0.5 * dx, {y.phi + 0.5 * dx * k1.phi, y.dphi + 0.5 * dx * k1.dphi});
        const State k3 = rhs(x0 + 0.5 * dx, {y.phi + 0.5 * dx * k2.phi, y.dphi + 0.5 * dx * k2.dphi});
        const State k4 = rhs(x0 + dx, {y.phi + dx * k3.phi, y.dphi + dx * k3.dphi});
        State y1{y.phi + dx / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi),
                 y.dphi + dx / 6.0 * (k1.dphi + 2 * k2.dphi + 2 * k3.dphi + k4.dphi)};
        emit_in_step(x0, y, y1, dx);
        y = y1;
    }
    // Points at x_end itself (or rounding stragglers).
    while (next < xs.size()) {
        if (!out_phi.empty()) out_phi[next] = y.phi;
        if (!out_dphi.empty()) out_dphi[next] = y.dphi;
        ++next;
    }
    return y;
}

State core_state_at(const WaveguideProfile& profile, Parity parity, double lambda, double x) {
    // x in [0, h].
    if (profile.uniform_core()) {
        const double w = lambda - profile.core_q();
        const Oscillator o = osc(w, x);
        if (parity == Parity::symmetric) return {o.c, -w * o.s};
        const double sl = std::sqrt(lambda);
        return {sl * o.s, sl * o.c};
    }
    if (x == 0.0) return initial_state(parity, lambda);
    return integrate_core(profile, parity, lambda, x, {}, {}, {});
}

void require_positive_lambda(double lambda, const char* who) {
    if (!(lambda > 0.0)) {
        throw DomainError(std::string(who) + ": lambda must be positive");
    }
}

} // namespace

WaveguideProfile::WaveguideProfile(double k, double h, double n_co, double n_cl)
    : k_(k), h_(h), n_cl_(n_cl), n_co_const_(n_co) {
    if (!(k > 0.0)) throw DomainError("profile: k must be positive");
    if (!(h > 0.0)) throw DomainError("profile: h must be positive");
    if (!(n_cl > 0.0)) throw DomainError("profile: n_cl must be positive");
    if (!(n_co > 0.0)) throw DomainError("profile: n_co must be positive");
    n_star_ = std::max(n_co, n_cl);
    kappa2_ = k_ * k_ * n_star_ * n_star_;
    d2_ = k_ * k_ * (n_star_ * n_star_ - n_cl_ * n_cl_);
    core_q_ = k_ * k_ * (n_star_ * n_star_ - n_co * n_co);
}

WaveguideProfile::WaveguideProfile(double k, double h, std::function<double(double)> n_co,
                                   double n_cl, double n_co_sup)
    : k_(k), h_(h), n_cl_(n_cl), core_fn_(std::move(n_co)) {
    if (!(k > 0.0)) throw DomainError("profile: k must be positive");
    if (!(h > 0.0)) throw DomainError("profile: h must be positive");
    if (!(n_cl > 0.0)) throw DomainError("profile: n_cl must be positive");
    if (!core_fn_) throw DomainError("profile: core index function is empty");
    n_star_ = std::max(n_co_sup, n_cl);
    kappa2_ = k_ * k_ * n_star_ * n_star_;
    d2_ = k_ * k_ * (n_star_ * n_star_ - n_cl_ * n_cl_);
    core_q_ = 0.0;
    // Validate that the declared supremum really dominates the samples.
    const int samples = 2048;
    for (int i = 0; i <= samples; ++i) {
        const double x = h_ * i / samples;
        const double n = core_fn_(x);
        if (n > n_co_sup * (1.0 + 1e-12)) {
            throw DomainError("profile: core index exceeds declared supremum");
        }
        if (!(n > 0.0)) throw DomainError("profile: core index must stay positive");
    }
}

double WaveguideProfile::index(double x) const {
    const double ax = std::abs(x);
    if (ax > h_) return n_cl_;
    return core_fn_ ? core_fn_(ax) : n_co_const_;
}

double WaveguideProfile::q(double x) const {
    const double n = index(x);
    return k_ * k_ * (n_star_ * n_star_ - n * n);
}

TransverseSolution solve_transverse(const WaveguideProfile& profile, Parity parity,
                                    double lambda) {
    require_positive_lambda(lambda, "solve_transverse");
    const State at_h = core_state_at(profile, parity, lambda, profile.h());
    return {parity, lambda, at_h.phi, at_h.dphi};
}

double phi_interior(const WaveguideProfile& profile, Parity parity, double lambda, double x) {
    require_positive_lambda(lambda, "phi_interior");
    const double ax = std::abs(x);
    if (ax > profile.h() * (1.0 + 1e-12)) {
        throw DomainError("phi_interior: |x| exceeds the core half-width");
    }
    const double v = core_state_at(profile, parity, lambda, std::min(ax, profile.h())).phi;
    if (x < 0.0 && parity == Parity::antisymmetric) return -v;
    return v;
}

double dphi_interior(const WaveguideProfile& profile, Parity parity, double lambda, double x) {
    require_positive_lambda(lambda, "dphi_interior");
    const double ax = std::abs(x);
    if (ax > profile.h() * (1.0 + 1e-12)) {
        throw DomainError("dphi_interior: |x| exceeds the core half-width");
    }
    const double d = core_state_at(profile, parity, lambda, std::min(ax, profile.h())).dphi;
    if (x < 0.0 && parity == Parity::symmetric) return -d;
    return d;
}

void phi_interior_many(const WaveguideProfile& profile, Parity parity, double lambda,
                       std::span<const double> xs, std::span<double> out) {
    require_positive_lambda(lambda, "phi_interior_many");
    if (xs.size() != out.size()) throw DomainError("phi_interior_many: size mismatch");
    if (xs.empty()) return;
    if (profile.uniform_core()) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const State s = core_state_at(profile, parity, lambda, xs[i]);
            out[i] = s.phi;
        }
        return;
    }
    integrate_core(profile, parity, lambda, profile.h(), xs, out, {});
}

double dispersion(const WaveguideProfile& profile, Parity parity, double lambda) {
    const TransverseSolution sol = solve_transverse(profile, parity, lambda);
    return std::sqrt(profile.d2() - lambda) * sol.phi_h + sol.dphi_h;
}

double core_phi_sq_integral(const WaveguideProfile& profile, Parity parity, double lambda) {
    const int panels = std::max(2, static_cast<int>(std::ceil(profile.h() * std::sqrt(lambda))));
    if (profile.uniform_core()) {
        return 2.0 * quad::integrate(
                         [&](double x) {
                             const double p = core_state_at(profile, parity, lambda, x).phi;
                             return p * p;
                         },
                         0.0, profile.h(), panels, 16);
    }
    const quad::PanelRule rule = quad::composite(0.0, profile.h(), panels, 16);
    std::vector<double> phis(rule.size());
    phi_interior_many(profile, parity, lambda, rule.x, phis);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.w[i] * phis[i] * phis[i];
    return 2.0 * acc;
}

namespace {

GuidedMode make_mode(const WaveguideProfile& profile, Parity parity, double lambda) {
    const TransverseSolution sol = solve_transverse(profile, parity, lambda);
    const double decay = std::sqrt(profile.d2() - lambda);
    const double core_l2 = core_phi_sq_integral(profile, parity, lambda);
    GuidedMode m;
    m.parity = parity;
    m.lambda = lambda;
    m.decay = decay;
    m.beta = std::sqrt(profile.kappa2() - lambda);
    m.phi_h = sol.phi_h;
    m.dphi_h = sol.dphi_h;
    m.r = decay / (decay * core_l2 + sol.phi_h * sol.phi_h);
    m.residual = decay * sol.phi_h + sol.dphi_h;
    return m;
}

/// Bisection/secant hybrid on a bracketed simple root of the dispersion
/// function. The bracket is maintained; secant steps are taken when they
/// stay inside it.
double refine_root(const WaveguideProfile& profile, Parity parity, double lo, double hi,
                   double flo, double fhi) {
    double best = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        double cand;
        const double denom = fhi - flo;
        if (denom != 0.0) {
            cand = hi - fhi * (hi - lo) / denom;
            if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
        } else {
            cand = 0.5 * (lo + hi);
        }
        const double fc = dispersion(profile, parity, cand);
        best = cand;
        if (std::abs(fc) <= 1e-12 * (1.0 + std::abs(cand))) return cand;
        if ((fc < 0.0) == (flo < 0.0)) {
            lo = cand;
            flo = fc;
        } else {
            hi = cand;
            fhi = fc;
        }
        if (hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + hi)) {
            return 0.5 * (lo + hi);
        }
    }
    return best;
}

} // namespace

std::vector<GuidedMode> find_guided_modes(const WaveguideProfile& profile,
                                          std::vector<std::string>* warnings) {
    std::vector<GuidedMode> modes;
    const double d2 = profile.d2();
    if (!(d2 > 0.0)) return modes;
    const double step = d2 / (kScanPoints + 1);
    for (Parity parity : {Parity::symmetric, Parity::antisymmetric}) {
        double prev_lambda = step;
        double prev_f = dispersion(profile, parity, prev_lambda);
        for (int i = 2; i <= kScanPoints; ++i) {
            const double lambda = step * i;
            const double f = dispersion(profile, parity, lambda);
            if (prev_f == 0.0) {
                modes.push_back(make_mode(profile, parity, prev_lambda));
            } else if ((f < 0.0) != (prev_f < 0.0)) {
                const double root =
                    refine_root(profile, parity, prev_lambda, lambda, prev_f, f);
                const double res = dispersion(profile, parity, root);
                if (std::abs(res) > 1e-9 * (1.0 + std::abs(root)) && warnings) {
                    warnings->push_back("dispersion root refinement stalled near lambda=" +
                                        std::to_string(root) + " (scan step " +
                                        std::to_string(step) + ", residual " +
                                        std::to_string(res) + ")");
                }
                modes.push_back(make_mode(profile, parity, root));
            }
            prev_lambda = lambda;
            prev_f = f;
        }
    }
    std::sort(modes.begin(), modes.end(),
              [](const GuidedMode& a, const GuidedMode& b) { return a.lambda < b.lambda; });
    return modes;
}

double sigma_from_boundary(double d2, double lambda, double phi_h, double dphi_h) {
    const double diff = lambda - d2;
    return std::sqrt(diff) / (diff * phi_h * phi_h + dphi_h * dphi_h);
}

double spectral_density(const WaveguideProfile& profile, Parity parity, double lambda) {
    if (!(lambda > profile.d2())) {
        throw DomainError("spectral_density: lambda must exceed d2");
    }
    const TransverseSolution sol = solve_transverse(profile, parity, lambda);
    return sigma_from_boundary(profile.d2(), lambda, sol.phi_h, sol.dphi_h);
}

double mode_function(const WaveguideProfile& profile, Parity parity, double lambda, double x) {
    require_positive_lambda(lambda, "mode_function");
    if (lambda == profile.d2()) {
        throw DomainError("mode_function: lambda = d2 is excluded");
    }
    const double ax = std::abs(x);
    const double sign = (x < 0.0 && parity == Parity::antisymmetric) ? -1.0 : 1.0;
    if (ax <= profile.h()) {
        return sign * core_state_at(profile, parity, lambda, ax).phi;
    }
    const TransverseSolution sol = solve_transverse(profile, parity, lambda);
    const double t = ax - profile.h();
    if (lambda > profile.d2()) {
        const Oscillator o = osc(lambda - profile.d2(), t);
        return sign * (sol.phi_h * o.c + sol.dphi_h * o.s);
    }
    const double decay = std::sqrt(profile.d2() - lambda);
    return sign * sol.phi_h * std::exp(-decay * t);
}

double guided_mode_value(const WaveguideProfile& profile, const GuidedMode& mode, double x) {
    const double ax = std::abs(x);
    const double sign = (x < 0.0 && mode.parity == Parity::antisymmetric) ? -1.0 : 1.0;
    if (ax <= profile.h()) {
        return sign * core_state_at(profile, mode.parity, mode.lambda, ax).phi;
    }
    return sign * mode.phi_h * std::exp(-mode.decay * (ax - profile.h()));
}

double cladding_oscillatory(double d2, double lambda, double phi_h, double dphi_h, double tau) {
    const Oscillator o = osc(lambda - d2, tau);
    return phi_h * o.c + dphi_h * o.s;
}

} // namespace wgreen::modal
