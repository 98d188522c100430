#include "wgreen/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wgreen/errors.hpp"
#include "wgreen/quadrature.hpp"
#include "wgreen/simd/kernels.hpp"

namespace wgreen::estimates {

namespace {

constexpr double kPi = std::numbers::pi;

/// Gradient and Hessian ratios of the radial weight (1+r^2)^{-a}:
///   |grad mu|/mu = 2 a r / (1+r^2)
///   |hess mu|_F/mu = sqrt(f_rr^2 + f_t^2),
///     f_rr = -2a/(1+r^2) + 4 r^2 a(a+1)/(1+r^2)^2,  f_t = -2a/(1+r^2).
double grad_ratio(double a, double r) {
    return 2.0 * a * r / (1.0 + r * r);
}

double hess_ratio(double a, double r) {
    const double u = 1.0 + r * r;
    const double f_rr = -2.0 * a / u + 4.0 * r * r * a * (a + 1.0) / (u * u);
    const double f_t = -2.0 * a / u;
    return std::hypot(f_rr, f_t);
}

template <typename Fn>
double maximize_radial(Fn&& ratio) {
    double lo = 0.0, hi = 100.0;
    double best_r = 0.0, best = ratio(0.0);
    for (int round = 0; round < 8; ++round) {
        const int n = 4000;
        for (int i = 0; i <= n; ++i) {
            const double r = lo + (hi - lo) * i / n;
            const double v = ratio(r);
            if (v > best) {
                best = v;
                best_r = r;
            }
        }
        const double width = (hi - lo) / n * 8.0;
        lo = std::max(0.0, best_r - width);
        hi = best_r + width;
    }
    return best;
}

} // namespace

WeightSpec::WeightSpec(double a, double scale) : a_(a), scale_(scale) {
    if (!(a > 1.0)) throw DomainError("weight: decay exponent a must exceed 1");
    if (!(scale > 0.0)) throw DomainError("weight: scale must be positive");
    mu_l1_ = scale * kPi / (a - 1.0);
    // integral of (1+x^2)^{-a/2} dx = sqrt(pi) Gamma((a-1)/2) / Gamma(a/2);
    // the amplitude is carried by the transverse factor of the dominating pair.
    mu1_l1_ = scale * std::sqrt(kPi) * std::tgamma((a - 1.0) / 2.0) / std::tgamma(a / 2.0);
    mu2_l1_ = std::sqrt(kPi) * std::tgamma((a - 1.0) / 2.0) / std::tgamma(a / 2.0);
    // integral of (1+z^2)^{-a} dz = sqrt(pi) Gamma(a-1/2) / Gamma(a)
    mu2_l2sq_ = std::sqrt(kPi) * std::tgamma(a - 0.5) / std::tgamma(a);
    c1_ = maximize_radial([&](double r) { return grad_ratio(a_, r); });
    c2_ = maximize_radial([&](double r) { return hess_ratio(a_, r); });
}

namespace {

/// integral over the line by the substitution t = tan(v).
double line_integral(const std::function<double(double)>& f) {
    return quad::integrate(
        [&](double v) {
            const double c = std::cos(v);
            return f(std::tan(v)) / (c * c);
        },
        -kPi / 2.0 + 1e-9, kPi / 2.0 - 1e-9, 64, 16);
}

} // namespace

WeightSpec WeightSpec::separable(std::function<double(double)> mu1,
                                 std::function<double(double)> mu2, double decay_exponent) {
    if (!mu1 || !mu2) throw DomainError("weight: empty factor");
    if (!(decay_exponent > 1.0)) {
        throw DomainError("weight: factors must decay faster than 1/|t|");
    }
    WeightSpec w;
    w.a_ = decay_exponent;
    w.mu1_fn_ = std::move(mu1);
    w.mu2_fn_ = std::move(mu2);
    w.mu1_l1_ = line_integral(w.mu1_fn_);
    w.mu2_l1_ = line_integral(w.mu2_fn_);
    w.mu2_l2sq_ = line_integral([&](double z) {
        const double v = w.mu2_fn_(z);
        return v * v;
    });
    w.mu_l1_ = w.mu1_l1_ * w.mu2_l1_;
    if (!(w.mu_l1_ > 0.0) || !std::isfinite(w.mu_l1_) || !std::isfinite(w.mu2_l2sq_)) {
        throw DomainError("weight: factors must be positive and integrable");
    }
    // Ratio constants by dense sampling of finite-difference derivative
    // ratios of the product; the window follows the decay hint.
    const double span = 50.0;
    const int n = 400;
    const double d = 1e-5;
    auto d1 = [&](const std::function<double(double)>& f, double t) {
        return (f(t + d) - f(t - d)) / (2.0 * d);
    };
    auto d2f = [&](const std::function<double(double)>& f, double t) {
        return (f(t + d) - 2.0 * f(t) + f(t - d)) / (d * d);
    };
    // The per-factor ratios are maximized independently (the product-weight
    // ratios are monotone in each of them), with local refinement around
    // the argmax and a small safety margin so the constants dominate
    // everywhere, not just at the samples.
    auto max_ratios = [&](const std::function<double(double)>& f, double& r_max,
                          double& s_max) {
        r_max = 0.0;
        s_max = 0.0;
        double r_arg = 0.0, s_arg = 0.0;
        auto visit = [&](double t) {
            const double ft = f(t);
            if (!(ft > 0.0)) throw DomainError("weight: factors must be positive");
            const double r = std::abs(d1(f, t) / ft);
            const double s = std::abs(d2f(f, t) / ft);
            if (r > r_max) {
                r_max = r;
                r_arg = t;
            }
            if (s > s_max) {
                s_max = s;
                s_arg = t;
            }
        };
        for (int i = 0; i <= n; ++i) {
            const double at =
                span * (std::pow(1e4, static_cast<double>(i) / n) - 1.0) / (1e4 - 1.0);
            visit(at);
            visit(-at);
        }
        for (int round = 0; round < 4; ++round) {
            const double w1 = span / n / std::pow(8.0, round);
            for (int i = -10; i <= 10; ++i) {
                visit(r_arg + w1 * i);
                visit(s_arg + w1 * i);
            }
        }
    };
    double r1, s1, r2, s2;
    max_ratios(w.mu1_fn_, r1, s1);
    max_ratios(w.mu2_fn_, r2, s2);
    const double margin = 1.002;
    w.c1_ = margin * std::hypot(r1, r2);
    w.c2_ = margin * std::sqrt(s1 * s1 + 2.0 * r1 * r1 * r2 * r2 + s2 * s2);
    return w;
}

double WeightSpec::mu(double x, double z) const {
    if (mu1_fn_) return mu1_fn_(x) * mu2_fn_(z);
    return scale_ * std::pow(1.0 + x * x + z * z, -a_);
}

double WeightSpec::mu1(double x) const {
    if (mu1_fn_) return mu1_fn_(x);
    return scale_ * std::pow(1.0 + x * x, -a_ / 2.0);
}

double WeightSpec::mu2(double z) const {
    if (mu2_fn_) return mu2_fn_(z);
    return std::pow(1.0 + z * z, -a_ / 2.0);
}

PhiStar phi_star(const modal::WaveguideProfile& profile,
                 const std::vector<modal::GuidedMode>& modes) {
    double lam_s = -1.0, lam_a = -1.0;
    for (const modal::GuidedMode& m : modes) {
        // modes are sorted ascending, so the first of each parity is lambda_1.
        if (m.parity == modal::Parity::symmetric && lam_s < 0.0) lam_s = m.lambda;
        if (m.parity == modal::Parity::antisymmetric && lam_a < 0.0) lam_a = m.lambda;
    }
    PhiStar out;
    if (lam_s > 0.0 && lam_a > 0.0) {
        out.lambda0 = std::min(lam_s, lam_a);
    } else if (lam_s > 0.0 || lam_a > 0.0) {
        out.lambda0 = std::max(lam_s, lam_a);
        out.fallback_single_parity = true;
    } else {
        throw DomainError("phi_star: no guided modes, the spectral floor lambda0 is undefined");
    }
    const double q_l1 =
        2.0 * quad::integrate([&](double x) { return std::abs(profile.q(x)); }, 0.0,
                              profile.h(), 8, 16);
    out.value = std::exp(q_l1 / (2.0 * std::sqrt(out.lambda0)));
    return out;
}

double upsilon(const modal::WaveguideProfile& profile, modal::Parity parity) {
    const double d2 = profile.d2();
    const double kappa2 = profile.kappa2();
    if (!(d2 < kappa2)) throw DomainError("upsilon: empty radiation band");
    const double half = std::sqrt(0.5 * (kappa2 - d2));
    auto sigma_at = [&](double lambda) {
        const modal::TransverseSolution sol = modal::solve_transverse(profile, parity, lambda);
        return modal::sigma_from_boundary(d2, lambda, sol.phi_h, sol.dphi_h);
    };
    double prev = -1.0;
    for (int panels = 8; panels <= 4096; panels *= 2) {
        // lambda = d2 + t^2 near the band edge, lambda = kappa2 - s^2 at the top.
        const double lower = quad::integrate(
            [&](double t) {
                const double lam = d2 + t * t;
                return sigma_at(lam) * 2.0 * t / (2.0 * std::sqrt(kappa2 - lam));
            },
            0.0, half, panels, 16);
        const double upper = quad::integrate(
            [&](double s) { return sigma_at(kappa2 - s * s); }, 0.0, half, panels, 16);
        const double val = lower + upper;
        if (prev >= 0.0 && std::abs(val - prev) <= 1e-10 * (1.0 + std::abs(val))) {
            return std::sqrt(val);
        }
        prev = val;
    }
    throw NumericalError("upsilon: quadrature failed to converge", prev);
}

GreenPartBounds green_part_bounds(const modal::WaveguideProfile& profile,
                                  const std::vector<modal::GuidedMode>& modes, double phi_star,
                                  double upsilon_s, double upsilon_a) {
    double gg = 0.0;
    for (const modal::GuidedMode& m : modes) {
        gg += m.r / (2.0 * std::sqrt(profile.kappa2() - m.lambda));
    }
    gg *= phi_star * phi_star;
    const double sum_u = upsilon_s + upsilon_a;
    const double sum_u2 = upsilon_s * upsilon_s + upsilon_a * upsilon_a;
    const double gr = std::max({0.5, phi_star * sum_u / (4.0 * std::sqrt(kPi)),
                                phi_star * phi_star * sum_u2 / (2.0 * kPi)});
    return {gg, gr};
}

double green_norm_bound(const modal::WaveguideProfile& profile, const WeightSpec& weight,
                        const std::vector<modal::GuidedMode>& modes) {
    const PhiStar ps = phi_star(profile, modes);
    const double ups_s = upsilon(profile, modal::Parity::symmetric);
    const double ups_a = upsilon(profile, modal::Parity::antisymmetric);
    const GreenPartBounds parts = green_part_bounds(profile, modes, ps.value, ups_s, ups_a);

    const double kappa2 = profile.kappa2();
    const double kappa = std::sqrt(kappa2);
    const double d2 = profile.d2();
    const double phi2 = ps.value * ps.value;
    const double m2l1sq = weight.mu2_l1() * weight.mu2_l1();
    const double m2l2sq = weight.mu2_l2sq();

    // Evanescent part: double integral of the closed-form majorants after
    // lambda = kappa2 + s^2 on each axis, on a geometric panel layout,
    // refined until stable.
    auto evanescent_sq = [&](double s_max, int sub) {
        std::vector<double> xs, ws;
        double lo = 0.0, hi = kappa / 4.0;
        while (lo < s_max) {
            hi = std::min(hi, s_max);
            const quad::PanelRule r = quad::composite(lo, hi, sub, 16);
            xs.insert(xs.end(), r.x.begin(), r.x.end());
            ws.insert(ws.end(), r.w.begin(), r.w.end());
            lo = hi;
            hi *= 2.0;
        }
        const std::size_t n = xs.size();
        std::vector<double> p_s(n), p_a(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double lam = kappa2 + xs[i] * xs[i];
            for (int j = 0; j < 2; ++j) {
                const modal::Parity par =
                    j == 0 ? modal::Parity::symmetric : modal::Parity::antisymmetric;
                const modal::TransverseSolution sol =
                    modal::solve_transverse(profile, par, lam);
                const double sig = modal::sigma_from_boundary(d2, lam, sol.phi_h, sol.dphi_h);
                const double val = phi2 * sig + 1.0 / std::sqrt(lam - d2);
                (j == 0 ? p_s : p_a)[i] = val;
            }
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < n; ++l) {
                // (lambda-kappa2)^{1/4} (eta-kappa2)^{1/4} = sqrt(su * sv)
                const double qb = std::min(m2l1sq, m2l2sq / std::sqrt(xs[i] * xs[l]));
                acc += ws[i] * ws[l] * qb * (p_s[i] * p_s[l] + p_a[i] * p_a[l]);
            }
        }
        const double m1sq = weight.mu1_l1() * weight.mu1_l1();
        return m1sq / (kPi * kPi) * acc;
    };

    double prev = -1.0;
    double ev_sq = 0.0;
    double s_max = 128.0 * kappa;
    int sub = 2;
    for (int round = 0; round < 8; ++round) {
        ev_sq = evanescent_sq(s_max, sub);
        if (prev >= 0.0 && std::abs(ev_sq - prev) <= 5e-3 * std::max(prev, 1e-300)) break;
        prev = ev_sq;
        s_max *= 4.0;
        sub += 1;
    }

    return (parts.gg + parts.gr) * weight.mu_l1() + std::sqrt(ev_sq);
}

double constant_C(const WeightSpec& weight, double kappa2, double green_norm) {
    const double c2 = weight.C2();
    const double bracket = 1.5 + 4.0 * c2 + 8.0 * c2 * c2 + (1.0 + 4.0 * c2) * kappa2 +
                           2.0 * kappa2 * kappa2;
    return std::sqrt(2.5 + 2.0 * c2 + bracket * green_norm * green_norm);
}

double epsilon_threshold(double C, double K) {
    if (!(C > 0.0)) throw DomainError("epsilon_threshold: C must be positive");
    if (K < 0.0) throw DomainError("epsilon_threshold: K must be nonnegative");
    if (K == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (C * K);
}

double weighted_norm(const field::ComplexField& u, const WeightSpec& weight, NormOrder order,
                     bool inverse, std::string* warning) {
    const field::Grid2D& g = u.grid();
    const double cell = g.dx() * g.dz();
    std::vector<double> w(g.size());
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nz; ++j) {
            const double m = weight.mu(g.x(i), g.z(j));
            w[g.idx(i, j)] = (inverse ? 1.0 / m : m) * cell;
        }
    }
    double total = simd::wsum_abs2(u.re().data(), u.im().data(), w.data(), w.size());

    if (order != NormOrder::L2) {
        const field::ComplexField ux = field::derivative(u, 0);
        const field::ComplexField uz = field::derivative(u, 1);
        total += simd::wsum_abs2(ux.re().data(), ux.im().data(), w.data(), w.size());
        total += simd::wsum_abs2(uz.re().data(), uz.im().data(), w.data(), w.size());
        if (order == NormOrder::H2) {
            const field::ComplexField uxx = field::second_derivative(u, 0);
            const field::ComplexField uzz = field::second_derivative(u, 1);
            const field::ComplexField uxz = field::mixed_derivative(u);
            total += simd::wsum_abs2(uxx.re().data(), uxx.im().data(), w.data(), w.size());
            total += simd::wsum_abs2(uzz.re().data(), uzz.im().data(), w.data(), w.size());
            total +=
                2.0 * simd::wsum_abs2(uxz.re().data(), uxz.im().data(), w.data(), w.size());
        }
    }

    if (warning) {
        double boundary = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.nz; ++j) {
                if (i <= 1 || i >= g.nx - 2 || j <= 1 || j >= g.nz - 2) {
                    const std::complex<double> v = u.at(i, j);
                    boundary += std::norm(v) * w[g.idx(i, j)];
                }
            }
        }
        if (boundary > 1e-6 * std::max(total, 1e-300)) {
            *warning = "field has not decayed at the grid boundary (boundary mass fraction " +
                       std::to_string(boundary / std::max(total, 1e-300)) + ")";
        }
    }
    return std::sqrt(total);
}

double q_weight_direct(const WeightSpec& weight, double kappa2, double lambda, double eta) {
    if (!(lambda >= kappa2) || !(eta >= kappa2)) {
        throw DomainError("q_weight_direct: lambda, eta must be >= kappa2");
    }
    const double c = std::sqrt(lambda - kappa2) + std::sqrt(eta - kappa2);
    // Inner convolution with the substitution zeta = tan(v), split at the
    // kink zeta = z; outer integral with z = tan(u).
    auto inner = [&](double z) {
        const double vz = std::atan(z);
        auto f = [&](double v) {
            const double zeta = std::tan(v);
            const double cosv = std::cos(v);
            return std::exp(-c * std::abs(z - zeta)) * weight.mu2(zeta) / (cosv * cosv);
        };
        return quad::integrate(f, -kPi / 2.0 + 1e-9, vz, 24, 16) +
               quad::integrate(f, vz, kPi / 2.0 - 1e-9, 24, 16);
    };
    auto outer = [&](double u) {
        const double z = std::tan(u);
        const double cosu = std::cos(u);
        return inner(z) * weight.mu2(z) / (cosu * cosu);
    };
    return quad::integrate(outer, -kPi / 2.0 + 1e-9, kPi / 2.0 - 1e-9, 48, 16);
}

double p_moment_direct(const modal::WaveguideProfile& profile, const WeightSpec& weight,
                       modal::Parity pj, modal::Parity pl, double lambda, double eta) {
    const double X = 60.0;
    const double freq = std::sqrt(std::max(lambda, eta)) + 1.0;
    const int panels = std::max(32, static_cast<int>(std::ceil(X * freq / kPi)));
    return quad::integrate(
        [&](double x) {
            return modal::mode_function(profile, pj, lambda, x) *
                   modal::mode_function(profile, pl, eta, x) * weight.mu1(x);
        },
        -X, X, panels, 16);
}

EstimateReport compute_report(const modal::WaveguideProfile& profile, const WeightSpec& weight,
                              double K) {
    EstimateReport rep;
    const std::vector<modal::GuidedMode> modes = modal::find_guided_modes(profile);
    const PhiStar ps = phi_star(profile, modes);
    rep.lambda0 = ps.lambda0;
    rep.phi_star = ps.value;
    rep.lambda0_fallback = ps.fallback_single_parity;
    rep.upsilon_s = upsilon(profile, modal::Parity::symmetric);
    rep.upsilon_a = upsilon(profile, modal::Parity::antisymmetric);
    const GreenPartBounds parts =
        green_part_bounds(profile, modes, ps.value, rep.upsilon_s, rep.upsilon_a);
    rep.gg_bound = parts.gg;
    rep.gr_bound = parts.gr;
    rep.green_norm = green_norm_bound(profile, weight, modes);
    rep.C1 = weight.C1();
    rep.C2 = weight.C2();
    rep.C = constant_C(weight, profile.kappa2(), rep.green_norm);
    rep.K = K;
    rep.eps0 = epsilon_threshold(rep.C, K);

    rep.notes.emplace_back("phi_star", "uniform bound on the core solutions for lambda >= lambda0");
    rep.notes.emplace_back("lambda0", rep.lambda0_fallback
                                          ? "single-parity fallback: smallest available eigenvalue"
                                          : "min of the first eigenvalues of both parities");
    rep.notes.emplace_back("green_norm", "upper bound for ||G|| in L2(mu x mu)");
    rep.notes.emplace_back("C", "operator-norm constant of the source-to-solution map");
    rep.notes.emplace_back("K", "coefficient bound of the perturbation map");
    rep.notes.emplace_back("eps0", "contraction threshold 1/(C K)");
    return rep;
}

} // namespace wgreen::estimates
