#include "wgreen/perturb.hpp"

#include <algorithm>
#include <cmath>

#include "wgreen/errors.hpp"
#include "wgreen/field.hpp"

namespace wgreen::perturb {

double BumpFunction::value(double x) const {
    const double y = (x - center) / half_width;
    if (std::abs(y) >= 1.0) return 0.0;
    const double u = 1.0 - y * y;
    return amplitude * u * u * u;
}

double BumpFunction::d1(double x) const {
    const double y = (x - center) / half_width;
    if (std::abs(y) >= 1.0) return 0.0;
    const double u = 1.0 - y * y;
    return amplitude * (-6.0) * y * u * u / half_width;
}

double BumpFunction::d2(double x) const {
    const double y = (x - center) / half_width;
    if (std::abs(y) >= 1.0) return 0.0;
    const double u = 1.0 - y * y;
    return amplitude * u * (30.0 * y * y - 6.0) / (half_width * half_width);
}

PerturbationMap PerturbationMap::product(const BumpFunction& S, const BumpFunction& T,
                                         RhsFormula formula) {
    if (!(S.half_width > 0.0) || !(T.half_width > 0.0)) {
        throw DomainError("perturbation map: bump half-widths must be positive");
    }
    PerturbationMap m;
    m.kind_ = Kind::product;
    m.formula_ = formula;
    m.S_ = S;
    m.T_ = T;
    return m;
}

PerturbationMap PerturbationMap::general(const BumpFunction& Sp, const BumpFunction& Tp,
                                         const BumpFunction& Sq, const BumpFunction& Tq,
                                         const modal::WaveguideProfile& profile) {
    PerturbationMap m;
    m.kind_ = Kind::general;
    m.Sp_ = Sp;
    m.Tp_ = Tp;
    m.Sq_ = Sq;
    m.Tq_ = Tq;
    m.profile_ = profile;
    if (profile.uniform_core() && Sp.amplitude != 0.0) {
        // The zero-order-coefficient correction involves d(n^2)/ds, which is
        // singular at the step-index interfaces; the transverse displacement
        // must vanish around them.
        const double margin = 1e-3 * profile.h();
        for (double iface : {profile.h(), -profile.h()}) {
            if (Sp.lo() < iface + margin && Sp.hi() > iface - margin) {
                throw DomainError("perturbation map: transverse displacement must vanish "
                                  "near the step-index interfaces");
            }
        }
    }
    return m;
}

double PerturbationMap::a11(double s, double t) const {
    if (kind_ == Kind::product) {
        if (formula_ == RhsFormula::ss_variant) return -2.0 * S_.d1(s) * T_.value(t);
        return 0.0;
    }
    return -2.0 * Sp_.d1(s) * Tp_.value(t);
}

double PerturbationMap::a12(double s, double t) const {
    if (kind_ == Kind::product) {
        if (formula_ == RhsFormula::ss_variant) return -S_.value(s) * T_.d1(t);
        return -S_.d1(s) * T_.value(t);
    }
    return -(Sp_.value(s) * Tp_.d1(t) + Sq_.d1(s) * Tq_.value(t));
}

double PerturbationMap::a22(double s, double t) const {
    if (kind_ == Kind::product) {
        if (formula_ == RhsFormula::ss_variant) return 0.0;
        return -2.0 * S_.value(s) * T_.d1(t);
    }
    return -2.0 * Sq_.value(s) * Tq_.d1(t);
}

double PerturbationMap::b1(double s, double t) const {
    if (kind_ == Kind::product) return 0.0;
    return -(Sp_.d2(s) * Tp_.value(t) + Sp_.value(s) * Tp_.d2(t));
}

double PerturbationMap::b2(double s, double t) const {
    if (kind_ == Kind::product) {
        return -(S_.d2(s) * T_.value(t) + S_.value(s) * T_.d2(t));
    }
    return -(Sq_.d2(s) * Tq_.value(t) + Sq_.value(s) * Tq_.d2(t));
}

double PerturbationMap::c(double s, double t) const {
    if (kind_ == Kind::product) return 0.0;
    const double phi = Sp_.value(s) * Tp_.value(t);
    if (phi == 0.0) return 0.0;
    // k^2 d(n^2)/ds * phi, by central difference (the support is kept away
    // from index discontinuities).
    const double ds = 1e-6 * std::max(1.0, std::abs(s));
    const double k = profile_->k();
    const double np = profile_->index(s + ds);
    const double nm = profile_->index(s - ds);
    return k * k * (np * np - nm * nm) / (2.0 * ds) * phi;
}

double PerturbationMap::s_lo() const {
    if (kind_ == Kind::product) return S_.lo();
    return std::min(Sp_.lo(), Sq_.lo());
}

double PerturbationMap::s_hi() const {
    if (kind_ == Kind::product) return S_.hi();
    return std::max(Sp_.hi(), Sq_.hi());
}

double PerturbationMap::t_lo() const {
    if (kind_ == Kind::product) return T_.lo();
    return std::min(Tp_.lo(), Tq_.lo());
}

double PerturbationMap::t_hi() const {
    if (kind_ == Kind::product) return T_.hi();
    return std::max(Tp_.hi(), Tq_.hi());
}

double PerturbationMap::displacement_slope() const {
    const int n = 201;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = s_lo() + (s_hi() - s_lo()) * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double t = t_lo() + (t_hi() - t_lo()) * j / (n - 1);
            if (kind_ == Kind::product) {
                worst = std::max(worst, std::abs(S_.value(s) * T_.d1(t)));
                worst = std::max(worst, std::abs(S_.d1(s) * T_.value(t)));
            } else {
                worst = std::max(worst, std::abs(Sp_.d1(s) * Tp_.value(t)));
                worst = std::max(worst, std::abs(Sp_.value(s) * Tp_.d1(t)));
                worst = std::max(worst, std::abs(Sq_.d1(s) * Tq_.value(t)));
                worst = std::max(worst, std::abs(Sq_.value(s) * Tq_.d1(t)));
            }
        }
    }
    return worst;
}

void PerturbationMap::require_invertible(double eps) const {
    const double slope = displacement_slope();
    if (!(eps * slope < 1.0)) {
        throw DomainError("perturbation map: not invertible at eps (eps*slope = " +
                          std::to_string(eps * slope) + " >= 1)");
    }
}

double coefficient_bound(const PerturbationMap& pmap, const estimates::WeightSpec& weight) {
    const double s0 = pmap.s_lo(), s1 = pmap.s_hi();
    const double t0 = pmap.t_lo(), t1 = pmap.t_hi();
    double prev = -1.0;
    double k_bound = 0.0;
    for (int n = 64; n <= 2048; n *= 2) {
        k_bound = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double s = s0 + (s1 - s0) * i / n;
            for (int j = 0; j <= n; ++j) {
                const double t = t0 + (t1 - t0) * j / n;
                const double mu = weight.mu(s, t);
                const double a12 = pmap.a12(s, t);
                const double fa = std::sqrt(pmap.a11(s, t) * pmap.a11(s, t) + 2.0 * a12 * a12 +
                                            pmap.a22(s, t) * pmap.a22(s, t));
                const double fb = std::hypot(pmap.b1(s, t), pmap.b2(s, t));
                const double fc = std::abs(pmap.c(s, t));
                k_bound = std::max({k_bound, fa / mu, fb / mu, fc / mu});
            }
        }
        if (prev >= 0.0 && std::abs(k_bound - prev) <= 0.01 * std::max(prev, 1e-300)) break;
        prev = k_bound;
    }
    return k_bound;
}

GuidedModeField::GuidedModeField(const modal::WaveguideProfile& profile,
                                 const modal::GuidedMode& mode)
    : profile_(profile), mode_(mode) {}

double GuidedModeField::v(double s) const {
    return modal::guided_mode_value(profile_, mode_, s);
}

double GuidedModeField::dv(double s) const {
    const double ax = std::abs(s);
    double d;
    if (ax <= profile_.h()) {
        d = modal::dphi_interior(profile_, mode_.parity, mode_.lambda, ax);
    } else {
        d = -mode_.decay * mode_.phi_h * std::exp(-mode_.decay * (ax - profile_.h()));
    }
    const double parity_sign =
        (s < 0.0 && mode_.parity == modal::Parity::antisymmetric) ? -1.0 : 1.0;
    const double mirror = s < 0.0 ? -1.0 : 1.0;
    return parity_sign * mirror * d;
}

std::complex<double> GuidedModeField::value(double s, double t) const {
    const double phase = mode_.beta * t;
    return v(s) * std::complex<double>(std::cos(phase), std::sin(phase));
}

std::complex<double> GuidedModeField::ds(double s, double t) const {
    const double phase = mode_.beta * t;
    return dv(s) * std::complex<double>(std::cos(phase), std::sin(phase));
}

std::complex<double> GuidedModeField::dt(double s, double t) const {
    return std::complex<double>(0.0, mode_.beta) * value(s, t);
}

std::complex<double> GuidedModeField::dss(double s, double t) const {
    // v'' = (q - lambda) v away from the interfaces.
    return (profile_.q(s) - mode_.lambda) * value(s, t);
}

std::complex<double> GuidedModeField::dst(double s, double t) const {
    return std::complex<double>(0.0, mode_.beta) * ds(s, t);
}

std::complex<double> GuidedModeField::dtt(double s, double t) const {
    return -mode_.beta * mode_.beta * value(s, t);
}

field::ComplexField zeroth_order_field(const modal::WaveguideProfile& profile,
                                       const modal::GuidedMode& mode,
                                       const field::Grid2D& grid) {
    field::ComplexField out(grid);
    for (int i = 0; i < grid.nx; ++i) {
        const double vx = modal::guided_mode_value(profile, mode, grid.x(i));
        for (int j = 0; j < grid.nz; ++j) {
            const double phase = mode.beta * grid.z(j);
            out.set(i, j, vx * std::complex<double>(std::cos(phase), std::sin(phase)));
        }
    }
    return out;
}

namespace {

enum class Side { centered, left, right };

/// One-sided differencing away from x = +-h when the stencil would straddle
/// the index jump there.
Side stencil_side(double x, double h, double dx) {
    if (std::abs(x - h) < dx * (1.0 - 1e-12)) return x <= h ? Side::left : Side::right;
    if (std::abs(x + h) < dx * (1.0 - 1e-12)) return x < -h ? Side::left : Side::right;
    return Side::centered;
}

struct StencilWeights {
    int offs[4];
    double w[4];
    int n;
};

StencilWeights first_derivative_weights(Side side, double d) {
    if (side == Side::centered) return {{-1, 1, 0, 0}, {-0.5 / d, 0.5 / d, 0.0, 0.0}, 2};
    if (side == Side::left)
        return {{0, -1, -2, 0}, {1.5 / d, -2.0 / d, 0.5 / d, 0.0}, 3};
    return {{0, 1, 2, 0}, {-1.5 / d, 2.0 / d, -0.5 / d, 0.0}, 3};
}

StencilWeights second_derivative_weights(Side side, double d) {
    const double d2 = d * d;
    if (side == Side::centered) {
        return {{-1, 0, 1, 0}, {1.0 / d2, -2.0 / d2, 1.0 / d2, 0.0}, 3};
    }
    if (side == Side::left) {
        return {{0, -1, -2, -3}, {2.0 / d2, -5.0 / d2, 4.0 / d2, -1.0 / d2}, 4};
    }
    return {{0, 1, 2, 3}, {2.0 / d2, -5.0 / d2, 4.0 / d2, -1.0 / d2}, 4};
}

bool in_support(const PerturbationMap& m, double s, double t) {
    return s > m.s_lo() && s < m.s_hi() && t > m.t_lo() && t < m.t_hi();
}

std::complex<double> combine_rhs(const PerturbationMap& m, double s, double t,
                                 std::complex<double> w, std::complex<double> ws,
                                 std::complex<double> wt, std::complex<double> wss,
                                 std::complex<double> wst, std::complex<double> wtt) {
    return -(m.a11(s, t) * wss + 2.0 * m.a12(s, t) * wst + m.a22(s, t) * wtt +
             m.b1(s, t) * ws + m.b2(s, t) * wt + m.c(s, t) * w);
}

} // namespace

field::ComplexField first_order_rhs(const PerturbationMap& pmap, const field::ComplexField& w0,
                                    const modal::WaveguideProfile& profile) {
    const field::Grid2D& g = w0.grid();
    field::ComplexField rhs(g);
    const double dx = g.dx(), dz = g.dz();
    for (int i = 0; i < g.nx; ++i) {
        const double s = g.x(i);
        const Side side = stencil_side(s, profile.h(), dx);
        const StencilWeights d1x = first_derivative_weights(side, dx);
        const StencilWeights d2x = second_derivative_weights(side, dx);
        for (int j = 0; j < g.nz; ++j) {
            const double t = g.z(j);
            if (!in_support(pmap, s, t)) continue;
            if (i < 3 || i > g.nx - 4 || j < 1 || j > g.nz - 2) {
                throw DomainError("first_order_rhs: coefficient support touches the grid edge");
            }
            const std::complex<double> w = w0.at(i, j);
            const std::complex<double> wt = (w0.at(i, j + 1) - w0.at(i, j - 1)) / (2.0 * dz);
            const std::complex<double> wtt =
                (w0.at(i, j + 1) - 2.0 * w + w0.at(i, j - 1)) / (dz * dz);
            std::complex<double> ws{0.0, 0.0}, wss{0.0, 0.0}, wst{0.0, 0.0};
            for (int k = 0; k < d1x.n; ++k) {
                const int ii = i + d1x.offs[k];
                ws += d1x.w[k] * w0.at(ii, j);
                wst += d1x.w[k] * (w0.at(ii, j + 1) - w0.at(ii, j - 1)) / (2.0 * dz);
            }
            for (int k = 0; k < d2x.n; ++k) {
                wss += d2x.w[k] * w0.at(i + d2x.offs[k], j);
            }
            rhs.set(i, j, combine_rhs(pmap, s, t, w, ws, wt, wss, wst, wtt));
        }
    }
    return rhs;
}

field::ComplexField first_order_rhs_analytic(const PerturbationMap& pmap,
                                             const modal::WaveguideProfile& profile,
                                             const modal::GuidedMode& mode,
                                             const field::Grid2D& grid) {
    const GuidedModeField w0(profile, mode);
    field::ComplexField rhs(grid);
    for (int i = 0; i < grid.nx; ++i) {
        const double s = grid.x(i);
        for (int j = 0; j < grid.nz; ++j) {
            const double t = grid.z(j);
            if (!in_support(pmap, s, t)) continue;
            rhs.set(i, j, combine_rhs(pmap, s, t, w0.value(s, t), w0.ds(s, t), w0.dt(s, t),
                                      w0.dss(s, t), w0.dst(s, t), w0.dtt(s, t)));
        }
    }
    return rhs;
}

field::ComplexField first_order_field(const green::GreenEvaluator& ev,
                                      const field::ComplexField& rhs,
                                      const field::Grid2D& out_grid, unsigned threads) {
    return field::apply_green(ev, rhs, out_grid, threads);
}

field::ComplexField apply_first_order_operator(const PerturbationMap& pmap,
                                               const field::ComplexField& u_staggered,
                                               const field::Grid2D& target,
                                               const modal::WaveguideProfile& profile) {
    const field::Grid2D& w = u_staggered.grid();
    if (w.nx != target.nx || w.nz != target.nz + 1 ||
        std::abs(w.z_min - (target.z_min - 0.5 * target.dz())) > 1e-9 * target.dz()) {
        throw DomainError("apply_first_order_operator: iterate grid is not the z-staggered "
                          "companion of the target grid");
    }
    const double dx = target.dx(), dz = target.dz();
    field::ComplexField out(target);
    for (int i = 0; i < target.nx; ++i) {
        const double s = target.x(i);
        const Side side = stencil_side(s, profile.h(), dx);
        const StencilWeights d1x = first_derivative_weights(side, dx);
        const StencilWeights d2x = second_derivative_weights(side, dx);
        for (int j = 0; j < target.nz; ++j) {
            const double t = target.z(j);
            if (!in_support(pmap, s, t)) continue;
            if (i < 3 || i > target.nx - 4 || j < 1 || j > target.nz - 2) {
                throw DomainError(
                    "apply_first_order_operator: coefficient support touches the grid edge");
            }
            // Rows j and j+1 of the companion grid surround z(j) at -+ dz/2,
            // rows j-1 and j+2 at -+ 3dz/2.
            auto avg = [&](int ii) { return 0.5 * (u_staggered.at(ii, j) + u_staggered.at(ii, j + 1)); };
            auto dzc = [&](int ii) { return (u_staggered.at(ii, j + 1) - u_staggered.at(ii, j)) / dz; };
            const std::complex<double> w_val = avg(i);
            const std::complex<double> wt = dzc(i);
            const std::complex<double> wtt =
                (u_staggered.at(i, j + 2) - u_staggered.at(i, j + 1) - u_staggered.at(i, j) +
                 u_staggered.at(i, j - 1)) /
                (2.0 * dz * dz);
            std::complex<double> ws{0.0, 0.0}, wss{0.0, 0.0}, wst{0.0, 0.0};
            for (int k = 0; k < d1x.n; ++k) {
                ws += d1x.w[k] * avg(i + d1x.offs[k]);
                wst += d1x.w[k] * dzc(i + d1x.offs[k]);
            }
            for (int k = 0; k < d2x.n; ++k) {
                wss += d2x.w[k] * avg(i + d2x.offs[k]);
            }
            // The operator itself (sum a~ d2 + sum b~ d1 + c~), no leading minus.
            out.set(i, j,
                    -combine_rhs(pmap, s, t, w_val, ws, wt, wss, wst, wtt));
        }
    }
    return out;
}

field::ComplexField apply_first_order_operator_colocated(const PerturbationMap& pmap,
                                                         const field::ComplexField& u,
                                                         const modal::WaveguideProfile& profile) {
    const field::Grid2D& g = u.grid();
    const double dx = g.dx(), dz = g.dz();
    field::ComplexField out(g);
    for (int i = 0; i < g.nx; ++i) {
        const double s = g.x(i);
        const Side side = stencil_side(s, profile.h(), dx);
        const StencilWeights d1x = first_derivative_weights(side, dx);
        const StencilWeights d2x = second_derivative_weights(side, dx);
        for (int j = 0; j < g.nz; ++j) {
            const double t = g.z(j);
            if (!in_support(pmap, s, t)) continue;
            if (i < 3 || i > g.nx - 4 || j < 1 || j > g.nz - 2) {
                throw DomainError("apply_first_order_operator_colocated: coefficient support "
                                  "touches the grid edge");
            }
            const std::complex<double> w = u.at(i, j);
            const std::complex<double> wt = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * dz);
            const std::complex<double> wtt =
                (u.at(i, j + 1) - 2.0 * w + u.at(i, j - 1)) / (dz * dz);
            std::complex<double> ws{0.0, 0.0}, wss{0.0, 0.0}, wst{0.0, 0.0};
            for (int k = 0; k < d1x.n; ++k) {
                const int ii = i + d1x.offs[k];
                ws += d1x.w[k] * u.at(ii, j);
                wst += d1x.w[k] * (u.at(ii, j + 1) - u.at(ii, j - 1)) / (2.0 * dz);
            }
            for (int k = 0; k < d2x.n; ++k) {
                wss += d2x.w[k] * u.at(i + d2x.offs[k], j);
            }
            out.set(i, j, -combine_rhs(pmap, s, t, w, ws, wt, wss, wst, wtt));
        }
    }
    return out;
}

field::ComplexField apply_base_operator(const field::ComplexField& u_staggered,
                                        const field::Grid2D& target,
                                        const modal::WaveguideProfile& profile) {
    const field::Grid2D& w = u_staggered.grid();
    if (w.nx != target.nx || w.nz != target.nz + 1 ||
        std::abs(w.z_min - (target.z_min - 0.5 * target.dz())) > 1e-9 * target.dz()) {
        throw DomainError("apply_base_operator: iterate grid is not the z-staggered "
                          "companion of the target grid");
    }
    const double dx = target.dx(), dz = target.dz();
    const double k2 = profile.k() * profile.k();
    field::ComplexField out(target);
    for (int i = 3; i <= target.nx - 4; ++i) {
        const double s = target.x(i);
        const double n = profile.index(s);
        const Side side = stencil_side(s, profile.h(), dx);
        const StencilWeights d2x = second_derivative_weights(side, dx);
        for (int j = 1; j <= target.nz - 2; ++j) {
            auto avg = [&](int ii) {
                return 0.5 * (u_staggered.at(ii, j) + u_staggered.at(ii, j + 1));
            };
            const std::complex<double> w_val = avg(i);
            const std::complex<double> wtt =
                (u_staggered.at(i, j + 2) - u_staggered.at(i, j + 1) - u_staggered.at(i, j) +
                 u_staggered.at(i, j - 1)) /
                (2.0 * dz * dz);
            std::complex<double> wss{0.0, 0.0};
            for (int k = 0; k < d2x.n; ++k) {
                wss += d2x.w[k] * avg(i + d2x.offs[k]);
            }
            out.set(i, j, wss + wtt + k2 * n * n * w_val);
        }
    }
    return out;
}

std::complex<double> mode_overlap(const modal::WaveguideProfile& profile,
                                  const modal::GuidedMode& mode, const field::ComplexField& u,
                                  double z) {
    const field::Grid2D& g = u.grid();
    int j_best = 0;
    double best = std::abs(g.z(0) - z);
    for (int j = 1; j < g.nz; ++j) {
        const double d = std::abs(g.z(j) - z);
        if (d < best) {
            best = d;
            j_best = j;
        }
    }
    std::complex<double> acc{0.0, 0.0};
    for (int i = 0; i < g.nx; ++i) {
        const double w = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
        acc += w * modal::guided_mode_value(profile, mode, g.x(i)) * u.at(i, j_best);
    }
    return mode.r * acc * g.dx();
}

} // namespace wgreen::perturb
