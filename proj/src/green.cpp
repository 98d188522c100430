#include "wgreen/green.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "wgreen/errors.hpp"
#include "wgreen/parallel.hpp"
#include "wgreen/quadrature.hpp"
#include "wgreen/simd/kernels.hpp"

namespace wgreen::green {

namespace {

constexpr int kOrder = 16;       // Gauss-Legendre points per panel
constexpr int kBasePanels = 4;   // per radiation branch at level 0
constexpr int kMaxLevel = 16;
constexpr int kMaxEvanescentPanels = 20000;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int ceil_div_int(double v) { return static_cast<int>(std::ceil(v)); }

} // namespace

/// Quadrature nodes of one spectral piece after substitution, with the
/// per-node boundary data of both parities baked in.
struct GreenEvaluator::NodeSet {
    std::vector<double> lambda;
    std::vector<double> coeff;  ///< GL weight x jacobian / (2 pi)
    std::vector<double> gamma;  ///< sqrt(kappa2-lambda) (radiation) or s (evanescent)
    struct PerParity {
        std::vector<double> phi_h, dphi_h, sigma;
    } par[2];
    std::size_t size() const { return lambda.size(); }
};

struct GreenEvaluator::Cache {
    std::mutex mutex;
    std::map<int, std::unique_ptr<NodeSet>> radiation;
};

namespace {

modal::Parity parity_of(int j) {
    return j == 0 ? modal::Parity::symmetric : modal::Parity::antisymmetric;
}

/// Solves e^{-T}/T = r for the dimensionless truncation depth T.
double truncation_depth(double r) {
    if (!(r < 0.2)) return 1.5;
    double t = std::max(2.0, -std::log(r));
    for (int i = 0; i < 12; ++i) t = -std::log(r) - std::log(t);
    return std::max(t, 1.0);
}

} // namespace

void GreenEvaluator::fill_parity_data(NodeSet& ns) const {
    const std::size_t n = ns.size();
    for (int j = 0; j < 2; ++j) {
        ns.par[j].phi_h.resize(n);
        ns.par[j].dphi_h.resize(n);
        ns.par[j].sigma.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < 2; ++j) {
            const modal::TransverseSolution sol =
                modal::solve_transverse(profile_, parity_of(j), ns.lambda[i]);
            ns.par[j].phi_h[i] = sol.phi_h;
            ns.par[j].dphi_h[i] = sol.dphi_h;
            ns.par[j].sigma[i] =
                modal::sigma_from_boundary(profile_.d2(), ns.lambda[i], sol.phi_h, sol.dphi_h);
        }
    }
}

GreenEvaluator::NodeSet GreenEvaluator::build_radiation_nodes(int level) const {
    const double d2 = profile_.d2();
    const double kappa2 = profile_.kappa2();
    const double half_range = std::sqrt(0.5 * (kappa2 - d2));
    const int panels = kBasePanels << level;

    NodeSet ns;
    const quad::PanelRule branch = quad::composite(0.0, half_range, panels, kOrder);
    ns.lambda.reserve(2 * branch.size());
    ns.coeff.reserve(2 * branch.size());
    ns.gamma.reserve(2 * branch.size());
    // Band-edge half: lambda = d2 + t^2 absorbs the spectral-density
    // square-root behaviour at d2.
    for (std::size_t i = 0; i < branch.size(); ++i) {
        const double t = branch.x[i];
        const double lam = d2 + t * t;
        ns.lambda.push_back(lam);
        ns.coeff.push_back(branch.w[i] * 2.0 * t / kTwoPi);
        ns.gamma.push_back(std::sqrt(kappa2 - lam));
    }
    // Top half: lambda = kappa2 - s^2 kills the 1/sqrt(kappa2-lambda)
    // kernel singularity; gamma = s exactly.
    for (std::size_t i = 0; i < branch.size(); ++i) {
        const double s = branch.x[i];
        ns.lambda.push_back(kappa2 - s * s);
        ns.coeff.push_back(branch.w[i] * 2.0 * s / kTwoPi);
        ns.gamma.push_back(s);
    }
    fill_parity_data(ns);
    return ns;
}

GreenEvaluator::NodeSet GreenEvaluator::build_evanescent_nodes(double s_max,
                                                               double rate) const {
    const double kappa2 = profile_.kappa2();
    int panels = std::max(4, ceil_div_int(rate * s_max / (2.0 * kTwoPi)) + 1);
    panels *= density_mult_;
    if (panels > kMaxEvanescentPanels) {
        throw NumericalError(
            "evanescent quadrature: node budget exceeded before the tail bound was met",
            tail_amplitude_ / s_max);
    }
    NodeSet ns;
    const quad::PanelRule rule = quad::composite(0.0, s_max, panels, kOrder);
    ns.lambda.resize(rule.size());
    ns.coeff.resize(rule.size());
    ns.gamma.resize(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double s = rule.x[i];
        ns.lambda[i] = kappa2 + s * s;
        ns.coeff[i] = rule.w[i] / kTwoPi;
        ns.gamma[i] = s;
    }
    fill_parity_data(ns);
    return ns;
}

int GreenEvaluator::radiation_level(double dz, double xa, double xb) const {
    const double half_range = std::sqrt(0.5 * (profile_.kappa2() - profile_.d2()));
    const double rate = dz + xa + xb + 1.0;
    const int needed = ceil_div_int(rate * half_range / (2.0 * kTwoPi)) + 1;
    int level = base_level_;
    while ((kBasePanels << level) < needed && level < kMaxLevel) ++level;
    return level;
}

const GreenEvaluator::NodeSet& GreenEvaluator::radiation_nodes(int level) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->radiation.find(level);
    if (it == cache_->radiation.end()) {
        it = cache_->radiation
                 .emplace(level, std::make_unique<NodeSet>(build_radiation_nodes(level)))
                 .first;
    }
    return *it->second;
}

double GreenEvaluator::mode_value(modal::Parity parity, double lambda, double phi_h,
                                  double dphi_h, double x) const {
    const double ax = std::abs(x);
    const double sign = (x < 0.0 && parity == modal::Parity::antisymmetric) ? -1.0 : 1.0;
    if (ax <= profile_.h()) {
        return sign * modal::phi_interior(profile_, parity, lambda, ax);
    }
    return sign * modal::cladding_oscillatory(profile_.d2(), lambda, phi_h, dphi_h,
                                              ax - profile_.h());
}

GreenEvaluator GreenEvaluator::build(const modal::WaveguideProfile& profile, double tol) {
    if (!(tol > 1e-12 && tol < 1e-2)) {
        throw DomainError("build_evaluator: tol must lie in (1e-12, 1e-2)");
    }
    GreenEvaluator ev;
    ev.profile_ = profile;
    ev.tol_ = tol;
    ev.modes_ = modal::find_guided_modes(profile);
    ev.cache_ = std::make_shared<Cache>();

    // |integrand| <= A/s on the evanescent ray, with A from the uniform
    // bound on the core solutions at lambda >= kappa2.
    const double kappa = std::sqrt(profile.kappa2());
    const double q_l1 = 2.0 * quad::integrate([&](double x) { return std::abs(profile.q(x)); },
                                              0.0, profile.h(), 8, kOrder);
    const double phi_kappa = std::exp(q_l1 / (2.0 * kappa));
    ev.tail_amplitude_ = 2.0 * std::pow(phi_kappa, 4);

    // Deterministic probe pairs spanning core/cladding and a range of axial
    // separations; refine the base radiation resolution until stable.
    const double h = profile.h();
    const FieldPoint probes[5][2] = {
        {{0.3 * h, 0.0}, {0.7 * h, 0.4}},
        {{0.5 * h, -0.2}, {h + 0.6, 1.1}},
        {{h + 0.2, 0.3}, {h + 0.9, 2.2}},
        {{0.1 * h, 0.0}, {0.2 * h, 3.0}},
        {{-0.4 * h, 0.5}, {h + 0.4, -1.3}},
    };
    for (int round = 0; round < 6; ++round) {
        double worst = 0.0;
        for (const auto& pq : probes) {
            const int lvl = ev.radiation_level(std::abs(pq[0].z - pq[1].z),
                                               std::abs(pq[0].x), std::abs(pq[1].x));
            const std::complex<double> coarse = ev.eval_radiation(pq[0], pq[1]);
            const int saved = ev.base_level_;
            ev.base_level_ = std::max(saved, lvl + 1);
            const std::complex<double> fine = ev.eval_radiation(pq[0], pq[1]);
            ev.base_level_ = saved;
            worst = std::max(worst, std::abs(fine - coarse));
        }
        if (worst <= tol / 4.0) break;
        ++ev.base_level_;
    }
    for (int round = 0; round < 4; ++round) {
        double worst = 0.0;
        for (const auto& pq : probes) {
            const double coarse = ev.eval_evanescent(pq[0], pq[1]);
            const int saved = ev.density_mult_;
            ev.density_mult_ = 2 * saved;
            const double fine = ev.eval_evanescent(pq[0], pq[1]);
            ev.density_mult_ = saved;
            worst = std::max(worst, std::abs(fine - coarse));
        }
        if (worst <= tol / 4.0) break;
        ev.density_mult_ *= 2;
    }
    return ev;
}

std::complex<double> GreenEvaluator::eval_guided(const FieldPoint& p,
                                                 const FieldPoint& q) const {
    const double dz = std::abs(p.z - q.z);
    double re = 0.0, im = 0.0;
    for (const modal::GuidedMode& m : modes_) {
        const double vv =
            modal::guided_mode_value(profile_, m, p.x) * modal::guided_mode_value(profile_, m, q.x);
        const double amp = m.r * vv / (2.0 * m.beta);
        const double phase = m.beta * dz;
        // e^{i beta dz} / (2 i beta) = (sin - i cos)/(2 beta)
        re += amp * std::sin(phase);
        im -= amp * std::cos(phase);
    }
    return {re, im};
}

std::complex<double> GreenEvaluator::eval_radiation(const FieldPoint& p,
                                                    const FieldPoint& q) const {
    const double dz = std::abs(p.z - q.z);
    const NodeSet& ns = radiation_nodes(radiation_level(dz, std::abs(p.x), std::abs(q.x)));
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        double f = 0.0;
        for (int j = 0; j < 2; ++j) {
            const auto& pd = ns.par[j];
            const double vp =
                mode_value(parity_of(j), ns.lambda[i], pd.phi_h[i], pd.dphi_h[i], p.x);
            const double vq =
                mode_value(parity_of(j), ns.lambda[i], pd.phi_h[i], pd.dphi_h[i], q.x);
            f += vp * vq * pd.sigma[i];
        }
        const double g = ns.gamma[i];
        const double amp = ns.coeff[i] * f / (2.0 * g);
        const double phase = g * dz;
        re += amp * std::sin(phase);
        im -= amp * std::cos(phase);
    }
    return {re, im};
}

double GreenEvaluator::evanescent_smax(double dz) const {
    const double kappa = std::sqrt(profile_.kappa2());
    if (!(dz > 0.0)) return 3.0 * kappa;
    const double r = (tol_ / 2.0) * dz / tail_amplitude_;
    return std::max(3.0 * kappa, truncation_depth(r) / dz);
}

double GreenEvaluator::eval_evanescent(const FieldPoint& p, const FieldPoint& q) const {
    if (p.x == q.x && p.z == q.z) {
        throw DomainError("eval_evanescent: coincident points");
    }
    const double dz = std::abs(p.z - q.z);
    if (!(dz > 0.0)) {
        throw NumericalError(
            "eval_evanescent: the tail truncation is certified only for distinct axial "
            "coordinates (the integrand decays like 1/s at equal z)",
            tail_amplitude_);
    }
    const double s_max = evanescent_smax(dz);
    const double rate = std::abs(p.x) + std::abs(q.x) + 2.0 * profile_.h() + 1.0;
    const NodeSet ns = build_evanescent_nodes(s_max, rate);
    double acc = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        double f = 0.0;
        for (int j = 0; j < 2; ++j) {
            const auto& pd = ns.par[j];
            const double vp =
                mode_value(parity_of(j), ns.lambda[i], pd.phi_h[i], pd.dphi_h[i], p.x);
            const double vq =
                mode_value(parity_of(j), ns.lambda[i], pd.phi_h[i], pd.dphi_h[i], q.x);
            f += vp * vq * pd.sigma[i];
        }
        acc += ns.coeff[i] * f * std::exp(-dz * ns.gamma[i]);
    }
    return -acc;
}

std::complex<double> GreenEvaluator::eval_full(const FieldPoint& p,
                                               const FieldPoint& q) const {
    if (p.x == q.x && p.z == q.z) {
        throw DomainError("eval_full: coincident points");
    }
    return eval_guided(p, q) + eval_radiation(p, q) + eval_evanescent(p, q);
}

Table GreenEvaluator::make_table(std::span<const double> obs_x, std::span<const double> src_x,
                                 std::span<const double> dz, unsigned threads) const {
    if (obs_x.empty() || src_x.empty() || dz.empty()) {
        throw DomainError("make_table: empty coordinate set");
    }
    for (std::size_t k = 0; k < dz.size(); ++k) {
        if (!(dz[k] > 0.0)) throw DomainError("make_table: axial separations must be positive");
        if (k > 0 && !(dz[k] > dz[k - 1])) {
            throw DomainError("make_table: axial separations must be strictly ascending");
        }
    }
    const auto abs_max = [](std::span<const double> v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    const double xo_max = abs_max(obs_x);
    const double xs_max = abs_max(src_x);

    const NodeSet& rad = radiation_nodes(radiation_level(dz.back(), xo_max, xs_max));
    const std::size_t nr = rad.size();
    const std::vector<double> rad_obs = value_rows(rad, obs_x);
    const std::vector<double> rad_src = value_rows(rad, src_x);

    const double rate = xo_max + xs_max + 2.0 * profile_.h() + 1.0;
    const NodeSet evn = build_evanescent_nodes(evanescent_smax(dz.front()), rate);
    const std::size_t ne = evn.size();
    const std::vector<double> evn_obs = value_rows(evn, obs_x);
    const std::vector<double> evn_src = value_rows(evn, src_x);

    // Per-separation prefix of the evanescent ladder: nodes beyond the
    // certified cut contribute below tol and are skipped.
    std::vector<std::size_t> prefix(dz.size());
    for (std::size_t k = 0; k < dz.size(); ++k) {
        const double s_cut = evanescent_smax(dz[k]);
        std::size_t n = static_cast<std::size_t>(
            std::upper_bound(evn.gamma.begin(), evn.gamma.end(), s_cut) - evn.gamma.begin());
        prefix[k] = std::min<std::size_t>(std::max<std::size_t>(n, std::min<std::size_t>(ne, 64)),
                                          ne);
    }

    const std::size_t nm = modes_.size();
    std::vector<double> gm_obs(nm * obs_x.size()), gm_src(nm * src_x.size());
    for (std::size_t m = 0; m < nm; ++m) {
        const double sr = std::sqrt(modes_[m].r);
        for (std::size_t b = 0; b < obs_x.size(); ++b) {
            gm_obs[m * obs_x.size() + b] = sr * modal::guided_mode_value(profile_, modes_[m], obs_x[b]);
        }
        for (std::size_t a = 0; a < src_x.size(); ++a) {
            gm_src[m * src_x.size() + a] = sr * modal::guided_mode_value(profile_, modes_[m], src_x[a]);
        }
    }

    Table table;
    table.nobs = obs_x.size();
    table.nsrc = src_x.size();
    table.ndz = dz.size();
    table.val.resize(table.nobs * table.nsrc * table.ndz);

    parallel_for(dz.size(), threads, [&](std::size_t k) {
        const double delta = dz[k];
        // Radiation phase coefficients, duplicated over the parity blocks.
        std::vector<double> pre(2 * nr), pim(2 * nr);
        for (std::size_t i = 0; i < nr; ++i) {
            const double g = rad.gamma[i];
            const double amp = rad.coeff[i] / (2.0 * g);
            const double phase = g * delta;
            pre[i] = pre[nr + i] = amp * std::sin(phase);
            pim[i] = pim[nr + i] = -amp * std::cos(phase);
        }
        const std::size_t n_ev = prefix[k];
        std::vector<double> wev(n_ev);
        for (std::size_t i = 0; i < n_ev; ++i) {
            wev[i] = evn.coeff[i] * std::exp(-delta * evn.gamma[i]);
        }
        std::vector<double> gre(nm), gim(nm);
        for (std::size_t m = 0; m < nm; ++m) {
            const double beta = modes_[m].beta;
            gre[m] = std::sin(beta * delta) / (2.0 * beta);
            gim[m] = -std::cos(beta * delta) / (2.0 * beta);
        }
        std::complex<double>* out = table.val.data() + k * table.nobs * table.nsrc;
        for (std::size_t b = 0; b < table.nobs; ++b) {
            const double* rb = rad_obs.data() + b * 2 * nr;
            const double* eb = evn_obs.data() + b * 2 * ne;
            for (std::size_t a = 0; a < table.nsrc; ++a) {
                const double* ra = rad_src.data() + a * 2 * nr;
                const double* ea = evn_src.data() + a * 2 * ne;
                std::complex<double> val =
                    simd::cdot(rb, ra, pre.data(), pim.data(), 2 * nr);
                const double evan = simd::dot3(eb, ea, wev.data(), n_ev) +
                                    simd::dot3(eb + ne, ea + ne, wev.data(), n_ev);
                val -= evan;
                double g_re = 0.0, g_im = 0.0;
                for (std::size_t m = 0; m < nm; ++m) {
                    const double vv = gm_obs[m * table.nobs + b] * gm_src[m * table.nsrc + a];
                    g_re += vv * gre[m];
                    g_im += vv * gim[m];
                }
                out[b * table.nsrc + a] = val + std::complex<double>(g_re, g_im);
            }
        }
    });
    return table;
}

/// v_j(x, lambda_i) * sqrt(sigma_j_i) for every x and node, parity-blocked:
/// row(b) = [ sym nodes | antisym nodes ], contiguous per x.
std::vector<double> GreenEvaluator::value_rows(const NodeSet& ns,
                                               std::span<const double> xs) const {
    const modal::WaveguideProfile& profile = profile_;
    const std::size_t n = ns.size();
    std::vector<double> rows(xs.size() * 2 * n);

    // Batch the core evaluations: one ODE/closed-form pass per node over the
    // sorted distinct |x| <= h.
    std::vector<double> core_ax;
    std::vector<std::size_t> core_idx;
    for (std::size_t b = 0; b < xs.size(); ++b) {
        if (std::abs(xs[b]) <= profile.h()) {
            core_ax.push_back(std::abs(xs[b]));
            core_idx.push_back(b);
        }
    }
    std::vector<std::size_t> order(core_ax.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return core_ax[a] < core_ax[b]; });
    std::vector<double> sorted_ax(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted_ax[i] = core_ax[order[i]];

    std::vector<double> phis(sorted_ax.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < 2; ++j) {
            const modal::Parity parity = parity_of(j);
            const auto& pd = ns.par[j];
            const double sq = std::sqrt(pd.sigma[i]);
            if (!sorted_ax.empty()) {
                modal::phi_interior_many(profile, parity, ns.lambda[i], sorted_ax, phis);
            }
            for (std::size_t t = 0; t < order.size(); ++t) {
                const std::size_t b = core_idx[order[t]];
                double v = phis[t];
                if (xs[b] < 0.0 && parity == modal::Parity::antisymmetric) v = -v;
                rows[b * 2 * n + j * n + i] = v * sq;
            }
            for (std::size_t b = 0; b < xs.size(); ++b) {
                const double ax = std::abs(xs[b]);
                if (ax <= profile.h()) continue;
                double v = modal::cladding_oscillatory(profile.d2(), ns.lambda[i], pd.phi_h[i],
                                                       pd.dphi_h[i], ax - profile.h());
                if (xs[b] < 0.0 && parity == modal::Parity::antisymmetric) v = -v;
                rows[b * 2 * n + j * n + i] = v * sq;
            }
        }
    }
    return rows;
}

} // namespace wgreen::green
