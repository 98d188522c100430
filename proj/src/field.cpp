#include "wgreen/field.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "wgreen/errors.hpp"
#include "wgreen/estimates.hpp"
#include "wgreen/parallel.hpp"
#include "wgreen/perturb.hpp"

namespace wgreen::field {

namespace {

struct SupportBox {
    int i_lo = 0, i_hi = -1; // inclusive x-node range
    int j_lo = 0, j_hi = -1; // inclusive z-node range
    bool empty() const { return i_hi < i_lo || j_hi < j_lo; }
};

SupportBox support_of(const ComplexField& f) {
    const Grid2D& g = f.grid();
    SupportBox box{g.nx, -1, g.nz, -1};
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nz; ++j) {
            const std::complex<double> v = f.at(i, j);
            if (v.real() != 0.0 || v.imag() != 0.0) {
                box.i_lo = std::min(box.i_lo, i);
                box.i_hi = std::max(box.i_hi, i);
                box.j_lo = std::min(box.j_lo, j);
                box.j_hi = std::max(box.j_hi, j);
            }
        }
    }
    return box;
}

/// Midpoint-rule Green integral with the spectral table precomputed for a
/// fixed (source box, observation grid) pair, reusable across iterations.
class GreenApplier {
public:
    GreenApplier(const green::GreenEvaluator& ev, const Grid2D& src, const SupportBox& box,
                 const Grid2D& out, unsigned threads)
        : src_(src), out_(out), box_(box), threads_(threads) {
        const double g = src.dz();
        if (std::abs(out.dz() - g) > 1e-9 * g) {
            throw DomainError("apply_green: observation and source z spacings must match");
        }
        const double offset2 = 2.0 * (out.z_min - src.z_min) / g;
        const double rounded = std::round(offset2);
        if (std::abs(offset2 - rounded) > 1e-9) {
            throw DomainError("apply_green: observation z nodes must sit on the half-cell "
                              "lattice of the source grid");
        }
        const long long parity = static_cast<long long>(rounded);
        if ((parity & 1LL) == 0LL) {
            throw DomainError("apply_green: observation nodes must be offset an odd multiple "
                              "of half a cell in z from the source cells");
        }

        const int njs = box.j_hi - box.j_lo + 1;
        kk_.resize(static_cast<std::size_t>(out.nz) * njs);
        long long k_max = 0;
        for (int jo = 0; jo < out.nz; ++jo) {
            for (int js = 0; js < njs; ++js) {
                const long long d = std::llabs(2LL * (jo - (js + box.j_lo)) + parity);
                kk_[static_cast<std::size_t>(jo) * njs + js] = d;
                k_max = std::max(k_max, d);
            }
        }
        std::vector<long long> uniq(kk_);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        std::vector<double> dz(uniq.size());
        k_index_.assign(static_cast<std::size_t>(k_max) + 1,
                        std::numeric_limits<std::size_t>::max());
        for (std::size_t k = 0; k < uniq.size(); ++k) {
            dz[k] = 0.5 * g * static_cast<double>(uniq[k]);
            k_index_[static_cast<std::size_t>(uniq[k])] = k;
        }

        std::vector<double> obs_x(out.nx), src_x(box.i_hi - box.i_lo + 1);
        for (int i = 0; i < out.nx; ++i) obs_x[i] = out.x(i);
        for (int i = 0; i < static_cast<int>(src_x.size()); ++i) src_x[i] = src.x(box.i_lo + i);
        table_ = ev.make_table(obs_x, src_x, dz, threads);
    }

    ComplexField apply(const ComplexField& f) const {
        if (!(f.grid() == src_)) throw DomainError("apply_green: source grid changed");
        ComplexField u(out_);
        const int njs = box_.j_hi - box_.j_lo + 1;
        const double cell = src_.dx() * src_.dz();
        const std::size_t nsrc = static_cast<std::size_t>(box_.i_hi - box_.i_lo + 1);
        parallel_for(static_cast<std::size_t>(out_.nz), threads_, [&](std::size_t jo) {
            std::vector<std::complex<double>> acc(out_.nx, {0.0, 0.0});
            for (int js = 0; js < njs; ++js) {
                const std::size_t k = k_index_[static_cast<std::size_t>(kk_[jo * njs + js])];
                const std::complex<double>* slab =
                    table_.val.data() + k * table_.nobs * table_.nsrc;
                for (int b = 0; b < out_.nx; ++b) {
                    const std::complex<double>* row = slab + static_cast<std::size_t>(b) * nsrc;
                    std::complex<double> s{0.0, 0.0};
                    for (std::size_t a = 0; a < nsrc; ++a) {
                        s += row[a] * f.at(box_.i_lo + static_cast<int>(a),
                                           box_.j_lo + js);
                    }
                    acc[b] += s;
                }
            }
            for (int b = 0; b < out_.nx; ++b) {
                u.set(b, static_cast<int>(jo), acc[b] * cell);
            }
        });
        return u;
    }

private:
    Grid2D src_, out_;
    SupportBox box_;
    unsigned threads_;
    std::vector<long long> kk_;
    std::vector<std::size_t> k_index_;
    green::Table table_;
};

/// z-staggered companion of a grid: same x nodes, nz+1 z rows starting at
/// z_min - dz/2, so each companion row sits half a cell off every target row.
Grid2D staggered_companion(const Grid2D& g) {
    const double dz = g.dz();
    return Grid2D::make(g.x_min, g.x_max, g.nx, g.z_min - 0.5 * dz, g.z_max + 0.5 * dz,
                        g.nz + 1);
}

SupportBox coefficient_box(const perturb::PerturbationMap& pmap, const Grid2D& g) {
    SupportBox box;
    box.i_lo = g.nx;
    box.i_hi = -1;
    box.j_lo = g.nz;
    box.j_hi = -1;
    for (int i = 0; i < g.nx; ++i) {
        if (g.x(i) >= pmap.s_lo() - g.dx() && g.x(i) <= pmap.s_hi() + g.dx()) {
            box.i_lo = std::min(box.i_lo, i);
            box.i_hi = std::max(box.i_hi, i);
        }
    }
    for (int j = 0; j < g.nz; ++j) {
        if (g.z(j) >= pmap.t_lo() - g.dz() && g.z(j) <= pmap.t_hi() + g.dz()) {
            box.j_lo = std::min(box.j_lo, j);
            box.j_hi = std::max(box.j_hi, j);
        }
    }
    return box;
}

PicardResult picard_core(const green::GreenEvaluator& ev, const perturb::PerturbationMap& pmap,
                         const std::function<ComplexField(const Grid2D&)>& base_sampler,
                         const Grid2D& src_grid, const Grid2D& out_grid,
                         const PicardOptions& opts) {
    if (!(opts.eps >= 0.0)) throw DomainError("picard_solve: eps must be nonnegative");
    if (opts.max_iter < 1) throw DomainError("picard_solve: max_iter must be >= 1");
    pmap.require_invertible(opts.eps);

    const Grid2D work = staggered_companion(src_grid);
    const estimates::WeightSpec weight(opts.weight_a);

    const ComplexField u0 = base_sampler(work);
    const double base_norm = estimates::weighted_norm(u0, weight, estimates::NormOrder::H2);

    PicardResult result{ComplexField(out_grid), {}};
    PicardTrace& trace = result.trace;
    trace.noise_floor =
        1e3 * std::numeric_limits<double>::epsilon() * std::max(base_norm, 1.0);

    if (opts.eps == 0.0) {
        result.u = base_sampler(out_grid);
        trace.converged = true;
        trace.iterations = 1;
        return result;
    }

    const SupportBox cbox = coefficient_box(pmap, src_grid);
    if (cbox.empty()) {
        result.u = base_sampler(out_grid);
        trace.converged = true;
        trace.iterations = 1;
        return result;
    }
    if (cbox.i_lo < 2 || cbox.i_hi > src_grid.nx - 3 || cbox.j_lo < 2 ||
        cbox.j_hi > src_grid.nz - 3) {
        throw DomainError("picard_solve: coefficient support must lie at least two cells "
                          "inside the source grid");
    }

    const GreenApplier iterate_apply(ev, src_grid, cbox, work, opts.threads);
    const GreenApplier final_apply(ev, src_grid, cbox, out_grid, opts.threads);

    // Fixed point of u = u0 - eps * L0^{-1} (first-order operator) u.
    ComplexField u = u0;
    ComplexField last_term(src_grid);
    double prev_diff = -1.0;
    int bad_streak = 0;
    for (int n = 1; n <= opts.max_iter; ++n) {
        const ComplexField lu =
            perturb::apply_first_order_operator(pmap, u, src_grid, ev.profile());
        ComplexField next = u0 - opts.eps * iterate_apply.apply(lu);
        const double diff =
            estimates::weighted_norm(next - u, weight, estimates::NormOrder::H2);
        trace.diff_norms.push_back(diff);
        trace.iterations = n;
        if (prev_diff > 0.0) {
            const double ratio = diff / prev_diff;
            trace.ratios.push_back(ratio);
            if (ratio >= 1.0 && prev_diff > trace.noise_floor) {
                if (++bad_streak >= 3) {
                    throw DivergenceError("picard_solve: no contraction over 3 iterations",
                                          trace.ratios);
                }
            } else {
                bad_streak = 0;
            }
        }
        u = std::move(next);
        last_term = std::move(lu);
        prev_diff = diff;
        if (diff <= opts.tol * std::max(base_norm, 1e-300) || diff <= trace.noise_floor) {
            trace.converged = true;
            break;
        }
    }

    result.u = base_sampler(out_grid) - opts.eps * final_apply.apply(last_term);
    return result;
}

} // namespace

ComplexField apply_green(const green::GreenEvaluator& ev, const ComplexField& f,
                         const Grid2D& out_grid, unsigned threads) {
    const SupportBox box = support_of(f);
    if (box.empty()) return ComplexField(out_grid);
    const GreenApplier applier(ev, f.grid(), box, out_grid, threads);
    return applier.apply(f);
}

ResidualField helmholtz_residual(const ComplexField& u, const modal::WaveguideProfile& profile,
                                 const ComplexField& f, const ResidualOptions& opts,
                                 const ComplexField* add_term) {
    const Grid2D& g = u.grid();
    if (!(g == f.grid())) throw DomainError("helmholtz_residual: grid mismatch");
    if (add_term && !(g == add_term->grid())) {
        throw DomainError("helmholtz_residual: grid mismatch in added term");
    }
    if (g.nx < 3 || g.nz < 3) throw DomainError("helmholtz_residual: grid too small");

    ResidualField out;
    out.grid = g;
    out.abs.assign(g.size(), 0.0);
    out.mask.assign(g.size(), 0);

    const double inv_dx2 = 1.0 / (g.dx() * g.dx());
    const double inv_dz2 = 1.0 / (g.dz() * g.dz());
    const double k2 = profile.k() * profile.k();

    const SupportBox src = support_of(f);

    for (int i = 1; i < g.nx - 1; ++i) {
        const double x = g.x(i);
        const double n = profile.index(x);
        const double k2n2 = k2 * n * n;
        // The classical stencil is inconsistent where the index jumps.
        const bool near_interface =
            std::abs(std::abs(x) - profile.h()) <= opts.interface_pad * g.dx() + 1e-12;
        for (int j = 1; j < g.nz - 1; ++j) {
            const std::complex<double> lap =
                (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) * inv_dx2 +
                (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) * inv_dz2;
            std::complex<double> r = lap + k2n2 * u.at(i, j) - f.at(i, j);
            if (add_term) r += add_term->at(i, j);
            out.abs[g.idx(i, j)] = std::abs(r);

            bool masked = near_interface;
            masked = masked || i < opts.boundary_pad || i >= g.nx - opts.boundary_pad ||
                     j < opts.boundary_pad || j >= g.nz - opts.boundary_pad;
            if (!src.empty()) {
                masked = masked ||
                         (i >= src.i_lo - opts.source_pad && i <= src.i_hi + opts.source_pad &&
                          j >= src.j_lo - opts.source_pad && j <= src.j_hi + opts.source_pad);
            }
            if (!masked) {
                out.mask[g.idx(i, j)] = 1;
                ++out.masked_count;
                out.max_masked = std::max(out.max_masked, out.abs[g.idx(i, j)]);
            }
        }
    }
    return out;
}

PicardResult picard_solve(const green::GreenEvaluator& ev, const perturb::PerturbationMap& pmap,
                          const ComplexField& f, const Grid2D& out_grid,
                          const PicardOptions& opts) {
    auto sampler = [&](const Grid2D& g) { return apply_green(ev, f, g, opts.threads); };
    return picard_core(ev, pmap, sampler, f.grid(), out_grid, opts);
}

PicardResult picard_solve_guided(const green::GreenEvaluator& ev,
                                 const perturb::PerturbationMap& pmap,
                                 const modal::GuidedMode& mode, const Grid2D& src_grid,
                                 const Grid2D& out_grid, const PicardOptions& opts) {
    auto sampler = [&](const Grid2D& g) {
        return perturb::zeroth_order_field(ev.profile(), mode, g);
    };
    return picard_core(ev, pmap, sampler, src_grid, out_grid, opts);
}

} // namespace wgreen::field
