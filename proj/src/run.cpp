#include "wgreen/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wgreen/errors.hpp"
#include "wgreen/green.hpp"

namespace wgreen::run {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& outdir, const std::string& name,
                       std::vector<std::string>& files) {
    std::filesystem::create_directories(outdir);
    const std::string path = outdir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open output file " + path);
    files.push_back(path);
    return out;
}

void write_field_file(std::ofstream& out, const std::string& label, const std::string& hash,
                      const field::ComplexField& f) {
    out << "# wgreen " << label << " scenario=" << hash << "\n";
    out << "# columns: x z re im abs\n";
    const field::Grid2D& g = f.grid();
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nz; ++j) {
            const std::complex<double> v = f.at(i, j);
            out << fmt(g.x(i)) << ' ' << fmt(g.z(j)) << ' ' << fmt(v.real()) << ' '
                << fmt(v.imag()) << ' ' << fmt(std::abs(v)) << "\n";
        }
    }
}

modal::GuidedMode select_mode(const Scenario& sc,
                              const std::vector<modal::GuidedMode>& modes) {
    int seen = 0;
    for (const modal::GuidedMode& m : modes) {
        if (m.parity == sc.mode_parity && ++seen == sc.mode_index) return m;
    }
    throw DomainError("mode selection: fewer than " + std::to_string(sc.mode_index) + " " +
                      modal::parity_name(sc.mode_parity) + " guided modes");
}

} // namespace

field::ComplexField gaussian_source(const Scenario& sc, const field::Grid2D& grid) {
    field::ComplexField f(grid);
    const double w2 = 2.0 * sc.source_width * sc.source_width;
    const double cut = 6.0 * sc.source_width;
    for (int i = 0; i < grid.nx; ++i) {
        const double dx = grid.x(i) - sc.source_x0;
        if (std::abs(dx) > cut) continue;
        for (int j = 0; j < grid.nz; ++j) {
            const double dz = grid.z(j) - sc.source_z0;
            if (std::abs(dz) > cut) continue;
            f.set(i, j, sc.source_amplitude * std::exp(-(dx * dx + dz * dz) / w2));
        }
    }
    return f;
}

std::pair<double, double> resolve_eps(const Scenario& sc) {
    if (!sc.eps_is_fraction) return {sc.eps, 0.0};
    const perturb::PerturbationMap pmap = sc.pmap();
    const estimates::WeightSpec weight = sc.weight();
    const double K = perturb::coefficient_bound(pmap, weight);
    const estimates::EstimateReport rep = estimates::compute_report(sc.profile(), weight, K);
    if (std::isinf(rep.eps0)) return {0.0, rep.eps0};
    const double eps = sc.eps_fraction * rep.eps0;
    pmap.require_invertible(eps);
    return {eps, rep.eps0};
}

RunOutput run_modes(const Scenario& sc, const std::string& outdir) {
    RunOutput out;
    const modal::WaveguideProfile profile = sc.profile();
    std::vector<std::string> warnings;
    const std::vector<modal::GuidedMode> modes = modal::find_guided_modes(profile, &warnings);

    std::string table = "# parity lambda beta r residual\n";
    for (const modal::GuidedMode& m : modes) {
        table += std::string(modal::parity_name(m.parity)) + " " + fmt(m.lambda) + " " +
                 fmt(m.beta) + " " + fmt(m.r) + " " + fmt(m.residual) + "\n";
    }
    for (const std::string& w : warnings) table += "# warning: " + w + "\n";

    std::ofstream f = open_out(outdir, "modes.txt", out.files);
    f << "# wgreen modes scenario=" << sc.hash_hex() << "\n" << table;
    out.summary = std::to_string(modes.size()) + " guided mode(s)\n" + table;
    return out;
}

RunOutput run_green(const Scenario& sc, const std::string& outdir) {
    RunOutput out;
    const modal::WaveguideProfile profile = sc.profile();
    const green::GreenEvaluator ev = green::GreenEvaluator::build(profile, sc.tol);
    const field::Grid2D grid = sc.out_spec.grid();
    const green::FieldPoint src{sc.probe_x, sc.probe_z};

    std::ofstream f = open_out(outdir, "green_probe.txt", out.files);
    f << "# wgreen green-probe scenario=" << sc.hash_hex() << "\n";
    f << "# columns: x z re im abs guided_re guided_im rad_re rad_im evan\n";
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.nz; ++j) {
            const green::FieldPoint p{grid.x(i), grid.z(j)};
            const std::complex<double> gg = ev.eval_guided(p, src);
            const std::complex<double> gr = ev.eval_radiation(p, src);
            const double ge = ev.eval_evanescent(p, src);
            const std::complex<double> full = gg + gr + ge;
            f << fmt(p.x) << ' ' << fmt(p.z) << ' ' << fmt(full.real()) << ' '
              << fmt(full.imag()) << ' ' << fmt(std::abs(full)) << ' ' << fmt(gg.real()) << ' '
              << fmt(gg.imag()) << ' ' << fmt(gr.real()) << ' ' << fmt(gr.imag()) << ' '
              << fmt(ge) << "\n";
        }
    }
    out.summary = "Green probe at (" + fmt(sc.probe_x) + ", " + fmt(sc.probe_z) + ") with " +
                  std::to_string(ev.modes().size()) + " guided mode(s)";
    return out;
}

RunOutput run_field(const Scenario& sc, const std::string& outdir) {
    RunOutput out;
    const modal::WaveguideProfile profile = sc.profile();
    const green::GreenEvaluator ev = green::GreenEvaluator::build(profile, sc.tol);
    const field::Grid2D src_grid = sc.src_spec.grid();
    const field::Grid2D out_grid = sc.out_spec.grid();
    const unsigned threads = sc.effective_threads();

    const field::ComplexField f = gaussian_source(sc, src_grid);
    const field::ComplexField u = field::apply_green(ev, f, out_grid, threads);
    const field::ComplexField f_out = gaussian_source(sc, out_grid);
    const field::ResidualField res = field::helmholtz_residual(u, profile, f_out);

    std::ofstream fu = open_out(outdir, "field_u.txt", out.files);
    write_field_file(fu, "field-u", sc.hash_hex(), u);

    std::ofstream fr = open_out(outdir, "field_residual.txt", out.files);
    fr << "# wgreen field-residual scenario=" << sc.hash_hex() << "\n";
    fr << "# columns: x z residual mask\n";
    for (int i = 0; i < out_grid.nx; ++i) {
        for (int j = 0; j < out_grid.nz; ++j) {
            fr << fmt(out_grid.x(i)) << ' ' << fmt(out_grid.z(j)) << ' '
               << fmt(res.abs[out_grid.idx(i, j)]) << ' '
               << int(res.mask[out_grid.idx(i, j)]) << "\n";
        }
    }
    const double rel = res.max_masked / std::max(f.max_abs(), 1e-300);
    out.summary = "masked residual " + fmt(res.max_masked) + " (relative " + fmt(rel) + ")";
    return out;
}

RunOutput run_perturb(const Scenario& sc, const std::string& outdir) {
    RunOutput out;
    const modal::WaveguideProfile profile = sc.profile();
    const green::GreenEvaluator ev = green::GreenEvaluator::build(profile, sc.tol);
    const modal::GuidedMode mode = select_mode(sc, ev.modes());
    const perturb::PerturbationMap pmap = sc.pmap();
    const auto [eps, eps0] = resolve_eps(sc);
    pmap.require_invertible(eps);
    const unsigned threads = sc.effective_threads();

    const field::Grid2D src_grid = sc.src_spec.grid();
    const field::Grid2D out_grid = sc.out_spec.grid();

    const field::ComplexField w0 = perturb::zeroth_order_field(profile, mode, out_grid);
    const field::ComplexField rhs =
        perturb::first_order_rhs_analytic(pmap, profile, mode, src_grid);
    const field::ComplexField w1 = perturb::first_order_field(ev, rhs, out_grid, threads);
    const field::ComplexField composite = w0 + eps * w1;

    std::ofstream f0 = open_out(outdir, "w0.txt", out.files);
    write_field_file(f0, "w0", sc.hash_hex(), w0);
    std::ofstream f1 = open_out(outdir, "w1.txt", out.files);
    write_field_file(f1, "w1", sc.hash_hex(), w1);
    std::ofstream fc = open_out(outdir, "w_composite.txt", out.files);
    write_field_file(fc, "w0+eps*w1", sc.hash_hex(), composite);

    out.summary = "eps = " + fmt(eps) +
                  (sc.eps_is_fraction ? " (= " + fmt(sc.eps_fraction) + " of eps0 " + fmt(eps0) + ")"
                                      : "") +
                  ", mode lambda = " + fmt(mode.lambda);
    return out;
}

RunOutput run_picard(const Scenario& sc, const std::string& outdir) {
    RunOutput out;
    const modal::WaveguideProfile profile = sc.profile();
    const green::GreenEvaluator ev = green::GreenEvaluator::build(profile, sc.tol);
    const perturb::PerturbationMap pmap = sc.pmap();
    const auto [eps, eps0] = resolve_eps(sc);
    const unsigned threads = sc.effective_threads();

    const field::Grid2D src_grid = sc.src_spec.grid();
    const field::Grid2D out_grid = sc.out_spec.grid();
    const field::ComplexField f = gaussian_source(sc, src_grid);

    field::PicardOptions opts;
    opts.eps = eps;
    opts.max_iter = sc.picard_max_iter;
    opts.tol = sc.picard_tol;
    opts.weight_a = sc.weight_a;
    opts.threads = threads;

    field::PicardResult result;
    try {
        result = field::picard_solve(ev, pmap, f, out_grid, opts);
    } catch (const DivergenceError& e) {
        // Surface the trace before propagating.
        std::ofstream ft = open_out(outdir, "picard_trace.txt", out.files);
        ft << "# wgreen picard-trace scenario=" << sc.hash_hex() << " (diverged)\n";
        ft << "# columns: iteration ratio\n";
        for (std::size_t i = 0; i < e.ratios.size(); ++i) {
            ft << i + 2 << ' ' << fmt(e.ratios[i]) << "\n";
        }
        throw;
    }

    std::ofstream fu = open_out(outdir, "picard_u.txt", out.files);
    write_field_file(fu, "picard-u", sc.hash_hex(), result.u);

    std::ofstream ft = open_out(outdir, "picard_trace.txt", out.files);
    ft << "# wgreen picard-trace scenario=" << sc.hash_hex() << "\n";
    ft << "# converged=" << (result.trace.converged ? 1 : 0)
       << " iterations=" << result.trace.iterations << " noise_floor="
       << fmt(result.trace.noise_floor) << "\n";
    ft << "# columns: iteration diff_norm ratio\n";
    for (std::size_t i = 0; i < result.trace.diff_norms.size(); ++i) {
        ft << i + 1 << ' ' << fmt(result.trace.diff_norms[i]) << ' '
           << (i == 0 ? "nan" : fmt(result.trace.ratios[i - 1])) << "\n";
    }

    const field::ComplexField f_out = gaussian_source(sc, out_grid);
    const field::ComplexField lu =
        perturb::apply_first_order_operator_colocated(pmap, result.u, profile);
    const field::ComplexField extra = eps * lu;
    const field::ResidualField res =
        field::helmholtz_residual(result.u, profile, f_out, {}, &extra);
    std::ofstream fr = open_out(outdir, "picard_residual.txt", out.files);
    fr << "# wgreen picard-residual scenario=" << sc.hash_hex() << "\n";
    fr << "# columns: x z residual mask\n";
    for (int i = 0; i < out_grid.nx; ++i) {
        for (int j = 0; j < out_grid.nz; ++j) {
            fr << fmt(out_grid.x(i)) << ' ' << fmt(out_grid.z(j)) << ' '
               << fmt(res.abs[out_grid.idx(i, j)]) << ' '
               << int(res.mask[out_grid.idx(i, j)]) << "\n";
        }
    }

    out.summary = "eps = " + fmt(eps) + ", iterations = " +
                  std::to_string(result.trace.iterations) +
                  (result.trace.converged ? " (converged)" : " (max_iter reached)") +
                  ", masked residual " + fmt(res.max_masked);
    return out;
}

RunOutput run_estimates(const Scenario& sc, const std::string& outdir) {
    RunOutput out;
    const modal::WaveguideProfile profile = sc.profile();
    const estimates::WeightSpec weight = sc.weight();
    double K = 0.0;
    if (sc.has_map) {
        K = perturb::coefficient_bound(sc.pmap(), weight);
    }
    const estimates::EstimateReport rep = estimates::compute_report(profile, weight, K);

    std::ofstream f = open_out(outdir, "estimates.txt", out.files);
    f << "# wgreen estimates scenario=" << sc.hash_hex() << "\n";
    for (const auto& [key, note] : rep.notes) f << "# " << key << ": " << note << "\n";
    f << "lambda0 = " << fmt(rep.lambda0) << "\n";
    f << "lambda0_fallback = " << (rep.lambda0_fallback ? 1 : 0) << "\n";
    f << "phi_star = " << fmt(rep.phi_star) << "\n";
    f << "upsilon_s = " << fmt(rep.upsilon_s) << "\n";
    f << "upsilon_a = " << fmt(rep.upsilon_a) << "\n";
    f << "gg_bound = " << fmt(rep.gg_bound) << "\n";
    f << "gr_bound = " << fmt(rep.gr_bound) << "\n";
    f << "green_norm_bound = " << fmt(rep.green_norm) << "\n";
    f << "C1 = " << fmt(rep.C1) << "\n";
    f << "C2 = " << fmt(rep.C2) << "\n";
    f << "C = " << fmt(rep.C) << "\n";
    f << "K = " << fmt(rep.K) << "\n";
    f << "eps0 = " << fmt(rep.eps0) << "\n";

    out.summary = "C = " + fmt(rep.C) + ", K = " + fmt(rep.K) + ", eps0 = " + fmt(rep.eps0);
    return out;
}

RunOutput run(const Scenario& sc, const std::string& outdir) {
    switch (sc.kind) {
    case RunKind::modes: return run_modes(sc, outdir);
    case RunKind::green_probe: return run_green(sc, outdir);
    case RunKind::field: return run_field(sc, outdir);
    case RunKind::perturb: return run_perturb(sc, outdir);
    case RunKind::picard: return run_picard(sc, outdir);
    case RunKind::estimates: return run_estimates(sc, outdir);
    }
    throw DomainError("unknown run kind");
}

} // namespace wgreen::run
