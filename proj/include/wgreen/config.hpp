#pragma once

#include <map>
#include <string>

#include "wgreen/estimates.hpp"
#include "wgreen/field.hpp"
#include "wgreen/modal.hpp"
#include "wgreen/perturb.hpp"

namespace wgreen::run {

enum class RunKind { modes, green_probe, field, perturb, picard, estimates };

struct GridSpec {
    double x_min = -4.0, x_max = 4.0;
    int nx = 201;
    double z_min = -4.0, z_max = 4.0;
    int nz = 201;
    field::Grid2D grid() const {
        return field::Grid2D::make(x_min, x_max, nx, z_min, z_max, nz);
    }
};

/// One self-contained run description, parsed from a key-path = value file.
/// Unknown keys and module-precondition violations are rejected at load with
/// the offending key path. Values are stored canonically, so
/// parse(canonical_text()) reproduces canonical_text() byte for byte.
class Scenario {
public:
    static Scenario load(const std::string& path);
    static Scenario parse(const std::string& text);

    std::string canonical_text() const;
    std::string hash_hex() const; ///< FNV-1a of the canonical text

    RunKind kind = RunKind::modes;
    double tol = 1e-6;
    unsigned threads = 0; ///< 0 = hardware default

    double k = 5.0, h = 0.2, n_co = 2.0, n_cl = 1.0;
    double weight_a = 2.0;

    GridSpec src_spec; ///< source/sample grid (cell centers for quadrature)
    GridSpec out_spec; ///< observation grid; defaults to src staggered +dz/2
    bool out_given = false;

    double source_amplitude = 1.0, source_x0 = 0.0, source_z0 = 0.0, source_width = 0.1;

    bool has_map = false;
    perturb::BumpFunction S{0.1, 0.0, 0.6};
    perturb::BumpFunction T{1.0, 0.0, 0.6};
    double eps = 0.0;
    bool eps_is_fraction = false;
    double eps_fraction = 0.5;
    perturb::RhsFormula formula = perturb::RhsFormula::derived;

    modal::Parity mode_parity = modal::Parity::symmetric;
    int mode_index = 1;

    int picard_max_iter = 12;
    double picard_tol = 1e-9;

    double probe_x = 0.11;
    double probe_z = 0.0137;

    modal::WaveguideProfile profile() const;
    estimates::WeightSpec weight() const;
    perturb::PerturbationMap pmap() const;
    unsigned effective_threads() const;

private:
    std::map<std::string, std::string> kv_;
};

} // namespace wgreen::run
