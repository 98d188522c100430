#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "wgreen/modal.hpp"

namespace wgreen::green {

struct FieldPoint {
    double x = 0.0;
    double z = 0.0;
};

/// Dense evaluation of G over observation/source transverse positions and a
/// strictly positive ladder of axial separations |z - zeta|. Entry (b, a, k)
/// is G(obs_x[b], ., src_x[a], .) at separation dz[k]; layout is k-major so
/// field synthesis can contract contiguous source rows.
struct Table {
    std::size_t nobs = 0, nsrc = 0, ndz = 0;
    std::vector<std::complex<double>> val;

    const std::complex<double>& at(std::size_t b, std::size_t a, std::size_t k) const {
        return val[(k * nobs + b) * nsrc + a];
    }
};

/// Immutable evaluator of the layered-medium Green's function
///   G = G_guided + G_radiation + G_evanescent,
/// assembled from the guided-mode sum and spectral integrals over the
/// radiation band (d2, kappa2) and the evanescent ray (kappa2, inf).
///
/// The radiation integrand has square-root endpoint behaviour at both ends;
/// the substitutions lambda = d2 + t^2 and lambda = kappa2 - s^2 remove it,
/// and composite Gauss-Legendre panels (count scaled with the axial
/// oscillation kappa*|dz|) integrate the result. The evanescent ray uses
/// lambda = kappa2 + s^2 with a truncation point certified by an analytic
/// tail bound, which requires |z - zeta| > 0.
///
/// Immutable after build; evaluations are pure and safe to call from many
/// threads (internal node caches are mutex-protected and value-deterministic).
class GreenEvaluator {
public:
    static GreenEvaluator build(const modal::WaveguideProfile& profile, double tol);

    const modal::WaveguideProfile& profile() const { return profile_; }
    const std::vector<modal::GuidedMode>& modes() const { return modes_; }
    double tol() const { return tol_; }

    /// Finite sum over guided modes; defined for every point pair.
    std::complex<double> eval_guided(const FieldPoint& p, const FieldPoint& q) const;

    /// Spectral integral over the radiation band.
    std::complex<double> eval_radiation(const FieldPoint& p, const FieldPoint& q) const;

    /// Spectral integral over the evanescent ray. Real-valued. Requires
    /// distinct axial coordinates (the certified truncation needs
    /// |z - zeta| > 0); throws NumericalError otherwise.
    double eval_evanescent(const FieldPoint& p, const FieldPoint& q) const;

    /// G = guided + radiation + evanescent. Requires p != q.
    std::complex<double> eval_full(const FieldPoint& p, const FieldPoint& q) const;

    Table make_table(std::span<const double> obs_x, std::span<const double> src_x,
                     std::span<const double> dz, unsigned threads) const;

    /// Certified truncation point of the evanescent ray for a given axial
    /// separation (exposed for tests).
    double evanescent_smax(double dz) const;

private:
    GreenEvaluator() = default;

    struct NodeSet;
    struct Cache;

    const NodeSet& radiation_nodes(int level) const;
    NodeSet build_radiation_nodes(int level) const;
    NodeSet build_evanescent_nodes(double s_max, double rate) const;
    int radiation_level(double dz, double xa, double xb) const;
    void fill_parity_data(NodeSet& ns) const;
    std::vector<double> value_rows(const NodeSet& ns, std::span<const double> xs) const;

    double mode_value(modal::Parity parity, double lambda, double phi_h, double dphi_h,
                      double x) const;

    modal::WaveguideProfile profile_{1.0, 1.0, 1.0, 0.5};
    std::vector<modal::GuidedMode> modes_;
    double tol_ = 1e-6;
    double tail_amplitude_ = 2.0; ///< A with |integrand| <= A/s on the evanescent ray
    int base_level_ = 0;
    int density_mult_ = 1;
    std::shared_ptr<Cache> cache_;
};

} // namespace wgreen::green
