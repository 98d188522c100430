#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wgreen/grid.hpp"
#include "wgreen/modal.hpp"

namespace wgreen::estimates {

/// Decay weight with |grad mu| <= C1 mu, |hess mu| <= C2 mu (Frobenius
/// norm) and a separable dominating pair mu(x,z) <= mu1(x) mu2(z).
///
/// Two forms: the power law mu = scale * (1 + x^2 + z^2)^{-a}, a > 1, with
/// its standard dominating pair (closed-form norms, ratio constants by
/// numeric maximization), or a user-supplied separable product
/// mu = mu1(x) mu2(z) with mu1 in Linf and L1 and mu2 in Linf, L1 and L2
/// (norms by quadrature, ratio constants by dense sampling of
/// finite-difference ratios).
class WeightSpec {
public:
    explicit WeightSpec(double a, double scale = 1.0);

    /// Separable product of two positive C^2 factors decaying at least as
    /// fast as |t|^{-decay_exponent} (the hint controls the quadrature and
    /// sampling windows).
    static WeightSpec separable(std::function<double(double)> mu1,
                                std::function<double(double)> mu2, double decay_exponent);

    bool power_law() const { return !mu1_fn_; }
    double a() const { return a_; }
    double scale() const { return scale_; }
    double mu(double x, double z) const;
    double mu1(double x) const;
    double mu2(double z) const;

    double mu_l1() const { return mu_l1_; }      ///< integral of mu over the plane
    double mu1_l1() const { return mu1_l1_; }
    double mu2_l1() const { return mu2_l1_; }
    double mu2_l2sq() const { return mu2_l2sq_; } ///< integral of mu2^2

    double C1() const { return c1_; }
    double C2() const { return c2_; }

private:
    WeightSpec() = default;

    double a_ = 2.0;
    double scale_ = 1.0;
    std::function<double(double)> mu1_fn_, mu2_fn_;
    double mu_l1_ = 0.0, mu1_l1_ = 0.0, mu2_l1_ = 0.0, mu2_l2sq_ = 0.0;
    double c1_ = 0.0, c2_ = 0.0;
};

struct PhiStar {
    double lambda0;   ///< smallest guided eigenvalue used as the spectral floor
    double value;     ///< uniform bound on |phi_j| for lambda >= lambda0
    bool fallback_single_parity = false; ///< lambda0 taken from one parity only
};

/// Phi* = exp( (1/(2 sqrt(lambda0))) * integral of |q| over the core ),
/// lambda0 = min over parities of the first eigenvalue. Throws DomainError
/// when no guided mode exists (the floor is undefined then).
PhiStar phi_star(const modal::WaveguideProfile& profile,
                 const std::vector<modal::GuidedMode>& modes);

/// Upsilon_j = sqrt( integral over the radiation band of
/// sigma_j(lambda) / (2 sqrt(kappa2-lambda)) ), finite thanks to the
/// square-root behaviour of sigma_j at both endpoints.
double upsilon(const modal::WaveguideProfile& profile, modal::Parity parity);

struct GreenPartBounds {
    double gg; ///< sup bound on |G_guided|
    double gr; ///< sup bound on |G_radiation|
};

GreenPartBounds green_part_bounds(const modal::WaveguideProfile& profile,
                                  const std::vector<modal::GuidedMode>& modes, double phi_star,
                                  double upsilon_s, double upsilon_a);

/// Upper bound for the L^2(mu x mu) norm of the full Green's function:
/// sup bounds x ||mu||_1 for the guided and radiation parts, plus the
/// evanescent double integral with closed-form majorants for the
/// transverse moment p_jj and the axial convolution weight q.
double green_norm_bound(const modal::WaveguideProfile& profile, const WeightSpec& weight,
                        const std::vector<modal::GuidedMode>& modes);

/// C^2 = 5/2 + 2 C2 + [3/2 + 4 C2 + 8 C2^2 + (1+4 C2) kappa2 + 2 kappa2^2] ||G||^2.
double constant_C(const WeightSpec& weight, double kappa2, double green_norm);

/// eps0 = 1/(C K); +infinity when K = 0 (unperturbed problem).
double epsilon_threshold(double C, double K);

enum class NormOrder { L2, H1, H2 };

/// Weighted L2/H1/H2 norm of a sampled field by grid quadrature; derivative
/// terms from second-order stencils. inverse=true uses 1/mu (source norm).
/// A non-decayed boundary appends an estimate of the boundary mass to
/// *warning when provided.
double weighted_norm(const field::ComplexField& u, const WeightSpec& weight, NormOrder order,
                     bool inverse = false, std::string* warning = nullptr);

/// Direct evaluation of the axial convolution weight
///   q(lambda,eta) = integral (e_{lambda,eta} conv mu2)(z) mu2(z) dz,
/// used to audit the closed-form majorant.
double q_weight_direct(const WeightSpec& weight, double kappa2, double lambda, double eta);

/// Transverse moments p_{j,l}(lambda,eta) = integral v_j(x,lambda) v_l(x,eta) mu1(x) dx
/// by truncated quadrature (odd integrands cancel for j != l).
double p_moment_direct(const modal::WaveguideProfile& profile, const WeightSpec& weight,
                       modal::Parity pj, modal::Parity pl, double lambda, double eta);

struct EstimateReport {
    double lambda0 = 0.0;
    double phi_star = 0.0;
    double upsilon_s = 0.0;
    double upsilon_a = 0.0;
    double gg_bound = 0.0;
    double gr_bound = 0.0;
    double green_norm = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C = 0.0;
    double K = 0.0;
    double eps0 = 0.0;
    bool lambda0_fallback = false;
    std::vector<std::pair<std::string, std::string>> notes;
};

/// Every constant of the existence estimate in one pass. K is supplied by
/// the caller (it belongs to the perturbation map).
EstimateReport compute_report(const modal::WaveguideProfile& profile, const WeightSpec& weight,
                              double K);

} // namespace wgreen::estimates
