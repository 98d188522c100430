#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wgreen::modal {

enum class Parity { symmetric, antisymmetric };

inline const char* parity_name(Parity p) {
    return p == Parity::symmetric ? "symmetric" : "antisymmetric";
}

/// Transverse index profile of a symmetric slab guide: a core of half-width
/// h (index n_co, constant or an even function of x) surrounded by an
/// infinite cladding of index n_cl. Derived quantities:
///   n* = max(sup n_co, n_cl),  kappa2 = k^2 n*^2,  d2 = k^2 (n*^2 - n_cl^2),
///   q(x) = k^2 (n*^2 - n(x)^2)  (so q >= 0, and q = d2 for |x| > h).
class WaveguideProfile {
public:
    /// Step-index guide with constant core index.
    WaveguideProfile(double k, double h, double n_co, double n_cl);

    /// Graded core. n_co is evaluated on [0,h] and mirrored (the profile is
    /// taken as even in x). n_co_sup must be its supremum over the core.
    WaveguideProfile(double k, double h, std::function<double(double)> n_co, double n_cl,
                     double n_co_sup);

    double k() const { return k_; }
    double h() const { return h_; }
    double n_cl() const { return n_cl_; }
    double n_star() const { return n_star_; }
    double d2() const { return d2_; }
    /// k^2 n*^2, the boundary between the oscillatory-in-z and
    /// decaying-in-z parts of the spectrum.
    double kappa2() const { return kappa2_; }

    double index(double x) const;
    double q(double x) const;

    bool uniform_core() const { return !core_fn_; }
    /// q inside the core; valid only when uniform_core().
    double core_q() const { return core_q_; }

private:
    double k_, h_, n_cl_;
    double n_co_const_ = 0.0;
    std::function<double(double)> core_fn_;
    double n_star_, d2_, kappa2_, core_q_;
};

/// Core solution at one spectral parameter: boundary data of phi_j(.,lambda).
/// Interior values are recomputed on demand via phi_interior().
struct TransverseSolution {
    Parity parity;
    double lambda;
    double phi_h;
    double dphi_h;
};

/// Integrates phi'' + [lambda - q(x)] phi = 0 on [0,h] with
///   symmetric:      phi(0)=1,  phi'(0)=0
///   antisymmetric:  phi(0)=0,  phi'(0)=sqrt(lambda)
/// using the closed form when the core is uniform, classical RK4 otherwise.
/// Requires lambda > 0.
TransverseSolution solve_transverse(const WaveguideProfile& profile, Parity parity,
                                    double lambda);

/// phi_j(x, lambda) for |x| <= h (parity extension for x < 0).
double phi_interior(const WaveguideProfile& profile, Parity parity, double lambda, double x);
double dphi_interior(const WaveguideProfile& profile, Parity parity, double lambda, double x);

/// Batch interior evaluation: xs sorted ascending within [0,h]; one ODE pass.
void phi_interior_many(const WaveguideProfile& profile, Parity parity, double lambda,
                       std::span<const double> xs, std::span<double> out);

/// Value of the dispersion function sqrt(d2-lambda)*phi(h) + phi'(h),
/// whose roots in (0,d2) are the guided-mode eigenvalues.
double dispersion(const WaveguideProfile& profile, Parity parity, double lambda);

struct GuidedMode {
    Parity parity;
    double lambda;     ///< eigenvalue in (0, d2)
    double r;          ///< normalization: r * integral of v^2 over R = 1
    double beta;       ///< axial propagation constant sqrt(kappa2 - lambda)
    double decay;      ///< transverse decay rate sqrt(d2 - lambda)
    double phi_h;
    double dphi_h;
    double residual;   ///< dispersion residual at lambda
};

/// All guided modes of both parities, sorted ascending in lambda. Empty when
/// d2 = 0. Bracketing failures append a message to *warnings when provided.
std::vector<GuidedMode> find_guided_modes(const WaveguideProfile& profile,
                                          std::vector<std::string>* warnings = nullptr);

/// Spectral density of the continuous part of the expansion measure,
///   sigma_j(lambda) = sqrt(lambda-d2) / ((lambda-d2) phi(h)^2 + phi'(h)^2),
/// defined for lambda > d2.
double spectral_density(const WaveguideProfile& profile, Parity parity, double lambda);

/// Same from precomputed boundary data.
double sigma_from_boundary(double d2, double lambda, double phi_h, double dphi_h);

/// Full transverse mode function v_j(x, lambda) on the real line:
/// core values from phi, cladding continuation oscillatory for lambda > d2
/// and exponentially decaying for lambda < d2. lambda = d2 is excluded.
double mode_function(const WaveguideProfile& profile, Parity parity, double lambda, double x);

/// v_j(x, lambda_m) of a guided mode (exponential cladding branch).
double guided_mode_value(const WaveguideProfile& profile, const GuidedMode& mode, double x);

/// Oscillatory cladding continuation from boundary data, for lambda > d2 and
/// tau = |x| - h >= 0:  phi_h cos(Q tau) + dphi_h sin(Q tau)/Q, Q = sqrt(lambda-d2).
double cladding_oscillatory(double d2, double lambda, double phi_h, double dphi_h, double tau);

/// Integral of phi^2 over the core [-h, h].
double core_phi_sq_integral(const WaveguideProfile& profile, Parity parity, double lambda);

} // namespace wgreen::modal
