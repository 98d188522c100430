#pragma once

#include <complex>
#include <optional>

#include "wgreen/estimates.hpp"
#include "wgreen/green.hpp"
#include "wgreen/grid.hpp"
#include "wgreen/modal.hpp"

namespace wgreen::perturb {

/// Compactly supported C^2 bump: amplitude * (1 - y^2)^3 on [-1, 1] in the
/// scaled variable y = (x - center)/half_width, zero outside. Value and the
/// first two derivatives vanish at the support boundary.
struct BumpFunction {
    double amplitude = 0.0;
    double center = 0.0;
    double half_width = 1.0;

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    double lo() const { return center - half_width; }
    double hi() const { return center + half_width; }
};

/// Which coefficient assignment drives the first-order right-hand side.
/// `derived` comes from the first-order expansion of the inverse of the
/// axial-displacement map (S'T multiplies the mixed derivative, ST' the
/// second axial derivative). `ss_variant` is the alternative assignment
/// (S'T on the second transverse derivative, ST' on the mixed one), kept
/// selectable for side-by-side comparison; the O(eps^2) consistency check
/// discriminates between the two.
enum class RhsFormula { derived, ss_variant };

/// First-order coefficient fields of the operator obtained by straightening
/// a perturbed guide with a near-identity coordinate map. Product mode uses
/// the axial displacement (s,t) -> (s, t + eps S(s) T(t)); general mode uses
/// (s,t) -> (s + eps phi, t + eps psi) with separable displacements
/// phi = Sp(s) Tp(t), psi = Sq(s) Tq(t).
class PerturbationMap {
public:
    static PerturbationMap product(const BumpFunction& S, const BumpFunction& T,
                                   RhsFormula formula = RhsFormula::derived);
    static PerturbationMap general(const BumpFunction& Sp, const BumpFunction& Tp,
                                   const BumpFunction& Sq, const BumpFunction& Tq,
                                   const modal::WaveguideProfile& profile);

    bool is_product() const { return kind_ == Kind::product; }
    RhsFormula formula() const { return formula_; }

    /// First-order coefficients at (s,t): the second-derivative matrix is
    /// symmetric (a12 = a21).
    double a11(double s, double t) const;
    double a12(double s, double t) const;
    double a22(double s, double t) const;
    double b1(double s, double t) const;
    double b2(double s, double t) const;
    double c(double s, double t) const;

    /// Bounding box of the coefficient support.
    double s_lo() const;
    double s_hi() const;
    double t_lo() const;
    double t_hi() const;

    /// Largest |d(displacement)| on the support; the map is invertible for
    /// eps * slope() < 1.
    double displacement_slope() const;

    /// Throws DomainError when the map fails the invertibility margin at eps.
    void require_invertible(double eps) const;

    const BumpFunction& S() const { return S_; }
    const BumpFunction& T() const { return T_; }

private:
    enum class Kind { product, general };
    PerturbationMap() = default;

    Kind kind_ = Kind::product;
    RhsFormula formula_ = RhsFormula::derived;
    BumpFunction S_, T_;          // product mode
    BumpFunction Sp_, Tp_, Sq_, Tq_; // general mode displacements
    std::optional<modal::WaveguideProfile> profile_; // general mode: for dn^2/ds
};

/// K with [sum a~^2]^{1/2}, [sum b~^2]^{1/2}, |c~| <= K mu on the support,
/// by dense sampling refined until stable to 1%.
double coefficient_bound(const PerturbationMap& pmap, const estimates::WeightSpec& weight);

/// Forward-propagating pure guided mode w0(s,t) = v(s) e^{i beta t} with
/// closed-form derivatives (the second transverse derivative jumps at the
/// interfaces where q does).
class GuidedModeField {
public:
    GuidedModeField(const modal::WaveguideProfile& profile, const modal::GuidedMode& mode);

    std::complex<double> value(double s, double t) const;
    std::complex<double> ds(double s, double t) const;
    std::complex<double> dt(double s, double t) const;
    std::complex<double> dss(double s, double t) const;
    std::complex<double> dst(double s, double t) const;
    std::complex<double> dtt(double s, double t) const;

    const modal::GuidedMode& mode() const { return mode_; }

private:
    double v(double s) const;
    double dv(double s) const;

    modal::WaveguideProfile profile_;
    modal::GuidedMode mode_;
};

/// Samples w0 on a grid.
field::ComplexField zeroth_order_field(const modal::WaveguideProfile& profile,
                                       const modal::GuidedMode& mode, const field::Grid2D& grid);

/// RHS of the first-order problem, -(sum a~_ij d_ij + sum b~_i d_i + c~) w0,
/// from stencil derivatives of the sampled w0 (one-sided transverse stencils
/// next to x = +-h).
field::ComplexField first_order_rhs(const PerturbationMap& pmap, const field::ComplexField& w0,
                                    const modal::WaveguideProfile& profile);

/// Same RHS from the closed-form derivatives of the guided mode.
field::ComplexField first_order_rhs_analytic(const PerturbationMap& pmap,
                                             const modal::WaveguideProfile& profile,
                                             const modal::GuidedMode& mode,
                                             const field::Grid2D& grid);

/// w1 = Green integral of the RHS (delegates to field::apply_green).
field::ComplexField first_order_field(const green::GreenEvaluator& ev,
                                      const field::ComplexField& rhs,
                                      const field::Grid2D& out_grid, unsigned threads);

/// First-order operator applied to an iterate sampled on the z-staggered
/// companion of `target` (same x nodes, nz+1 z rows offset by -dz/2):
/// the staggering supplies centered axial stencils at the target nodes.
field::ComplexField apply_first_order_operator(const PerturbationMap& pmap,
                                               const field::ComplexField& u_staggered,
                                               const field::Grid2D& target,
                                               const modal::WaveguideProfile& profile);

/// First-order operator on u's own grid (stencil derivatives, one-sided
/// next to the interfaces); used for perturbed-residual checks.
field::ComplexField apply_first_order_operator_colocated(const PerturbationMap& pmap,
                                                         const field::ComplexField& u,
                                                         const modal::WaveguideProfile& profile);

/// Unperturbed operator (laplacian + k^2 n^2) applied to a z-staggered
/// iterate at the target nodes, with the same stencil family as
/// apply_first_order_operator. Nodes too close to the grid edge for the
/// stencils are left at zero.
field::ComplexField apply_base_operator(const field::ComplexField& u_staggered,
                                        const field::Grid2D& target,
                                        const modal::WaveguideProfile& profile);

/// Overlap coefficient of u against a guided mode at the grid column nearest
/// to z: r_m * integral v_m(x) u(x,z) dx (trapezoid over the grid column).
std::complex<double> mode_overlap(const modal::WaveguideProfile& profile,
                                  const modal::GuidedMode& mode, const field::ComplexField& u,
                                  double z);

} // namespace wgreen::perturb
