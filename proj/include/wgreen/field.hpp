#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wgreen/green.hpp"
#include "wgreen/grid.hpp"
#include "wgreen/modal.hpp"

namespace wgreen::perturb {
class PerturbationMap;
}

namespace wgreen::field {

/// u(x,z) = integral of G(x,z;xi,zeta) f(xi,zeta), by the midpoint rule on
/// f's grid (f values are cell-center samples, cell area dx*dz).
///
/// Preconditions: the two z samplings share one spacing, every observation
/// node is offset from every source node by an odd multiple of half a cell
/// in z (so no coincident pairs and the axial ladder stays positive), and f
/// vanishes on the boundary ring of its grid.
ComplexField apply_green(const green::GreenEvaluator& ev, const ComplexField& f,
                         const Grid2D& out_grid, unsigned threads);

struct ResidualOptions {
    int interface_pad = 2; ///< node rows masked on each side of x = +-h
    int source_pad = 3;    ///< nodes masked around the support of f
    int boundary_pad = 2;  ///< nodes masked along the grid boundary
};

struct ResidualField {
    Grid2D grid;
    std::vector<double> abs;     ///< |Delta_h u + k^2 n^2 u - f| per node
    std::vector<std::uint8_t> mask; ///< 1 where the node counts toward max_masked
    double max_masked = 0.0;
    std::size_t masked_count = 0;
};

/// Pointwise 5-point-stencil residual of the scalar wave equation on the
/// common grid of u and f, with interface-adjacent, source-adjacent and
/// boundary nodes masked out of the reported maximum. `add_term`, when
/// given, is added inside the absolute value (used for perturbed-operator
/// residuals); it does not influence the source mask.
ResidualField helmholtz_residual(const ComplexField& u, const modal::WaveguideProfile& profile,
                                 const ComplexField& f, const ResidualOptions& opts = {},
                                 const ComplexField* add_term = nullptr);

struct PicardOptions {
    double eps = 0.0;
    int max_iter = 30;
    double tol = 1e-10;        ///< successive-difference norm, relative to the base field
    double weight_a = 2.0;     ///< decay exponent of the norm weight
    unsigned threads = 1;
};

struct PicardTrace {
    std::vector<double> diff_norms; ///< weighted H2 norm of u_{n+1} - u_n
    std::vector<double> ratios;     ///< diff_norms[n] / diff_norms[n-1]
    double noise_floor = 0.0;       ///< differences at/below this are roundoff
    bool converged = false;
    int iterations = 0;
};

struct PicardResult {
    ComplexField u; ///< converged field on the requested output grid
    PicardTrace trace;
};

/// Solves the perturbed problem by the fixed-point iteration
///   u_{n+1} = u_0 + eps * (Green integral of the first-order operator
///             applied to u_n),
/// where u_0 is the unperturbed solution for the compact source f (sampled
/// on f's grid). Iterates live on a z-staggered companion grid so the Green
/// integral never sees coincident points. Throws DivergenceError when the
/// successive-difference ratio stays >= 1 for three iterations.
PicardResult picard_solve(const green::GreenEvaluator& ev, const perturb::PerturbationMap& pmap,
                          const ComplexField& f, const Grid2D& out_grid,
                          const PicardOptions& opts);

/// Same iteration with a pure guided mode as the unperturbed base field
/// (the incoming-mode experiment); truncating at one iteration reproduces
/// the two-term expansion base + eps * first-order correction.
PicardResult picard_solve_guided(const green::GreenEvaluator& ev,
                                 const perturb::PerturbationMap& pmap,
                                 const modal::GuidedMode& mode, const Grid2D& src_grid,
                                 const Grid2D& out_grid, const PicardOptions& opts);

} // namespace wgreen::field
