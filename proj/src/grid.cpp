#include "wgreen/grid.hpp"

#include <algorithm>
#include <cmath>

#include "wgreen/errors.hpp"
#include "wgreen/simd/kernels.hpp"

namespace wgreen::field {

Grid2D Grid2D::make(double x_min, double x_max, int nx, double z_min, double z_max, int nz) {
    if (!(nx >= 2 && nz >= 2)) throw DomainError("grid: nx and nz must be >= 2");
    if (!(x_max > x_min) || !(z_max > z_min)) {
        throw DomainError("grid: coordinates must be strictly increasing");
    }
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(z_min) ||
        !std::isfinite(z_max)) {
        throw DomainError("grid: coordinates must be finite");
    }
    return Grid2D{x_min, x_max, nx, z_min, z_max, nz};
}

ComplexField ComplexField::sample(
    const Grid2D& grid, const std::function<std::complex<double>(double, double)>& fn) {
    ComplexField f(grid);
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.nz; ++j) {
            f.set(i, j, fn(grid.x(i), grid.z(j)));
        }
    }
    return f;
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
    if (!(grid_ == other.grid_)) throw DomainError("field: grid mismatch in +=");
    simd::axpy(1.0, other.re_.data(), re_.data(), re_.size());
    simd::axpy(1.0, other.im_.data(), im_.data(), im_.size());
    return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
    if (!(grid_ == other.grid_)) throw DomainError("field: grid mismatch in -=");
    simd::axpy(-1.0, other.re_.data(), re_.data(), re_.size());
    simd::axpy(-1.0, other.im_.data(), im_.data(), im_.size());
    return *this;
}

ComplexField& ComplexField::operator*=(double s) {
    for (double& v : re_) v *= s;
    for (double& v : im_) v *= s;
    return *this;
}

double ComplexField::max_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < re_.size(); ++i) {
        m = std::max(m, std::hypot(re_[i], im_[i]));
    }
    return m;
}

ComplexField operator+(ComplexField a, const ComplexField& b) {
    a += b;
    return a;
}

ComplexField operator-(ComplexField a, const ComplexField& b) {
    a -= b;
    return a;
}

ComplexField operator*(double s, ComplexField a) {
    a *= s;
    return a;
}

namespace {

/// Index step along the requested axis.
struct AxisView {
    int n;        // points along the axis
    int m;        // points along the other axis
    std::size_t stride;
    std::size_t other_stride;
};

AxisView axis_view(const Grid2D& g, int axis) {
    if (axis == 0) return {g.nx, g.nz, static_cast<std::size_t>(g.nz), 1};
    return {g.nz, g.nx, 1, static_cast<std::size_t>(g.nz)};
}

void differentiate_plane(std::span<const double> in, std::span<double> out, const AxisView& v,
                         double d, bool second) {
    for (int o = 0; o < v.m; ++o) {
        const std::size_t base = o * v.other_stride;
        auto val = [&](int i) { return in[base + i * v.stride]; };
        for (int i = 0; i < v.n; ++i) {
            double r;
            if (second) {
                if (i == 0) {
                    r = (2 * val(0) - 5 * val(1) + 4 * val(2) - val(3)) / (d * d);
                } else if (i == v.n - 1) {
                    r = (2 * val(i) - 5 * val(i - 1) + 4 * val(i - 2) - val(i - 3)) / (d * d);
                } else {
                    r = (val(i + 1) - 2 * val(i) + val(i - 1)) / (d * d);
                }
            } else {
                if (i == 0) {
                    r = (-3 * val(0) + 4 * val(1) - val(2)) / (2 * d);
                } else if (i == v.n - 1) {
                    r = (3 * val(i) - 4 * val(i - 1) + val(i - 2)) / (2 * d);
                } else {
                    r = (val(i + 1) - val(i - 1)) / (2 * d);
                }
            }
            out[base + i * v.stride] = r;
        }
    }
}

} // namespace

ComplexField derivative(const ComplexField& u, int axis) {
    const Grid2D& g = u.grid();
    const AxisView v = axis_view(g, axis);
    if (v.n < 4) throw DomainError("derivative: grid too small for stencils");
    const double d = axis == 0 ? g.dx() : g.dz();
    ComplexField out(g);
    differentiate_plane(u.re(), out.re(), v, d, false);
    differentiate_plane(u.im(), out.im(), v, d, false);
    return out;
}

ComplexField second_derivative(const ComplexField& u, int axis) {
    const Grid2D& g = u.grid();
    const AxisView v = axis_view(g, axis);
    if (v.n < 4) throw DomainError("second_derivative: grid too small for stencils");
    const double d = axis == 0 ? g.dx() : g.dz();
    ComplexField out(g);
    differentiate_plane(u.re(), out.re(), v, d, true);
    differentiate_plane(u.im(), out.im(), v, d, true);
    return out;
}

ComplexField mixed_derivative(const ComplexField& u) {
    return derivative(derivative(u, 0), 1);
}

} // namespace wgreen::field
