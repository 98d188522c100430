#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace wgreen::field {

/// Uniform rectangular sampling; nodes at x_min + i*dx, i = 0..nx-1
/// (both endpoints included).
struct Grid2D {
    double x_min = 0.0, x_max = 1.0;
    int nx = 2;
    double z_min = 0.0, z_max = 1.0;
    int nz = 2;

    static Grid2D make(double x_min, double x_max, int nx, double z_min, double z_max, int nz);

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dz() const { return (z_max - z_min) / (nz - 1); }
    double x(int i) const { return x_min + i * dx(); }
    double z(int j) const { return z_min + j * dz(); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * nz; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * nz + j; }
    bool operator==(const Grid2D&) const = default;
};

/// Complex samples on a Grid2D, stored as separate real/imaginary planes.
class ComplexField {
public:
    ComplexField() = default;
    explicit ComplexField(const Grid2D& grid)
        : grid_(grid), re_(grid.size(), 0.0), im_(grid.size(), 0.0) {}

    static ComplexField sample(const Grid2D& grid,
                               const std::function<std::complex<double>(double, double)>& fn);

    const Grid2D& grid() const { return grid_; }

    std::complex<double> at(int i, int j) const {
        const std::size_t n = grid_.idx(i, j);
        return {re_[n], im_[n]};
    }
    void set(int i, int j, std::complex<double> v) {
        const std::size_t n = grid_.idx(i, j);
        re_[n] = v.real();
        im_[n] = v.imag();
    }

    std::span<const double> re() const { return re_; }
    std::span<const double> im() const { return im_; }
    std::span<double> re() { return re_; }
    std::span<double> im() { return im_; }

    ComplexField& operator+=(const ComplexField& other);
    ComplexField& operator-=(const ComplexField& other);
    ComplexField& operator*=(double s);

    double max_abs() const;

private:
    Grid2D grid_;
    std::vector<double> re_, im_;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator*(double s, ComplexField a);

/// Second-order first/second derivative fields (centered in the interior,
/// one-sided at the grid edges). axis 0 = x, axis 1 = z.
ComplexField derivative(const ComplexField& u, int axis);
ComplexField second_derivative(const ComplexField& u, int axis);
ComplexField mixed_derivative(const ComplexField& u);

} // namespace wgreen::field
