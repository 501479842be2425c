#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "epstein/hyp3.hpp"

namespace epstein {

/// Uniform grid on a complex coordinate chart z = x + iy. The x axis may be
/// periodic (cylinder charts); the y axis never is. For a periodic axis the
/// nodes cover exactly one period, so nx * dx must equal the declared period.
struct ChartGrid {
    Complex origin{0.0, 0.0};
    double dx = 1.0, dy = 1.0;
    int nx = 0, ny = 0;
    bool periodic_x = false;
    double period_x = 0.0;

    ChartGrid() = default;
    ChartGrid(Complex origin_, double dx_, double dy_, int nx_, int ny_,
              bool periodic_x_ = false, double period_x_ = 0.0)
        : origin(origin_), dx(dx_), dy(dy_), nx(nx_), ny(ny_),
          periodic_x(periodic_x_), period_x(period_x_) {
        if (!(dx > 0.0) || !(dy > 0.0)) throw std::invalid_argument("ChartGrid: spacings must be positive");
        if (nx < 8 || ny < 8) throw std::invalid_argument("ChartGrid: need nx, ny >= 8");
        if (periodic_x && std::abs(nx * dx - period_x) > 1e-12 * std::max(1.0, std::abs(period_x)))
            throw std::invalid_argument("ChartGrid: node count does not match declared period");
    }

    int size() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    Complex point(int i, int j) const { return origin + Complex(i * dx, j * dy); }

    bool same_chart(const ChartGrid& o) const {
        return origin == o.origin && dx == o.dx && dy == o.dy && nx == o.nx && ny == o.ny &&
               periodic_x == o.periodic_x && period_x == o.period_x;
    }
};

template <class T>
struct Field {
    int nx = 0, ny = 0;
    std::vector<T> v;

    Field() = default;
    Field(int nx_, int ny_, T fill = T{}) : nx(nx_), ny(ny_), v(static_cast<size_t>(nx_) * ny_, fill) {}
    explicit Field(const ChartGrid& g, T fill = T{}) : Field(g.nx, g.ny, fill) {}

    T& operator()(int i, int j) { return v[static_cast<size_t>(j) * nx + i]; }
    const T& operator()(int i, int j) const { return v[static_cast<size_t>(j) * nx + i]; }
    size_t size() const { return v.size(); }
    bool same_shape(const Field& o) const { return nx == o.nx && ny == o.ny; }
};

inline double max_abs(const Field<double>& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(const Field<Complex>& f) {
    double m = 0.0;
    for (const Complex& x : f.v) m = std::max(m, std::abs(x));
    return m;
}

/// Finite-difference tap pattern relative to one node.
struct Stencil {
    int start = 0;
    int n = 0;
    std::array<double, 6> w{};
};

namespace detail {

/// Weights for the d-th derivative from taps at integer offsets
/// start..start+n-1 with spacing h, via the moment conditions
/// sum_k w_k o_k^m = m! [m == d].
inline Stencil make_stencil(int start, int n, int d, double h) {
    double A[6][7] = {};
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            const double o = static_cast<double>(start + k);
            A[m][k] = (m == 0) ? 1.0 : std::pow(o, m);
        }
        double rhs = 0.0;
        if (m == d) {
            rhs = 1.0;
            for (int i = 2; i <= d; ++i) rhs *= i;
        }
        A[m][n] = rhs;
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-14) throw std::logic_error("make_stencil: singular system");
        if (piv != col)
            for (int c = 0; c <= n; ++c) std::swap(A[piv][c], A[col][c]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (int c = col; c <= n; ++c) A[r][c] -= f * A[col][c];
        }
    }
    Stencil s;
    s.start = start;
    s.n = n;
    double hd = 1.0;
    for (int i = 0; i < d; ++i) hd *= h;
    for (int k = 0; k < n; ++k) s.w[k] = A[k][n] / A[k][k] / hd;
    return s;
}

}  // namespace detail

/// Derivative stencils along one grid axis: centered 4th order in the
/// interior, shifted near non-periodic edges (6 taps keep the second
/// derivative at 4th order there).
class AxisOps {
public:
    AxisOps() = default;
    AxisOps(int n, double h, bool periodic) : n_(n), periodic_(periodic) {
        if (periodic) {
            d1_.push_back(detail::make_stencil(-2, 5, 1, h));
            d2_.push_back(detail::make_stencil(-2, 5, 2, h));
            return;
        }
        d1_.resize(n);
        d2_.resize(n);
        for (int i = 0; i < n; ++i) {
            d1_[i] = detail::make_stencil(std::clamp(i - 2, 0, n - 5) - i, 5, 1, h);
            if (i >= 2 && i <= n - 3)
                d2_[i] = detail::make_stencil(-2, 5, 2, h);
            else
                d2_[i] = detail::make_stencil(std::clamp(i - 2, 0, n - 6) - i, 6, 2, h);
        }
    }

    const Stencil& d1(int i) const { return periodic_ ? d1_[0] : d1_[i]; }
    const Stencil& d2(int i) const { return periodic_ ? d2_[0] : d2_[i]; }
    int wrap(int i) const {
        if (!periodic_) return i;
        i %= n_;
        return i < 0 ? i + n_ : i;
    }

private:
    int n_ = 0;
    bool periodic_ = false;
    std::vector<Stencil> d1_, d2_;
};

/// Grid derivative operators in chart coordinates z = x + iy.
class DiffOps {
public:
    DiffOps() = default;
    explicit DiffOps(const ChartGrid& g)
        : grid_(g), ax_(g.nx, g.dx, g.periodic_x), ay_(g.ny, g.dy, false) {}

    const ChartGrid& grid() const { return grid_; }
    const AxisOps& x_axis() const { return ax_; }
    const AxisOps& y_axis() const { return ay_; }

    template <class T> Field<T> dx(const Field<T>& f) const { return apply_x(f, false); }
    template <class T> Field<T> dxx(const Field<T>& f) const { return apply_x(f, true); }
    template <class T> Field<T> dy(const Field<T>& f) const { return apply_y(f, false); }
    template <class T> Field<T> dyy(const Field<T>& f) const { return apply_y(f, true); }
    template <class T> Field<T> dxy(const Field<T>& f) const { return apply_x(apply_y(f, false), false); }

    /// d/dz = (d/dx - i d/dy) / 2.
    Field<Complex> dz(const Field<double>& f) const {
        const Field<double> fx = dx(f), fy = dy(f);
        Field<Complex> out(f.nx, f.ny);
        for (size_t n = 0; n < out.size(); ++n) out.v[n] = 0.5 * Complex(fx.v[n], -fy.v[n]);
        return out;
    }

    /// d/dzbar = (d/dx + i d/dy) / 2 of a complex field; vanishes on
    /// holomorphic data up to truncation error.
    Field<Complex> dzbar(const Field<Complex>& f) const {
        const Field<Complex> fx = dx(f), fy = dy(f);
        Field<Complex> out(f.nx, f.ny);
        for (size_t n = 0; n < out.size(); ++n)
            out.v[n] = 0.5 * (fx.v[n] + Complex(0.0, 1.0) * fy.v[n]);
        return out;
    }

    /// d^2/dz^2 = (dxx - dyy - 2i dxy) / 4.
    Field<Complex> dzz(const Field<double>& f) const {
        const Field<double> fxx = dxx(f), fyy = dyy(f), fxy = dxy(f);
        Field<Complex> out(f.nx, f.ny);
        for (size_t n = 0; n < out.size(); ++n)
            out.v[n] = 0.25 * Complex(fxx.v[n] - fyy.v[n], -2.0 * fxy.v[n]);
        return out;
    }

    /// dxx + dyy, i.e. 4 d^2/(dz dzbar).
    Field<double> flat_laplacian(const Field<double>& f) const {
        const Field<double> fxx = dxx(f), fyy = dyy(f);
        Field<double> out(f.nx, f.ny);
        for (size_t n = 0; n < out.size(); ++n) out.v[n] = fxx.v[n] + fyy.v[n];
        return out;
    }

private:
    template <class T>
    Field<T> apply_x(const Field<T>& f, bool second) const {
        Field<T> out(f.nx, f.ny);
        for (int j = 0; j < f.ny; ++j)
            for (int i = 0; i < f.nx; ++i) {
                const Stencil& s = second ? ax_.d2(i) : ax_.d1(i);
                T acc{};
                for (int k = 0; k < s.n; ++k) acc += s.w[k] * f(ax_.wrap(i + s.start + k), j);
                out(i, j) = acc;
            }
        return out;
    }

    template <class T>
    Field<T> apply_y(const Field<T>& f, bool second) const {
        Field<T> out(f.nx, f.ny);
        for (int j = 0; j < f.ny; ++j)
            for (int i = 0; i < f.nx; ++i) {
                const Stencil& s = second ? ay_.d2(j) : ay_.d1(j);
                T acc{};
                for (int k = 0; k < s.n; ++k) acc += s.w[k] * f(i, j + s.start + k);
                out(i, j) = acc;
            }
        return out;
    }

    ChartGrid grid_;
    AxisOps ax_, ay_;
};

/// Quadrature weight at one node: exact periodic sum along a periodic axis,
/// trapezoid along a truncated axis.
inline double quad_weight(const ChartGrid& g, int i, int j) {
    const double wx = (!g.periodic_x && (i == 0 || i == g.nx - 1)) ? 0.5 : 1.0;
    const double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    return wx * wy * g.dx * g.dy;
}

}  // namespace epstein
