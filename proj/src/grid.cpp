#include "mfgp/grid.hpp"

#include "mfgp/error.hpp"
#include "mfgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfgp {

Grid::Grid(int nt, int nx, double horizon) : nt_(nt), nx_(nx), T_(horizon)
{
    if (nt < 3) throw ShapeError("grid: nt must be >= 3, got " + std::to_string(nt));
    if (nx < 4) throw ShapeError("grid: nx must be >= 4, got " + std::to_string(nx));
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("grid: horizon must be positive");
    dt_ = T_ / (nt_ - 1);
    dx_ = 1.0 / nx_;
}

double Grid::time_weight(int n) const
{
    return (n == 0 || n == nt_ - 1) ? 0.5 * dt_ : dt_;
}

Field::Field(const Grid& g, double fill) : grid_(g), v_(g.size(), fill) {}

double Field::max_abs() const
{
    double m = 0.0;
    for (double v : v_) m = std::max(m, std::abs(v));
    return m;
}

double Field::min() const
{
    return *std::min_element(v_.begin(), v_.end());
}

void require_same_grid(const Field& a, const Field& b, const char* what)
{
    if (!(a.grid() == b.grid())) throw ShapeError(std::string(what) + ": fields live on different grids");
}

Field& Field::operator+=(const Field& o)
{
    require_same_grid(*this, o, "Field +=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}

Field& Field::operator-=(const Field& o)
{
    require_same_grid(*this, o, "Field -=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}

Field& Field::operator*=(double s)
{
    for (double& v : v_) v *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field dx_periodic(const Field& f)
{
    Field out(f.grid());
    const Grid& g = f.grid();
    kernels::omp::dx_periodic(f.values(), out.values(), g.nt(), g.nx(), g.dx());
    return out;
}

Field dxx_periodic(const Field& f)
{
    Field out(f.grid());
    const Grid& g = f.grid();
    kernels::omp::dxx_periodic(f.values(), out.values(), g.nt(), g.nx(), g.dx());
    return out;
}

Field dt_interior(const Field& f)
{
    Field out(f.grid());
    const Grid& g = f.grid();
    kernels::omp::dt_interior(f.values(), out.values(), g.nt(), g.nx(), g.dt());
    return out;
}

Field dt_transpose(const Field& f)
{
    Field out(f.grid());
    const Grid& g = f.grid();
    kernels::omp::dt_transpose(f.values(), out.values(), g.nt(), g.nx(), g.dt());
    return out;
}

// central periodic Dx is skew
Field dx_transpose(const Field& f)
{
    Field out = dx_periodic(f);
    out *= -1.0;
    return out;
}

double integrate_x(const Field& f, int n)
{
    double s = 0.0;
    for (double v : f.row(n)) s += v;
    return s * f.grid().dx();
}

double integrate_xt(const Field& f)
{
    const Grid& g = f.grid();
    std::vector<double> sums(g.nt());
    kernels::omp::row_sums(f.values(), sums, g.nt(), g.nx());
    double s = 0.0;
    for (int n = 0; n < g.nt(); ++n) s += g.time_weight(n) * sums[n];
    return s * g.dx();
}

double inner_w(const Field& f, const Field& h)
{
    require_same_grid(f, h, "inner_w");
    Field p(f.grid());
    for (std::size_t i = 0; i < p.values().size(); ++i) p.values()[i] = f.values()[i] * h.values()[i];
    return integrate_xt(p);
}

double inner_t(const Grid& g, const TimeSeries& a, const TimeSeries& b)
{
    if (static_cast<int>(a.size()) != g.nt() || static_cast<int>(b.size()) != g.nt())
        throw ShapeError("inner_t: time series length differs from nt");
    double s = 0.0;
    for (int n = 0; n < g.nt(); ++n) s += g.time_weight(n) * a[n] * b[n];
    return s;
}

Slice antiderivative_x(const Slice& f, double dx)
{
    Slice F(f.size(), 0.0);
    for (std::size_t j = 1; j < f.size(); ++j) F[j] = F[j - 1] + 0.5 * dx * (f[j - 1] + f[j]);
    return F;
}

TimeSeries antiderivative_t(const TimeSeries& f, double dt)
{
    return antiderivative_x(f, dt);
}

double slice_mean(std::span<const double> s)
{
    double a = 0.0;
    for (double v : s) a += v;
    return a / static_cast<double>(s.size());
}

void remove_row_means(Field& f)
{
    for (int n = 0; n < f.grid().nt(); ++n) {
        auto r = f.row(n);
        double m = slice_mean(r);
        for (double& v : r) v -= m;
    }
}

}  // namespace mfgp
