#pragma once

#include <span>
#include <vector>

namespace mfgp {

using Slice = std::vector<double>;       // one value per spatial node
using TimeSeries = std::vector<double>;  // one value per time node

// Uniform space-time grid on [0,T] x T^1. x is periodic with nx nodes x_j = j/nx,
// t has nt nodes t_n = n T/(nt-1) including both ends.
class Grid {
public:
    Grid(int nt, int nx, double horizon);

    int nt() const { return nt_; }
    int nx() const { return nx_; }
    double horizon() const { return T_; }
    double dt() const { return dt_; }
    double dx() const { return dx_; }
    double t(int n) const { return n * dt_; }
    double x(int j) const { return j * dx_; }
    std::size_t size() const { return static_cast<std::size_t>(nt_) * nx_; }

    // trapezoid weight in t
    double time_weight(int n) const;
    // quadrature weight of node (n,j): time_weight(n)*dx
    double node_weight(int n) const { return time_weight(n) * dx_; }

    bool operator==(const Grid& o) const
    {
        return nt_ == o.nt_ && nx_ == o.nx_ && T_ == o.T_;
    }

private:
    int nt_, nx_;
    double T_, dt_, dx_;
};

class Field {
public:
    explicit Field(const Grid& g, double fill = 0.0);

    const Grid& grid() const { return grid_; }
    double& operator()(int n, int j) { return v_[static_cast<std::size_t>(n) * grid_.nx() + j]; }
    double operator()(int n, int j) const { return v_[static_cast<std::size_t>(n) * grid_.nx() + j]; }

    std::span<double> row(int n) { return {v_.data() + static_cast<std::size_t>(n) * grid_.nx(), static_cast<std::size_t>(grid_.nx())}; }
    std::span<const double> row(int n) const { return {v_.data() + static_cast<std::size_t>(n) * grid_.nx(), static_cast<std::size_t>(grid_.nx())}; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    double max_abs() const;
    double min() const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

private:
    Grid grid_;
    std::vector<double> v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

void require_same_grid(const Field& a, const Field& b, const char* what);

// Central periodic difference in x.
Field dx_periodic(const Field& f);
// 3-point periodic second difference in x.
Field dxx_periodic(const Field& f);
// Central in the interior, one-sided first order on t = 0 and t = T.
Field dt_interior(const Field& f);
// Transposes (plain Euclidean) of the above stencils, used for adjoints.
Field dt_transpose(const Field& f);
Field dx_transpose(const Field& f);

// dx * sum_j f(n,j)
double integrate_x(const Field& f, int n);
// trapezoid in t of integrate_x
double integrate_xt(const Field& f);
// weighted pairing sum W(n) f g
double inner_w(const Field& f, const Field& g);
// trapezoid pairing of two time series
double inner_t(const Grid& g, const TimeSeries& a, const TimeSeries& b);

// Cumulative trapezoid from x = 0: F_0 = 0, F_{j+1} = F_j + dx (f_j + f_{j+1})/2.
Slice antiderivative_x(const Slice& f, double dx);
// Cumulative trapezoid of a time series from t = 0.
TimeSeries antiderivative_t(const TimeSeries& f, double dt);

double slice_mean(std::span<const double> s);
void remove_row_means(Field& f);

}  // namespace mfgp
