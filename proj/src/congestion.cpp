#include "mfgp/congestion.hpp"

#include "mfgp/error.hpp"
#include "mfgp/kernels.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace mfgp {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct NodeFields {
    Field z, m, a, b, c;
};

NodeFields node_fields(const CongestionSpec& spec, const PotentialPair& pp, double floor, FloorMode mode,
                       int* floored)
{
    const Grid& g = spec.grid;
    NodeFields f{dt_interior(pp.phi), dx_periodic(pp.phi), Field(g), Field(g), Field(g)};
    for (int n = 0; n < g.nt(); ++n)
        for (double& v : f.z.row(n)) v += pp.q[n];
    int count = 0;
    for (int n = 0; n < g.nt(); ++n)
        for (int j = 0; j < g.nx(); ++j) {
            double& m = f.m(n, j);
            m += 1.0;
            if (!(m > 0.0) || m < floor) {
                if (mode == FloorMode::strict) {
                    std::ostringstream os;
                    os << "apply_F: density " << m << " below floor " << floor << " at node (" << n << "," << j
                       << ")";
                    throw DomainError(os.str());
                }
                m = std::max(floor, std::numeric_limits<double>::min());
                ++count;
            }
        }
    if (floored) *floored = count;
    kernels::omp::congestion_quotients({f.z.values(), f.m.values(), f.a.values(), f.b.values(), f.c.values()},
                                       spec.alpha, spec.mu);
    return f;
}

void weight_rows(Field& f)
{
    const Grid& g = f.grid();
    for (int n = 0; n < g.nt(); ++n) {
        double w = g.node_weight(n);
        for (double& v : f.row(n)) v *= w;
    }
}

// weighted residual R1 = Dt^T W a + Dx^T W (c - b/2) on all rows, R2 = sum_x W a
void weighted_residual(const NodeFields& f, Field& R1, TimeSeries& R2)
{
    const Grid& g = f.a.grid();
    Field wa = f.a, wh(g);
    for (std::size_t i = 0; i < wh.values().size(); ++i) wh.values()[i] = f.c.values()[i] - 0.5 * f.b.values()[i];
    weight_rows(wa);
    weight_rows(wh);
    R1 = dt_transpose(wa);
    R1 += dx_transpose(wh);
    R2.assign(g.nt(), 0.0);
    for (int n = 0; n < g.nt(); ++n) {
        double s = 0.0;
        for (double v : wa.row(n)) s += v;
        R2[n] = s;
    }
}

int nid(int n, int j, int nx) { return n * nx + j; }

SpMat build_dt(const Grid& g)
{
    const int nt = g.nt(), nx = g.nx();
    std::vector<Trip> t;
    for (int n = 0; n < nt; ++n) {
        int a = n == 0 ? 0 : n - 1;
        int b = n == nt - 1 ? nt - 1 : n + 1;
        double s = 1.0 / ((b - a) * g.dt());
        for (int j = 0; j < nx; ++j) {
            t.emplace_back(nid(n, j, nx), nid(b, j, nx), s);
            t.emplace_back(nid(n, j, nx), nid(a, j, nx), -s);
        }
    }
    SpMat D(g.size(), g.size());
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

SpMat build_dx(const Grid& g)
{
    const int nt = g.nt(), nx = g.nx();
    const double s = 0.5 / g.dx();
    std::vector<Trip> t;
    for (int n = 0; n < nt; ++n)
        for (int j = 0; j < nx; ++j) {
            t.emplace_back(nid(n, j, nx), nid(n, (j + 1) % nx, nx), s);
            t.emplace_back(nid(n, j, nx), nid(n, (j + nx - 1) % nx, nx), -s);
        }
    SpMat D(g.size(), g.size());
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

SpMat build_e(const Grid& g)
{
    std::vector<Trip> t;
    for (int n = 0; n < g.nt(); ++n)
        for (int j = 0; j < g.nx(); ++j) t.emplace_back(nid(n, j, g.nx()), n, 1.0);
    SpMat E(g.size(), g.nt());
    E.setFromTriplets(t.begin(), t.end());
    return E;
}

VectorXd node_weight_vector(const Grid& g)
{
    VectorXd w(g.size());
    for (int n = 0; n < g.nt(); ++n)
        for (int j = 0; j < g.nx(); ++j) w[nid(n, j, g.nx())] = g.node_weight(n);
    return w;
}

double binom(int k, int i)
{
    double r = 1.0;
    for (int l = 1; l <= i; ++l) r = r * (k - i + l) / l;
    return r;
}

// K = W + sum_{j0+j1=6} D^T w D with forward j0-th differences in t (rows where
// the stencil fits) and periodic forward j1-th differences in x.
SpMat build_k(const Grid& g)
{
    const int nt = g.nt(), nx = g.nx();
    SpMat K(g.size(), g.size());
    {
        VectorXd w = node_weight_vector(g);
        std::vector<Trip> t;
        for (int i = 0; i < static_cast<int>(g.size()); ++i) t.emplace_back(i, i, w[i]);
        K.setFromTriplets(t.begin(), t.end());
    }
    for (int j0 = 0; j0 <= 6; ++j0) {
        int j1 = 6 - j0;
        if (nt - 1 < j0) continue;
        int rows = nt - j0;
        double scale = std::pow(g.dt(), -j0) * std::pow(g.dx(), -j1);
        std::vector<Trip> t;
        VectorXd w(rows * nx);
        for (int r = 0; r < rows; ++r) {
            for (int j = 0; j < nx; ++j) {
                w[r * nx + j] = j0 == 0 ? g.node_weight(r) : g.dt() * g.dx();
                for (int i = 0; i <= j0; ++i) {
                    double ct = binom(j0, i) * ((j0 - i) % 2 ? -1.0 : 1.0);
                    for (int l = 0; l <= j1; ++l) {
                        double cx = binom(j1, l) * ((j1 - l) % 2 ? -1.0 : 1.0);
                        t.emplace_back(r * nx + j, nid(r + i, (j + l) % nx, nx), ct * cx * scale);
                    }
                }
            }
        }
        SpMat D(rows * nx, g.size());
        D.setFromTriplets(t.begin(), t.end());
        SpMat DtWD = SpMat(D.transpose()) * w.asDiagonal() * D;
        K += DtWD;
    }
    return K;
}

void remove_block_means(VectorXd& v, int nx)
{
    for (int b = 0; b < v.size() / nx; ++b) {
        double m = v.segment(b * nx, nx).mean();
        v.segment(b * nx, nx).array() -= m;
    }
}

// P A P with P = blockwise mean removal
void project_dense(MatrixXd& A, int nx)
{
    const int N = static_cast<int>(A.rows()), blocks = N / nx;
    for (int c = 0; c < A.cols(); ++c)
        for (int b = 0; b < blocks; ++b) {
            double m = A.col(c).segment(b * nx, nx).mean();
            A.col(c).segment(b * nx, nx).array() -= m;
        }
    for (int r = 0; r < A.rows(); ++r)
        for (int b = 0; b < A.cols() / nx; ++b) {
            double m = A.row(r).segment(b * nx, nx).mean();
            A.row(r).segment(b * nx, nx).array() -= m;
        }
}

void project_rows(MatrixXd& A, int nx)
{
    for (int c = 0; c < A.cols(); ++c)
        for (int b = 0; b < A.rows() / nx; ++b) {
            double m = A.col(c).segment(b * nx, nx).mean();
            A.col(c).segment(b * nx, nx).array() -= m;
        }
}

void project_cols(MatrixXd& A, int nx)
{
    for (int r = 0; r < A.rows(); ++r)
        for (int b = 0; b < A.cols() / nx; ++b) {
            double m = A.row(r).segment(b * nx, nx).mean();
            A.row(r).segment(b * nx, nx).array() -= m;
        }
}

VectorXd to_vec(const Field& f)
{
    return Eigen::Map<const VectorXd>(f.values().data(), static_cast<long>(f.values().size()));
}

double min_density_field(const Field& phi)
{
    return dx_periodic(phi).min() + 1.0;
}

// Quadratic regularizer and the reduced inner systems for one epsilon.
class Regularized {
public:
    Regularized(const Grid& g, double eps) : g_(g), eps_(eps), nx_(g.nx()), nI_((g.nt() - 2) * g.nx())
    {
        K_ = build_k(g);
        MatrixXd KII = MatrixXd::Zero(nI_, nI_);
        const int off = nx_;
        for (int k = 0; k < K_.outerSize(); ++k)
            for (SpMat::InnerIterator it(K_, k); it; ++it) {
                int r = static_cast<int>(it.row()) - off, c = static_cast<int>(it.col()) - off;
                if (r >= 0 && r < nI_ && c >= 0 && c < nI_) KII(r, c) = it.value();
            }
        project_dense(KII, nx_);
        Mu_ = eps * KII;
        shift_ = eps * KII.diagonal().mean();
        for (int b = 0; b < nI_ / nx_; ++b)
            Mu_.block(b * nx_, b * nx_, nx_, nx_).array() += shift_ / nx_;
        llt_.compute(Mu_);
        if (llt_.info() != Eigen::Success) throw Error("inner_phi_solve: regularized system is not positive definite");
    }

    const SpMat& K() const { return K_; }
    const MatrixXd& Mu() const { return Mu_; }
    int nI() const { return nI_; }

    double knorm2(const Field& phi) const
    {
        VectorXd v = to_vec(phi);
        return v.dot(K_ * v);
    }

    double objective(const Field& f1, const Field& phi) const
    {
        double lin = 0.0;
        for (int n = 1; n < g_.nt() - 1; ++n) {
            double w = g_.node_weight(n);
            for (int j = 0; j < nx_; ++j) lin += w * f1(n, j) * phi(n, j);
        }
        return 0.5 * eps_ * knorm2(phi) + lin;
    }

    // gradient of the objective restricted to interior, mean-free directions
    VectorXd reduced_gradient(const Field& f1, const Field& phi) const
    {
        VectorXd Kphi = K_ * to_vec(phi);
        VectorXd gvec(nI_);
        for (int n = 1; n < g_.nt() - 1; ++n) {
            double w = g_.node_weight(n);
            for (int j = 0; j < nx_; ++j)
                gvec[(n - 1) * nx_ + j] = eps_ * Kphi[nid(n, j, nx_)] + w * f1(n, j);
        }
        remove_block_means(gvec, nx_);
        return gvec;
    }

    // unconstrained minimizer with the boundary rows of phi_b
    Field solve(const Field& phi_b, const Field& f1) const
    {
        Field base(g_);
        std::copy(phi_b.row(0).begin(), phi_b.row(0).end(), base.row(0).begin());
        int last = g_.nt() - 1;
        std::copy(phi_b.row(last).begin(), phi_b.row(last).end(), base.row(last).begin());
        VectorXd rhs = -reduced_gradient(f1, base);
        VectorXd u = llt_.solve(rhs);
        remove_block_means(u, nx_);
        Field out = base;
        for (int n = 1; n < last; ++n)
            for (int j = 0; j < nx_; ++j) out(n, j) = u[(n - 1) * nx_ + j];
        return out;
    }


private:
    Grid g_;
    double eps_;
    int nx_, nI_;
    SpMat K_;
    MatrixXd Mu_;
    double shift_ = 0.0;
    Eigen::LLT<MatrixXd> llt_;
};

struct InnerContext {
    const CongestionSpec& spec;
    double eps;
    const Regularized& reg;
    const PotentialPair& interp;  // phi0 of the instance
};

InnerPhiResult inner_phi(const InnerContext& ctx, const Field& start, const Field& f1)
{
    const Grid& g = ctx.spec.grid;
    const double eps = ctx.eps;
    InnerPhiResult res{ctx.reg.solve(ctx.interp.phi, f1), 0.0, ctx.reg.objective(f1, ctx.interp.phi), false, 1};
    if (min_density_field(res.phi) >= eps) {
        res.objective = ctx.reg.objective(f1, res.phi);
        return res;
    }

    // constrained case: primal-dual interior point on the reduced quadratic
    // 1/2 u'Mu u + c'u subject to Dx u >= eps - 1 on interior rows
    res.constrained = true;
    const int nx = g.nx(), nI = ctx.reg.nI();
    const MatrixXd& A = ctx.reg.Mu();
    Field base = ctx.interp.phi;
    for (int n = 1; n < g.nt() - 1; ++n)
        for (double& v : base.row(n)) v = 0.0;
    VectorXd c = ctx.reg.reduced_gradient(f1, base);
    MatrixXd G = MatrixXd::Zero(nI, nI);
    const double hx = 0.5 / g.dx();
    for (int b = 0; b < nI / nx; ++b)
        for (int j = 0; j < nx; ++j) {
            G(b * nx + j, b * nx + (j + 1) % nx) += hx;
            G(b * nx + j, b * nx + (j + nx - 1) % nx) -= hx;
        }
    const VectorXd h = VectorXd::Constant(nI, eps - 1.0);

    VectorXd u(nI);
    for (int n = 1; n < g.nt() - 1; ++n)
        for (int j = 0; j < nx; ++j) u[(n - 1) * nx + j] = start(n, j);
    remove_block_means(u, nx);
    VectorXd s = (G * u - h).cwiseMax(1e-2);
    VectorXd lam = VectorXd::Constant(nI, std::max(1e-2, c.cwiseAbs().maxCoeff()));
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    int it = 0;
    for (; it < ctx.spec.inner_max_iters; ++it) {
        VectorXd rd = A * u + c - G.transpose() * lam;
        VectorXd rp = G * u - s - h;
        double mu = lam.dot(s) / nI;
        double dual_scale = std::max(scale, (A * u).cwiseAbs().maxCoeff());
        if (mu <= ctx.spec.inner_tol * scale && rd.cwiseAbs().maxCoeff() <= 1e-9 * dual_scale &&
            rp.cwiseAbs().maxCoeff() <= 1e-12)
            break;
        VectorXd ratio = lam.cwiseQuotient(s);
        MatrixXd Hm = A + G.transpose() * ratio.asDiagonal() * G;
        VectorXd aff = (VectorXd::Constant(nI, 0.1 * mu) - lam.cwiseProduct(s) - lam.cwiseProduct(rp)).cwiseQuotient(s);
        VectorXd du = Hm.llt().solve(-rd + G.transpose() * aff);
        if (!du.allFinite()) break;
        VectorXd ds = G * du + rp;
        VectorXd dl = (0.1 * mu * VectorXd::Ones(nI) - lam.cwiseProduct(s) - lam.cwiseProduct(ds)).cwiseQuotient(s);
        double step = 1.0;
        for (int i = 0; i < nI; ++i) {
            if (ds[i] < 0.0) step = std::min(step, -0.99 * s[i] / ds[i]);
            if (dl[i] < 0.0) step = std::min(step, -0.99 * lam[i] / dl[i]);
        }
        u += step * du;
        s += step * ds;
        lam += step * dl;
    }
    remove_block_means(u, nx);
    Field x = ctx.interp.phi;
    for (int n = 1; n < g.nt() - 1; ++n)
        for (int j = 0; j < nx; ++j) x(n, j) = u[(n - 1) * nx + j];
    clip_density(x, eps);
    res.objective = ctx.reg.objective(f1, x);
    res.phi = std::move(x);
    res.iterations = it + 1;
    return res;
}

// B q = w q + Laplacian q / dt (Neumann); returns B q
TimeSeries apply_b(const Grid& g, const TimeSeries& q)
{
    const int nt = g.nt();
    TimeSeries r(nt);
    for (int n = 0; n < nt; ++n) {
        double v = g.time_weight(n) * q[n];
        if (n > 0) v += (q[n] - q[n - 1]) / g.dt();
        if (n < nt - 1) v += (q[n] - q[n + 1]) / g.dt();
        r[n] = v;
    }
    return r;
}

double bnorm2(const Grid& g, const TimeSeries& q)
{
    TimeSeries b = apply_b(g, q);
    double s = 0.0;
    for (int n = 0; n < g.nt(); ++n) s += q[n] * b[n];
    return s;
}

PotentialPair apply_s(const InnerContext& ctx, const PotentialPair& pp, bool* constrained = nullptr)
{
    OperatorImage img = apply_F(ctx.spec, pp, ctx.eps * (1.0 - 1e-12), FloorMode::strict);
    InnerPhiResult r = inner_phi(ctx, pp.phi, img.f1);
    if (constrained) *constrained = r.constrained;
    TimeSeries q = solve_tridiagonal(assemble_q_system(ctx.spec.grid, ctx.eps, img.f2));
    return {std::move(r.phi), std::move(q)};
}

// analytic sparse Jacobian blocks of (R1, R2) with respect to (phi, q)
struct Jacobian {
    SpMat J1phi, J1q, J2phi, J2q;
};

Jacobian jacobian(const CongestionSpec& spec, const PotentialPair& pp)
{
    const Grid& g = spec.grid;
    NodeFields f = node_fields(spec, pp, 0.0, FloorMode::strict, nullptr);
    const double al = spec.alpha, mu = spec.mu;
    const long N = static_cast<long>(g.size());
    VectorXd az(N), am(N), hz(N), hm(N);
    for (long i = 0; i < N; ++i) {
        double z = f.z.values()[i], m = f.m.values()[i];
        double ma2 = std::pow(m, al - 2.0);
        az[i] = ma2 * m;
        am[i] = (al - 1.0) * z * ma2;
        hz[i] = -z * ma2;
        hm[i] = mu * std::pow(m, mu - 1.0) - 0.5 * (al - 2.0) * z * z * ma2 / m;
    }
    VectorXd w = node_weight_vector(g);
    SpMat Dt = build_dt(g), Dx = build_dx(g), E = build_e(g);
    SpMat DtT = Dt.transpose(), DxT = Dx.transpose(), ET = E.transpose();
    VectorXd waz = w.cwiseProduct(az), wam = w.cwiseProduct(am), whz = w.cwiseProduct(hz), whm = w.cwiseProduct(hm);
    SpMat Adt = waz.asDiagonal() * Dt, Adx = wam.asDiagonal() * Dx;
    SpMat Hdt = whz.asDiagonal() * Dt, Hdx = whm.asDiagonal() * Dx;
    SpMat AE = waz.asDiagonal() * E, HE = whz.asDiagonal() * E;
    Jacobian J;
    J.J1phi = DtT * (Adt + Adx) + DxT * (Hdt + Hdx);
    J.J1q = DtT * AE + DxT * HE;
    J.J2phi = ET * (Adt + Adx);
    J.J2q = ET * AE;
    return J;
}

// Newton correction delta = (M + G)^{-1} M r in the reduced (interior, mean-free) variables
bool newton_direction(const InnerContext& ctx, const PotentialPair& pp, const PotentialPair& s, Field& dphi,
                      TimeSeries& dq)
{
    const Grid& g = ctx.spec.grid;
    const int nx = g.nx(), nt = g.nt(), nI = ctx.reg.nI(), n = nI + nt;
    Jacobian J = jacobian(ctx.spec, pp);
    MatrixXd A = MatrixXd::Zero(n, n);

    MatrixXd J11 = MatrixXd(J.J1phi).block(nx, nx, nI, nI);
    project_dense(J11, nx);
    A.topLeftCorner(nI, nI) = ctx.reg.Mu() + J11;
    MatrixXd J12 = MatrixXd(J.J1q).middleRows(nx, nI);
    project_rows(J12, nx);
    A.topRightCorner(nI, nt) = J12;
    MatrixXd J21 = MatrixXd(J.J2phi).middleCols(nx, nI);
    project_cols(J21, nx);
    A.bottomLeftCorner(nt, nI) = J21;
    MatrixXd Bq = MatrixXd::Zero(nt, nt);
    for (int k = 0; k < nt; ++k) {
        TimeSeries e(nt, 0.0);
        e[k] = 1.0;
        TimeSeries col = apply_b(g, e);
        for (int r = 0; r < nt; ++r) Bq(r, k) = ctx.eps * col[r];
    }
    A.bottomRightCorner(nt, nt) = Bq + MatrixXd(J.J2q);

    VectorXd ru(nI), rq(nt);
    for (int t = 1; t < nt - 1; ++t)
        for (int j = 0; j < nx; ++j) ru[(t - 1) * nx + j] = s.phi(t, j) - pp.phi(t, j);
    remove_block_means(ru, nx);
    for (int t = 0; t < nt; ++t) rq[t] = s.q[t] - pp.q[t];
    VectorXd rhs(n);
    rhs.head(nI) = ctx.reg.Mu() * ru;
    rhs.tail(nt) = Bq * rq;

    Eigen::PartialPivLU<MatrixXd> lu(A);
    VectorXd d = lu.solve(rhs);
    if (!d.allFinite()) return false;
    VectorXd du = d.head(nI);
    remove_block_means(du, nx);
    dphi = Field(g);
    for (int t = 1; t < nt - 1; ++t)
        for (int j = 0; j < nx; ++j) dphi(t, j) = du[(t - 1) * nx + j];
    dq.assign(nt, 0.0);
    for (int t = 0; t < nt; ++t) dq[t] = d[nI + t];
    return true;
}

double sup_change(const PotentialPair& a, const PotentialPair& b)
{
    double r = (a.phi - b.phi).max_abs();
    for (std::size_t n = 0; n < a.q.size(); ++n) r = std::max(r, std::abs(a.q[n] - b.q[n]));
    return r;
}

PotentialPair combine(const PotentialPair& x, double s, const Field& dphi, const TimeSeries& dq)
{
    PotentialPair y = x;
    auto& v = y.phi.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * dphi.values()[i];
    for (std::size_t n = 0; n < y.q.size(); ++n) y.q[n] += s * dq[n];
    return y;
}

// Young: a x^s <= x^{mu+1}/4 + young(a, s) for x >= 0
double young(double a, double s, double mu)
{
    if (a <= 0.0) return 0.0;
    double p = (mu + 1.0) / s, pp = p / (p - 1.0);
    double theta = std::pow(p / 4.0, 1.0 / p);
    return std::pow(a / theta, pp) / pp;
}

LevelRecord level_diagnostics(const CongestionSpec& spec, double eps, const Regularized& reg,
                              const PotentialPair& pp, const PotentialPair& interp)
{
    const Grid& g = spec.grid;
    LevelRecord r{};
    r.eps = eps;
    NodeFields f = node_fields(spec, pp, 0.0, FloorMode::floor, nullptr);
    Field m0 = dx_periodic(interp.phi), phit0 = dt_interior(interp.phi);
    double kin = 0, kin0 = 0, mom = 0, rhs = 0;
    for (int n = 0; n < g.nt(); ++n) {
        double w = g.node_weight(n);
        for (int j = 0; j < g.nx(); ++j) {
            double z = f.z(n, j), m = f.m(n, j), mz = m0(n, j) + 1.0, pt = phit0(n, j);
            kin += w * z * z * std::pow(m, spec.alpha - 1.0);
            kin0 += w * z * z * std::pow(m, spec.alpha - 2.0) * mz;
            mom += w * std::pow(m, spec.mu + 1.0);
            rhs += w * (young(pt * pt / mz, spec.alpha, spec.mu) + young(mz, spec.mu, spec.mu));
        }
    }
    double kphi = reg.knorm2(pp.phi), bq = bnorm2(g, pp.q);
    r.reg_energy = eps * (kphi + bq);
    r.moment = mom;
    r.kinetic = kin;
    r.energy_lhs = 0.5 * eps * kphi + eps * bq + 0.5 * kin + 0.25 * kin0 + 0.5 * mom;
    r.bound = 0.5 * eps * reg.knorm2(interp.phi) + rhs;
    return r;
}

}  // namespace

double CongestionSpec::kappa() const
{
    return std::min(2.0 * (mu + 1.0) / (mu + 2.0 - alpha), mu + 1.0);
}

double CongestionSpec::kappa_alt() const
{
    return 2.0 * (mu + 1.0) / (mu + 3.0 - alpha);
}

double CongestionSpec::k0() const
{
    return std::min(*std::min_element(m0.begin(), m0.end()), *std::min_element(mT.begin(), mT.end()));
}

CongestionSpec congestion_sine_instance(int nt, int nx, double alpha, double mu, double amp)
{
    Grid g(nt, nx, 1.0);
    CongestionSpec s{g};
    s.alpha = alpha;
    s.mu = mu;
    s.m0.resize(nx);
    s.mT.assign(nx, 1.0);
    for (int j = 0; j < nx; ++j) s.m0[j] = 1.0 + amp * std::sin(2.0 * std::numbers::pi * g.x(j));
    return s;
}

PotentialPair initial_guess(const CongestionSpec& spec)
{
    auto [a, b] = boundary_slices(spec.grid, spec.m0, spec.mT);
    return interpolant(spec.grid, a, b);
}

std::vector<double> default_schedule(const CongestionSpec& spec)
{
    double start = std::min({spec.k0(), 0.1, min_density(initial_guess(spec))});
    std::vector<double> s;
    for (double e = start; e >= spec.eps_min * (1.0 - 1e-12); e *= spec.eps_factor) s.push_back(e);
    if (s.empty() || s.back() > spec.eps_min * (1.0 + 1e-12)) s.push_back(spec.eps_min);
    return s;
}

void validate_spec(const CongestionSpec& spec)
{
    const int nx = spec.grid.nx();
    auto range = [](bool ok, const std::string& what) {
        if (!ok) throw DomainError(what);
    };
    range(spec.alpha > 0.0 && spec.alpha < 2.0, "alpha must lie in (0,2)");
    range(spec.mu > 0.0, "mu must be positive");
    range(spec.alpha < spec.mu + 1.0, "alpha must be < mu + 1");
    if (static_cast<int>(spec.m0.size()) != nx || static_cast<int>(spec.mT.size()) != nx)
        throw ShapeError("m0/mT: expected nx samples");
    range(spec.k0() > 0.0, "m0, mT must be positive");
    for (const Slice* m : {&spec.m0, &spec.mT}) {
        double mass = 0.0;
        for (double v : *m) mass += v;
        range(std::abs(mass * spec.grid.dx() - 1.0) <= 1e-8, "m0, mT must integrate to 1");
    }
    range(spec.damping > 0.0 && spec.damping <= 1.0, "damping must lie in (0,1]");
    range(spec.max_outer >= 1, "max_outer must be >= 1");
    range(spec.tol_fp > 0.0, "tol_fp must be positive");
    range(spec.eps_factor > 0.0 && spec.eps_factor < 1.0, "eps_factor must lie in (0,1)");
    range(spec.eps_min > 0.0, "eps_min must be positive");
    double prev = std::numeric_limits<double>::infinity();
    for (double e : spec.eps_schedule) {
        range(e > 0.0 && e < prev, "eps schedule must be positive and strictly decreasing");
        prev = e;
    }
    if (!spec.eps_schedule.empty())
        range(spec.eps_schedule.front() <= spec.k0(), "eps schedule must start at or below k0");
}

OperatorImage apply_F(const CongestionSpec& spec, const PotentialPair& pp, double floor, FloorMode mode)
{
    const Grid& g = spec.grid;
    if (!(pp.phi.grid() == g) || static_cast<int>(pp.q.size()) != g.nt()) throw ShapeError("apply_F: shape mismatch");
    OperatorImage img{Field(g), TimeSeries(g.nt(), 0.0), 0};
    NodeFields f = node_fields(spec, pp, floor, mode, &img.floored);
    Field R1(g);
    TimeSeries R2;
    weighted_residual(f, R1, R2);
    for (int n = 1; n < g.nt() - 1; ++n) {
        double w = g.node_weight(n);
        for (int j = 0; j < g.nx(); ++j) img.f1(n, j) = R1(n, j) / w;
    }
    for (int n = 0; n < g.nt(); ++n) img.f2[n] = R2[n] / g.time_weight(n);
    return img;
}

OperatorImage apply_F_derivative(const CongestionSpec& spec, const PotentialPair& pp, const Field& dphi,
                                 const TimeSeries& dq)
{
    const Grid& g = spec.grid;
    Jacobian J = jacobian(spec, pp);
    VectorXd vp = to_vec(dphi);
    VectorXd vq = Eigen::Map<const VectorXd>(dq.data(), static_cast<long>(dq.size()));
    VectorXd r1 = J.J1phi * vp + J.J1q * vq;
    VectorXd r2 = J.J2phi * vp + J.J2q * vq;
    OperatorImage img{Field(g), TimeSeries(g.nt(), 0.0), 0};
    for (int n = 1; n < g.nt() - 1; ++n)
        for (int j = 0; j < g.nx(); ++j) img.f1(n, j) = r1[nid(n, j, g.nx())] / g.node_weight(n);
    for (int n = 0; n < g.nt(); ++n) img.f2[n] = r2[n] / g.time_weight(n);
    return img;
}

double monotonicity_gap(const CongestionSpec& spec, const PotentialPair& a, const PotentialPair& b)
{
    const Grid& g = spec.grid;
    OperatorImage fa = apply_F(spec, a), fb = apply_F(spec, b);
    double s = 0.0;
    for (int n = 1; n < g.nt() - 1; ++n) {
        double w = g.node_weight(n), row = 0.0;
        for (int j = 0; j < g.nx(); ++j) row += (fa.f1(n, j) - fb.f1(n, j)) * (a.phi(n, j) - b.phi(n, j));
        s += w * row;
    }
    for (int n = 0; n < g.nt(); ++n) s += g.time_weight(n) * (fa.f2[n] - fb.f2[n]) * (a.q[n] - b.q[n]);
    return s;
}

double pointwise_certificate(double alpha, double z1, double m1, double z2, double m2)
{
    if (!(m1 > 0.0) || !(m2 > 0.0)) throw DomainError("pointwise_certificate: densities must be positive");
    double a1 = z1 * std::pow(m1, alpha - 1.0), a2 = z2 * std::pow(m2, alpha - 1.0);
    double b1 = z1 * z1 * std::pow(m1, alpha - 2.0), b2 = z2 * z2 * std::pow(m2, alpha - 2.0);
    return (a1 - a2) * (z1 - z2) - 0.5 * (b1 - b2) * (m1 - m2);
}

double pointwise_certificate_expanded(double alpha, double z1, double m1, double z2, double m2)
{
    if (!(m1 > 0.0) || !(m2 > 0.0)) throw DomainError("pointwise_certificate: densities must be positive");
    double p1 = std::pow(m1, alpha - 1.0), p2 = std::pow(m2, alpha - 1.0);
    return (0.5 + m2 / (2.0 * m1)) * z1 * z1 * p1 + (0.5 + m1 / (2.0 * m2)) * z2 * z2 * p2 - z1 * z2 * p1 -
           z2 * z1 * p2;
}

double weak_pairing(const CongestionSpec& spec, const PotentialPair& test, const PotentialPair& cand)
{
    const Grid& g = spec.grid;
    OperatorImage img = apply_F(spec, test);
    double s = 0.0;
    for (int n = 1; n < g.nt() - 1; ++n) {
        double w = g.node_weight(n), row = 0.0;
        for (int j = 0; j < g.nx(); ++j) row += img.f1(n, j) * (test.phi(n, j) - cand.phi(n, j));
        s += w * row;
    }
    for (int n = 0; n < g.nt(); ++n) s += g.time_weight(n) * img.f2[n] * (test.q[n] - cand.q[n]);
    return s;
}

CertificateResult weak_certificate(const CongestionSpec& spec, const PotentialPair& cand, int tests,
                                   std::uint64_t seed)
{
    PotentialPair base = initial_guess(spec);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.05, 1.0);
    CertificateResult r{std::numeric_limits<double>::infinity(), tests};
    for (int k = 0; k < tests; ++k) {
        PotentialPair psi = perturb_feasible(base, rng(), U(rng));
        r.min_pairing = std::min(r.min_pairing, weak_pairing(spec, psi, cand));
    }
    return r;
}

double inner_phi_objective(const CongestionSpec& spec, double eps, const Field& f1, const Field& phi)
{
    Regularized reg(spec.grid, eps);
    return reg.objective(f1, phi);
}

InnerPhiResult inner_phi_solve(const CongestionSpec& spec, double eps, const PotentialPair& pp0)
{
    return inner_phi_solve(spec, eps, pp0, pp0.phi);
}

InnerPhiResult inner_phi_solve(const CongestionSpec& spec, double eps, const PotentialPair& pp0,
                               const Field& start)
{
    if (!(eps > 0.0)) throw DomainError("inner_phi_solve: eps must be positive");
    if (min_density(pp0) < eps * (1.0 - 1e-12)) throw DomainError("inner_phi_solve: infeasible warm start");
    Regularized reg(spec.grid, eps);
    PotentialPair interp = initial_guess(spec);
    OperatorImage img = apply_F(spec, pp0, eps * (1.0 - 1e-12));
    return inner_phi({spec, eps, reg, interp}, start, img.f1);
}

Tridiagonal assemble_q_system(const Grid& g, double eps, const TimeSeries& f2)
{
    const int nt = g.nt();
    if (static_cast<int>(f2.size()) != nt) throw ShapeError("assemble_q_system: length differs from nt");
    if (!(eps > 0.0)) throw DomainError("assemble_q_system: eps must be positive");
    Tridiagonal t{std::vector<double>(nt, 0.0), std::vector<double>(nt, 0.0), std::vector<double>(nt, 0.0),
                  std::vector<double>(nt, 0.0)};
    const double c = eps / g.dt();
    for (int n = 0; n < nt; ++n) {
        t.diag[n] = eps * g.time_weight(n);
        if (n > 0) {
            t.diag[n] += c;
            t.sub[n] = -c;
        }
        if (n < nt - 1) {
            t.diag[n] += c;
            t.sup[n] = -c;
        }
        t.rhs[n] = -g.time_weight(n) * f2[n];
    }
    return t;
}

TimeSeries solve_tridiagonal(const Tridiagonal& t)
{
    const std::size_t n = t.diag.size();
    std::vector<double> c(n), d(n);
    double den = t.diag[0];
    if (den == 0.0) throw Error("tridiagonal solve: singular system");
    c[0] = t.sup[0] / den;
    d[0] = t.rhs[0] / den;
    for (std::size_t i = 1; i < n; ++i) {
        den = t.diag[i] - t.sub[i] * c[i - 1];
        if (den == 0.0) throw Error("tridiagonal solve: singular system");
        c[i] = t.sup[i] / den;
        d[i] = (t.rhs[i] - t.sub[i] * d[i - 1]) / den;
    }
    TimeSeries x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

TimeSeries inner_q_solve(const CongestionSpec& spec, double eps, const PotentialPair& pp0)
{
    OperatorImage img = apply_F(spec, pp0, 0.0);
    return solve_tridiagonal(assemble_q_system(spec.grid, eps, img.f2));
}

PotentialPair fixed_point_map(const CongestionSpec& spec, double eps, const PotentialPair& pp)
{
    Regularized reg(spec.grid, eps);
    PotentialPair interp = initial_guess(spec);
    return apply_s({spec, eps, reg, interp}, pp);
}

CongestionReport solve_congestion(const CongestionSpec& spec)
{
    return solve_congestion(spec, initial_guess(spec));
}

CongestionReport solve_congestion(const CongestionSpec& spec, PotentialPair x)
{
    validate_spec(spec);
    auto t0 = std::chrono::steady_clock::now();
    const Grid& g = spec.grid;
    std::vector<double> schedule = spec.eps_schedule.empty() ? default_schedule(spec) : spec.eps_schedule;
    PotentialPair interp = initial_guess(spec);
    CongestionReport rep{x};
    rep.converged = true;
    PotentialPair prev_level = x;

    for (double eps : schedule) {
        if (min_density(x) < eps) {
            rep.converged = false;
            rep.message = "warm start infeasible at eps level";
            break;
        }
        Regularized reg(g, eps);
        InnerContext ctx{spec, eps, reg, interp};
        double best = std::numeric_limits<double>::infinity();
        int since_best = 0, it = 0;
        bool done = false;
        double rn = 0.0;
        for (; it < spec.max_outer; ++it) {
            PotentialPair s = apply_s(ctx, x);
            rn = sup_change(s, x);
            if (rn <= spec.tol_fp) {
                rep.trace.push_back({eps, it, rn, "converged", 0.0});
                done = true;
                break;
            }
            if (rn < best * (1.0 - 1e-3)) {
                best = rn;
                since_best = 0;
            } else if (++since_best >= spec.stagnation_window) {
                rep.trace.push_back({eps, it, rn, "stagnated", 0.0});
                break;
            }

            bool stepped = false;
            if (spec.method == OuterMethod::newton) {
                Field dphi(g);
                TimeSeries dq;
                if (newton_direction(ctx, x, s, dphi, dq)) {
                    double lam = 1.0;
                    for (int k = 0; k < 12 && !stepped; ++k, lam *= 0.5) {
                        PotentialPair y = combine(x, lam, dphi, dq);
                        if (min_density(y) < eps) continue;
                        PotentialPair sy = apply_s(ctx, y);
                        if (sup_change(sy, y) < (1.0 - 1e-4 * lam) * rn) {
                            rep.trace.push_back({eps, it, rn, "newton", lam});
                            x = std::move(y);
                            stepped = true;
                        }
                    }
                }
            }
            if (!stepped) {
                rep.trace.push_back({eps, it, rn, "picard", spec.damping});
                for (std::size_t i = 0; i < x.phi.values().size(); ++i)
                    x.phi.values()[i] += spec.damping * (s.phi.values()[i] - x.phi.values()[i]);
                for (int n = 0; n < g.nt(); ++n) x.q[n] += spec.damping * (s.q[n] - x.q[n]);
            }
        }
        if (!done && it >= spec.max_outer) rep.trace.push_back({eps, it, rn, "iteration cap", 0.0});
        LevelRecord lr = level_diagnostics(spec, eps, reg, x, interp);
        lr.iterations = it;
        lr.residual = rn;
        lr.converged = done;
        lr.change = sup_change(x, prev_level);
        rep.levels.push_back(lr);
        prev_level = x;
        if (!done) {
            rep.converged = false;
            std::ostringstream os;
            os << "fixed-point iteration did not converge at eps = " << eps << " (residual " << rn << ")";
            rep.message = os.str();
            break;
        }
    }
    rep.solution = std::move(x);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

MFGSolution recover_congestion(const CongestionSpec& spec, const PotentialPair& pp)
{
    const Grid& g = spec.grid;
    NodeFields f = node_fields(spec, pp, 0.0, FloorMode::strict, nullptr);
    MFGSolution s{Field(g), f.m, TimeSeries(g.nt()), TimeSeries(g.nt()), Field(g), Field(g), TimeSeries(g.nt())};
    for (int n = 0; n < g.nt(); ++n) {
        auto a = f.a.row(n);
        Slice ux(a.begin(), a.end());
        double acc = 0.0;
        for (double v : ux) acc += v;
        s.period_defect[n] = acc * g.dx();
        Slice u = antiderivative_x(ux, g.dx());
        std::copy(u.begin(), u.end(), s.u.row(n).begin());
    }
    Field Ux = dx_periodic(s.u), Ut = dt_interior(s.u);
    Field E(g), flux(g);
    for (int n = 0; n < g.nt(); ++n)
        for (int j = 0; j < g.nx(); ++j) {
            double m = s.m(n, j), ux = Ux(n, j);
            E(n, j) = -Ut(n, j) + ux * ux / (2.0 * std::pow(m, spec.alpha)) - std::pow(m, spec.mu);
            flux(n, j) = ux * std::pow(m, 1.0 - spec.alpha);
        }
    for (int n = 0; n < g.nt(); ++n) s.c[n] = slice_mean(E.row(n));
    s.theta = antiderivative_t(s.c, g.dt());
    for (int n = 1; n < g.nt() - 1; ++n)
        for (int j = 0; j < g.nx(); ++j) s.residual_hj(n, j) = E(n, j) - s.c[n];
    s.residual_fp = dt_interior(s.m);
    s.residual_fp -= dx_periodic(flux);
    return s;
}

}  // namespace mfgp
