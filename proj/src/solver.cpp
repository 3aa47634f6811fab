#include "dnode/solver.hpp"

#include <cassert>
#include <cmath>

#include "dnode/errors.hpp"
#include "dnode/kernels.hpp"

namespace dnode {
namespace {

void check_finite(const Vec& z) {
    const double probe = kernels::active().sumsq(z.data(), z.size());
    if (!std::isfinite(probe)) throw NumericsError("solver: non-finite state");
}

// ||eps^T W||, identical at every evaluation point of a linear field.
double jacobian_probe(const ComponentParams& params, std::span<const double> eps) {
    if (eps.empty() || !params.has_flow()) return 0.0;
    assert(eps.size() == params.w.rows());
    Vec v(params.w.cols());
    kernels::active().matvec_t(v.data(), params.w.data(), eps.data(), params.w.rows(),
                               params.w.cols());
    return std::sqrt(kernels::active().sumsq(v.data(), v.size()));
}

} // namespace

Vec ode_fn(const ComponentParams& params, const Vec& z) {
    assert(params.has_flow() && z.size() == params.w.cols());
    return matvec(params.w, z);
}

SolveResult euler_integrate(const ComponentParams& params, const Vec& z0, int n_steps,
                            std::span<const double> eps) {
    if (n_steps < 1) throw NumericsError("euler_integrate: n_steps must be >= 1");
    SolveResult res;
    res.z = z0;
    if (!params.has_flow()) return res;
    const auto& k = kernels::active();
    const double s = 1.0 / static_cast<double>(n_steps);
    Vec f(z0.size());
    double kinetic = 0.0;
    for (int step = 0; step < n_steps; ++step) {
        k.matvec(f.data(), params.w.data(), res.z.data(), params.w.rows(), params.w.cols());
        kinetic += k.sumsq(f.data(), f.size());
        k.axpy(res.z.data(), s, f.data(), f.size());
        check_finite(res.z);
    }
    res.stats.kinetic = kinetic / static_cast<double>(n_steps);
    res.stats.jacobian = jacobian_probe(params, eps);
    return res;
}

SolveResult rk4_integrate(const ComponentParams& params, const Vec& z0, int n_steps,
                          std::span<const double> eps) {
    if (n_steps < 1) throw NumericsError("rk4_integrate: n_steps must be >= 1");
    SolveResult res;
    res.z = z0;
    if (!params.has_flow()) return res;
    const auto& k = kernels::active();
    const std::size_t n = z0.size();
    const double s = 1.0 / static_cast<double>(n_steps);
    Vec f1(n), f2(n), f3(n), f4(n), u(n);
    double kinetic = 0.0;
    for (int step = 0; step < n_steps; ++step) {
        k.matvec(f1.data(), params.w.data(), res.z.data(), n, n);
        u = res.z;
        k.axpy(u.data(), s / 2.0, f1.data(), n);
        k.matvec(f2.data(), params.w.data(), u.data(), n, n);
        u = res.z;
        k.axpy(u.data(), s / 2.0, f2.data(), n);
        k.matvec(f3.data(), params.w.data(), u.data(), n, n);
        u = res.z;
        k.axpy(u.data(), s, f3.data(), n);
        k.matvec(f4.data(), params.w.data(), u.data(), n, n);

        kinetic += k.sumsq(f1.data(), n) + k.sumsq(f2.data(), n) + k.sumsq(f3.data(), n) +
                   k.sumsq(f4.data(), n);
        k.axpy(res.z.data(), s / 6.0, f1.data(), n);
        k.axpy(res.z.data(), s / 3.0, f2.data(), n);
        k.axpy(res.z.data(), s / 3.0, f3.data(), n);
        k.axpy(res.z.data(), s / 6.0, f4.data(), n);
        check_finite(res.z);
    }
    res.stats.kinetic = kinetic / static_cast<double>(4 * n_steps);
    res.stats.jacobian = jacobian_probe(params, eps);
    return res;
}

Vec decode(const ComponentParams& params, const Vec& z) {
    assert(z.size() == params.dec_w.cols());
    Vec out = params.dec_b;
    const auto& k = kernels::active();
    Vec tmp(params.dec_w.rows());
    k.matvec(tmp.data(), params.dec_w.data(), z.data(), params.dec_w.rows(),
             params.dec_w.cols());
    k.axpy(out.data(), 1.0, tmp.data(), tmp.size());
    return out;
}

ComponentForward forward_component(const ComponentParams& params, const Matrix& component,
                                   const SolverConfig& solver, std::span<const double> eps) {
    ComponentForward out;
    out.pred = Matrix(params.dec_w.rows(), component.cols());
    for (std::size_t j = 0; j < component.cols(); ++j) {
        const Vec z0 = component.column(j);
        SolveResult r;
        if (!params.has_flow()) {
            r.z = z0;
        } else if (solver.method == SolverMethod::Euler) {
            r = euler_integrate(params, z0, solver.n_steps, eps);
        } else {
            r = rk4_integrate(params, z0, solver.n_steps, eps);
        }
        out.stats += r.stats;
        out.pred.set_column(j, decode(params, r.z));
    }
    return out;
}

} // namespace dnode
