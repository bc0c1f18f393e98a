#include "compca/prox.hpp"

#include <unsupported/Eigen/Polynomials>

#include <cmath>
#include <limits>
#include <vector>

namespace compca {

namespace {

void check_prox_args(double alpha, double k)
{
    if(!(alpha > 0.0) || !std::isfinite(alpha))
        throw InputError("prox: alpha must be positive");
    if(!(k > 0.0) || !std::isfinite(k))
        throw InputError("prox: beta + rho must be positive");
}

// Stationary points of h for q in (0, 1): k x + alpha q x^(q-1) = bnorm.
// With x = z^2 (q = 1/2):   k z^3 - bnorm z + alpha/2   = 0
// With x = z^3 (q = 2/3):   k z^4 - bnorm z + 2 alpha/3 = 0
std::vector<double> stationary_magnitudes(double bnorm, Penalty q, double alpha, double k)
{
    Eigen::VectorXd coeffs;
    int power = 0;
    if(q == Penalty::LHalf)
    {
        coeffs.resize(4);
        coeffs << alpha / 2.0, -bnorm, 0.0, k;
        power = 2;
    } else {
        coeffs.resize(5);
        coeffs << 2.0 * alpha / 3.0, -bnorm, 0.0, 0.0, k;
        power = 3;
    }

    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);

    const double qe = penalty_exponent(q);
    const auto residual = [&](double x) { return k * x + alpha * qe * std::pow(x, qe - 1.0) - bnorm; };
    const auto slope = [&](double x) { return k + alpha * qe * (qe - 1.0) * std::pow(x, qe - 2.0); };

    std::vector<double> out;
    for(const auto& root : solver.roots())
    {
        const double z = root.real();
        // Near-double roots come back with small spurious imaginary parts, so
        // the filter is loose. Every candidate is scored by h anyway.
        if(z <= 0.0 || std::abs(root.imag()) > 1e-6 * (1.0 + std::abs(z)))
            continue;
        double x = std::pow(z, power);
        // Newton polish on the stationarity equation in x.
        for(int it = 0; it < 8; it++)
        {
            const double s = slope(x);
            if(!(s > 0.0))
                break;
            const double step = residual(x) / s;
            const double next = x - step;
            if(!(next > 0.0) || !std::isfinite(next))
                break;
            x = next;
            if(std::abs(step) <= 1e-16 * x)
                break;
        }
        out.push_back(x);
    }
    return out;
}

}  // namespace

double prox_magnitude_objective(double x, double bnorm, Penalty q, double alpha, double k)
{
    double penalty = 0.0;
    if(x != 0.0)
        penalty = (q == Penalty::L0) ? alpha : alpha * std::pow(x, penalty_exponent(q));
    return 0.5 * k * x * x + penalty - bnorm * x;
}

double prox_magnitude(double bnorm, Penalty q, double alpha, double k)
{
    check_prox_args(alpha, k);
    if(!(bnorm > 0.0))
        return 0.0;

    switch(q)
    {
        case Penalty::L1:
            return std::max(bnorm - alpha, 0.0) / k;
        case Penalty::L0:
            // strict inequality: the boundary case returns zero
            return (bnorm * bnorm > 2.0 * alpha * k) ? bnorm / k : 0.0;
        case Penalty::LHalf:
        case Penalty::LTwoThirds:
            break;
    }

    double best_x = 0.0;
    double best_f = 0.0;
    for(double x : stationary_magnitudes(bnorm, q, alpha, k))
    {
        const double f = prox_magnitude_objective(x, bnorm, q, alpha, k);
        if(f < best_f || (f == best_f && x < best_x))
        {
            best_f = f;
            best_x = x;
        }
    }
    return best_x;
}

double prox_row_objective(const VectorXd& v, const VectorXd& b, Penalty q, double alpha, double k)
{
    const double vn = v.norm();
    double penalty = 0.0;
    if(vn != 0.0)
        penalty = (q == Penalty::L0) ? alpha : alpha * std::pow(vn, penalty_exponent(q));
    return 0.5 * k * v.squaredNorm() + penalty + v.dot(b);
}

VectorXd prox_row(const VectorXd& b, Penalty q, double alpha, double beta, double rho)
{
    const double k = beta + rho;
    const double bnorm = b.norm();
    const double x = prox_magnitude(bnorm, q, alpha, k);
    if(x == 0.0)
        return VectorXd::Zero(b.size());
    return (-x / bnorm) * b;
}

double prox_scalar(double b, Penalty q, double alpha, double beta, double rho)
{
    const double x = prox_magnitude(std::abs(b), q, alpha, beta + rho);
    if(x == 0.0)
        return 0.0;
    return b > 0.0 ? -x : x;
}

}  // namespace compca
