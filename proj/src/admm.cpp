#include "compca/admm.hpp"

#include "compca/linalg.hpp"
#include "compca/prox.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace compca {

void SolverConfig::validate() const
{
    if(!(alpha > 0.0) || !std::isfinite(alpha))
        throw InputError("solver: alpha must be positive");
    if(beta && !(*beta > 0.0))
        throw InputError("solver: beta must be positive");
    if(rho && !(*rho > 0.0))
        throw InputError("solver: rho must be positive");
    if(!(mu > 0.0))
        throw InputError("solver: mu must be positive");
    if(max_iter < 1)
        throw InputError("solver: max_iter must be at least 1");
    if(!(tol > 0.0))
        throw InputError("solver: tol must be positive");
}

Hyperparameters default_hyperparameters(double spectral_norm)
{
    if(!(spectral_norm > 0.0) || !std::isfinite(spectral_norm))
        throw InputError("default_hyperparameters: covariance has zero (or non-finite) spectral norm");
    return Hyperparameters{5.8 * spectral_norm, 6.14 * spectral_norm, 1000.0};
}

Hyperparameters default_hyperparameters(const MatrixXd& cov)
{
    check_symmetric(cov, "covariance");
    return default_hyperparameters(spectral_norm(cov));
}

PreparedCovariance prepare_covariance(MatrixXd cov, Index d)
{
    if(d < 1 || d >= cov.rows())
        throw InputError("subspace dimension d must satisfy 1 <= d < p");
    const auto eig = spectral_decomposition(cov);
    const auto lead = leading_subspace(eig, d);
    PreparedCovariance out;
    out.init = lead.basis;
    out.spectral_norm = eig.eigenvalues.cwiseAbs().maxCoeff();
    out.degenerate_gap = lead.degenerate_gap;
    out.cov = std::move(cov);
    return out;
}

MatrixXd procrustes_update(const MatrixXd& a)
{
    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().transpose();
}

VectorXd column_alpha_vector(double alpha, const MatrixXd& v0)
{
    VectorXd out(v0.cols());
    for(Index j = 0; j < v0.cols(); j++)
    {
        const double l1 = v0.col(j).lpNorm<1>();
        if(!(l1 > 0.0))
            throw InputError("column_alpha_vector: column " + std::to_string(j) + " of the initial basis is zero");
        out(j) = alpha / l1;
    }
    return out;
}

namespace {

// V-update for row sparsity: one group prox per row of B.
void update_rows(const MatrixXd& b, Penalty q, double alpha, double k, MatrixXd& v)
{
    for(Index i = 0; i < b.rows(); i++)
    {
        const double bnorm = b.row(i).norm();
        const double x = prox_magnitude(bnorm, q, alpha, k);
        if(x == 0.0)
            v.row(i).setZero();
        else
            v.row(i) = (-x / bnorm) * b.row(i);
    }
}

// V-update for column sparsity: entrywise prox with per-column weights.
void update_entries(const MatrixXd& b, Penalty q, const VectorXd& alphas, double k, MatrixXd& v)
{
    for(Index j = 0; j < b.cols(); j++)
    {
        for(Index i = 0; i < b.rows(); i++)
        {
            const double bij = b(i, j);
            const double x = prox_magnitude(std::abs(bij), q, alphas(j), k);
            v(i, j) = (x == 0.0) ? 0.0 : (bij > 0.0 ? -x : x);
        }
    }
}

}  // namespace

SubspaceFit admm_fit(const PreparedCovariance& prepared, const SolverConfig& cfg)
{
    cfg.validate();
    const MatrixXd& s = prepared.cov;
    const Index p = prepared.dim();
    const Index d = prepared.rank();
    if(d < 1 || d >= p)
        throw InputError("subspace dimension d must satisfy 1 <= d < p");

    Hyperparameters hp;
    if(!cfg.beta || !cfg.rho)
        hp = default_hyperparameters(prepared.spectral_norm);
    if(cfg.beta)
        hp.beta = *cfg.beta;
    if(cfg.rho)
        hp.rho = *cfg.rho;
    hp.mu = cfg.mu;
    const double beta = hp.beta;
    const double rho = hp.rho;
    const double mu = hp.mu;
    const double k = beta + rho;

    VectorXd alphas;
    if(cfg.mode == SparsityMode::Column)
        alphas = column_alpha_vector(cfg.alpha, prepared.init);

    AdmmState st;
    st.U = prepared.init;
    st.V = prepared.init;
    st.Y = MatrixXd::Zero(p, d);
    st.Lambda = MatrixXd::Zero(p, d);

    MatrixXd a(p, d), b(p, d), u_next(p, d), v_next(p, d);
    double first_residual = 0.0;
    bool converged = false;

    for(int it = 0; it < cfg.max_iter; it++)
    {
        // U-update: linearized objective plus proximal term, solved by Procrustes.
        a.noalias() = s * st.U;
        a += 0.5 * (st.Lambda + beta * st.V + beta * st.Y + rho * st.U);
        u_next = procrustes_update(a);

        // V-update: decoupled proximal problems on B = Lambda + beta (Y - U) - rho V.
        b = st.Lambda + beta * (st.Y - u_next) - rho * st.V;
        if(cfg.mode == SparsityMode::Row)
            update_rows(b, cfg.q, cfg.alpha, k, v_next);
        else
            update_entries(b, cfg.q, alphas, k, v_next);

        // Y-update: exact minimiser of the augmented Lagrangian in Y.
        st.Y = (beta * (u_next - v_next) - st.Lambda) / (mu + beta);
        st.Lambda += beta * (v_next - u_next + st.Y);

        st.step_delta = std::max((u_next - st.U).norm(), (v_next - st.V).norm());
        st.U.swap(u_next);
        st.V.swap(v_next);
        st.iter = it + 1;
        st.primal_residual = (st.V - st.U + st.Y).norm();
        if(it == 0)
            first_residual = st.primal_residual;

        if(!st.U.allFinite() || !st.V.allFinite() || !st.Lambda.allFinite())
        {
            std::ostringstream msg;
            msg << "ADMM produced a non-finite iterate at iteration " << st.iter
                << " (alpha = " << cfg.alpha << ", beta = " << beta << ", rho = " << rho << ")";
            throw NumericalError(msg.str());
        }
        if(st.step_delta <= cfg.tol)
        {
            converged = true;
            break;
        }
    }

    SubspaceFit fit;
    fit.V_hat = st.V;
    fit.U_hat = st.U;
    fit.objective = (st.V.transpose() * s * st.V).trace();
    fit.mode = cfg.mode;
    fit.q = cfg.q;
    fit.alpha = cfg.alpha;
    fit.column_alphas = alphas;
    fit.hyper = hp;
    fit.iterations = st.iter;
    fit.converged = converged;
    fit.primal_residual = st.primal_residual;
    fit.first_primal_residual = first_residual;
    fit.step_delta = st.step_delta;
    fit.orthonormality_error = orthonormality_error(st.V);
    fit.degenerate = st.V.isZero(0.0);
    fit.degenerate_gap = prepared.degenerate_gap;

    if(cfg.mode == SparsityMode::Row)
    {
        for(Index i = 0; i < p; i++)
            if(!st.V.row(i).isZero(0.0))
                fit.row_support.push_back(i);
    } else {
        fit.column_support.resize(d);
        for(Index j = 0; j < d; j++)
            for(Index i = 0; i < p; i++)
                if(st.V(i, j) != 0.0)
                    fit.column_support[j].push_back(i);
    }
    return fit;
}

SubspaceFit admm_fit(const MatrixXd& cov, Index d, const SolverConfig& cfg)
{
    cfg.validate();
    if(d < 1 || d >= cov.rows())
        throw InputError("subspace dimension d must satisfy 1 <= d < p");
    return admm_fit(prepare_covariance(cov, d), cfg);
}

}  // namespace compca
