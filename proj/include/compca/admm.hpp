#pragma once

#include "compca/common.hpp"

#include <optional>
#include <vector>

namespace compca {

// Hyperparameters of the linearized proximal ADMM. beta and rho default to
// 5.8 ||S||_2 and 6.14 ||S||_2 of the covariance being fitted.
struct SolverConfig
{
    SparsityMode mode = SparsityMode::Row;
    Penalty q = Penalty::L0;
    // Row mode: the penalty weight. Column mode: the base weight, divided by
    // the l1 norm of each initial column.
    double alpha = 1.0;
    std::optional<double> beta;
    std::optional<double> rho;
    double mu = 1000.0;
    int max_iter = 1000;
    double tol = 1e-5;

    void validate() const;
};

struct Hyperparameters
{
    double beta = 0.0;
    double rho = 0.0;
    double mu = 0.0;
};

// beta = 5.8 ||S||_2, rho = 6.14 ||S||_2, mu = 1000.
Hyperparameters default_hyperparameters(double spectral_norm);
Hyperparameters default_hyperparameters(const MatrixXd& cov);

// Covariance plus everything derived from its eigendecomposition that the
// solver needs. Shared read-only across fits on the same data (e.g. an alpha
// grid).
struct PreparedCovariance
{
    MatrixXd cov;
    MatrixXd init;             // leading d eigenvectors, sign-normalized
    double spectral_norm = 0;
    bool degenerate_gap = false;

    Index dim() const { return cov.rows(); }
    Index rank() const { return init.cols(); }
};

PreparedCovariance prepare_covariance(MatrixXd cov, Index d);

// Q P^T from the thin SVD A = Q D P^T: the nearest matrix with orthonormal
// columns. Rank-deficient input still yields orthonormal columns because the
// thin factor Q is completed by the decomposition itself.
MatrixXd procrustes_update(const MatrixXd& a);

// alpha_j = alpha / ||v0_j||_1 for each column of the initial basis.
VectorXd column_alpha_vector(double alpha, const MatrixXd& v0);

struct AdmmState
{
    MatrixXd U;
    MatrixXd V;
    MatrixXd Y;
    MatrixXd Lambda;
    int iter = 0;
    double primal_residual = 0.0;  // ||V - U + Y||_F
    double step_delta = 0.0;       // max(||dU||_F, ||dV||_F)
};

struct SubspaceFit
{
    MatrixXd V_hat;  // sparse, near-orthonormal estimate
    MatrixXd U_hat;  // orthonormal companion iterate
    double objective = 0.0;  // <S, V_hat V_hat^T>
    SparsityMode mode = SparsityMode::Row;
    Penalty q = Penalty::L0;
    double alpha = 0.0;
    VectorXd column_alphas;  // column mode only
    Hyperparameters hyper;
    // Row mode: indices of nonzero rows. Column mode: nonzero rows per column.
    std::vector<Index> row_support;
    std::vector<std::vector<Index>> column_support;

    int iterations = 0;
    bool converged = false;
    double primal_residual = 0.0;
    double first_primal_residual = 0.0;
    double step_delta = 0.0;
    double orthonormality_error = 0.0;  // ||V^T V - I||_max
    // V_hat is identically zero; callers decide whether that is fatal.
    bool degenerate = false;
    bool degenerate_gap = false;
};

SubspaceFit admm_fit(const PreparedCovariance& prepared, const SolverConfig& cfg);
SubspaceFit admm_fit(const MatrixXd& cov, Index d, const SolverConfig& cfg);

}  // namespace compca
