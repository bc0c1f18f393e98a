#pragma once

#include "compca/admm.hpp"
#include "compca/common.hpp"
#include "compca/rng.hpp"
#include "compca/transforms.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace compca {

enum class Distribution { Normal, Gamma };

// Estimators compared in the simulation study.
//   oracle   - penalized fit on the log-basis covariance (not observable)
//   proposed - penalized fit on the clr covariance
//   log/raw/power - penalized fit on log, raw, or power-closed compositions
enum class Method { Oracle, Proposed, Log, Raw, Power };

std::string method_token(Method m);
Method parse_method(std::string_view token);
std::string distribution_token(Distribution d);
Distribution parse_distribution(std::string_view token);

struct ScenarioConfig
{
    Index n = 250;
    Index p = 500;
    Index d = 5;
    Index R0 = 10;
    SparsityMode sparsity = SparsityMode::Row;
    Penalty q = Penalty::L0;
    Distribution distribution = Distribution::Normal;
    std::vector<Method> methods{Method::Oracle, Method::Proposed, Method::Log, Method::Raw, Method::Power};
    std::vector<double> alpha_grid;  // empty: the default grid for `sparsity`
    int replicates = 20;
    std::uint64_t seed = 1;
    int folds = 5;
    double power_a = 0.5;
    double mu = 1000.0;
    int max_iter = 1000;
    double tol = 1e-5;

    void validate() const;
    std::vector<double> effective_grid() const;
    SolverConfig solver_config() const;
};

struct GroundTruth
{
    MatrixXd V_true;      // p x d orthonormal
    MatrixXd Omega;       // basis covariance
    MatrixXd Omega_root;  // symmetric square root, Omega_root^2 = Omega
    VectorXd lambdas;     // lambda_1..lambda_{d+1}
    VectorXd mu_vec;      // log-basis mean
};

struct TheoryQuantities
{
    double sigma1_sq = 0.0;
    double sigma2_sq = 0.0;
    double c_q = 0.0;
    double bound_theorem1 = 0.0;  // 9 c(q)^2 sigma2^2 d^2 R^(2/(2-q)) / p
    double epsilon_n = 0.0;       // sqrt(2 R) ((d + log p)/n)^(1/2 - q/4)
};

// Top R0 rows hold a Gaussian matrix orthonormalized by QR; the rest are zero.
MatrixXd generate_row_sparse_basis(Index p, Index d, Index R0, Rng& rng);
// Block-diagonal top 2 R0 rows: an R0 x ceil(d/2) block then an
// R0 x floor(d/2) block, each orthonormalized separately.
MatrixXd generate_col_sparse_basis(Index p, Index d, Index R0, Rng& rng);

// Omega = V D V^T + (I - VV^T) K (I - VV^T) with K ~ Wishart(p + 10, I/p),
// lambda_{d+1} = ||(I - VV^T) K (I - VV^T)||_2 and
// lambda_i = (3.6 - 2 (i - 1)/(d - 1)) lambda_{d+1}. The mean vector is
// uniform on [0, 10].
GroundTruth build_covariance(const MatrixXd& v, Rng& wishart_rng, Rng& mean_rng);

// Rows are log-basis draws: N(mu, Omega) or mu + F U / sqrt(10) with U having
// i.i.d. Gamma(10, 1) entries (uncentered).
TransformedMatrix sample_log_basis(Index n, const GroundTruth& truth, Distribution dist, Rng& rng);

// exp then closure, row by row.
CompositionMatrix compose(const MatrixXd& log_basis);

// c(q) = 2 for q in {0, 1}, otherwise (2-q)/(2(1-q)) * (2(1-q)/q)^(q/(2-q)).
double c_of_q(double q);
TheoryQuantities theory_quantities(const VectorXd& lambdas, Index d, Index p, double radius, double q, Index n);

// ||V||_{2,q}^q (number of nonzero rows when q = 0).
double row_sparsity_radius(const MatrixXd& v, double q);
// max_j ||v_j||_q^q.
double column_sparsity_radius(const MatrixXd& v, double q);

// Transformed data matrix for `method` given the log-basis and its composition.
TransformedMatrix method_data(Method method, const TransformedMatrix& log_basis,
                              const CompositionMatrix& composition, double power_a);

struct ReplicateRecord
{
    int replicate = 0;
    Method method = Method::Oracle;
    bool ok = false;
    double sin_theta_sq = 0.0;
    double alpha = 0.0;
    double orthonormality_error = 0.0;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;
    std::string message;  // failure reason when !ok
};

struct MseRow
{
    Method method = Method::Oracle;
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean over successful replicates
    int n_ok = 0;
    int n_failed = 0;
};

struct ScenarioResult
{
    std::vector<MseRow> table;
    std::vector<ReplicateRecord> records;  // ordered by (replicate, method)
    std::vector<std::string> warnings;
};

// Everything for a single replicate: truth, data, and one CV-tuned fit per
// method.
std::vector<ReplicateRecord> run_replicate(const ScenarioConfig& cfg, int replicate);

// Replicates run on `jobs` worker threads; results are independent of `jobs`.
ScenarioResult run_scenario(const ScenarioConfig& cfg, int jobs = 1);

}  // namespace compca
