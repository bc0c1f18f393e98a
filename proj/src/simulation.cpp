#include "compca/simulation.hpp"

#include "compca/linalg.hpp"
#include "compca/model_selection.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace compca {

std::string method_token(Method m)
{
    switch(m)
    {
        case Method::Oracle: return "oracle";
        case Method::Proposed: return "proposed";
        case Method::Log: return "log";
        case Method::Raw: return "raw";
        case Method::Power: return "power";
    }
    return "oracle";
}

Method parse_method(std::string_view token)
{
    if(token == "oracle")
        return Method::Oracle;
    if(token == "proposed")
        return Method::Proposed;
    if(token == "log")
        return Method::Log;
    if(token == "raw")
        return Method::Raw;
    if(token == "power")
        return Method::Power;
    throw InputError("unknown method '" + std::string(token) + "'");
}

std::string distribution_token(Distribution d)
{
    return d == Distribution::Normal ? "normal" : "gamma";
}

Distribution parse_distribution(std::string_view token)
{
    if(token == "normal")
        return Distribution::Normal;
    if(token == "gamma")
        return Distribution::Gamma;
    throw InputError("unknown distribution '" + std::string(token) + "'");
}

void ScenarioConfig::validate() const
{
    if(n < 10)
        throw InputError("scenario: n must be at least 10");
    if(d < 2)
        throw InputError("scenario: d must be at least 2 (the eigenvalue profile divides by d - 1)");
    if(d > R0 || R0 > p)
        throw InputError("scenario: need d <= R0 <= p");
    if(sparsity == SparsityMode::Column && 2 * R0 > p)
        throw InputError("scenario: column sparsity needs 2 R0 <= p");
    if(replicates < 1)
        throw InputError("scenario: replicates must be at least 1");
    if(methods.empty())
        throw InputError("scenario: no methods selected");
    if(folds < 2 || n < 2 * folds)
        throw InputError("scenario: every CV fold needs at least two observations");
    if(!(power_a > 0.0 && power_a <= 1.0))
        throw InputError("scenario: power_a must lie in (0, 1]");
    for(double a : alpha_grid)
        if(!(a > 0.0))
            throw InputError("scenario: alpha grid entries must be positive");
    solver_config().validate();
}

std::vector<double> ScenarioConfig::effective_grid() const
{
    return alpha_grid.empty() ? default_alpha_grid(sparsity) : alpha_grid;
}

SolverConfig ScenarioConfig::solver_config() const
{
    SolverConfig c;
    c.mode = sparsity;
    c.q = q;
    c.mu = mu;
    c.max_iter = max_iter;
    c.tol = tol;
    return c;
}

namespace {

MatrixXd gaussian_matrix(Index rows, Index cols, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd g(rows, cols);
    for(Index i = 0; i < rows; i++)
        for(Index j = 0; j < cols; j++)
            g(i, j) = normal(rng);
    return g;
}

// Thin Q of a Householder QR, with R's diagonal made positive so the result
// depends only on the input.
MatrixXd orthonormalize(const MatrixXd& g)
{
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(g.rows(), g.cols());
    const MatrixXd& r = qr.matrixQR();
    for(Index j = 0; j < g.cols(); j++)
        if(r(j, j) < 0.0)
            q.col(j) = -q.col(j);
    return q;
}

}  // namespace

MatrixXd generate_row_sparse_basis(Index p, Index d, Index R0, Rng& rng)
{
    if(d < 1 || d > R0 || R0 > p)
        throw InputError("generate_row_sparse_basis: need 1 <= d <= R0 <= p");
    MatrixXd v = MatrixXd::Zero(p, d);
    v.topRows(R0) = orthonormalize(gaussian_matrix(R0, d, rng));
    return v;
}

MatrixXd generate_col_sparse_basis(Index p, Index d, Index R0, Rng& rng)
{
    const Index d1 = (d + 1) / 2;
    const Index d2 = d / 2;
    if(d < 2 || d1 > R0 || 2 * R0 > p)
        throw InputError("generate_col_sparse_basis: need 2 <= d, ceil(d/2) <= R0 and 2 R0 <= p");
    MatrixXd v = MatrixXd::Zero(p, d);
    v.block(0, 0, R0, d1) = orthonormalize(gaussian_matrix(R0, d1, rng));
    v.block(R0, d1, R0, d2) = orthonormalize(gaussian_matrix(R0, d2, rng));
    return v;
}

GroundTruth build_covariance(const MatrixXd& v, Rng& wishart_rng, Rng& mean_rng)
{
    const Index p = v.rows();
    const Index d = v.cols();
    if(d < 2)
        throw InputError("build_covariance: d must be at least 2 (choose d >= 2)");
    if(orthonormality_error(v) > 1e-8)
        throw InputError("build_covariance: V must have orthonormal columns");

    // K = (1/p) sum_{i=1}^{p+10} g_i g_i^T
    const MatrixXd g = gaussian_matrix(p + 10, p, wishart_rng);
    MatrixXd k(p, p);
    k.setZero();
    k.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose(), 1.0 / static_cast<double>(p));
    k.triangularView<Eigen::StrictlyUpper>() = k.transpose();

    // (I - VV^T) K (I - VV^T)
    const MatrixXd kv = k * v;
    MatrixXd residual = k - kv * v.transpose() - v * kv.transpose() + v * (v.transpose() * kv) * v.transpose();
    residual = 0.5 * (residual + residual.transpose()).eval();

    GroundTruth truth;
    truth.lambdas.resize(d + 1);
    const double lambda_rest = spectral_norm(residual);
    for(Index i = 0; i < d; i++)
        truth.lambdas(i) = (3.6 - 2.0 * static_cast<double>(i) / static_cast<double>(d - 1)) * lambda_rest;
    truth.lambdas(d) = lambda_rest;

    truth.Omega = v * truth.lambdas.head(d).asDiagonal() * v.transpose() + residual;
    truth.Omega = 0.5 * (truth.Omega + truth.Omega.transpose()).eval();
    truth.Omega_root = symmetric_sqrt(truth.Omega);
    truth.V_true = v;

    std::uniform_real_distribution<double> unif(0.0, 10.0);
    truth.mu_vec.resize(p);
    for(Index j = 0; j < p; j++)
        truth.mu_vec(j) = unif(mean_rng);
    return truth;
}

TransformedMatrix sample_log_basis(Index n, const GroundTruth& truth, Distribution dist, Rng& rng)
{
    const Index p = truth.Omega.rows();
    MatrixXd draws(n, p);
    if(dist == Distribution::Normal)
    {
        draws = gaussian_matrix(n, p, rng);
    } else {
        std::gamma_distribution<double> gamma(10.0, 1.0);
        for(Index i = 0; i < n; i++)
            for(Index j = 0; j < p; j++)
                draws(i, j) = gamma(rng);
        draws /= std::sqrt(10.0);
    }
    // Rows: mu + F u with F symmetric.
    MatrixXd y = draws * truth.Omega_root;
    y.rowwise() += truth.mu_vec.transpose();
    TransformedMatrix out;
    out.values = std::move(y);
    out.tag = TransformTag::OracleLogBasis;
    return out;
}

CompositionMatrix compose(const MatrixXd& log_basis)
{
    if(!log_basis.allFinite())
        throw InputError("compose: log-basis contains non-finite entries");
    return CompositionMatrix{softmax_rows(log_basis), {}};
}

double c_of_q(double q)
{
    if(q < 0.0 || q > 1.0)
        throw InputError("c(q): q must lie in [0, 1]");
    if(q == 0.0 || q == 1.0)
        return 2.0;
    return (2.0 - q) / (2.0 * (1.0 - q)) * std::pow(2.0 * (1.0 - q) / q, q / (2.0 - q));
}

TheoryQuantities theory_quantities(const VectorXd& lambdas, Index d, Index p, double radius, double q, Index n)
{
    if(d < 1 || lambdas.size() < d + 1)
        throw InputError("theory_quantities: need lambda_1..lambda_{d+1}");
    const double l1 = lambdas(0);
    const double ld = lambdas(d - 1);
    const double ld1 = lambdas(d);
    const double gap = ld - ld1;
    if(!(gap > 0.0))
        throw InputError("theory_quantities: eigengap lambda_d - lambda_{d+1} must be positive");
    if(p < 1 || n < 1 || !(radius > 0.0))
        throw InputError("theory_quantities: p, n, and R_q must be positive");

    TheoryQuantities t;
    t.sigma1_sq = l1 * ld1 / (gap * gap);
    t.sigma2_sq = l1 * l1 / (gap * gap);
    t.c_q = c_of_q(q);
    const double dd = static_cast<double>(d);
    t.bound_theorem1 = 9.0 * t.c_q * t.c_q * t.sigma2_sq * dd * dd * std::pow(radius, 2.0 / (2.0 - q))
                       / static_cast<double>(p);
    t.epsilon_n = std::sqrt(2.0 * radius)
                  * std::pow((dd + std::log(static_cast<double>(p))) / static_cast<double>(n), 0.5 - q / 4.0);
    return t;
}

double row_sparsity_radius(const MatrixXd& v, double q)
{
    const VectorXd norms = v.rowwise().norm();
    if(q == 0.0)
        return static_cast<double>((norms.array() != 0.0).count());
    return norms.array().pow(q).sum();
}

double column_sparsity_radius(const MatrixXd& v, double q)
{
    double best = 0.0;
    for(Index j = 0; j < v.cols(); j++)
    {
        const double r = (q == 0.0) ? static_cast<double>((v.col(j).array() != 0.0).count())
                                    : v.col(j).cwiseAbs().array().pow(q).sum();
        best = std::max(best, r);
    }
    return best;
}

TransformedMatrix method_data(Method method, const TransformedMatrix& log_basis,
                              const CompositionMatrix& composition, double power_a)
{
    switch(method)
    {
        case Method::Oracle: return log_basis;
        case Method::Proposed: return clr(composition);
        case Method::Log: return log_transform(composition);
        case Method::Raw: return raw_transform(composition);
        case Method::Power: return power_transform(composition, power_a);
    }
    throw InputError("unknown method");
}

std::vector<ReplicateRecord> run_replicate(const ScenarioConfig& cfg, int replicate)
{
    const auto rep = static_cast<std::uint64_t>(replicate);
    Rng basis_rng = make_stream(cfg.seed, rep, RngStream::Basis);
    Rng wishart_rng = make_stream(cfg.seed, rep, RngStream::Wishart);
    Rng mean_rng = make_stream(cfg.seed, rep, RngStream::Means);
    Rng sample_rng = make_stream(cfg.seed, rep, RngStream::Samples);

    const MatrixXd v = (cfg.sparsity == SparsityMode::Row)
                           ? generate_row_sparse_basis(cfg.p, cfg.d, cfg.R0, basis_rng)
                           : generate_col_sparse_basis(cfg.p, cfg.d, cfg.R0, basis_rng);
    const GroundTruth truth = build_covariance(v, wishart_rng, mean_rng);
    const TransformedMatrix y = sample_log_basis(cfg.n, truth, cfg.distribution, sample_rng);
    const CompositionMatrix x = compose(y.values);

    // One fold split per replicate, shared by every method.
    const std::uint64_t fold_seed = cfg.seed ^ (0x9e3779b97f4a7c15ull * (rep + 1));
    const std::vector<int> folds = make_folds(cfg.n, cfg.folds, fold_seed);
    const std::vector<double> grid = cfg.effective_grid();
    const SolverConfig base = cfg.solver_config();

    std::vector<ReplicateRecord> out;
    for(Method m : cfg.methods)
    {
        ReplicateRecord rec;
        rec.replicate = replicate;
        rec.method = m;
        try
        {
            const TransformedMatrix data = method_data(m, y, x, cfg.power_a);
            const CvResult cv = cross_validate(data.values, cfg.d, base, grid, folds, cfg.folds);
            SolverConfig final_cfg = base;
            final_cfg.alpha = cv.best_alpha;
            const SubspaceFit fit = admm_fit(sample_covariance(data.values), cfg.d, final_cfg);
            rec.ok = true;
            rec.alpha = cv.best_alpha;
            rec.sin_theta_sq = sin_theta_sq(fit.V_hat, truth.V_true);
            rec.orthonormality_error = fit.orthonormality_error;
            rec.iterations = fit.iterations;
            rec.converged = fit.converged;
            rec.degenerate = fit.degenerate;
        } catch(const std::exception& e) {
            rec.ok = false;
            rec.message = e.what();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, int jobs)
{
    cfg.validate();
    const int reps = cfg.replicates;
    std::vector<std::vector<ReplicateRecord>> per_rep(reps);

    const int workers = std::max(1, std::min(jobs, reps));
    if(workers == 1)
    {
        for(int r = 0; r < reps; r++)
            per_rep[r] = run_replicate(cfg, r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        for(int w = 0; w < workers; w++)
        {
            pool.emplace_back([&] {
                for(int r = next++; r < reps; r = next++)
                    per_rep[r] = run_replicate(cfg, r);
            });
        }
    }

    ScenarioResult result;
    for(const auto& recs : per_rep)
        for(const auto& rec : recs)
            result.records.push_back(rec);

    for(Method m : cfg.methods)
    {
        MseRow row;
        row.method = m;
        double sum = 0.0;
        std::vector<double> vals;
        // fixed replicate order keeps the sums reproducible
        for(const auto& rec : result.records)
        {
            if(rec.method != m)
                continue;
            if(!rec.ok)
            {
                row.n_failed++;
                std::ostringstream msg;
                msg << "replicate " << rec.replicate << " (" << method_token(m) << ") failed: " << rec.message;
                result.warnings.push_back(msg.str());
                continue;
            }
            vals.push_back(rec.sin_theta_sq);
            sum += rec.sin_theta_sq;
        }
        row.n_ok = static_cast<int>(vals.size());
        if(row.n_ok > 0)
        {
            row.mean = sum / row.n_ok;
            if(row.n_ok > 1)
            {
                double ss = 0.0;
                for(double v : vals)
                    ss += (v - row.mean) * (v - row.mean);
                row.se = std::sqrt(ss / (row.n_ok - 1)) / std::sqrt(static_cast<double>(row.n_ok));
            }
        } else {
            row.mean = std::nan("");
            row.se = std::nan("");
        }
        result.table.push_back(row);
    }
    return result;
}

}  // namespace compca
