#include "compca/model_selection.hpp"

#include "compca/linalg.hpp"
#include "compca/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace compca {

std::vector<int> make_folds(Index n, int folds, std::uint64_t seed)
{
    if(folds < 2)
        throw InputError("make_folds: need at least two folds");
    if(folds > n)
        throw InputError("make_folds: more folds than observations");

    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index(0));
    auto rng = make_stream(seed, 0, RngStream::Folds);
    std::shuffle(perm.begin(), perm.end(), rng);

    const Index base = n / folds;
    const Index extra = n % folds;
    std::vector<int> assignment(n, 0);
    Index pos = 0;
    for(int f = 0; f < folds; f++)
    {
        const Index size = base + (f < extra ? 1 : 0);
        for(Index k = 0; k < size; k++)
            assignment[perm[pos++]] = f;
    }
    return assignment;
}

std::vector<double> default_alpha_grid(SparsityMode mode)
{
    std::vector<double> grid;
    const double lo = (mode == SparsityMode::Row) ? -1.5 : 0.5;
    const double hi = (mode == SparsityMode::Row) ? 3.0 : 5.0;
    for(int k = 0; lo + 0.5 * k <= hi + 1e-12; k++)
        grid.push_back(std::exp(lo + 0.5 * k));
    return grid;
}

namespace {

MatrixXd select_rows(const MatrixXd& data, const std::vector<Index>& rows)
{
    MatrixXd out(static_cast<Index>(rows.size()), data.cols());
    for(std::size_t k = 0; k < rows.size(); k++)
        out.row(static_cast<Index>(k)) = data.row(rows[k]);
    return out;
}

}  // namespace

CvResult cross_validate(const MatrixXd& data, Index d, const SolverConfig& cfg,
                        const std::vector<double>& grid, const std::vector<int>& fold_assignment,
                        int folds)
{
    if(grid.empty())
        throw InputError("cross_validate: empty alpha grid");
    if(static_cast<Index>(fold_assignment.size()) != data.rows())
        throw InputError("cross_validate: fold assignment does not match the number of observations");
    cfg.validate();

    CvResult out;
    out.grid = grid;
    out.scores.assign(grid.size(), 0.0);
    out.fold_assignment = fold_assignment;
    out.folds = folds;

    for(int u = 0; u < folds; u++)
    {
        std::vector<Index> train, test;
        for(Index i = 0; i < data.rows(); i++)
            (fold_assignment[i] == u ? test : train).push_back(i);
        if(test.size() < 2)
            throw InputError("cross_validate: fold " + std::to_string(u) + " has fewer than two observations");

        // Each fold is centered with its own mean.
        const MatrixXd s_test = sample_covariance(select_rows(data, test));
        const PreparedCovariance prepared = prepare_covariance(sample_covariance(select_rows(data, train)), d);

        for(std::size_t a = 0; a < grid.size(); a++)
        {
            SolverConfig c = cfg;
            c.alpha = grid[a];
            const SubspaceFit fit = admm_fit(prepared, c);
            out.scores[a] += (fit.V_hat.transpose() * s_test * fit.V_hat).trace();
        }
    }

    out.best_index = 0;
    for(std::size_t a = 1; a < grid.size(); a++)
    {
        const double s = out.scores[a];
        const double best = out.scores[out.best_index];
        if(s > best || (s == best && grid[a] < grid[out.best_index]))
            out.best_index = a;
    }
    out.best_alpha = grid[out.best_index];
    return out;
}

CvResult cross_validate(const MatrixXd& data, Index d, const SolverConfig& cfg,
                        const std::vector<double>& grid, int folds, std::uint64_t seed)
{
    if(grid.empty())
        throw InputError("cross_validate: empty alpha grid");
    if(folds < 2 || data.rows() < 2 * static_cast<Index>(folds))
        throw InputError("cross_validate: every fold needs at least two observations");
    CvResult out = cross_validate(data, d, cfg, grid, make_folds(data.rows(), folds, seed), folds);
    out.seed = seed;
    return out;
}

}  // namespace compca
