#pragma once

#include "compca/admm.hpp"
#include "compca/common.hpp"

#include <cstdint>
#include <vector>

namespace compca {

struct CvResult
{
    std::vector<double> grid;
    // Sum over folds of <S_test, V V^T> for the fit on the remaining folds.
    std::vector<double> scores;
    double best_alpha = 0.0;
    std::size_t best_index = 0;
    std::vector<int> fold_assignment;  // fold index per observation
    int folds = 0;
    std::uint64_t seed = 0;
};

// Seeded random permutation split into `folds` near-equal blocks; the first
// n % folds blocks get one extra observation.
std::vector<int> make_folds(Index n, int folds, std::uint64_t seed);

// alpha = exp(a0) with a0 in {-1.5, -1, ..., 3} (row) or {0.5, 1, ..., 5}
// (column).
std::vector<double> default_alpha_grid(SparsityMode mode);

// K-fold cross-validation of `cfg.alpha` over `grid`. Only `cfg.alpha` is
// varied; the remaining solver settings are used as given. Ties in the score
// go to the smallest alpha.
CvResult cross_validate(const MatrixXd& data, Index d, const SolverConfig& cfg,
                        const std::vector<double>& grid, int folds, std::uint64_t seed);

// Same, with an explicit fold assignment (values in [0, folds)).
CvResult cross_validate(const MatrixXd& data, Index d, const SolverConfig& cfg,
                        const std::vector<double>& grid, const std::vector<int>& fold_assignment,
                        int folds);

}  // namespace compca
