#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace compca {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Index = Eigen::Index;

// Malformed or out-of-contract input (CLI exit code 2).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite iterates, failed decompositions (CLI exit code 4).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exponent of the sparsity penalty. Only the values with an exact proximal
// solution are supported.
enum class Penalty { L0, LHalf, LTwoThirds, L1 };

double penalty_exponent(Penalty q);
// Accepts exactly "0", "1/2", "0.5", "2/3", "1".
Penalty parse_penalty(std::string_view token);
std::string penalty_token(Penalty q);

enum class SparsityMode { Row, Column };

SparsityMode parse_mode(std::string_view token);
std::string mode_token(SparsityMode mode);

}  // namespace compca
