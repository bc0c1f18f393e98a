#pragma once

#include "compca/common.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace compca {

// Row/column labels carried through the pipeline so loadings can be exported
// against the original variable names. Empty vectors mean "unlabeled".
struct Labels
{
    std::vector<std::string> rows;
    std::vector<std::string> cols;

    // Throws InputError if nonempty label lists disagree with the shape.
    void check_shape(Index n, Index p) const;
    static Labels numbered(Index n, Index p);
};

// Nonnegative counts, one observation per row.
struct CountMatrix
{
    MatrixXd values;
    Labels labels;

    static CountMatrix checked(MatrixXd values, Labels labels = {});
};

// Rows strictly positive and summing to one.
struct CompositionMatrix
{
    MatrixXd values;
    Labels labels;

    static CompositionMatrix checked(MatrixXd values, Labels labels = {});
};

enum class TransformTag { Clr, Log, Raw, Power, OracleLogBasis };

std::string transform_token(TransformTag tag);
TransformTag parse_transform(std::string_view token);

struct TransformedMatrix
{
    MatrixXd values;
    TransformTag tag = TransformTag::Raw;
    Labels labels;
    // Exponent used by the power transform; unused otherwise.
    double power_a = 1.0;
};

// ---------------------------------------------------------------------------
// Dense kernels. These operate row-wise on any Eigen expression.
// ---------------------------------------------------------------------------

// log(x_ij) - mean_j log(x_ij); the geometric mean never forms a product.
template <typename Derived>
Matrix<typename Derived::Scalar> clr_rows(const Eigen::MatrixBase<Derived>& x)
{
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> z = x.array().log().matrix();
    const Vector<Scalar> log_gmean = z.rowwise().mean();
    z.colwise() -= log_gmean;
    return z;
}

template <typename Derived>
Matrix<typename Derived::Scalar> closure_rows(const Eigen::MatrixBase<Derived>& w)
{
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> x = w;
    const Vector<Scalar> sums = x.rowwise().sum();
    for(Index i = 0; i < x.rows(); i++)
        x.row(i) /= sums(i);
    return x;
}

// Row-wise x^a / sum(x^a).
template <typename Derived>
Matrix<typename Derived::Scalar> power_closure_rows(const Eigen::MatrixBase<Derived>& x,
                                                    typename Derived::Scalar a)
{
    return closure_rows(x.array().pow(a).matrix());
}

// exp then closure, stabilised by subtracting each row's maximum first.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& y)
{
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> w = y;
    const Vector<Scalar> row_max = w.rowwise().maxCoeff();
    w.colwise() -= row_max;
    w = w.array().exp().matrix();
    return closure_rows(w);
}

// G = I - J/p, the projector that annihilates the all-ones direction.
template <typename Scalar = double>
Matrix<Scalar> centering_matrix(Index p)
{
    if(p < 2)
        throw InputError("centering_matrix: p must be at least 2");
    Matrix<Scalar> g = Matrix<Scalar>::Constant(p, p, Scalar(-1) / Scalar(p));
    g.diagonal().array() += Scalar(1);
    return g;
}

// ---------------------------------------------------------------------------
// Typed pipeline steps.
// ---------------------------------------------------------------------------

CountMatrix replace_zeros(const CountMatrix& counts, double pseudocount);
CompositionMatrix closure(const CountMatrix& counts);

TransformedMatrix clr(const CompositionMatrix& x);
TransformedMatrix log_transform(const CompositionMatrix& x);
// Closure only; the composition itself as the analysed matrix.
TransformedMatrix raw_transform(const CompositionMatrix& x);
TransformedMatrix power_transform(const CompositionMatrix& x, double a = 0.5);

// Applies the named transform to a composition. Power uses `power_a`.
TransformedMatrix apply_transform(const CompositionMatrix& x, TransformTag tag, double power_a = 0.5);

}  // namespace compca
