#include "compca/transforms.hpp"

#include <sstream>

namespace compca {

namespace {

void require_positive(const MatrixXd& x, const char* what)
{
    for(Index i = 0; i < x.rows(); i++)
    {
        for(Index j = 0; j < x.cols(); j++)
        {
            const double v = x(i, j);
            if(!(v > 0.0) || !std::isfinite(v))
            {
                std::ostringstream msg;
                msg << what << ": entry (row " << i + 1 << ", column " << j + 1 << ") = " << v
                    << " is not strictly positive";
                throw InputError(msg.str());
            }
        }
    }
}

}  // namespace

void Labels::check_shape(Index n, Index p) const
{
    if(!rows.empty() && static_cast<Index>(rows.size()) != n)
        throw InputError("row label count does not match number of rows");
    if(!cols.empty() && static_cast<Index>(cols.size()) != p)
        throw InputError("column label count does not match number of columns");
}

Labels Labels::numbered(Index n, Index p)
{
    Labels l;
    l.rows.reserve(n);
    l.cols.reserve(p);
    for(Index i = 0; i < n; i++)
        l.rows.push_back("obs" + std::to_string(i + 1));
    for(Index j = 0; j < p; j++)
        l.cols.push_back("var" + std::to_string(j + 1));
    return l;
}

CountMatrix CountMatrix::checked(MatrixXd values, Labels labels)
{
    labels.check_shape(values.rows(), values.cols());
    for(Index i = 0; i < values.rows(); i++)
    {
        for(Index j = 0; j < values.cols(); j++)
        {
            if(!(values(i, j) >= 0.0) || !std::isfinite(values(i, j)))
            {
                std::ostringstream msg;
                msg << "counts: entry (row " << i + 1 << ", column " << j + 1 << ") = " << values(i, j)
                    << " is negative or not finite";
                throw InputError(msg.str());
            }
        }
    }
    return CountMatrix{std::move(values), std::move(labels)};
}

CompositionMatrix CompositionMatrix::checked(MatrixXd values, Labels labels)
{
    labels.check_shape(values.rows(), values.cols());
    require_positive(values, "composition");
    for(Index i = 0; i < values.rows(); i++)
    {
        const double s = values.row(i).sum();
        if(std::abs(s - 1.0) > 1e-12)
        {
            std::ostringstream msg;
            msg << "composition: row " << i + 1 << " sums to " << s << ", not 1";
            throw InputError(msg.str());
        }
    }
    return CompositionMatrix{std::move(values), std::move(labels)};
}

std::string transform_token(TransformTag tag)
{
    switch(tag)
    {
        case TransformTag::Clr: return "clr";
        case TransformTag::Log: return "log";
        case TransformTag::Raw: return "raw";
        case TransformTag::Power: return "power";
        case TransformTag::OracleLogBasis: return "oracle-log-basis";
    }
    return "raw";
}

TransformTag parse_transform(std::string_view token)
{
    if(token == "clr")
        return TransformTag::Clr;
    if(token == "log")
        return TransformTag::Log;
    if(token == "raw")
        return TransformTag::Raw;
    if(token == "power")
        return TransformTag::Power;
    if(token == "oracle-log-basis")
        return TransformTag::OracleLogBasis;
    throw InputError("unknown transform '" + std::string(token) + "'");
}

CountMatrix replace_zeros(const CountMatrix& counts, double pseudocount)
{
    if(!(pseudocount > 0.0))
        throw InputError("replace_zeros: pseudocount must be positive");
    CountMatrix out = CountMatrix::checked(counts.values, counts.labels);
    out.values = (out.values.array() == 0.0).select(pseudocount, out.values);
    return out;
}

CompositionMatrix closure(const CountMatrix& counts)
{
    const MatrixXd& w = counts.values;
    for(Index i = 0; i < w.rows(); i++)
    {
        for(Index j = 0; j < w.cols(); j++)
        {
            if(!(w(i, j) > 0.0) || !std::isfinite(w(i, j)))
            {
                std::ostringstream msg;
                msg << "closure: row " << i + 1 << " has a nonpositive entry at column " << j + 1
                    << " (replace zeros first)";
                throw InputError(msg.str());
            }
        }
    }
    counts.labels.check_shape(w.rows(), w.cols());
    return CompositionMatrix{closure_rows(w), counts.labels};
}

TransformedMatrix clr(const CompositionMatrix& x)
{
    require_positive(x.values, "clr");
    return TransformedMatrix{clr_rows(x.values), TransformTag::Clr, x.labels};
}

TransformedMatrix log_transform(const CompositionMatrix& x)
{
    require_positive(x.values, "log_transform");
    return TransformedMatrix{x.values.array().log().matrix(), TransformTag::Log, x.labels};
}

TransformedMatrix raw_transform(const CompositionMatrix& x)
{
    return TransformedMatrix{x.values, TransformTag::Raw, x.labels};
}

TransformedMatrix power_transform(const CompositionMatrix& x, double a)
{
    if(!(a > 0.0 && a <= 1.0))
        throw InputError("power_transform: exponent must lie in (0, 1]");
    require_positive(x.values, "power_transform");
    TransformedMatrix out{power_closure_rows(x.values, a), TransformTag::Power, x.labels};
    out.power_a = a;
    return out;
}

TransformedMatrix apply_transform(const CompositionMatrix& x, TransformTag tag, double power_a)
{
    switch(tag)
    {
        case TransformTag::Clr: return clr(x);
        case TransformTag::Log: return log_transform(x);
        case TransformTag::Raw: return raw_transform(x);
        case TransformTag::Power: return power_transform(x, power_a);
        case TransformTag::OracleLogBasis:
            throw InputError("the oracle log-basis cannot be derived from compositions");
    }
    throw InputError("unknown transform");
}

}  // namespace compca
