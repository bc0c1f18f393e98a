#include "compca/transforms.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <random>

using namespace compca;

namespace {

MatrixXd m(std::initializer_list<std::initializer_list<double>> rows)
{
    MatrixXd out(rows.size(), rows.begin()->size());
    Index i = 0;
    for(const auto& r : rows)
    {
        Index j = 0;
        for(double v : r)
            out(i, j++) = v;
        i++;
    }
    return out;
}

MatrixXd random_positive(Index n, Index p, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    MatrixXd x(n, p);
    for(Index i = 0; i < n; i++)
        for(Index j = 0; j < p; j++)
            x(i, j) = u(rng);
    return x;
}

}  // namespace

TEST_SUITE("transforms")
{
    TEST_CASE("replace_zeros")
    {
        auto r = replace_zeros(CountMatrix::checked(m({{0, 2}, {3, 0}})), 0.05);
        CHECK(r.values.isApprox(m({{0.05, 2}, {3, 0.05}})));

        const MatrixXd full = m({{1, 2}, {3, 4}});
        CHECK(replace_zeros(CountMatrix::checked(full), 0.05).values == full);

        CHECK(replace_zeros(CountMatrix::checked(m({{0, 0}})), 1.0).values == m({{1, 1}}));
    }

    TEST_CASE("counts reject negative and non-finite entries")
    {
        CHECK_THROWS_AS(CountMatrix::checked(m({{-1, 2}})), InputError);
        CHECK_THROWS_AS(CountMatrix::checked(m({{NAN, 2}})), InputError);
    }

    TEST_CASE("closure")
    {
        CHECK(closure(CountMatrix::checked(m({{1, 3}}))).values.isApprox(m({{0.25, 0.75}})));
        CHECK(closure(CountMatrix::checked(m({{2, 2, 2, 2}}))).values.isApprox(m({{0.25, 0.25, 0.25, 0.25}})));
        const auto c = closure(CountMatrix::checked(m({{0.05, 2, 3}})));
        CHECK(c.values(0, 0) == doctest::Approx(0.05 / 5.05).epsilon(1e-15));
        CHECK(c.values(0, 1) == doctest::Approx(2.0 / 5.05).epsilon(1e-15));
        CHECK(c.values(0, 2) == doctest::Approx(3.0 / 5.05).epsilon(1e-15));

        // idempotent
        const auto w = CountMatrix::checked(random_positive(6, 5, 3));
        const auto once = closure(w);
        const auto twice = closure(CountMatrix::checked(once.values));
        CHECK((once.values - twice.values).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((once.values.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-14);
    }

    TEST_CASE("closure rejects a zero row and names it")
    {
        try
        {
            closure(CountMatrix::checked(m({{1, 1}, {0, 0}})));
            FAIL("expected InputError");
        } catch(const InputError& e) {
            CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        }
    }

    TEST_CASE("composition contract")
    {
        CHECK_NOTHROW(CompositionMatrix::checked(m({{0.5, 0.5}})));
        CHECK_THROWS_AS(CompositionMatrix::checked(m({{0.5, 0.6}})), InputError);
        CHECK_THROWS_AS(CompositionMatrix::checked(m({{1.0, 0.0}})), InputError);
    }

    TEST_CASE("clr values")
    {
        const auto u = clr(CompositionMatrix::checked(m({{0.25, 0.25, 0.25, 0.25}})));
        CHECK(u.values.cwiseAbs().maxCoeff() <= 1e-15);
        CHECK(u.tag == TransformTag::Clr);

        const auto z = clr(CompositionMatrix::checked(m({{0.5, 0.25, 0.25}})));
        const double l2 = std::log(2.0);
        CHECK(z.values(0, 0) == doctest::Approx(2.0 / 3.0 * l2).epsilon(1e-14));
        CHECK(z.values(0, 1) == doctest::Approx(-1.0 / 3.0 * l2).epsilon(1e-14));
        CHECK(z.values(0, 2) == doctest::Approx(-1.0 / 3.0 * l2).epsilon(1e-14));
        CHECK(z.values(0, 0) == doctest::Approx(0.4621).epsilon(1e-4));
        CHECK(z.values(0, 1) == doctest::Approx(-0.2310).epsilon(1e-3));
    }

    TEST_CASE("clr is scale invariant and rows sum to zero")
    {
        const MatrixXd w = random_positive(20, 8, 11);
        const auto a = clr(closure(CountMatrix::checked(w)));
        const auto b = clr(closure(CountMatrix::checked(7.0 * w)));
        CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(a.values.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-10);
    }

    TEST_CASE("clr does not overflow on tiny parts")
    {
        MatrixXd x = MatrixXd::Constant(1, 400, 1e-300);
        x(0, 0) = 1.0 - 399e-300;
        const auto z = clr(CompositionMatrix::checked(x));
        CHECK(z.values.allFinite());
        CHECK(std::abs(z.values.sum()) <= 1e-12 * z.values.cwiseAbs().sum());
    }

    TEST_CASE("log transform")
    {
        const double e = std::exp(1.0);
        const auto x = closure(CountMatrix::checked(m({{e, e * e}})));
        const auto l = log_transform(x);
        const double s = e + e * e;
        CHECK(l.values(0, 0) == doctest::Approx(1.0 - std::log(s)).epsilon(1e-14));
        CHECK(l.values(0, 1) == doctest::Approx(2.0 - std::log(s)).epsilon(1e-14));

        const auto comp = closure(CountMatrix::checked(random_positive(5, 6, 2)));
        const MatrixXd lv = log_transform(comp).values;
        const MatrixXd expect = lv.colwise() - lv.rowwise().mean();
        CHECK((clr(comp).values - expect).cwiseAbs().maxCoeff() <= 1e-13);
    }

    TEST_CASE("power transform")
    {
        const auto x = CompositionMatrix::checked(m({{0.25, 0.75}}));
        const auto t = power_transform(x, 0.5);
        const double s3 = std::sqrt(3.0);
        CHECK(t.values(0, 0) == doctest::Approx(1.0 / (1.0 + s3)).epsilon(1e-14));
        CHECK(t.values(0, 1) == doctest::Approx(s3 / (1.0 + s3)).epsilon(1e-14));
        CHECK(t.power_a == 0.5);

        const auto comp = closure(CountMatrix::checked(random_positive(4, 5, 9)));
        CHECK((power_transform(comp, 1.0).values - comp.values).cwiseAbs().maxCoeff() <= 1e-15);
        const auto uni = CompositionMatrix::checked(MatrixXd::Constant(1, 4, 0.25));
        CHECK((power_transform(uni, 0.3).values.array() - 0.25).abs().maxCoeff() <= 1e-15);

        CHECK_THROWS_AS(power_transform(x, 0.0), InputError);
        CHECK_THROWS_AS(power_transform(x, 1.5), InputError);
    }

    TEST_CASE("raw transform is the composition")
    {
        const auto comp = closure(CountMatrix::checked(random_positive(3, 4, 5)));
        CHECK(raw_transform(comp).values == comp.values);
    }

    TEST_CASE("centering matrix")
    {
        CHECK(centering_matrix(2).isApprox(m({{0.5, -0.5}, {-0.5, 0.5}})));
        const MatrixXd g = centering_matrix(5);
        CHECK((g * g - g).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((g * VectorXd::Ones(5)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((g - oracle::centering(5)).cwiseAbs().maxCoeff() <= 1e-15);

        Eigen::SelfAdjointEigenSolver<MatrixXd> es(centering_matrix(6));
        CHECK(std::abs(es.eigenvalues()(0)) <= 1e-12);
        for(Index i = 1; i < 6; i++)
            CHECK(es.eigenvalues()(i) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_THROWS_AS(centering_matrix(1), InputError);
    }

    TEST_CASE("clr of a closed exponential equals G times the log basis")
    {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> nd(0.0, 3.0);
        MatrixXd y(10, 7);
        for(Index i = 0; i < y.rows(); i++)
            for(Index j = 0; j < y.cols(); j++)
                y(i, j) = nd(rng);
        const auto comp = CompositionMatrix::checked(softmax_rows(y));
        const MatrixXd z = clr(comp).values;
        const MatrixXd gy = (oracle::centering(7) * y.transpose()).transpose();
        CHECK((z - gy).cwiseAbs().maxCoeff() <= 1e-10);
    }

    TEST_CASE("labels follow the data")
    {
        Labels lab{{"a", "b"}, {"x", "y", "z"}};
        const auto c = closure(CountMatrix::checked(m({{1, 2, 3}, {4, 5, 6}}), lab));
        CHECK(clr(c).labels.cols == lab.cols);
        CHECK(clr(c).labels.rows == lab.rows);
        CHECK_THROWS_AS(CountMatrix::checked(m({{1, 2}}), lab), InputError);
    }

    TEST_CASE("transform tokens")
    {
        for(auto t : {TransformTag::Clr, TransformTag::Log, TransformTag::Raw, TransformTag::Power})
            CHECK(parse_transform(transform_token(t)) == t);
        CHECK_THROWS_AS(parse_transform("sqrt"), InputError);
    }
}
