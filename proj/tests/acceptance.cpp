// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here and
// must not be loosened to make a run pass.

#include "compca/io.hpp"
#include "compca/linalg.hpp"
#include "compca/prox.hpp"
#include "compca/simulation.hpp"
#include "oracle.hpp"

#include <CLI11.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <map>
#include <iostream>
#include <random>
#include <sstream>

using namespace compca;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome prox_oracle()
{
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> nd(0.0, 2.0);
    std::uniform_real_distribution<double> ua(0.01, 4.0);
    double worst = -1e300;
    std::string where;
    for(Penalty q : {Penalty::L0, Penalty::LHalf, Penalty::LTwoThirds, Penalty::L1})
    {
        const double qe = penalty_exponent(q);
        for(int t = 0; t < 1000; t++)
        {
            VectorXd b(5);
            for(Index i = 0; i < b.size(); i++)
                b(i) = nd(rng);
            const double alpha = ua(rng), beta = ua(rng), rho = ua(rng), k = beta + rho;

            // row prox: the vector problem reduces to the magnitude along -b
            const VectorXd v = prox_row(b, q, alpha, beta, rho);
            const double fr = prox_row_objective(v, b, q, alpha, k) - oracle::magnitude_min(b.norm(), qe, alpha, k);

            // scalar prox on the first coordinate
            const double s = prox_scalar(b(0), q, alpha, beta, rho);
            const double fs_ = oracle::magnitude_objective(std::abs(s), std::abs(b(0)), qe, alpha, k)
                               - oracle::magnitude_min(std::abs(b(0)), qe, alpha, k);
            const bool sign_ok = s == 0.0 || (s > 0.0) != (b(0) > 0.0);
            const double excess = std::max(fr, sign_ok ? fs_ : 1.0);
            if(excess > worst)
            {
                worst = excess;
                where = "q=" + penalty_token(q);
            }
        }
    }
    return {worst <= 1e-9, "4000 draws x {row, scalar}; max objective excess over oracle " + fmt(worst) + " (" +
                               where + "), tol 1e-9"};
}

Outcome clr_identity()
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> un(10, 60), up(3, 40);
    std::normal_distribution<double> nd(0.0, 1.5);
    double worst = 0.0;
    for(int t = 0; t < 50; t++)
    {
        const Index n = un(rng), p = up(rng);
        MatrixXd y(n, p);
        for(Index i = 0; i < n; i++)
            for(Index j = 0; j < p; j++)
                y(i, j) = nd(rng) + double(j % 5);
        const auto comp = CompositionMatrix::checked(softmax_rows(y));
        const MatrixXd sz = sample_covariance(clr(comp));
        const MatrixXd g = oracle::centering(p);
        const MatrixXd rhs = g * oracle::covariance(log_transform(comp).values) * g;
        worst = std::max(worst, (sz - rhs).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-8, "50 matrices; max |S_clr - G S_log G| = " + fmt(worst) + ", tol 1e-8"};
}

Outcome spiked_rate()
{
    bool ok = true;
    std::string detail;
    for(Index p : {4, 50, 500})
    {
        MatrixXd omega = MatrixXd::Identity(p, p);
        omega(0, 0) = 4.0;
        const auto lead = leading_subspace(gamma_from_omega(omega), 1);
        const double s = sin_theta_sq(MatrixXd(MatrixXd::Identity(p, 1)), lead.basis);
        const double err = std::abs(s - 1.0 / double(p));
        ok = ok && err <= 1e-8;
        detail += "p=" + std::to_string(p) + ": " + fmt(s, 10) + " (|err| " + fmt(err, 2) + ") ";
    }
    return {ok, detail + "vs 1/p, tol 1e-8"};
}

struct TheoryRun
{
    Outcome bound;
    Outcome interlacing;
};

TheoryRun theory_instances()
{
    const Index p = 500, d = 5, R0 = 10;
    double worst_ratio = 0.0, worst_interlace = -1e300;
    int bound_fail = 0, interlace_fail = 0, checks = 0;
    for(int inst = 0; inst < 50; inst++)
    {
        const auto r = static_cast<std::uint64_t>(inst);
        Rng basis_rng = make_stream(999, r, RngStream::Basis);
        Rng wishart_rng = make_stream(999, r, RngStream::Wishart);
        Rng mean_rng = make_stream(999, r, RngStream::Means);
        const MatrixXd v = generate_row_sparse_basis(p, d, R0, basis_rng);
        const GroundTruth truth = build_covariance(v, wishart_rng, mean_rng);

        const auto eo = spectral_decomposition(truth.Omega);
        const auto eg = spectral_decomposition(gamma_from_omega(truth.Omega));
        const double measured = sin_theta_sq(eo.eigenvectors.leftCols(d), eg.eigenvectors.leftCols(d));
        for(double q : {0.0, 1.0})
        {
            const double radius = row_sparsity_radius(truth.V_true, q);
            const auto th = theory_quantities(truth.lambdas, d, p, radius, q, 250);
            worst_ratio = std::max(worst_ratio, measured / th.bound_theorem1);
            bound_fail += measured > th.bound_theorem1;
            checks++;
        }
        const double norm = eo.eigenvalues(0);
        const double excess = (eg.eigenvalues - eo.eigenvalues).maxCoeff() / norm;
        worst_interlace = std::max(worst_interlace, excess);
        interlace_fail += excess > 1e-8;
    }
    TheoryRun out;
    out.bound = {bound_fail == 0, std::to_string(checks) + " (instance, q) checks on 50 instances; " +
                                      std::to_string(bound_fail) + " violations; max measured/bound = " +
                                      fmt(worst_ratio)};
    out.interlacing = {interlace_fail == 0, "50 instances; max (a_j - lambda_j)/||Omega||_2 = " +
                                                fmt(worst_interlace) + ", tol 1e-8"};
    return out;
}

// ---------------------------------------------------------------------------

const MseRow* find_row(const ScenarioResult& r, Method m)
{
    for(const auto& row : r.table)
        if(row.method == m)
            return &row;
    return nullptr;
}

std::string row_text(const MseRow* row)
{
    if(!row)
        return "missing";
    return fmt(row->mean) + " (se " + fmt(row->se, 2) + ", ok " + std::to_string(row->n_ok) + ")";
}

ScenarioConfig load_config(const std::string& name)
{
    const fs::path path = fs::path(COMPCA_CONFIG_DIR) / name;
    return io::scenario_from_json(io::json::parse(io::read_file(path)));
}

Outcome row_cell(const ScenarioResult& r, double secs)
{
    const MseRow* prop = find_row(r, Method::Proposed);
    const MseRow* orc = find_row(r, Method::Oracle);
    const MseRow* raw = find_row(r, Method::Raw);
    const MseRow* log = find_row(r, Method::Log);
    const MseRow* pw = find_row(r, Method::Power);
    bool ok = prop && orc && raw && log;
    ok = ok && prop->n_failed == 0 && orc->n_failed == 0;
    ok = ok && prop->mean >= 0.010 && prop->mean <= 0.030;
    ok = ok && orc->mean >= 0.010 && orc->mean <= 0.030;
    ok = ok && std::abs(prop->mean - orc->mean) <= 0.01;
    ok = ok && raw->mean >= 2.0;
    ok = ok && log->mean >= 0.5;
    return {ok, "proposed " + row_text(prop) + " in [0.010, 0.030]; oracle " + row_text(orc) +
                    " in [0.010, 0.030]; raw " + row_text(raw) + " >= 2.0; log " + row_text(log) +
                    " >= 0.5; power " + row_text(pw) + "; " + fmt(secs, 3) + " s"};
}

Outcome column_cell(const ScenarioResult& r, double secs)
{
    const MseRow* prop = find_row(r, Method::Proposed);
    const MseRow* raw = find_row(r, Method::Raw);
    bool ok = prop && raw && prop->n_failed == 0;
    ok = ok && prop->mean >= 0.06 && prop->mean <= 0.12;
    ok = ok && raw->mean >= 2.0;
    return {ok, "proposed " + row_text(prop) + " in [0.06, 0.12]; raw " + row_text(raw) + " >= 2.0; " +
                    fmt(secs, 3) + " s"};
}

// Scope: the fits of the proposed estimator and the oracle in the row-sparsity
// cell. The raw fits are identically zero, whose Gram matrix is 0, so their
// deviation is 1 by definition and carries no information about the solver.
Outcome near_orthonormality(const ScenarioResult& r)
{
    double worst = 0.0;
    int count = 0;
    std::ostringstream others;
    std::map<Method, double> other_worst;
    for(const auto& rec : r.records)
    {
        if(!rec.ok)
            continue;
        if(rec.method == Method::Proposed || rec.method == Method::Oracle)
        {
            worst = std::max(worst, rec.orthonormality_error);
            count++;
        } else {
            other_worst[rec.method] = std::max(other_worst[rec.method], rec.orthonormality_error);
        }
    }
    for(const auto& [m, v] : other_worst)
        others << method_token(m) << " " << fmt(v, 3) << " ";
    return {count > 0 && worst <= 1e-3, std::to_string(count) + " proposed/oracle fits; max ||V^T V - I||_max = " +
                                            fmt(worst, 3) + ", tol 1e-3 (not asserted: " + others.str() + ")"};
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(COMPCA_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(double& smoke_secs)
{
    const fs::path dir = fs::temp_directory_path() / "compca_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string smoke = (fs::path(COMPCA_CONFIG_DIR) / "smoke.json").string();

    bool ok = true;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    const int a = run_cli("simulate --config " + smoke + " --out-dir " + (dir / "s1").string());
    smoke_secs = seconds_since(t0);
    const int b = run_cli("simulate --config " + smoke + " --out-dir " + (dir / "s2").string() + " --jobs 2");
    ok = ok && a == 0 && b == 0;
    for(const char* f : {"mse_table.csv", "replicates.csv", "scenario.json"})
    {
        const bool same = ok && io::read_file(dir / "s1" / f) == io::read_file(dir / "s2" / f);
        ok = ok && same;
        detail += std::string("simulate ") + f + (same ? " identical; " : " DIFFERS; ");
    }

    // fit on one simulated clr dataset, cross-validated
    Rng b_rng = make_stream(31, 0, RngStream::Basis);
    Rng w_rng = make_stream(31, 0, RngStream::Wishart);
    Rng m_rng = make_stream(31, 0, RngStream::Means);
    Rng s_rng = make_stream(31, 0, RngStream::Samples);
    const GroundTruth truth = build_covariance(generate_row_sparse_basis(100, 3, 6, b_rng), w_rng, m_rng);
    const auto y = sample_log_basis(80, truth, Distribution::Normal, s_rng);
    io::write_file_atomic(dir / "clr.csv", io::labeled_csv(clr(compose(y.values)).values, Labels{}));
    const std::string fit = "fit --input " + (dir / "clr.csv").string() + " --d 3 --q 0 --cv --seed 5 --out-dir ";
    const int c = run_cli(fit + (dir / "f1").string());
    const int d = run_cli(fit + (dir / "f2").string());
    ok = ok && c == 0 && d == 0;
    for(const char* f : {"fit.json", "loadings.csv", "cv.json", "cv.csv"})
    {
        const bool same = c == 0 && d == 0 && io::read_file(dir / "f1" / f) == io::read_file(dir / "f2" / f);
        ok = ok && same;
        detail += std::string("fit ") + f + (same ? " identical; " : " DIFFERS; ");
    }
    fs::remove_all(dir);
    return {ok, detail + "smoke simulate (1 replicate, p=500) took " + fmt(smoke_secs, 3) + " s"};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance checks"};
    int jobs = 1;
    std::vector<std::string> only;
    app.add_option("--jobs", jobs, "Worker threads for the simulation cells");
    app.add_option("--only", only, "Run only these checks (by name)");
    CLI11_PARSE(app, argc, argv);

    auto wanted = [&](const std::string& name) {
        return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
    };

    int failures = 0;
    auto report = [&](const std::string& name, const Outcome& o) {
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        failures += !o.pass;
    };

    try
    {
        if(wanted("prox-oracle"))
            report("prox-oracle", prox_oracle());
        if(wanted("clr-covariance-identity"))
            report("clr-covariance-identity", clr_identity());
        if(wanted("spiked-one-over-p"))
            report("spiked-one-over-p", spiked_rate());
        if(wanted("subspace-bound") || wanted("interlacing"))
        {
            const TheoryRun t = theory_instances();
            if(wanted("subspace-bound"))
                report("subspace-bound", t.bound);
            if(wanted("interlacing"))
                report("interlacing", t.interlacing);
        }
        if(wanted("row-sparsity-cell") || wanted("near-orthonormality"))
        {
            const auto t0 = std::chrono::steady_clock::now();
            const ScenarioResult r = run_scenario(load_config("table1_cell.json"), jobs);
            const double secs = seconds_since(t0);
            if(wanted("row-sparsity-cell"))
                report("row-sparsity-cell", row_cell(r, secs));
            if(wanted("near-orthonormality"))
                report("near-orthonormality", near_orthonormality(r));
        }
        if(wanted("column-cell"))
        {
            const auto t0 = std::chrono::steady_clock::now();
            const ScenarioResult r = run_scenario(load_config("column_cell.json"), jobs);
            report("column-cell", column_cell(r, seconds_since(t0)));
        }
        if(wanted("determinism"))
        {
            double smoke = 0.0;
            report("determinism", determinism(smoke));
        }
    } catch(const std::exception& e) {
        std::cout << "FAIL harness: " << e.what() << std::endl;
        return 1;
    }
    std::cout << (failures == 0 ? "all acceptance checks passed" : std::to_string(failures) + " check(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
