#include "compca/admm.hpp"
#include "compca/io.hpp"
#include "compca/linalg.hpp"
#include "compca/model_selection.hpp"
#include "compca/simulation.hpp"
#include "compca/transforms.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>

using namespace compca;
namespace fs = std::filesystem;
using io::json;

namespace {

enum ExitCode { kOk = 0, kInputError = 2, kDegenerate = 3, kNumerical = 4 };

std::vector<std::string> g_argv;

// --seed wins, then COMP_PCA_SEED, then `fallback`.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback)
{
    if(flag)
        return *flag;
    if(const char* env = std::getenv("COMP_PCA_SEED"); env && *env)
    {
        try
        {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(env, &pos);
            if(pos != std::string(env).size())
                throw std::invalid_argument("trailing characters");
            return v;
        } catch(const std::exception&) {
            throw InputError(std::string("COMP_PCA_SEED='") + env + "' is not a nonnegative integer");
        }
    }
    return fallback;
}

// Reads the labeled matrix and, unless `transform` is "none", treats it as
// counts or compositions: zeros replaced, closed, then transformed.
TransformedMatrix load_analysis_matrix(const fs::path& path, const std::string& transform, double pseudocount,
                                       double power_a)
{
    io::LabeledMatrix m = io::read_labeled_csv(path);
    if(transform == "none")
    {
        if(!m.values.allFinite())
            throw InputError(path.string() + ": non-finite entries");
        return TransformedMatrix{m.values, TransformTag::Raw, m.labels, 1.0};
    }
    CountMatrix counts = CountMatrix::checked(m.values, m.labels);
    if(pseudocount > 0.0)
        counts = replace_zeros(counts, pseudocount);
    return apply_transform(closure(counts), parse_transform(transform), power_a);
}

void add_transform_flags(CLI::App* sub, std::string& transform, double& pseudocount, double& power_a,
                         bool allow_none)
{
    std::vector<std::string> choices{"clr", "log", "raw", "power"};
    if(allow_none)
        choices.insert(choices.begin(), "none");
    sub->add_option("--transform", transform, allow_none ? "Preprocessing of the input (none: use as given)"
                                                         : "Transform applied after closure")
        ->check(CLI::IsMember(choices))
        ->capture_default_str();
    sub->add_option("--pseudocount", pseudocount, "Replacement for zero counts (0 disables)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--power-a", power_a, "Exponent of the power transform, in (0, 1]")->capture_default_str();
}

std::vector<double> parse_grid_list(const std::string& text, bool exponentiate)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while(std::getline(ss, item, ','))
    {
        try
        {
            std::size_t pos = 0;
            const double v = std::stod(item, &pos);
            if(pos != item.size())
                throw std::invalid_argument(item);
            out.push_back(exponentiate ? std::exp(v) : v);
        } catch(const std::exception&) {
            throw InputError("grid entry '" + item + "' is not a number");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

struct TransformArgs
{
    std::string input;
    std::string output;
    std::string transform = "clr";
    double pseudocount = 0.05;
    double power_a = 0.5;
};

int cmd_transform(const TransformArgs& a)
{
    const std::string started = io::utc_timestamp();
    const TransformedMatrix t = load_analysis_matrix(a.input, a.transform, a.pseudocount, a.power_a);
    io::write_file_atomic(a.output, io::labeled_csv(t.values, t.labels));

    io::ManifestInfo m;
    m.command = "transform";
    m.arguments = g_argv;
    m.config = {{"transform", a.transform}, {"pseudocount", a.pseudocount}, {"power_a", a.power_a}};
    m.seeds = json::object();
    m.inputs = {a.input};
    m.outputs = {a.output};
    m.started_at = started;
    const fs::path out = fs::path(a.output);
    io::write_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), m);
    return kOk;
}

// ---------------------------------------------------------------------------

struct FitArgs
{
    std::string input;
    std::string out_dir;
    std::string transform = "none";
    double pseudocount = 0.05;
    double power_a = 0.5;
    Index d = 2;
    std::string mode = "row";
    std::string q = "0";
    std::optional<double> alpha;
    bool cv = false;
    std::optional<std::string> alpha_grid;
    std::optional<std::string> a0_grid;
    int folds = 5;
    std::optional<std::uint64_t> seed;
    double mu = 1000.0;
    std::optional<double> beta;
    std::optional<double> rho;
    int max_iter = 1000;
    double tol = 1e-5;
};

int cmd_fit(const FitArgs& a)
{
    const std::string started = io::utc_timestamp();
    if(a.alpha && a.cv)
        throw InputError("fit: give either --alpha or --cv, not both");
    if(!a.alpha && !a.cv)
        throw InputError("fit: one of --alpha or --cv is required");
    if(a.alpha_grid && a.a0_grid)
        throw InputError("fit: give either --alpha-grid or --a0-grid, not both");

    const TransformedMatrix data = load_analysis_matrix(a.input, a.transform, a.pseudocount, a.power_a);
    const Index p = data.values.cols();
    if(a.d < 1 || a.d >= p)
        throw InputError("fit: d = " + std::to_string(a.d) + " must satisfy 1 <= d < p = " + std::to_string(p));

    SolverConfig cfg;
    cfg.mode = parse_mode(a.mode);
    cfg.q = parse_penalty(a.q);
    cfg.mu = a.mu;
    cfg.beta = a.beta;
    cfg.rho = a.rho;
    cfg.max_iter = a.max_iter;
    cfg.tol = a.tol;

    const std::uint64_t seed = resolve_seed(a.seed, 1);
    std::optional<CvResult> cv;
    if(a.cv)
    {
        std::vector<double> grid;
        if(a.alpha_grid)
            grid = parse_grid_list(*a.alpha_grid, false);
        else if(a.a0_grid)
            grid = parse_grid_list(*a.a0_grid, true);
        else
            grid = default_alpha_grid(cfg.mode);
        if(grid.empty())
            throw InputError("fit: the alpha grid is empty");
        cv = cross_validate(data.values, a.d, cfg, grid, a.folds, seed);
        cfg.alpha = cv->best_alpha;
    } else {
        cfg.alpha = *a.alpha;
    }
    cfg.validate();

    const MatrixXd cov = sample_covariance(data.values);
    const SubspaceFit fit = admm_fit(cov, a.d, cfg);

    const fs::path dir(a.out_dir);
    std::vector<fs::path> outputs{dir / "fit.json", dir / "loadings.csv"};
    io::write_file_atomic(outputs[0], io::fit_json(fit, data.labels.cols).dump(2) + "\n");
    io::write_file_atomic(outputs[1], io::loadings_csv(fit.V_hat, data.labels.cols));
    if(cv)
    {
        outputs.push_back(dir / "cv.json");
        outputs.push_back(dir / "cv.csv");
        io::write_file_atomic(outputs[2], io::cv_json(*cv).dump(2) + "\n");
        io::write_file_atomic(outputs[3], io::cv_csv(*cv));
    }

    io::ManifestInfo m;
    m.command = "fit";
    m.arguments = g_argv;
    m.config = {{"transform", a.transform}, {"pseudocount", a.pseudocount}, {"power_a", a.power_a},
                {"d", a.d}, {"mode", a.mode}, {"q", penalty_token(cfg.q)}, {"alpha", cfg.alpha},
                {"cv", a.cv}, {"folds", a.folds}, {"mu", a.mu}, {"beta", fit.hyper.beta},
                {"rho", fit.hyper.rho}, {"max_iter", a.max_iter}, {"tol", a.tol}};
    m.seeds = {{"folds", seed}};
    m.inputs = {a.input};
    m.outputs = outputs;
    m.started_at = started;
    io::write_manifest(dir, m);

    if(!fit.converged)
        std::cerr << "warning: ADMM stopped at max_iter = " << fit.iterations << " (step " << fit.step_delta
                  << ")\n";
    if(fit.degenerate_gap)
        std::cerr << "warning: lambda_d and lambda_{d+1} of the covariance coincide; the initial subspace is not unique\n";
    if(fit.degenerate)
    {
        std::cerr << "warning: degenerate fit, every loading is zero (alpha = " << cfg.alpha << ")\n";
        return kDegenerate;
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs
{
    std::string config;
    std::string out_dir;
    int jobs = 1;
    std::optional<int> replicates;
    std::optional<std::uint64_t> seed;
    bool full_scale = false;
};

int cmd_simulate(const SimulateArgs& a)
{
    const std::string started = io::utc_timestamp();
    json raw;
    try
    {
        raw = json::parse(io::read_file(a.config));
    } catch(const json::parse_error& e) {
        throw InputError(a.config + ": " + e.what());
    }
    ScenarioConfig cfg = io::scenario_from_json(raw);
    if(!raw.contains("seed"))
        cfg.seed = resolve_seed(a.seed, cfg.seed);
    else if(a.seed)
        cfg.seed = *a.seed;
    if(a.full_scale)
        cfg.replicates = 100;
    if(a.replicates)
        cfg.replicates = *a.replicates;
    cfg.validate();
    if(a.jobs < 1)
        throw InputError("simulate: --jobs must be at least 1");

    const ScenarioResult result = run_scenario(cfg, a.jobs);
    for(const auto& w : result.warnings)
        std::cerr << "warning: " << w << "\n";

    const fs::path dir(a.out_dir);
    const std::vector<fs::path> outputs{dir / "mse_table.csv", dir / "replicates.csv", dir / "scenario.json"};
    io::write_file_atomic(outputs[0], io::mse_table_csv(result));
    io::write_file_atomic(outputs[1], io::replicates_csv(result));
    io::write_file_atomic(outputs[2], io::scenario_json(cfg).dump(2) + "\n");

    io::ManifestInfo m;
    m.command = "simulate";
    m.arguments = g_argv;
    m.config = io::scenario_json(cfg);
    m.seeds = {{"master", cfg.seed}};
    m.inputs = {a.config};
    m.outputs = outputs;
    m.started_at = started;
    io::write_manifest(dir, m);

    for(const auto& row : result.table)
        if(row.n_ok == 0)
        {
            std::cerr << "error: every replicate failed for method " << method_token(row.method) << "\n";
            return kNumerical;
        }
    return kOk;
}

// ---------------------------------------------------------------------------

struct BiplotArgs
{
    std::string fit;
    std::string data;
    std::string output;
    std::string transform = "none";
    double pseudocount = 0.05;
    double power_a = 0.5;
};

int cmd_biplot(const BiplotArgs& a)
{
    const std::string started = io::utc_timestamp();
    json fj;
    try
    {
        fj = json::parse(io::read_file(a.fit));
    } catch(const json::parse_error& e) {
        throw InputError(a.fit + ": " + e.what());
    }
    const io::StoredFit fit = io::stored_fit_from_json(fj);
    if(fit.V_hat.cols() < 2)
        throw InputError("biplot-data: the fit has d = " + std::to_string(fit.V_hat.cols()) + ", need d >= 2");
    const TransformedMatrix data = load_analysis_matrix(a.data, a.transform, a.pseudocount, a.power_a);
    const io::BiplotData b = io::biplot_data(data.values, fit.V_hat, data.labels);
    io::write_file_atomic(a.output, io::biplot_csv(b));

    io::ManifestInfo m;
    m.command = "biplot-data";
    m.arguments = g_argv;
    m.config = {{"transform", a.transform}, {"pseudocount", a.pseudocount}, {"power_a", a.power_a}};
    m.seeds = json::object();
    m.inputs = {a.fit, a.data};
    m.outputs = {a.output};
    m.started_at = started;
    const fs::path out(a.output);
    io::write_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), m);
    if(b.kept_labels.empty())
        std::cerr << "warning: no variable has a nonzero loading\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct TheoryArgs
{
    std::string omega;
    std::string output;
    Index d = 1;
    std::string q = "0";
    std::string mode = "row";
    std::optional<double> radius;
    std::optional<Index> n;
    double zero_tol = 1e-10;
};

int cmd_theory(const TheoryArgs& a)
{
    const MatrixXd omega = io::read_plain_csv(a.omega);
    if(omega.rows() != omega.cols())
        throw InputError(a.omega + ": Omega must be square");
    check_symmetric(omega, "Omega");
    const Index p = omega.rows();
    if(a.d < 1 || a.d >= p)
        throw InputError("theory-check: need 1 <= d < p");
    const double q = penalty_exponent(parse_penalty(a.q));
    const SparsityMode mode = parse_mode(a.mode);

    const auto eig_omega = spectral_decomposition(omega);
    const MatrixXd gamma = gamma_from_omega(omega);
    const auto eig_gamma = spectral_decomposition(gamma);
    const MatrixXd e = eig_omega.eigenvectors.leftCols(a.d);
    const MatrixXd f = eig_gamma.eigenvectors.leftCols(a.d);
    const double measured = sin_theta_sq(e, f);

    double radius = 0.0;
    if(a.radius)
    {
        radius = *a.radius;
    } else {
        // Entries below zero_tol are round-off from the eigensolver.
        const MatrixXd cleaned = (e.array().abs() <= a.zero_tol).select(0.0, e);
        radius = mode == SparsityMode::Row ? row_sparsity_radius(cleaned, q) : column_sparsity_radius(cleaned, q);
    }
    const VectorXd lambdas = eig_omega.eigenvalues.head(a.d + 1);
    const TheoryQuantities t = theory_quantities(lambdas, a.d, p, radius, q, a.n.value_or(1));

    const double norm = eig_omega.eigenvalues.cwiseAbs().maxCoeff();
    const double slack = (eig_gamma.eigenvalues - eig_omega.eigenvalues).maxCoeff();
    const bool interlacing = slack <= 1e-8 * norm;

    json out = io::theory_json(t);
    if(!a.n)
        out.erase("epsilon_n");
    out["p"] = p;
    out["d"] = a.d;
    out["q"] = penalty_token(parse_penalty(a.q));
    out["mode"] = mode_token(mode);
    out["radius"] = radius;
    out["eigengap"] = lambdas(a.d - 1) - lambdas(a.d);
    out["sin_theta_sq"] = measured;
    out["bound_holds"] = measured <= t.bound_theorem1;
    out["interlacing_holds"] = interlacing;
    out["interlacing_max_excess"] = slack;
    const std::string text = out.dump(2) + "\n";
    if(a.output.empty())
        std::cout << text;
    else
        io::write_file_atomic(a.output, text);
    return kOk;
}

// ---------------------------------------------------------------------------

struct MuSweepArgs
{
    std::string input;
    std::string output;
    std::string transform = "none";
    double pseudocount = 0.05;
    double power_a = 0.5;
    Index d = 2;
    std::string mode = "row";
    std::string q = "0";
    double alpha = 1.0;
    std::string mu_values = "1,10,100,1000,10000";
    int max_iter = 1000;
    double tol = 1e-5;
};

// Orthonormality deviation of the final iterate as mu varies.
int cmd_mu_sweep(const MuSweepArgs& a)
{
    const TransformedMatrix data = load_analysis_matrix(a.input, a.transform, a.pseudocount, a.power_a);
    if(a.d < 1 || a.d >= data.values.cols())
        throw InputError("mu-sweep: need 1 <= d < p");
    const PreparedCovariance prepared = prepare_covariance(sample_covariance(data.values), a.d);
    std::string csv = "mu,max_dev\n";
    for(double mu : parse_grid_list(a.mu_values, false))
    {
        SolverConfig cfg;
        cfg.mode = parse_mode(a.mode);
        cfg.q = parse_penalty(a.q);
        cfg.alpha = a.alpha;
        cfg.mu = mu;
        cfg.max_iter = a.max_iter;
        cfg.tol = a.tol;
        cfg.validate();
        const SubspaceFit fit = admm_fit(prepared, cfg);
        csv += io::format_double(mu) + "," + io::format_double(fit.orthonormality_error) + "\n";
    }
    io::write_file_atomic(a.output, csv);
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    g_argv.assign(argv, argv + argc);
    CLI::App app{"Sparse principal subspace estimation for compositional data"};
    app.set_version_flag("--version", std::string(io::kVersion));
    app.require_subcommand(1);

    TransformArgs ta;
    auto* st = app.add_subcommand("transform", "Replace zeros, close, and transform a count matrix");
    st->add_option("--input", ta.input, "Labeled count or composition CSV")->required()->check(CLI::ExistingFile);
    st->add_option("--output", ta.output, "Transformed CSV")->required();
    add_transform_flags(st, ta.transform, ta.pseudocount, ta.power_a, false);

    FitArgs fa;
    auto* sf = app.add_subcommand("fit", "Fit a sparse principal subspace");
    sf->add_option("--input", fa.input, "Labeled data CSV")->required()->check(CLI::ExistingFile);
    sf->add_option("--out-dir", fa.out_dir, "Directory for fit.json, loadings.csv, cv.*, manifest.json")->required();
    add_transform_flags(sf, fa.transform, fa.pseudocount, fa.power_a, true);
    sf->add_option("--d", fa.d, "Subspace dimension")->required();
    sf->add_option("--mode", fa.mode, "row or column")->check(CLI::IsMember({"row", "column"}))->capture_default_str();
    sf->add_option("--q", fa.q, "Penalty exponent: 0, 1/2, 2/3, 1")->capture_default_str();
    sf->add_option("--alpha", fa.alpha, "Penalty weight");
    sf->add_flag("--cv", fa.cv, "Select alpha by cross-validation");
    sf->add_option("--alpha-grid", fa.alpha_grid, "Comma-separated alpha values for --cv");
    sf->add_option("--a0-grid", fa.a0_grid, "Comma-separated a0 values, alpha = exp(a0)");
    sf->add_option("--folds", fa.folds, "Cross-validation folds")->capture_default_str();
    sf->add_option("--seed", fa.seed, "Fold seed (default: COMP_PCA_SEED, then 1)");
    sf->add_option("--mu", fa.mu)->capture_default_str();
    sf->add_option("--beta", fa.beta, "Default 5.8 ||S||_2");
    sf->add_option("--rho", fa.rho, "Default 6.14 ||S||_2");
    sf->add_option("--max-iter", fa.max_iter)->capture_default_str();
    sf->add_option("--tol", fa.tol)->capture_default_str();

    SimulateArgs sa;
    auto* ss = app.add_subcommand("simulate", "Run a simulation scenario");
    ss->add_option("--config", sa.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    ss->add_option("--out-dir", sa.out_dir, "Directory for mse_table.csv, replicates.csv, manifest.json")->required();
    ss->add_option("--jobs", sa.jobs, "Worker threads")->capture_default_str();
    ss->add_option("--replicates", sa.replicates, "Override the replicate count");
    ss->add_option("--seed", sa.seed, "Override the master seed");
    ss->add_flag("--full-scale", sa.full_scale, "Use 100 replicates");

    BiplotArgs ba;
    auto* sb = app.add_subcommand("biplot-data", "Scores and loadings on the first two components");
    sb->add_option("--fit", ba.fit, "fit.json")->required()->check(CLI::ExistingFile);
    sb->add_option("--data", ba.data, "Labeled data CSV the fit was computed on")->required()->check(CLI::ExistingFile);
    sb->add_option("--output", ba.output, "biplot.csv")->required();
    add_transform_flags(sb, ba.transform, ba.pseudocount, ba.power_a, true);

    TheoryArgs th;
    auto* sth = app.add_subcommand("theory-check", "Identifiability quantities and bound for a basis covariance");
    sth->add_option("--omega", th.omega, "Header-free CSV of Omega")->required()->check(CLI::ExistingFile);
    sth->add_option("--d", th.d)->required();
    sth->add_option("--q", th.q)->capture_default_str();
    sth->add_option("--mode", th.mode)->check(CLI::IsMember({"row", "column"}))->capture_default_str();
    sth->add_option("--radius", th.radius, "R_q (default: measured on the leading eigenvectors of Omega)");
    sth->add_option("--n", th.n, "Sample size for epsilon_n");
    sth->add_option("--zero-tol", th.zero_tol, "Entries below this count as zero when measuring R_q")
        ->capture_default_str();
    sth->add_option("--output", th.output, "JSON output (default: stdout)");

    MuSweepArgs ma;
    auto* sm = app.add_subcommand("mu-sweep", "Orthonormality deviation of the fit against mu");
    sm->add_option("--input", ma.input, "Labeled data CSV")->required()->check(CLI::ExistingFile);
    sm->add_option("--output", ma.output, "Two-column CSV: mu, max_dev")->required();
    add_transform_flags(sm, ma.transform, ma.pseudocount, ma.power_a, true);
    sm->add_option("--d", ma.d)->required();
    sm->add_option("--mode", ma.mode)->check(CLI::IsMember({"row", "column"}))->capture_default_str();
    sm->add_option("--q", ma.q)->capture_default_str();
    sm->add_option("--alpha", ma.alpha)->required();
    sm->add_option("--mu-values", ma.mu_values)->capture_default_str();
    sm->add_option("--max-iter", ma.max_iter)->capture_default_str();
    sm->add_option("--tol", ma.tol)->capture_default_str();

    try
    {
        app.parse(argc, argv);
    } catch(const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try
    {
        if(*st)
            return cmd_transform(ta);
        if(*sf)
            return cmd_fit(fa);
        if(*ss)
            return cmd_simulate(sa);
        if(*sb)
            return cmd_biplot(ba);
        if(*sth)
            return cmd_theory(th);
        if(*sm)
            return cmd_mu_sweep(ma);
    } catch(const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch(const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch(const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch(const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
