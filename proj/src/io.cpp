#include "compca/io.hpp"

#include "compca/linalg.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace compca::io {

std::string format_double(double v)
{
    if(std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

// Splits one CSV record; double quotes delimit fields that contain commas.
std::vector<std::string> split_record(const std::string& line, std::size_t lineno, const std::string& source)
{
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for(std::size_t i = 0; i < line.size(); i++)
    {
        const char c = line[i];
        if(quoted)
        {
            if(c == '"')
            {
                if(i + 1 < line.size() && line[i + 1] == '"')
                {
                    field.push_back('"');
                    i++;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if(c == '"') {
            quoted = true;
        } else if(c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if(quoted)
        throw InputError(source + ":" + std::to_string(lineno) + ": unterminated quoted field");
    out.push_back(std::move(field));
    return out;
}

std::string trim(std::string s)
{
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if(b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, std::size_t lineno, std::size_t col, const std::string& source)
{
    const std::string t = trim(cell);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if(!t.empty() && *first == '+')
        first++;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if(t.empty() || ec != std::errc() || ptr != last)
        throw InputError(source + ":" + std::to_string(lineno) + ": column " + std::to_string(col + 1)
                         + ": '" + t + "' is not a number");
    return v;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while(std::getline(in, line))
    {
        if(!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(line);
    }
    // tolerate trailing blank lines only
    while(!lines.empty() && trim(lines.back()).empty())
        lines.pop_back();
    return lines;
}

std::string quote_label(const std::string& s)
{
    if(s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for(char c : s)
    {
        if(c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace

LabeledMatrix parse_labeled_csv(const std::string& text, const std::string& source)
{
    const auto lines = lines_of(text);
    if(lines.empty())
        throw InputError(source + ": empty file");
    auto header = split_record(lines[0], 1, source);
    if(header.size() < 2)
        throw InputError(source + ":1: header needs a corner cell and at least one column label");

    LabeledMatrix out;
    for(std::size_t j = 1; j < header.size(); j++)
        out.labels.cols.push_back(trim(header[j]));
    const std::size_t p = out.labels.cols.size();
    const std::size_t n = lines.size() - 1;
    if(n == 0)
        throw InputError(source + ": no data rows");
    out.values.resize(static_cast<Index>(n), static_cast<Index>(p));
    for(std::size_t i = 0; i < n; i++)
    {
        const std::size_t lineno = i + 2;
        const auto cells = split_record(lines[i + 1], lineno, source);
        if(cells.size() != p + 1)
            throw InputError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(p + 1)
                             + " fields, found " + std::to_string(cells.size()));
        out.labels.rows.push_back(trim(cells[0]));
        for(std::size_t j = 0; j < p; j++)
            out.values(static_cast<Index>(i), static_cast<Index>(j)) = parse_number(cells[j + 1], lineno, j + 1, source);
    }
    return out;
}

LabeledMatrix read_labeled_csv(const fs::path& path)
{
    return parse_labeled_csv(read_file(path), path.string());
}

MatrixXd parse_plain_csv(const std::string& text, const std::string& source)
{
    const auto lines = lines_of(text);
    if(lines.empty())
        throw InputError(source + ": empty file");
    std::vector<std::vector<double>> rows;
    for(std::size_t i = 0; i < lines.size(); i++)
    {
        const auto cells = split_record(lines[i], i + 1, source);
        std::vector<double> row;
        for(std::size_t j = 0; j < cells.size(); j++)
            row.push_back(parse_number(cells[j], i + 1, j, source));
        if(!rows.empty() && row.size() != rows.front().size())
            throw InputError(source + ":" + std::to_string(i + 1) + ": expected " + std::to_string(rows.front().size())
                             + " fields, found " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for(Index i = 0; i < m.rows(); i++)
        for(Index j = 0; j < m.cols(); j++)
            m(i, j) = rows[i][j];
    return m;
}

MatrixXd read_plain_csv(const fs::path& path)
{
    return parse_plain_csv(read_file(path), path.string());
}

std::string labeled_csv(const MatrixXd& values, const Labels& labels, const std::string& corner)
{
    const Labels lab = (labels.rows.empty() || labels.cols.empty())
                           ? Labels::numbered(values.rows(), values.cols())
                           : labels;
    lab.check_shape(values.rows(), values.cols());
    std::string out = quote_label(corner);
    for(const auto& c : lab.cols)
        out += "," + quote_label(c);
    out += "\n";
    for(Index i = 0; i < values.rows(); i++)
    {
        out += quote_label(lab.rows[i]);
        for(Index j = 0; j < values.cols(); j++)
            out += "," + format_double(values(i, j));
        out += "\n";
    }
    return out;
}

std::string plain_csv(const MatrixXd& values)
{
    std::string out;
    for(Index i = 0; i < values.rows(); i++)
    {
        for(Index j = 0; j < values.cols(); j++)
        {
            if(j > 0)
                out += ",";
            out += format_double(values(i, j));
        }
        out += "\n";
    }
    return out;
}

json matrix_json(const MatrixXd& m)
{
    json data = json::array();
    for(Index i = 0; i < m.rows(); i++)
    {
        json row = json::array();
        for(Index j = 0; j < m.cols(); j++)
            row.push_back(m(i, j));
        data.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatrixXd matrix_from_json(const json& j)
{
    try
    {
        const Index r = j.at("rows").get<Index>();
        const Index c = j.at("cols").get<Index>();
        const json& data = j.at("data");
        if(!data.is_array() || static_cast<Index>(data.size()) != r)
            throw InputError("matrix envelope: 'data' must hold 'rows' arrays");
        MatrixXd m(r, c);
        for(Index i = 0; i < r; i++)
        {
            if(static_cast<Index>(data[i].size()) != c)
                throw InputError("matrix envelope: row " + std::to_string(i) + " has the wrong length");
            for(Index k = 0; k < c; k++)
                m(i, k) = data[i][k].get<double>();
        }
        return m;
    } catch(const json::exception& e) {
        throw InputError(std::string("matrix envelope: ") + e.what());
    }
}

json fit_json(const SubspaceFit& fit, const std::vector<std::string>& var_labels)
{
    json j;
    j["p"] = fit.V_hat.rows();
    j["d"] = fit.V_hat.cols();
    j["mode"] = mode_token(fit.mode);
    j["q"] = penalty_token(fit.q);
    j["alpha"] = fit.alpha;
    if(fit.mode == SparsityMode::Column)
        j["column_alphas"] = std::vector<double>(fit.column_alphas.data(), fit.column_alphas.data() + fit.column_alphas.size());
    j["beta"] = fit.hyper.beta;
    j["rho"] = fit.hyper.rho;
    j["mu"] = fit.hyper.mu;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["primal_residual"] = fit.primal_residual;
    j["first_primal_residual"] = fit.first_primal_residual;
    j["step_delta"] = fit.step_delta;
    j["objective"] = fit.objective;
    j["orthonormality_error"] = fit.orthonormality_error;
    j["degenerate"] = fit.degenerate;
    j["degenerate_eigengap"] = fit.degenerate_gap;
    if(fit.mode == SparsityMode::Row)
        j["support"] = fit.row_support;
    else
        j["support"] = fit.column_support;
    j["labels"] = var_labels;
    j["V_hat"] = matrix_json(fit.V_hat);
    return j;
}

StoredFit stored_fit_from_json(const json& j)
{
    StoredFit f;
    try
    {
        f.V_hat = matrix_from_json(j.at("V_hat"));
        f.mode = parse_mode(j.at("mode").get<std::string>());
        f.q = parse_penalty(j.at("q").get<std::string>());
        f.alpha = j.at("alpha").get<double>();
        if(j.contains("labels"))
            f.labels = j.at("labels").get<std::vector<std::string>>();
    } catch(const json::exception& e) {
        throw InputError(std::string("fit file: ") + e.what());
    }
    if(!f.labels.empty() && static_cast<Index>(f.labels.size()) != f.V_hat.rows())
        throw InputError("fit file: label count does not match V_hat");
    return f;
}

std::string loadings_csv(const MatrixXd& v_hat, const std::vector<std::string>& var_labels)
{
    std::string out = "label";
    for(Index j = 0; j < v_hat.cols(); j++)
        out += ",PC" + std::to_string(j + 1);
    out += "\n";
    for(Index i = 0; i < v_hat.rows(); i++)
    {
        if(v_hat.row(i).isZero(0.0))
            continue;
        out += quote_label(var_labels.empty() ? "var" + std::to_string(i + 1) : var_labels[i]);
        for(Index j = 0; j < v_hat.cols(); j++)
            out += "," + (v_hat(i, j) == 0.0 ? std::string() : format_double(v_hat(i, j)));
        out += "\n";
    }
    return out;
}

json cv_json(const CvResult& cv)
{
    return json{{"grid", cv.grid},
                {"scores", cv.scores},
                {"best_alpha", cv.best_alpha},
                {"best_index", cv.best_index},
                {"folds", cv.folds},
                {"seed", cv.seed},
                {"fold_assignment", cv.fold_assignment}};
}

std::string cv_csv(const CvResult& cv)
{
    std::string out = "alpha,score\n";
    for(std::size_t a = 0; a < cv.grid.size(); a++)
        out += format_double(cv.grid[a]) + "," + format_double(cv.scores[a]) + "\n";
    return out;
}

namespace {

const std::set<std::string> kScenarioKeys = {
    "n", "p", "d", "R0", "sparsity", "q", "distribution", "methods", "alpha_grid", "a0_grid",
    "replicates", "seed", "folds", "power_a", "mu", "max_iter", "tol"};

template <typename T>
T scenario_get(const json& j, const char* key, const char* type)
{
    try
    {
        return j.at(key).get<T>();
    } catch(const json::exception&) {
        throw InputError(std::string("scenario: key '") + key + "' must be " + type);
    }
}

Index scenario_index(const json& j, const char* key)
{
    if(!j.at(key).is_number_integer())
        throw InputError(std::string("scenario: key '") + key + "' must be an integer");
    return j.at(key).get<Index>();
}

Penalty scenario_penalty(const json& v)
{
    if(v.is_string())
        return parse_penalty(v.get<std::string>());
    if(v.is_number())
    {
        const double q = v.get<double>();
        if(q == 0.0)
            return Penalty::L0;
        if(q == 0.5)
            return Penalty::LHalf;
        if(q == 1.0)
            return Penalty::L1;
    }
    throw InputError("scenario: key 'q' must be one of 0, \"1/2\", \"2/3\", 1");
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j)
{
    if(!j.is_object())
        throw InputError("scenario: top level must be a JSON object");
    for(const auto& [key, value] : j.items())
        if(!kScenarioKeys.count(key))
            throw InputError("scenario: unknown key '" + key + "'");

    ScenarioConfig c;
    if(j.contains("n"))
        c.n = scenario_index(j, "n");
    if(j.contains("p"))
        c.p = scenario_index(j, "p");
    if(j.contains("d"))
        c.d = scenario_index(j, "d");
    if(j.contains("R0"))
        c.R0 = scenario_index(j, "R0");
    if(j.contains("sparsity"))
        c.sparsity = parse_mode(scenario_get<std::string>(j, "sparsity", "\"row\" or \"column\""));
    if(j.contains("q"))
        c.q = scenario_penalty(j.at("q"));
    if(j.contains("distribution"))
        c.distribution = parse_distribution(scenario_get<std::string>(j, "distribution", "\"normal\" or \"gamma\""));
    if(j.contains("methods"))
    {
        c.methods.clear();
        for(const auto& m : scenario_get<std::vector<std::string>>(j, "methods", "an array of method names"))
            c.methods.push_back(parse_method(m));
    }
    if(j.contains("alpha_grid") && j.contains("a0_grid"))
        throw InputError("scenario: give either 'alpha_grid' or 'a0_grid', not both");
    if(j.contains("alpha_grid"))
        c.alpha_grid = scenario_get<std::vector<double>>(j, "alpha_grid", "an array of numbers");
    if(j.contains("a0_grid"))
        for(double a0 : scenario_get<std::vector<double>>(j, "a0_grid", "an array of numbers"))
            c.alpha_grid.push_back(std::exp(a0));
    if(j.contains("replicates"))
        c.replicates = static_cast<int>(scenario_index(j, "replicates"));
    if(j.contains("seed"))
    {
        if(!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
            throw InputError("scenario: key 'seed' must be a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if(j.contains("folds"))
        c.folds = static_cast<int>(scenario_index(j, "folds"));
    if(j.contains("power_a"))
        c.power_a = scenario_get<double>(j, "power_a", "a number");
    if(j.contains("mu"))
        c.mu = scenario_get<double>(j, "mu", "a number");
    if(j.contains("max_iter"))
        c.max_iter = static_cast<int>(scenario_index(j, "max_iter"));
    if(j.contains("tol"))
        c.tol = scenario_get<double>(j, "tol", "a number");
    c.validate();
    return c;
}

json scenario_json(const ScenarioConfig& c)
{
    std::vector<std::string> methods;
    for(Method m : c.methods)
        methods.push_back(method_token(m));
    return json{{"n", c.n},
                {"p", c.p},
                {"d", c.d},
                {"R0", c.R0},
                {"sparsity", mode_token(c.sparsity)},
                {"q", penalty_token(c.q)},
                {"distribution", distribution_token(c.distribution)},
                {"methods", methods},
                {"alpha_grid", c.effective_grid()},
                {"replicates", c.replicates},
                {"seed", c.seed},
                {"folds", c.folds},
                {"power_a", c.power_a},
                {"mu", c.mu},
                {"max_iter", c.max_iter},
                {"tol", c.tol}};
}

std::string mse_table_csv(const ScenarioResult& result)
{
    std::string out = "method,mean,se,n_ok,n_failed\n";
    for(const auto& row : result.table)
        out += method_token(row.method) + "," + format_double(row.mean) + "," + format_double(row.se) + ","
               + std::to_string(row.n_ok) + "," + std::to_string(row.n_failed) + "\n";
    return out;
}

std::string replicates_csv(const ScenarioResult& result)
{
    std::string out = "replicate,method,ok,sin_theta_sq,alpha,orthonormality_error,iterations,converged,degenerate\n";
    for(const auto& r : result.records)
    {
        out += std::to_string(r.replicate) + "," + method_token(r.method) + "," + (r.ok ? "1" : "0") + ","
               + format_double(r.sin_theta_sq) + "," + format_double(r.alpha) + ","
               + format_double(r.orthonormality_error) + "," + std::to_string(r.iterations) + ","
               + (r.converged ? "1" : "0") + "," + (r.degenerate ? "1" : "0") + "\n";
    }
    return out;
}

json theory_json(const TheoryQuantities& t)
{
    return json{{"sigma1_sq", t.sigma1_sq},
                {"sigma2_sq", t.sigma2_sq},
                {"c_q", t.c_q},
                {"bound_theorem1", t.bound_theorem1},
                {"epsilon_n", t.epsilon_n}};
}

BiplotData biplot_data(const MatrixXd& data, const MatrixXd& v_hat, const Labels& labels)
{
    if(v_hat.cols() < 2)
        throw InputError("biplot: the fit needs at least two components");
    if(data.cols() != v_hat.rows())
        throw InputError("biplot: data has " + std::to_string(data.cols()) + " columns but the fit has "
                         + std::to_string(v_hat.rows()) + " variables");
    const Labels lab = (labels.rows.empty() || labels.cols.empty())
                           ? Labels::numbered(data.rows(), data.cols())
                           : labels;
    BiplotData b;
    const MatrixXd centered = data.rowwise() - data.colwise().mean();
    b.loadings = v_hat.leftCols(2);
    b.scores = centered * b.loadings;
    b.row_labels = lab.rows;
    b.var_labels = lab.cols;
    for(Index i = 0; i < b.loadings.rows(); i++)
        if(!b.loadings.row(i).isZero(0.0))
            b.kept_labels.push_back(b.var_labels[i]);
    return b;
}

std::string biplot_csv(const BiplotData& b)
{
    std::string out = "kind,label,pc1,pc2,kept\n";
    for(Index i = 0; i < b.scores.rows(); i++)
        out += "score," + quote_label(b.row_labels[i]) + "," + format_double(b.scores(i, 0)) + ","
               + format_double(b.scores(i, 1)) + ",\n";
    for(Index i = 0; i < b.loadings.rows(); i++)
    {
        const bool kept = !b.loadings.row(i).isZero(0.0);
        out += "loading," + quote_label(b.var_labels[i]) + "," + format_double(b.loadings(i, 0)) + ","
               + format_double(b.loadings(i, 1)) + "," + (kept ? "1" : "0") + "\n";
    }
    return out;
}

void write_file_atomic(const fs::path& path, const std::string& content)
{
    if(path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if(!out)
            throw InputError("cannot write " + tmp.string());
        out << content;
        if(!out)
            throw InputError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if(!in)
        throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if(EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for(unsigned int i = 0; i < len; i++)
    {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest_json(const ManifestInfo& info)
{
    json inputs = json::array();
    for(const auto& p : info.inputs)
        inputs.push_back(json{{"path", p.string()}, {"sha256", sha256_hex(read_file(p))}});
    json outputs = json::array();
    for(const auto& p : info.outputs)
        outputs.push_back(json{{"path", p.string()}, {"sha256", sha256_hex(read_file(p))}});
    return json{{"command", info.command},
                {"arguments", info.arguments},
                {"config", info.config},
                {"seeds", info.seeds},
                {"version", kVersion},
                {"started_at", info.started_at},
                {"finished_at", utc_timestamp()},
                {"inputs", inputs},
                {"outputs", outputs}};
}

void write_manifest(const fs::path& dir, const ManifestInfo& info)
{
    write_file_atomic(dir / "manifest.json", manifest_json(info).dump(2) + "\n");
}

}  // namespace compca::io
