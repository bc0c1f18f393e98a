#pragma once

#include "compca/admm.hpp"
#include "compca/model_selection.hpp"
#include "compca/simulation.hpp"
#include "compca/transforms.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace compca::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct LabeledMatrix
{
    MatrixXd values;
    Labels labels;
};

// Shortest form that reads back bit-exactly ("%.17g").
std::string format_double(double v);

// First row: corner cell then column labels. First column: row labels.
// Comma-delimited, '.' decimal point. Errors carry the 1-based line number.
LabeledMatrix parse_labeled_csv(const std::string& text, const std::string& source = "<input>");
LabeledMatrix read_labeled_csv(const fs::path& path);
// Header-free dense numeric CSV.
MatrixXd parse_plain_csv(const std::string& text, const std::string& source = "<input>");
MatrixXd read_plain_csv(const fs::path& path);

std::string labeled_csv(const MatrixXd& values, const Labels& labels, const std::string& corner = "id");
std::string plain_csv(const MatrixXd& values);

// {"rows": r, "cols": c, "data": [[row 0], [row 1], ...]}
json matrix_json(const MatrixXd& m);
MatrixXd matrix_from_json(const json& j);

json fit_json(const SubspaceFit& fit, const std::vector<std::string>& var_labels);
// Reads back the fields needed downstream (V_hat, labels, mode, q, alpha).
struct StoredFit
{
    MatrixXd V_hat;
    std::vector<std::string> labels;
    SparsityMode mode = SparsityMode::Row;
    Penalty q = Penalty::L0;
    double alpha = 0.0;
};
StoredFit stored_fit_from_json(const json& j);

// One row per variable with at least one nonzero loading, one column per
// component, zeros left blank.
std::string loadings_csv(const MatrixXd& v_hat, const std::vector<std::string>& var_labels);

json cv_json(const CvResult& cv);
// Two columns: alpha, score.
std::string cv_csv(const CvResult& cv);

ScenarioConfig scenario_from_json(const json& j);
json scenario_json(const ScenarioConfig& cfg);
// method, mean, se, n_ok, n_failed
std::string mse_table_csv(const ScenarioResult& result);
std::string replicates_csv(const ScenarioResult& result);

json theory_json(const TheoryQuantities& t);

struct BiplotData
{
    MatrixXd scores;    // n x 2
    MatrixXd loadings;  // p x 2
    std::vector<std::string> row_labels;
    std::vector<std::string> var_labels;
    std::vector<std::string> kept_labels;  // variables with a nonzero loading
};

// scores = (data - column means) * V_hat[:, 0:2].
BiplotData biplot_data(const MatrixXd& data, const MatrixXd& v_hat, const Labels& labels);
// Columns: kind (score|loading), label, pc1, pc2, kept.
std::string biplot_csv(const BiplotData& b);

void write_file_atomic(const fs::path& path, const std::string& content);
std::string read_file(const fs::path& path);
std::string sha256_hex(const std::string& bytes);

struct ManifestInfo
{
    std::string command;
    std::vector<std::string> arguments;
    json config;
    json seeds;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    std::string started_at;
};

std::string utc_timestamp();
json manifest_json(const ManifestInfo& info);
// Writes <dir>/manifest.json, replacing any previous manifest there.
void write_manifest(const fs::path& dir, const ManifestInfo& info);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace compca::io
