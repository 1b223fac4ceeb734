#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lossprior {

enum class CsvTransform { kNone, kLogAll };

// A validated regression dataset: finite values, distinct covariate names,
// n > d + 1, full-column-rank design.
struct Dataset {
    std::string name;
    std::string response_name;
    std::vector<std::string> covariate_names;   // CSV header identifiers
    std::vector<std::string> covariate_labels;  // display labels (builtins)
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    bool transform_log = false;
    std::string checksum; // fnv1a-64 of the file bytes, hex

    int n() const { return static_cast<int>(X.rows()); }
    int d() const { return static_cast<int>(X.cols()); }
};

// Loads a UTF-8 comma-separated file with a mandatory header row; decimal
// points, no thousands separators, LF or CRLF. Covariates are all
// non-response columns in header order.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 CsvTransform transform = CsvTransform::kNone);

// Writes the dataset back out (header + %.17g values): a load/write round
// trip reproduces the numbers bit-exactly.
void write_csv(const Dataset& ds, const std::string& path);

// Packaged datasets: "uscrime" (n=47, d=15) and "hald" (n=13, d=4), loaded
// from the data directory and verified against data/MANIFEST. For uscrime,
// log_variant applies the classic log transform (response and all covariates
// except the Southern-state indicator).
Dataset builtin(const std::string& name, bool log_variant = false);

// Data directory resolution: $LOSSPRIOR_DATA_DIR, then ./data, then the
// compiled-in default.
std::string data_dir();

std::string file_checksum(const std::string& path);

} // namespace lossprior
