#include "dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

#ifndef LOSSPRIOR_SOURCE_DATA_DIR
#define LOSSPRIOR_SOURCE_DATA_DIR ""
#endif

namespace lossprior {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& cell, int line_no, const std::string& column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (cell.empty() || end != begin + cell.size() || !std::isfinite(v))
        throw ValidationError("unparseable cell '" + cell + "' at line " +
                              std::to_string(line_no) + ", column '" + column + "'");
    return v;
}

void check_full_rank(const Dataset& ds) {
    Eigen::MatrixXd Xc = ds.X.rowwise() - ds.X.colwise().mean();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xc);
    if (qr.rank() < ds.d())
        throw ValidationError("design matrix of '" + ds.name +
                              "' is rank deficient (rank " + std::to_string(qr.rank()) +
                              " < " + std::to_string(ds.d()) + ")");
}

} // namespace

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
    return hex;
}

Dataset load_csv(const std::string& path, const std::string& response_column,
                 CsvTransform transform) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("file '" + path + "' is empty (header row required)");
    const std::vector<std::string> header = split_csv_line(line);
    {
        std::set<std::string> seen;
        for (const auto& h : header) {
            if (h.empty())
                throw ValidationError("file '" + path + "' has an empty header field");
            if (!seen.insert(h).second)
                throw ValidationError("file '" + path + "' has a duplicate header '" + h + "'");
        }
    }
    int resp_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == response_column) resp_col = static_cast<int>(j);
    if (resp_col < 0)
        throw ValidationError("response column '" + response_column + "' not found in '" +
                              path + "'");
    const int ncols = static_cast<int>(header.size());
    if (ncols < 2)
        throw ValidationError("file '" + path + "' needs at least one covariate column");

    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != ncols)
            throw ValidationError("line " + std::to_string(line_no) + " of '" + path +
                                  "' has " + std::to_string(cells.size()) +
                                  " fields, expected " + std::to_string(ncols));
        std::vector<double> row(ncols);
        for (int j = 0; j < ncols; ++j) row[j] = parse_cell(cells[j], line_no, header[j]);
        rows.push_back(std::move(row));
    }

    const int n = static_cast<int>(rows.size());
    const int d = ncols - 1;
    if (n <= d + 1)
        throw ValidationError("dataset '" + path + "' has n = " + std::to_string(n) +
                              " rows but needs n > d + 1 = " + std::to_string(d + 1));

    Dataset ds;
    ds.name = std::filesystem::path(path).stem().string();
    ds.response_name = response_column;
    ds.X.resize(n, d);
    ds.y.resize(n);
    for (int j = 0, c = 0; j < ncols; ++j) {
        if (j == resp_col) continue;
        ds.covariate_names.push_back(header[j]);
        for (int i = 0; i < n; ++i) ds.X(i, c) = rows[i][j];
        ++c;
    }
    for (int i = 0; i < n; ++i) ds.y[i] = rows[i][resp_col];
    ds.covariate_labels = ds.covariate_names;
    ds.checksum = file_checksum(path);

    if (transform == CsvTransform::kLogAll) {
        if ((ds.X.array() <= 0).any() || (ds.y.array() <= 0).any())
            throw ValidationError("log transform of '" + path +
                                  "' requires strictly positive values");
        ds.X = ds.X.array().log();
        ds.y = ds.y.array().log();
        ds.transform_log = true;
    }

    check_full_rank(ds);
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file '" + path + "'");
    for (int j = 0; j < ds.d(); ++j) out << ds.covariate_names[j] << ',';
    out << ds.response_name << '\n';
    char buf[32];
    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.d(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.X(i, j));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", ds.y[i]);
        out << buf << '\n';
    }
}

std::string data_dir() {
    if (const char* env = std::getenv("LOSSPRIOR_DATA_DIR"); env && *env) return env;
    if (std::filesystem::exists("data/MANIFEST")) return "data";
    return LOSSPRIOR_SOURCE_DATA_DIR;
}

namespace {

struct ManifestEntry {
    long rows = 0;
    long cols = 0;
    std::string checksum;
};

std::map<std::string, ManifestEntry> read_manifest(const std::string& dir) {
    const std::string path = dir + "/MANIFEST";
    std::ifstream in(path);
    if (!in) throw ValidationError("data manifest '" + path + "' is missing");
    std::map<std::string, ManifestEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string file;
        ManifestEntry e;
        if (ss >> file >> e.rows >> e.cols >> e.checksum) out[file] = e;
    }
    return out;
}

const std::vector<std::string> kUscrimeLabels = {
    "Percentage of males aged 14-24",
    "Indicator variable for a Southern state",
    "Mean years of schooling",
    "Police expenditure in 1960",
    "Police expenditure in 1959",
    "Labour force participation rate",
    "Number of males per 1000 females",
    "State population",
    "Number of non-whites per 1000 people",
    "Unemployment rate of urban males 14-24",
    "Unemployment rate of urban males 35-39",
    "Gross domestic product per head",
    "Income inequality",
    "Probability of imprisonment",
    "Average time served in state prisons",
};

const std::vector<std::string> kHaldLabels = {
    "Tricalcium aluminate",
    "Tricalcium silicate",
    "Tetracalcium alumino ferrite",
    "Dicalcium silicate",
};

Dataset load_builtin_file(const std::string& file, const std::string& response) {
    const std::string dir = data_dir();
    if (dir.empty())
        throw ValidationError("packaged data directory not found; set LOSSPRIOR_DATA_DIR");
    const auto manifest = read_manifest(dir);
    const auto it = manifest.find(file);
    if (it == manifest.end())
        throw ValidationError("data manifest has no entry for '" + file + "'");

    const std::string path = dir + "/" + file;
    const std::string sum = file_checksum(path);
    if (sum != it->second.checksum)
        throw ValidationError("packaged file '" + path + "' fails its integrity check (checksum " +
                              sum + ", manifest " + it->second.checksum + ")");
    Dataset ds = load_csv(path, response, CsvTransform::kNone);
    if (ds.n() != it->second.rows || ds.d() + 1 != it->second.cols)
        throw ValidationError("packaged file '" + path + "' fails its integrity check: " +
                              std::to_string(ds.n()) + " rows x " + std::to_string(ds.d() + 1) +
                              " columns; manifest expects " + std::to_string(it->second.rows) +
                              " x " + std::to_string(it->second.cols));
    return ds;
}

} // namespace

Dataset builtin(const std::string& name, bool log_variant) {
    if (name == "hald") {
        if (log_variant)
            throw ValidationError("no log variant is defined for the hald dataset");
        Dataset ds = load_builtin_file("hald.csv", "heat");
        ds.name = "hald";
        ds.covariate_labels = kHaldLabels;
        return ds;
    }
    if (name == "uscrime") {
        Dataset ds = load_builtin_file("uscrime.csv", "crime_rate");
        ds.name = "uscrime";
        ds.covariate_labels = kUscrimeLabels;
        if (log_variant) {
            // the classic transform: log everything except the binary indicator
            for (int j = 0; j < ds.d(); ++j) {
                if (ds.covariate_names[j] == "southern_state") continue;
                ds.X.col(j) = ds.X.col(j).array().log();
            }
            ds.y = ds.y.array().log();
            ds.transform_log = true;
            ds.name = "uscrime-log";
        }
        return ds;
    }
    throw ValidationError("unknown builtin dataset '" + name + "' (expected uscrime or hald)");
}

} // namespace lossprior
