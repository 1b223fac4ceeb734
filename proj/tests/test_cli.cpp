// End-to-end checks of the installed command-line surface: spawns the real
// binary, captures stdout, inspects files and exit codes.

#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LOSSPRIOR_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = ::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("lossprior_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

} // namespace

TEST_CASE("analyze json: hald under the loss prior") {
    const auto r = run_cli("analyze --builtin hald --prior loss --c 1.0");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["tool"]["name"] == "lossprior");
    CHECK(j["dataset"]["n"] == 13);
    CHECK(j["dataset"]["d"] == 4);
    const double mean = std::stod(j["results"]["size_posterior"]["mean"].get<std::string>());
    CHECK(mean == doctest::Approx(2.12).epsilon(0.03));
    CHECK(j["results"]["size_posterior"]["median"] == 2);
    CHECK(j["results"]["hpm"]["size"] == 2);
    CHECK(j["results"]["mpm"]["size"] == 2);
    const double hpm_prob = std::stod(j["results"]["hpm"]["probability"].get<std::string>());
    CHECK(hpm_prob == doctest::Approx(0.67).epsilon(0.06));
}

TEST_CASE("analyze sb: hald sizes") {
    const auto r = run_cli("analyze --builtin hald --prior sb");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["results"]["hpm"]["size"] == 2);
    CHECK(j["results"]["mpm"]["size"] == 2);
}

TEST_CASE("analyze rejects c = 0 with exit code 2") {
    const auto r = run_cli("analyze --builtin hald --prior loss --c 0");
    CHECK(r.exit_code == 2);
}

TEST_CASE("analyze json and csv carry identical numbers") {
    const fs::path jf = temp_dir() / "hald.json";
    const fs::path cf = temp_dir() / "hald.csv";
    REQUIRE(run_cli("analyze --builtin hald --prior uniform --output " + jf.string())
                .exit_code == 0);
    REQUIRE(run_cli("analyze --builtin hald --prior uniform --out csv --output " + cf.string())
                .exit_code == 0);
    const json j = json::parse(slurp(jf));
    const std::string csv = slurp(cf);

    // every inclusion probability printed in JSON appears verbatim in the CSV
    for (const auto& item : j["results"]["inclusion"]) {
        const std::string p = item["probability"].get<std::string>();
        CHECK(csv.find(p) != std::string::npos);
    }
    const std::string mean = j["results"]["size_posterior"]["mean"].get<std::string>();
    CHECK(csv.find(mean) != std::string::npos);
    const std::string hpm_p = j["results"]["hpm"]["probability"].get<std::string>();
    CHECK(csv.find(hpm_p) != std::string::npos);
}

TEST_CASE("simulate: deterministic output, independent of --threads") {
    const fs::path f1 = temp_dir() / "sim1.csv";
    const fs::path f2 = temp_dir() / "sim2.csv";
    const std::string base = "simulate --n 20 --d 3 --omega 0.5 --reps 40 --seed 7 ";
    REQUIRE(run_cli(base + "--threads 1 --out " + f1.string()).exit_code == 0);
    REQUIRE(run_cli(base + "--threads 3 --out " + f2.string()).exit_code == 0);
    CHECK(slurp(f1) == slurp(f2));

    // rerun: byte-identical
    const fs::path f3 = temp_dir() / "sim3.csv";
    REQUIRE(run_cli(base + "--out " + f3.string()).exit_code == 0);
    CHECK(slurp(f1) == slurp(f3));

    // header + 3 rows
    std::istringstream ss(slurp(f1));
    std::string line;
    int rows = 0;
    while (std::getline(ss, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 1 + 3);
}

TEST_CASE("simulate rejects n <= d + 1 with exit code 2") {
    const auto r = run_cli("simulate --n 10 --d 15 --omega 0.5 --reps 10 --seed 1");
    CHECK(r.exit_code == 2);
}

TEST_CASE("robustness: full-fraction records are identical; outputs deterministic") {
    const fs::path dir1 = temp_dir() / "rob1";
    const fs::path dir2 = temp_dir() / "rob2";
    const std::string base = "robustness --builtin hald --frac 1.0 --reps 3 --seed 5 "
                             "--c-list 1.0 ";
    REQUIRE(run_cli(base + "--threads 1 --out " + dir1.string()).exit_code == 0);
    REQUIRE(run_cli(base + "--threads 2 --out " + dir2.string()).exit_code == 0);
    const std::string recs = slurp(dir1 / "records.csv");
    CHECK(recs == slurp(dir2 / "records.csv"));
    CHECK(slurp(dir1 / "hist.csv") == slurp(dir2 / "hist.csv"));
    CHECK(slurp(dir1 / "box.csv") == slurp(dir2 / "box.csv"));

    // three replicates x (uniform, sb, loss@1): 9 data rows, all equal mean_size per prior
    std::istringstream ss(recs);
    std::string line;
    std::getline(ss, line); // header
    std::vector<std::string> rows;
    while (std::getline(ss, line))
        if (!line.empty()) rows.push_back(line);
    REQUIRE(rows.size() == 9);
    // replicate index is the first field; strip it before comparing
    const auto tail = [](const std::string& s) { return s.substr(s.find(',')); };
    CHECK(tail(rows[0]) == tail(rows[3]));
    CHECK(tail(rows[3]) == tail(rows[6]));
}

TEST_CASE("robustness subsample sizes reported in meta.json") {
    const fs::path dir = temp_dir() / "rob_us";
    REQUIRE(run_cli("robustness --builtin uscrime --reps 2 --seed 1 --c-list 1.0 --quad-nodes 31 "
                    "--no-refine --out " + dir.string()).exit_code == 0);
    const json meta = json::parse(slurp(dir / "meta.json"));
    CHECK(meta["subsample_size"] == 40);
}

TEST_CASE("prior-curve emits 31 rows per kind for d = 30") {
    const auto r = run_cli("prior-curve --d 30 --c 1.0");
    REQUIRE(r.exit_code == 0);
    std::istringstream ss(r.out);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "k,log_mass,kind,c");
    int uniform = 0, sb = 0, loss = 0;
    while (std::getline(ss, line)) {
        if (line.find(",uniform,") != std::string::npos) ++uniform;
        if (line.find(",scott-berger,") != std::string::npos) ++sb;
        if (line.find(",loss,") != std::string::npos) ++loss;
    }
    CHECK(uniform == 31);
    CHECK(sb == 31);
    CHECK(loss == 31);
}

TEST_CASE("verify-kl reports all trials passing") {
    const auto r = run_cli("verify-kl --trials 50 --n 20 --d 6 --seed 3");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("50/50 min-KL < 1e-08") != std::string::npos);
}

TEST_CASE("unknown flags and missing data source exit with 2") {
    CHECK(run_cli("analyze --builtin hald --frobnicate").exit_code == 2);
    CHECK(run_cli("analyze --prior loss").exit_code == 2);
    CHECK(run_cli("analyze --builtin nonesuch").exit_code == 2);
}
