// lossprior command-line interface. Everything below talks to the engine
// exclusively through the C API in lossprior/lossprior.h; presentation
// (JSON/CSV envelopes, file layout) lives here.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lossprior/lossprior.h"

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// doubles are carried as %.17g strings in JSON too, so that the JSON and CSV
// writers emit byte-identical numbers
ordered_json jnum(double v) { return ordered_json(fmt(v)); }

[[noreturn]] void die(lp_status st) {
    std::cerr << "error: " << lp_last_error() << "\n";
    std::exit(st == LP_OK ? 1 : static_cast<int>(st));
}

void check(lp_status st) {
    if (st != LP_OK) die(st);
}

struct DataFlags {
    std::string path;
    std::string builtin_name;
    std::string response;
    bool log_transform = false;
};

struct EngineFlags {
    double a = 0.5;
    double b = 1.0;
    double rho = 0.0; // <= 0: auto 1/(|model|+1)
    int quad_nodes = 201;
    bool no_refine = false;
    double rtol = 1e-10;
    int threads = 0;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& e) {
    cmd->add_option("--a", e.a, "robust prior hyperparameter a")->capture_default_str();
    cmd->add_option("--b", e.b, "robust prior hyperparameter b")->capture_default_str();
    cmd->add_option("--rho", e.rho,
                    "robust prior rho; <= 0 selects the size-dependent default 1/(|model|+1)");
    cmd->add_option("--quad-nodes", e.quad_nodes, "Gauss-Legendre nodes per panel")
        ->capture_default_str();
    cmd->add_flag("--no-refine", e.no_refine, "disable panel-halving refinement");
    cmd->add_option("--rtol", e.rtol, "quadrature relative tolerance")->capture_default_str();
    cmd->add_option("--threads", e.threads, "worker threads (0 = hardware)");
}

lp_options make_options(const EngineFlags& e) {
    lp_options opt;
    lp_options_default(&opt);
    opt.a = e.a;
    opt.b = e.b;
    opt.rho = e.rho;
    opt.quad_nodes = e.quad_nodes;
    opt.quad_refine = e.no_refine ? 0 : 1;
    opt.quad_rtol = e.rtol;
    opt.threads = e.threads;
    return opt;
}

void add_data_flags(CLI::App* cmd, DataFlags& d, bool response_required = true) {
    auto* data = cmd->add_option("--data", d.path, "CSV file with a header row");
    auto* builtin = cmd->add_option("--builtin", d.builtin_name,
                                    "packaged dataset: uscrime or hald");
    data->excludes(builtin);
    builtin->excludes(data);
    auto* resp = cmd->add_option("--response", d.response,
                                 "response column name (required with --data)");
    if (response_required) resp->needs(data);
    cmd->add_flag("--log", d.log_transform,
                  "log transform: the classic variant for --builtin uscrime, "
                  "log of every column for --data");
    cmd->callback([data, builtin, cmd]() {
        if (data->count() == 0 && builtin->count() == 0)
            throw CLI::RequiredError(cmd->get_name() + " needs --data or --builtin");
    });
}

lp_dataset* open_dataset(const DataFlags& d) {
    lp_dataset* ds = nullptr;
    if (!d.builtin_name.empty()) {
        check(lp_dataset_builtin(d.builtin_name.c_str(), d.log_transform ? 1 : 0, &ds));
    } else {
        if (d.response.empty()) {
            std::cerr << "error: --response is required with --data\n";
            std::exit(2);
        }
        check(lp_dataset_load_csv(d.path.c_str(), d.response.c_str(),
                                  d.log_transform ? 1 : 0, &ds));
    }
    return ds;
}

lp_prior_kind parse_prior(const std::string& name) {
    if (name == "uniform") return LP_PRIOR_UNIFORM;
    if (name == "sb" || name == "scott-berger") return LP_PRIOR_SCOTT_BERGER;
    if (name == "loss") return LP_PRIOR_LOSS;
    std::cerr << "error: unknown prior '" << name << "' (expected uniform, sb or loss)\n";
    std::exit(2);
}

const char* prior_name(lp_prior_kind k) {
    switch (k) {
        case LP_PRIOR_UNIFORM: return "uniform";
        case LP_PRIOR_SCOTT_BERGER: return "scott-berger";
        case LP_PRIOR_LOSS: return "loss";
    }
    return "?";
}

// Command echo for the output envelope; --threads is excluded because it
// never affects results.
std::string command_echo(int argc, char** argv) {
    std::string out;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--threads" || arg == "-j") {
            ++i;
            continue;
        }
        if (arg.rfind("--threads=", 0) == 0) continue;
        if (!out.empty()) out += ' ';
        out += arg;
    }
    return out;
}

ordered_json dataset_meta(const lp_dataset* ds) {
    ordered_json j;
    j["name"] = lp_dataset_name(ds);
    j["checksum"] = lp_dataset_checksum(ds);
    j["n"] = lp_dataset_n(ds);
    j["d"] = lp_dataset_d(ds);
    j["response"] = lp_dataset_response_name(ds);
    j["log_transform"] = lp_dataset_log_transformed(ds) != 0;
    return j;
}

ordered_json envelope(const std::string& cmd_echo) {
    ordered_json j;
    j["tool"] = {{"name", "lossprior"}, {"version", lp_version()}};
    j["command"] = cmd_echo;
    return j;
}

std::vector<int> bits_to_indices(uint32_t bits, int d) {
    std::vector<int> out;
    for (int j = 0; j < d; ++j)
        if ((bits >> j) & 1u) out.push_back(j);
    return out;
}

std::string bits_to_csv_field(uint32_t bits, int d) {
    std::string s = "{";
    bool first = true;
    for (int j = 0; j < d; ++j) {
        if (!((bits >> j) & 1u)) continue;
        if (!first) s += ';';
        s += std::to_string(j);
        first = false;
    }
    return s + "}";
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write '" << path << "'\n";
        std::exit(2);
    }
    out << text;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const DataFlags& df, const EngineFlags& ef, const std::string& prior_name_s,
                double c, int top_k, const std::string& out_format,
                const std::string& output, const std::string& cmd_echo) {
    const lp_prior_kind kind = parse_prior(prior_name_s);
    std::unique_ptr<lp_dataset, decltype(&lp_dataset_free)> ds(open_dataset(df),
                                                               &lp_dataset_free);
    const lp_options opt = make_options(ef);
    lp_posterior* post = nullptr;
    check(lp_analyze(ds.get(), kind, c, &opt, &post));
    std::unique_ptr<lp_posterior, decltype(&lp_posterior_free)> guard(post,
                                                                      &lp_posterior_free);

    const int d = lp_posterior_d(post);
    std::vector<double> incl(d);
    check(lp_posterior_inclusion(post, incl.data()));
    std::vector<double> pmf(d + 1);
    check(lp_posterior_size_pmf(post, pmf.data()));
    double mean = 0, sd = 0;
    int median = 0, lo = 0, hi = 0;
    check(lp_posterior_size_stats(post, &mean, &sd, &median, &lo, &hi));
    uint32_t hpm_bits = 0, mpm_bits = 0;
    double hpm_prob = 0;
    check(lp_posterior_hpm(post, &hpm_bits, &hpm_prob));
    check(lp_posterior_mpm(post, &mpm_bits));

    const uint64_t count = lp_posterior_model_count(post);
    const uint64_t k_show = std::min<uint64_t>(top_k, count);
    struct Top {
        uint32_t bits;
        double prob, log_bf, log_prior;
    };
    std::vector<Top> top(k_show);
    for (uint64_t r = 0; r < k_show; ++r)
        check(lp_posterior_top_model(post, r, &top[r].bits, &top[r].prob, &top[r].log_bf,
                                     &top[r].log_prior));

    if (out_format == "json") {
        ordered_json j = envelope(cmd_echo);
        j["dataset"] = dataset_meta(ds.get());
        j["options"] = {{"prior", prior_name(kind)},
                        {"c", jnum(c)},
                        {"a", jnum(ef.a)},
                        {"b", jnum(ef.b)},
                        {"rho", ef.rho > 0 ? ordered_json(fmt(ef.rho)) : ordered_json("auto")},
                        {"quad_nodes", ef.quad_nodes},
                        {"quad_refine", !ef.no_refine},
                        {"quad_rtol", jnum(ef.rtol)}};
        ordered_json incl_arr = ordered_json::array();
        for (int jx = 0; jx < d; ++jx) {
            incl_arr.push_back({{"index", jx},
                                {"name", lp_dataset_covariate_name(ds.get(), jx)},
                                {"label", lp_dataset_covariate_label(ds.get(), jx)},
                                {"probability", jnum(incl[jx])},
                                {"in_hpm", ((hpm_bits >> jx) & 1u) != 0},
                                {"in_mpm", ((mpm_bits >> jx) & 1u) != 0}});
        }
        ordered_json pmf_arr = ordered_json::array();
        for (int kk = 0; kk <= d; ++kk) pmf_arr.push_back(jnum(pmf[kk]));
        ordered_json tops = ordered_json::array();
        for (uint64_t r = 0; r < k_show; ++r) {
            tops.push_back({{"rank", r + 1},
                            {"model", bits_to_indices(top[r].bits, d)},
                            {"size", __builtin_popcount(top[r].bits)},
                            {"posterior", jnum(top[r].prob)},
                            {"log_bf", jnum(top[r].log_bf)},
                            {"log_prior", jnum(top[r].log_prior)}});
        }
        j["results"] = {{"model_count", count},
                        {"inclusion", incl_arr},
                        {"hpm",
                         {{"model", bits_to_indices(hpm_bits, d)},
                          {"size", __builtin_popcount(hpm_bits)},
                          {"probability", jnum(hpm_prob)}}},
                        {"mpm",
                         {{"model", bits_to_indices(mpm_bits, d)},
                          {"size", __builtin_popcount(mpm_bits)}}},
                        {"size_posterior",
                         {{"pmf", pmf_arr},
                          {"mean", jnum(mean)},
                          {"sd", jnum(sd)},
                          {"median", median},
                          {"ci95", {lo, hi}}}},
                        {"top_models", tops}};
        write_text(output, j.dump(2) + "\n");
    } else {
        std::ostringstream csv;
        csv << "# lossprior " << lp_version() << "\n# command: " << cmd_echo
            << "\n# dataset: " << lp_dataset_name(ds.get()) << " checksum "
            << lp_dataset_checksum(ds.get()) << "\n";
        csv << "# summary\n";
        csv << "prior,c,n,d,mean,median,sd,ci_lo,ci_hi,hpm_size,mpm_size,hpm_prob\n";
        csv << prior_name(kind) << ',' << fmt(c) << ',' << lp_dataset_n(ds.get()) << ','
            << d << ',' << fmt(mean) << ',' << median << ',' << fmt(sd) << ',' << lo << ','
            << hi << ',' << __builtin_popcount(hpm_bits) << ',' << __builtin_popcount(mpm_bits)
            << ',' << fmt(hpm_prob) << '\n';
        csv << "# inclusion\n";
        csv << "index,name,probability,in_hpm,in_mpm\n";
        for (int jx = 0; jx < d; ++jx)
            csv << jx << ',' << lp_dataset_covariate_name(ds.get(), jx) << ','
                << fmt(incl[jx]) << ',' << (((hpm_bits >> jx) & 1u) ? 1 : 0) << ','
                << (((mpm_bits >> jx) & 1u) ? 1 : 0) << '\n';
        csv << "# size_posterior\n";
        csv << "k,probability\n";
        for (int kk = 0; kk <= d; ++kk) csv << kk << ',' << fmt(pmf[kk]) << '\n';
        csv << "# top_models\n";
        csv << "rank,model,size,posterior,log_bf,log_prior\n";
        for (uint64_t r = 0; r < k_show; ++r)
            csv << (r + 1) << ',' << bits_to_csv_field(top[r].bits, d) << ','
                << __builtin_popcount(top[r].bits) << ',' << fmt(top[r].prob) << ','
                << fmt(top[r].log_bf) << ',' << fmt(top[r].log_prior) << '\n';
        write_text(output, csv.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(int n, int d, double omega, int reps, uint64_t seed, bool grid,
                 double c, const EngineFlags& ef, const std::string& out_path,
                 const std::string& cmd_echo) {
    const lp_options opt = make_options(ef);

    struct Cell {
        int n, d;
        double omega;
    };
    std::vector<Cell> cells;
    if (grid) {
        for (int gn : {30, 50, 100})
            for (int gd : {3, 5, 10, 15})
                for (double gw : {0.15, 0.50, 0.75}) cells.push_back({gn, gd, gw});
    } else {
        cells.push_back({n, d, omega});
    }

    std::ostringstream csv;
    csv << "# lossprior " << lp_version() << "\n# command: " << cmd_echo
        << "\n# seed: " << seed << "\n";
    csv << "n,d,omega,prior,coverage,mse_mean,mse_median,se_coverage,se_mse_mean,se_mse_median\n";
    std::ostringstream fig;
    fig << "case,n,d,omega,prior,mse_mean\n";

    int case_index = 0;
    for (const Cell& cell : cells) {
        lp_sim_result* res = nullptr;
        check(lp_sim_run(cell.n, cell.d, cell.omega, reps, seed, c, &opt, &res));
        std::unique_ptr<lp_sim_result, decltype(&lp_sim_result_free)> guard(
            res, &lp_sim_result_free);
        static const char* names[3] = {"uniform", "scott-berger", "loss"};
        for (int p = 0; p < 3; ++p) {
            double cov, mm, md, sc, smm, smd;
            check(lp_sim_metric(res, p, &cov, &mm, &md, &sc, &smm, &smd));
            csv << cell.n << ',' << cell.d << ',' << fmt(cell.omega) << ',' << names[p]
                << ',' << fmt(cov) << ',' << fmt(mm) << ',' << fmt(md) << ',' << fmt(sc)
                << ',' << fmt(smm) << ',' << fmt(smd) << '\n';
            fig << case_index << ',' << cell.n << ',' << cell.d << ',' << fmt(cell.omega)
                << ',' << names[p] << ',' << fmt(mm) << '\n';
        }
        ++case_index;
    }
    write_text(out_path, csv.str());
    if (!out_path.empty() && out_path != "-")
        write_text(out_path + ".fig2.csv", fig.str());
    return 0;
}

// ---------------------------------------------------------------------------
// robustness

int cmd_robustness(const DataFlags& df, const EngineFlags& ef, double frac, int reps,
                   uint64_t seed, const std::string& c_list, const std::string& out_dir,
                   const std::string& cmd_echo) {
    std::vector<double> cs;
    {
        std::istringstream ss(c_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            try {
                cs.push_back(std::stod(tok));
            } catch (...) {
                std::cerr << "error: bad --c-list entry '" << tok << "'\n";
                return 2;
            }
        }
    }
    std::unique_ptr<lp_dataset, decltype(&lp_dataset_free)> ds(open_dataset(df),
                                                               &lp_dataset_free);
    const lp_options opt = make_options(ef);
    lp_rob_result* rr = nullptr;
    check(lp_rob_run(ds.get(), frac, reps, seed, cs.empty() ? nullptr : cs.data(),
                     static_cast<int>(cs.size()), &opt, &rr));
    std::unique_ptr<lp_rob_result, decltype(&lp_rob_result_free)> guard(rr,
                                                                        &lp_rob_result_free);

    std::filesystem::create_directories(out_dir);
    const int d = lp_dataset_d(ds.get());
    const int npriors = lp_rob_num_priors(rr);

    {
        std::ostringstream meta;
        ordered_json j = envelope(cmd_echo);
        j["dataset"] = dataset_meta(ds.get());
        j["seed"] = seed;
        j["fraction"] = jnum(frac);
        j["replicates"] = lp_rob_replicates(rr);
        j["subsample_size"] = lp_rob_subsample_size(rr);
        meta << j.dump(2) << "\n";
        write_text(out_dir + "/meta.json", meta.str());
    }
    {
        std::ostringstream csv;
        csv << "replicate,prior,c,mean_size";
        for (int jx = 0; jx < d; ++jx) csv << ",omega_" << (jx + 1);
        csv << '\n';
        std::vector<double> incl(d);
        for (int rep = 0; rep < lp_rob_replicates(rr); ++rep) {
            for (int p = 0; p < npriors; ++p) {
                lp_prior_kind kind;
                double c;
                check(lp_rob_prior(rr, p, &kind, &c));
                double ms;
                check(lp_rob_mean_size(rr, p, rep, &ms));
                check(lp_rob_inclusion(rr, p, rep, incl.data()));
                csv << rep << ',' << prior_name(kind) << ','
                    << (kind == LP_PRIOR_LOSS ? fmt(c) : "") << ',' << fmt(ms);
                for (int jx = 0; jx < d; ++jx) csv << ',' << fmt(incl[jx]);
                csv << '\n';
            }
        }
        write_text(out_dir + "/records.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "prior,c,bin_lo,bin_hi,count\n";
        const int bins = lp_rob_hist_bins(rr);
        std::vector<int> counts(bins);
        for (int p = 0; p < npriors; ++p) {
            lp_prior_kind kind;
            double c;
            check(lp_rob_prior(rr, p, &kind, &c));
            check(lp_rob_hist(rr, p, counts.data()));
            for (int bx = 0; bx < bins; ++bx)
                csv << prior_name(kind) << ',' << (kind == LP_PRIOR_LOSS ? fmt(c) : "")
                    << ',' << fmt(0.25 * bx) << ',' << fmt(0.25 * (bx + 1)) << ','
                    << counts[bx] << '\n';
        }
        write_text(out_dir + "/hist.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "prior,c,covariate,name,min,q1,median,q3,max,lo_whisker,hi_whisker\n";
        for (int p = 0; p < npriors; ++p) {
            lp_prior_kind kind;
            double c;
            check(lp_rob_prior(rr, p, &kind, &c));
            for (int jx = 0; jx < d; ++jx) {
                double b[7];
                check(lp_rob_box(rr, p, jx, b));
                csv << prior_name(kind) << ',' << (kind == LP_PRIOR_LOSS ? fmt(c) : "")
                    << ',' << (jx + 1) << ',' << lp_dataset_covariate_name(ds.get(), jx);
                for (double v : b) csv << ',' << fmt(v);
                csv << '\n';
            }
        }
        write_text(out_dir + "/box.csv", csv.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// prior-curve

int cmd_prior_curve(int d, double c, const std::string& out_path) {
    std::ostringstream csv;
    csv << "k,log_mass,kind,c\n";
    std::vector<double> mass(d + 1);
    const lp_prior_kind kinds[3] = {LP_PRIOR_UNIFORM, LP_PRIOR_SCOTT_BERGER, LP_PRIOR_LOSS};
    for (lp_prior_kind kind : kinds) {
        check(lp_prior_curve(kind, c, d, mass.data()));
        for (int k = 0; k <= d; ++k)
            csv << k << ',' << fmt(mass[k]) << ',' << prior_name(kind) << ','
                << (kind == LP_PRIOR_LOSS ? fmt(c) : "") << '\n';
    }
    write_text(out_path, csv.str());
    return 0;
}

// ---------------------------------------------------------------------------
// verify-kl

int cmd_verify_kl(int trials, int n, int d, uint64_t seed, double tol,
                  const std::string& output, const std::string& cmd_echo) {
    lp_kl_report rep;
    check(lp_verify_kl(trials, n, d, seed, tol, &rep));
    std::printf("%d/%d min-KL < %g (max %.3g)", rep.passed, rep.trials, rep.tol,
                rep.max_min_kl);
    if (rep.hypothesis_violations)
        std::printf("; %d hypothesis violation(s) excluded", rep.hypothesis_violations);
    std::printf("; gradient checks: %d, max rel err %.3g\n", rep.grad_checks,
                rep.max_grad_rel_err);
    if (!output.empty()) {
        ordered_json j = envelope(cmd_echo);
        j["seed"] = seed;
        j["results"] = {{"trials", rep.trials},
                        {"passed", rep.passed},
                        {"hypothesis_violations", rep.hypothesis_violations},
                        {"max_min_kl", jnum(rep.max_min_kl)},
                        {"tol", jnum(rep.tol)},
                        {"grad_checks", rep.grad_checks},
                        {"max_grad_rel_err", jnum(rep.max_grad_rel_err)}};
        write_text(output, j.dump(2) + "\n");
    }
    return rep.passed + rep.hypothesis_violations == rep.trials ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-enumeration Bayesian variable selection for linear regression"};
    app.require_subcommand(1);
    const std::string echo = command_echo(argc, argv);

    // analyze
    DataFlags adf;
    EngineFlags aef;
    std::string a_prior = "loss";
    double a_c = 1.0;
    int a_top = 20;
    std::string a_out = "json", a_output;
    auto* analyze = app.add_subcommand("analyze", "posterior over all 2^d models of a dataset");
    add_data_flags(analyze, adf);
    analyze->add_option("--prior", a_prior, "model prior: uniform, sb or loss")
        ->capture_default_str();
    analyze->add_option("--c", a_c, "loss prior constant")->capture_default_str();
    add_engine_flags(analyze, aef);
    analyze->add_option("--top", a_top, "models to report")->capture_default_str();
    analyze->add_option("--out", a_out, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    analyze->add_option("--output", a_output, "output file (default stdout)");

    // simulate
    EngineFlags sef;
    int s_n = 30, s_d = 5, s_reps = 2000;
    double s_omega = 0.5, s_c = 1.0;
    std::uint64_t s_seed = 0;
    bool s_grid = false;
    std::string s_out;
    auto* simulate = app.add_subcommand("simulate", "frequentist study of the size posterior");
    simulate->add_option("--n", s_n, "sample size")->capture_default_str();
    simulate->add_option("--d", s_d, "number of candidate covariates")->capture_default_str();
    simulate->add_option("--omega", s_omega, "truth inclusion probability")
        ->capture_default_str();
    simulate->add_option("--reps", s_reps, "replicates per case")->capture_default_str();
    simulate->add_option("--seed", s_seed, "RNG seed")->capture_default_str();
    simulate->add_flag("--grid", s_grid, "run the full 36-case study grid (ignores --n/--d/--omega)");
    simulate->add_option("--c", s_c, "loss prior constant")->capture_default_str();
    add_engine_flags(simulate, sef);
    simulate->add_option("--out", s_out, "output CSV path (default stdout)");

    // robustness
    DataFlags rdf;
    EngineFlags ref;
    double r_frac = 0.85;
    int r_reps = 500;
    std::uint64_t r_seed = 0;
    std::string r_clist = "0.5,1.0,1.5,2.0";
    std::string r_out = "robustness-out";
    auto* robust = app.add_subcommand("robustness", "repeated-subsample sensitivity study");
    add_data_flags(robust, rdf);
    robust->add_option("--frac", r_frac, "subsample fraction")->capture_default_str();
    robust->add_option("--reps", r_reps, "number of subsamples")->capture_default_str();
    robust->add_option("--c-list", r_clist, "comma-separated loss prior constants")
        ->capture_default_str();
    robust->add_option("--seed", r_seed, "RNG seed")->capture_default_str();
    add_engine_flags(robust, ref);
    robust->add_option("--out", r_out, "output directory")->capture_default_str();

    // prior-curve
    int p_d = 30;
    double p_c = 1.0;
    std::string p_out;
    auto* pcurve = app.add_subcommand("prior-curve", "per-model prior mass against model size");
    pcurve->add_option("--d", p_d, "number of candidate covariates")->capture_default_str();
    pcurve->add_option("--c", p_c, "loss prior constant")->capture_default_str();
    pcurve->add_option("--out", p_out, "output CSV path (default stdout)");

    // verify-kl
    int k_trials = 200, k_n = 20, k_d = 6;
    std::uint64_t k_seed = 0;
    double k_tol = 1e-8;
    std::string k_output;
    auto* vkl = app.add_subcommand("verify-kl",
                                   "check that the minimized KL divergence between regression models vanishes");
    vkl->add_option("--trials", k_trials, "random instances")->capture_default_str();
    vkl->add_option("--n", k_n, "sample size")->capture_default_str();
    vkl->add_option("--d", k_d, "candidate covariates")->capture_default_str();
    vkl->add_option("--seed", k_seed, "RNG seed")->capture_default_str();
    vkl->add_option("--tol", k_tol, "pass threshold on min-KL")->capture_default_str();
    vkl->add_option("--output", k_output, "also write a JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    if (analyze->parsed())
        return cmd_analyze(adf, aef, a_prior, a_c, a_top, a_out, a_output, echo);
    if (simulate->parsed())
        return cmd_simulate(s_n, s_d, s_omega, s_reps, s_seed, s_grid, s_c, sef, s_out, echo);
    if (robust->parsed())
        return cmd_robustness(rdf, ref, r_frac, r_reps, r_seed, r_clist, r_out, echo);
    if (pcurve->parsed()) return cmd_prior_curve(p_d, p_c, p_out);
    if (vkl->parsed()) return cmd_verify_kl(k_trials, k_n, k_d, k_seed, k_tol, k_output, echo);
    return 2;
}
