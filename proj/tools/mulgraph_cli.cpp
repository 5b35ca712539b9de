// Command-line front end: sampling, verification suite, embedding export,
// metric-space export, continuum simulation, fractal exponents, brute-force
// oracle comparisons, and a quick self test.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mulgraph/common.hpp"
#include "mulgraph/continuum.hpp"
#include "mulgraph/excursions.hpp"
#include "mulgraph/io.hpp"
#include "mulgraph/markov.hpp"
#include "mulgraph/oracle.hpp"
#include "mulgraph/parallel.hpp"
#include "mulgraph/queue.hpp"
#include "mulgraph/rng.hpp"
#include "mulgraph/stats.hpp"
#include "mulgraph/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mulgraph;

namespace {

constexpr std::uint64_t kEmbedStream = 0x9e6c63d0876a9a47ull;

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot open " + p.string());
    return f;
}

int cmd_sample(const std::string& wcsv, std::uint64_t seed, long trials,
               const std::string& outdir, bool aggregate, double eps, int dense_max) {
    Weights w = parse_weights(wcsv);
    fs::create_directories(outdir);
    ordered_json agg;
    agg["trials"] = trials;
    agg["seed"] = seed;
    ordered_json rows = ordered_json::array();
    for (long i = 0; i < trials; ++i) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(i)));
        queue::TrialOutput trial = queue::sample_graph(w, rng);
        if (aggregate) {
            ordered_json row;
            row["trial"] = i;
            row["edges"] = static_cast<long>(trial.graph.edges.size());
            row["pinches"] = static_cast<long>(trial.pinches.pairs.size());
            row["retries"] = trial.retries;
            rows.push_back(std::move(row));
            continue;
        }
        std::string tag = std::to_string(i);
        { auto f = open_out(fs::path(outdir) / ("graph_" + tag + ".txt"));
          io::write_edge_list(f, trial.graph); }
        { auto f = open_out(fs::path(outdir) / ("tree_" + tag + ".txt"));
          io::write_tree(f, trial.tree); }
        { auto f = open_out(fs::path(outdir) / ("height_" + tag + ".csv"));
          queue::height_process(trial.path).write_csv(f); }
        { auto f = open_out(fs::path(outdir) / ("pinches_" + tag + ".txt"));
          io::write_pinches(f, trial.pinches); }
        { auto f = open_out(fs::path(outdir) / ("components_" + tag + ".json"));
          StepFunction h = queue::height_process(trial.path);
          auto excs = excursions::excursion_intervals(h);
          auto local = excursions::per_component_pinches(trial.pinches, excs);
          auto spaces = excursions::component_spaces(trial, w, eps);
          ordered_json arr = ordered_json::array();
          for (std::size_t k = 0; k < spaces.size(); ++k)
              arr.push_back(io::component_json(spaces[k], local[k], dense_max));
          f << arr.dump(2) << '\n'; }
    }
    if (aggregate) {
        agg["rows"] = std::move(rows);
        auto f = open_out(fs::path(outdir) / "sample_stats.json");
        f << agg.dump(2) << '\n';
    }
    return 0;
}

stats::TestReport embedding_report(const Weights& w, long trials, std::uint64_t seed) {
    stats::TestReport rep;
    rep.name = "embedding_identities";
    rep.trials = trials;
    rep.seed = seed;
    long events = 0, value_bad = 0, height_bad = 0, block_bad = 0;
    double max_err = 0.0;
    for (long i = 0; i < trials; ++i) {
        Rng rng(trial_seed(seed ^ kEmbedStream, static_cast<std::uint64_t>(i)));
        for (int attempt = 0; attempt < 100; ++attempt) {
            try {
                markov::Embedding e = markov::build_embedding(w, rng);
                markov::EmbeddingCheck chk = markov::check_embedding(e);
                events += chk.events_checked;
                value_bad += chk.value_violations;
                height_bad += chk.height_violations;
                block_bad += chk.block_violations;
                max_err = std::max(max_err, chk.max_value_err);
                break;
            } catch (const CollisionError&) {
                continue;
            }
        }
    }
    rep.statistic = max_err;
    rep.p_value = (value_bad + height_bad + block_bad) == 0 ? 1.0 : 0.0;
    rep.pass = (value_bad + height_bad + block_bad) == 0;
    std::ostringstream d;
    d << "events=" << events << " value_bad=" << value_bad << " height_bad=" << height_bad
      << " block_bad=" << block_bad << " max_err=" << max_err;
    rep.detail = d.str();
    return rep;
}

int cmd_verify(const std::string& wcsv, std::uint64_t seed, long trials,
               const std::string& only, bool corrupt, const std::string& outfile) {
    Weights w = parse_weights(wcsv);
    std::vector<stats::TestReport> reports;
    auto want = [&](const char* name) { return only.empty() || only == name; };

    if (want("edge_freq"))
        reports.push_back(stats::edge_frequency_test(w, trials, 0.001, seed, corrupt));
    if (want("graph_law") && (w.n() == 3 || w.n() == 4))
        reports.push_back(stats::graph_law_equivalence(w, trials, 0.001, seed, corrupt));
    if (want("offspring") && classify(w) != Criticality::Supercritical)
        reports.push_back(stats::offspring_test(w, std::max(trials / 2, 1000L), 0.001, seed));
    if (want("mass"))
        reports.push_back(stats::mass_distribution_test(w, trials, 0.001, seed));
    if (want("embedding"))
        reports.push_back(embedding_report(w, std::max(trials / 100, 50L), seed));

    bool pass = !reports.empty();
    ordered_json out;
    out["suite"] = "verify";
    out["seed"] = seed;
    out["trials"] = trials;
    ordered_json tests = ordered_json::array();
    for (const auto& r : reports) {
        tests.push_back(io::report_json(r));
        pass = pass && r.pass;
    }
    out["tests"] = std::move(tests);
    out["pass"] = pass;
    std::string dumped = out.dump(2) + "\n";
    std::cout << dumped;
    if (!outfile.empty()) open_out(outfile) << dumped;
    return pass ? 0 : 1;
}

int cmd_embed(const std::string& wcsv, std::uint64_t seed, bool check,
              const std::string& outfile) {
    Weights w = parse_weights(wcsv);
    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(attempt)));
        markov::Embedding e;
        try {
            e = markov::build_embedding(w, rng);
        } catch (const CollisionError&) {
            continue;
        }
        StepFunction hx = markov::markov_height(e.X);
        StepFunction hy = queue::height_process(e.Y);
        std::ostream* os = &std::cout;
        std::ofstream file;
        if (!outfile.empty()) {
            file = open_out(outfile);
            os = &file;
        }
        os->precision(12);
        *os << "t,X,Y_at_lambda_b,H,cal_H_at_lambda_b\n";
        auto emit = [&](double t) {
            double lb = e.tc.lambda_b(t);
            *os << t << ',' << e.X.value(t) << ',' << e.Y.value(lb) << ',' << hx.value(t)
                << ',' << hy.value(lb) << '\n';
        };
        emit(0.0);
        for (const auto& j : e.X.jumps()) emit(j.time);
        emit(e.X.horizon());
        if (check) {
            markov::EmbeddingCheck chk = markov::check_embedding(e);
            std::cerr << "events=" << chk.events_checked << " value_bad=" << chk.value_violations
                      << " height_bad=" << chk.height_violations << " block_bad="
                      << chk.block_violations << " max_err=" << chk.max_value_err << '\n';
            return (chk.value_violations + chk.height_violations + chk.block_violations) ? 1 : 0;
        }
        return 0;
    }
    std::cerr << "kept colliding after 100 attempts\n";
    return 1;
}

int cmd_excursions(const std::string& wcsv, std::uint64_t seed, double eps,
                   int dense_max) {
    Weights w = parse_weights(wcsv);
    Rng rng(trial_seed(seed, 0));
    queue::TrialOutput trial = queue::sample_graph(w, rng);
    StepFunction h = queue::height_process(trial.path);
    auto excs = excursions::excursion_intervals(h);
    auto local = excursions::per_component_pinches(trial.pinches, excs);
    auto spaces = excursions::component_spaces(trial, w, eps);
    ordered_json arr = ordered_json::array();
    for (std::size_t k = 0; k < spaces.size(); ++k) {
        ordered_json jc = io::component_json(spaces[k], local[k], dense_max);
        jc["zeta"] = excs[k].zeta();
        arr.push_back(std::move(jc));
    }
    std::cout << arr.dump(2) << '\n';
    return 0;
}

int cmd_continuum(const std::string& cfgfile, bool dump_paths, const std::string& outdir) {
    std::ifstream in(cfgfile);
    if (!in) {
        std::cerr << "cannot open config " << cfgfile << '\n';
        return 1;
    }
    continuum::ContinuumConfig cfg = continuum::parse_continuum_config(in);
    const continuum::ContinuumParams& p = cfg.params;
    fs::create_directories(outdir);

    Rng rng(trial_seed(cfg.seed, 0));
    continuum::YAPath ya = continuum::simulate_Y(p, rng);

    // red driver long enough for every first passage the blue path needs
    continuum::AssembledX mix;
    continuum::ContinuumParams pr = p;
    double margin = 10.0 * (1.0 + std::abs(p.alpha) * p.horizon);
    pr.horizon = p.horizon;
    for (int attempt = 0;; ++attempt) {
        Rng red_rng(trial_seed(cfg.seed, 1));
        continuum::GridPath xr = continuum::simulate_levy(pr, red_rng);
        try {
            mix = continuum::assemble_mixed(ya, xr, p.alpha < 0.0 ? margin
                                                                  : std::numeric_limits<double>::infinity());
            break;
        } catch (const ExtendHorizon&) {
            if (attempt >= 8) {
                std::cerr << "red horizon kept running out\n";
                return 1;
            }
            pr.horizon *= 2.0;
        }
    }

    ordered_json rep;
    rep["config"] = cfgfile;
    rep["seed"] = cfg.seed;
    rep["jmax"] = p.effective_jmax();
    rep["psi_tail_bound_at_1"] = continuum::psi_tail_bound(p, 1.0);
    rep["T_star"] = std::isfinite(mix.T_star) ? ordered_json(mix.T_star) : ordered_json();

    {
        auto f = open_out(fs::path(outdir) / "psi_table.csv");
        f.precision(12);
        f << "lambda,psi,psi_inverse\n";
        for (int k = 1; k <= 40; ++k) {
            double lam = 0.25 * k;
            f << lam << ',' << continuum::psi_eval(p, lam) << ','
              << continuum::psi_inverse(p, lam) << '\n';
        }
    }
    if (p.beta > 0.0) {
        auto f = open_out(fs::path(outdir) / "v_table.csv");
        f.precision(12);
        f << "a,v\n";
        for (int k = 1; k <= 20; ++k) {
            double a = 0.25 * k;
            f << a << ',' << continuum::v_of_a(p, a) << '\n';
        }
        rep["v_table"] = "v_table.csv";
    } else {
        rep["v_table"] = nullptr;
        rep["v_table_refused"] =
            "height profile integral diverges without a Brownian part (beta = 0)";
    }

    double t_half = 0.5 * mix.X.horizon();
    continuum::HeightEstimates est = continuum::height_estimators(p, mix.X, t_half, 1e-2);
    ordered_json je;
    je["t"] = t_half;
    je["occupation"] = est.occupation;
    je["lebesgue"] = est.lebesgue_valid ? ordered_json(est.lebesgue) : ordered_json();
    je["record_count"] = est.record_valid ? ordered_json(est.record_count) : ordered_json();
    if (est.lebesgue_valid && est.lebesgue > 0.0)
        je["occupation_vs_lebesgue_rel"] = std::abs(est.occupation - est.lebesgue) / est.lebesgue;
    rep["height_estimates"] = std::move(je);

    continuum::FractalExponents fx = continuum::fractal_exponents(p);
    ordered_json jf;
    jf["gamma"] = fx.gamma_;
    jf["eta"] = fx.eta_;
    jf["dim_hausdorff"] = std::isfinite(fx.dim_h) ? ordered_json(fx.dim_h) : ordered_json();
    jf["dim_packing"] = std::isfinite(fx.dim_p) ? ordered_json(fx.dim_p) : ordered_json();
    jf["converged"] = fx.converged;
    jf["slope_min"] = fx.slope_min;
    jf["slope_max"] = fx.slope_max;
    rep["exponents"] = std::move(jf);

    if (dump_paths) {
        auto dump = [&](const continuum::GridPath& g, const char* name) {
            auto f = open_out(fs::path(outdir) / name);
            f.precision(12);
            f << "t,value\n";
            for (std::size_t i = 0; i < g.values.size(); ++i)
                f << g.dt * static_cast<double>(i) << ',' << g.values[i] << '\n';
        };
        dump(ya.Y, "path_Y.csv");
        dump(ya.A, "path_A.csv");
        dump(mix.X, "path_X.csv");
        rep["paths"] = {"path_Y.csv", "path_A.csv", "path_X.csv"};
    }

    auto f = open_out(fs::path(outdir) / "continuum_report.json");
    f << rep.dump(2) << '\n';
    std::cout << rep.dump(2) << '\n';
    return 0;
}

int cmd_dims(const std::string& cfgfile, double beta, double kappa, double power_q,
             double power_rho, const std::string& clist) {
    continuum::ContinuumParams p;
    if (!cfgfile.empty()) {
        std::ifstream in(cfgfile);
        if (!in) {
            std::cerr << "cannot open config " << cfgfile << '\n';
            return 1;
        }
        p = continuum::parse_continuum_config(in).params;
    } else {
        p.beta = beta;
        p.kappa = kappa;
        p.power_q = power_q;
        p.power_rho = power_rho;
        if (!clist.empty()) {
            std::istringstream cs(clist);
            std::string tok;
            while (std::getline(cs, tok, ',')) p.c.push_back(std::stod(tok));
        }
        continuum::validate(p);
    }
    continuum::FractalExponents fx = continuum::fractal_exponents(p);
    ordered_json j;
    j["gamma"] = fx.gamma_;
    j["eta"] = fx.eta_;
    j["dim_hausdorff"] = std::isfinite(fx.dim_h) ? ordered_json(fx.dim_h) : ordered_json();
    j["dim_packing"] = std::isfinite(fx.dim_p) ? ordered_json(fx.dim_p) : ordered_json();
    j["converged"] = fx.converged;
    j["slope_min"] = fx.slope_min;
    j["slope_max"] = fx.slope_max;
    // dimension swing across the observed slope window
    if (p.beta == 0.0) {
        double glo = 1.0 - fx.slope_min, ghi = 1.0 - fx.slope_max;
        if (ghi > 1.0 + 1e-9 && glo > 1.0 + 1e-9) {
            j["dim_ci"] = {glo / (glo - 1.0), ghi / (ghi - 1.0)};
        }
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

// distance through the forest-with-floor: walking to parent 0 joins components
int lca_distance(const queue::ExplorationTree& tree, int a, int b) {
    int ha = tree.height[static_cast<std::size_t>(a)];
    int hb = tree.height[static_cast<std::size_t>(b)];
    int d = 0;
    while (ha > hb) { a = tree.parent[static_cast<std::size_t>(a)]; --ha; ++d; }
    while (hb > ha) { b = tree.parent[static_cast<std::size_t>(b)]; --hb; ++d; }
    while (a != b) {
        a = tree.parent[static_cast<std::size_t>(a)];
        b = tree.parent[static_cast<std::size_t>(b)];
        d += 2;
    }
    return d;
}

int cmd_oracle(const std::string& wcsv, std::uint64_t seed, long trials) {
    Weights w = parse_weights(wcsv);
    long dist_bad = 0, pinch_bad = 0, height_bad = 0;
    for (long i = 0; i < trials; ++i) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(i)));
        queue::TrialOutput trial = queue::sample_graph(w, rng);
        StepFunction h = queue::height_process(trial.path);
        excursions::TreeCoder coder(h);
        for (int a = 1; a <= w.n(); ++a) {
            double ha = h.value(trial.arrivals.E[static_cast<std::size_t>(a - 1)]);
            if (static_cast<int>(ha + 0.5) != trial.tree.height[static_cast<std::size_t>(a)])
                ++height_bad;
            for (int b = a + 1; b <= w.n(); ++b) {
                double d = coder.distance(trial.arrivals.E[static_cast<std::size_t>(a - 1)],
                                          trial.arrivals.E[static_cast<std::size_t>(b - 1)]);
                if (static_cast<long>(d + 0.5) != lca_distance(trial.tree, a, b)) ++dist_bad;
            }
        }
        auto spaces = excursions::component_spaces(trial, w, 1.0);
        for (const auto& sp : spaces) {
            for (int a = 0; a < sp.n(); ++a) {
                auto hops = oracle::bfs_distances(trial.graph,
                                                  sp.labels[static_cast<std::size_t>(a)]);
                for (int b = a + 1; b < sp.n(); ++b) {
                    long g = hops[static_cast<std::size_t>(sp.labels[static_cast<std::size_t>(b)] - 1)];
                    if (static_cast<long>(
                            sp.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] + 0.5) != g)
                        ++pinch_bad;
                }
            }
        }
    }
    std::cout << "trials=" << trials << " tree_distance_bad=" << dist_bad
              << " pinched_bad=" << pinch_bad << " height_bad=" << height_bad << '\n';
    return (dist_bad + pinch_bad + height_bad) ? 1 : 0;
}

int cmd_selftest() {
    Weights w({2.0, 1.0, 1.0});
    int rc = 0;
    {
        stats::TestReport r = stats::edge_frequency_test(w, 5000, 0.001, 12345);
        std::cout << "edge_frequency: " << (r.pass ? "ok" : "FAIL") << " (" << r.detail << ")\n";
        rc |= r.pass ? 0 : 1;
    }
    {
        stats::TestReport r = embedding_report(w, 25, 12345);
        std::cout << "embedding: " << (r.pass ? "ok" : "FAIL") << " (" << r.detail << ")\n";
        rc |= r.pass ? 0 : 1;
    }
    {
        continuum::ContinuumParams p;
        p.beta = 1.0;
        double err = std::abs(continuum::psi_inverse(p, 2.0) - 2.0);
        std::cout << "psi_inverse: " << (err < 1e-8 ? "ok" : "FAIL") << " (err=" << err << ")\n";
        rc |= err < 1e-8 ? 0 : 1;
    }
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiplicative random graph toolkit"};
    app.require_subcommand(1);

    std::string wcsv, outdir = ".", outfile, only, cfgfile, clist;
    std::uint64_t seed = 1;
    long trials = 1;
    double eps = 1.0;
    int dense_max = 2000;
    bool aggregate = false, check = false, corrupt = false, dump_paths = false;
    double beta = 0.0, kappa = 1.0, power_q = 0.0, power_rho = 0.0;
    int workers = 0;

    auto* sample = app.add_subcommand("sample", "sample graphs and component spaces");
    sample->add_option("--weights", wcsv)->required();
    sample->add_option("--seed", seed);
    sample->add_option("--trials", trials);
    sample->add_option("--out", outdir);
    sample->add_option("--eps", eps);
    sample->add_option("--dense-max", dense_max);
    sample->add_flag("--aggregate", aggregate);

    auto* verify = app.add_subcommand("verify", "run the statistical suite");
    verify->add_option("--weights", wcsv)->required();
    verify->add_option("--seed", seed);
    verify->add_option("--trials", trials)->default_val(20000);
    verify->add_option("--only", only);
    verify->add_option("--out", outfile);
    verify->add_option("--workers", workers);
    verify->add_flag("--corrupt-sampler", corrupt)->group("");

    auto* embed = app.add_subcommand("embed", "export one embedded trajectory");
    embed->add_option("--weights", wcsv)->required();
    embed->add_option("--seed", seed);
    embed->add_option("--out", outfile);
    embed->add_flag("--check", check);

    auto* exc = app.add_subcommand("excursions", "export component metric spaces");
    exc->add_option("--weights", wcsv)->required();
    exc->add_option("--seed", seed);
    exc->add_option("--eps", eps);
    exc->add_option("--dense-max", dense_max);

    auto* cont = app.add_subcommand("continuum", "simulate the limit processes");
    cont->add_option("--config", cfgfile)->required();
    cont->add_option("--out", outdir);
    cont->add_flag("--dump-paths", dump_paths);

    auto* dims = app.add_subcommand("dims", "fractal exponents and dimensions");
    dims->add_option("--config", cfgfile);
    dims->add_option("--beta", beta);
    dims->add_option("--kappa", kappa);
    dims->add_option("--power-q", power_q);
    dims->add_option("--power-rho", power_rho);
    dims->add_option("--c", clist);

    auto* orc = app.add_subcommand("oracle", "brute-force cross checks");
    orc->add_option("--weights", wcsv)->required();
    orc->add_option("--seed", seed);
    orc->add_option("--trials", trials)->default_val(50);

    auto* self = app.add_subcommand("selftest", "fast built-in checks");
    (void)self;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (workers > 0) {
        // --workers is a convenience alias; the env var still wins
        if (!std::getenv("MULGRAPH_WORKERS")) {
            static std::string kv = std::to_string(workers);
            setenv("MULGRAPH_WORKERS", kv.c_str(), 0);
        }
    }

    try {
        if (sample->parsed())
            return cmd_sample(wcsv, seed, trials, outdir, aggregate, eps, dense_max);
        if (verify->parsed())
            return cmd_verify(wcsv, seed, trials, only, corrupt, outfile);
        if (embed->parsed()) return cmd_embed(wcsv, seed, check, outfile);
        if (exc->parsed()) return cmd_excursions(wcsv, seed, eps, dense_max);
        if (cont->parsed()) return cmd_continuum(cfgfile, dump_paths, outdir);
        if (dims->parsed())
            return cmd_dims(cfgfile, beta, kappa, power_q, power_rho, clist);
        if (orc->parsed()) return cmd_oracle(wcsv, seed, trials);
        if (self->parsed()) return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
