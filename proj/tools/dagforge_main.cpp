// dagforge command-line front end.
//
//   dagforge generate --d 10 --graph er --k 2 --mech linear --n 1000 --out runs
//   dagforge run --data runs/dataset.data.csv --truth runs/dataset.graph.csv
//                --algo ppo --score bic-ev --steps 20000 --prune threshold:0.3
//   dagforge eval --pred runs/run.best.csv --truth runs/dataset.graph.csv
//   dagforge bench --grid presets/dense30_er8.json --out bench
//
// Exit codes: 0 success, 2 bad usage or unreadable input, 3 numeric failure
// (diverged optimization, unfactorizable kernel). `bench` additionally exits
// 3 when every run in a non-empty grid failed. The env var DAGFORGE_SEED is
// used as the master seed when --seed is not given.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagforge/dagforge.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

using nlohmann::json;

std::uint64_t resolve_master_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("DAGFORGE_SEED")) {
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(env, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || env[pos] != '\0')
            throw std::invalid_argument(std::string("DAGFORGE_SEED is not a number: '") + env + "'");
        return v;
    }
    return 0;
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    int d = 10;
    std::string graph = "er";
    int k = 2;
    std::string mech = "linear";
    std::string noise = "gauss";
    double noise_var = 1.0;
    std::vector<double> noise_var_range;  // empty or {lo, hi}
    long n = 1000;
    std::string weights = "regular";
    bool standardize = false;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string prefix = "dataset";
};

dagforge::SemSpec sem_from(const std::string& mech, const std::string& weights,
                           const std::string& noise, double noise_var,
                           const std::vector<double>& noise_var_range, long n,
                           bool standardize) {
    dagforge::SemSpec sem;
    sem.mechanism = dagforge::parse_mechanism(mech);
    sem.weight_range = dagforge::parse_weight_range(weights);
    sem.noise.kind = dagforge::parse_noise_kind(noise);
    sem.noise.variance = noise_var;
    if (!noise_var_range.empty()) {
        if (noise_var_range.size() != 2 || noise_var_range[0] > noise_var_range[1] ||
            noise_var_range[0] < 0.0)
            throw std::invalid_argument("--noise-var-range expects LO HI with 0 <= LO <= HI");
        sem.noise.variance_range = std::make_pair(noise_var_range[0], noise_var_range[1]);
    }
    sem.n = n;
    sem.standardize = standardize;
    return sem;
}

int cmd_generate(const GenerateArgs& a) {
    dagforge::GraphSpec gspec;
    gspec.d = a.d;
    gspec.model = dagforge::parse_graph_model(a.graph);
    gspec.k = a.k;
    const dagforge::SemSpec sem = sem_from(a.mech, a.weights, a.noise, a.noise_var,
                                           a.noise_var_range, a.n, a.standardize);
    const std::uint64_t seed = resolve_master_seed(a.seed);

    const dagforge::GeneratedData gen = dagforge::generate_dataset(gspec, sem, seed);

    std::filesystem::create_directories(a.out_dir);
    const std::string base = (std::filesystem::path(a.out_dir) / a.prefix).string();
    const std::string data_path = base + ".data.csv";
    const std::string graph_path = base + ".graph.csv";
    const std::string meta_path = base + ".meta.json";

    dagforge::write_matrix_csv(data_path, gen.data.data());
    dagforge::write_adjacency_csv(graph_path, gen.graph);

    dagforge::DatasetMeta meta;
    meta.graph_csv_path = graph_path;
    meta.d = a.d;
    meta.n = a.n;
    meta.model = dagforge::to_name(gspec.model);
    meta.k = a.k;
    meta.mechanism = dagforge::to_name(sem.mechanism);
    meta.noise = dagforge::to_name(sem.noise.kind);
    meta.weight_range = dagforge::to_name(sem.weight_range);
    meta.seed = seed;
    meta.standardized = a.standardize;
    dagforge::write_json_file(meta_path, json(meta));

    std::cout << "wrote " << data_path << "\n"
              << "wrote " << graph_path << "\n"
              << "wrote " << meta_path << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// run

struct PruneSpec {
    enum class Mode { None, Threshold, Ci };
    Mode mode = Mode::None;
    double value = 0.0;
};

PruneSpec parse_prune(const std::string& s) {
    if (s.empty() || s == "none") return {};
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    std::optional<double> value;
    if (colon != std::string::npos) {
        const std::string tail = s.substr(colon + 1);
        std::size_t pos = 0;
        try {
            value = std::stod(tail, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != tail.size() || pos == 0)
            throw std::invalid_argument("--prune: bad number '" + tail + "'");
    }
    if (head == "threshold") return {PruneSpec::Mode::Threshold, value.value_or(0.3)};
    if (head == "ci") return {PruneSpec::Mode::Ci, value.value_or(0.05)};
    throw std::invalid_argument("--prune expects none, threshold[:DELTA], or ci[:ALPHA], got '" + s +
                                "'");
}

json prune_json(const PruneSpec& p) {
    switch (p.mode) {
        case PruneSpec::Mode::None: return {{"mode", "none"}};
        case PruneSpec::Mode::Threshold: return {{"mode", "threshold"}, {"delta", p.value}};
        case PruneSpec::Mode::Ci: return {{"mode", "ci"}, {"alpha", p.value}};
    }
    throw std::logic_error("prune_json: unreachable");
}

struct RunArgs {
    std::string data_path;
    std::string truth_path;
    std::string algo = "ppo";
    std::string score = "bic-ev";
    std::string regressor = "ols";
    double lambda0 = 0.0;
    long steps = 20000;
    int batch = 64;
    std::optional<double> lr;
    double entropy_coef = 0.0;
    bool no_adv_norm = false;
    long patience = 0;
    std::string prune;
    double lambda1 = 1e-7;
    std::optional<std::uint64_t> seed;
    std::size_t cache_capacity = 0;
    bool no_cache = false;
    std::string out_dir = ".";
    std::string prefix = "run";
};

// One discovery run against an in-memory dataset; shared by `run` and `bench`.
// Returns the final (possibly pruned) graph and fills the manifest's config,
// trace, best-DAG, reward, and timing fields. Output files land under `base`.
dagforge::Dag execute_run(const dagforge::Dataset& ds, const dagforge::Dag* truth,
                          const RunArgs& a, std::uint64_t seed, const std::string& base,
                          dagforge::RunManifest& man) {
    const PruneSpec prune = parse_prune(a.prune);
    const std::string trace_path = base + ".trace.csv";
    const std::string best_path = base + ".best.csv";
    man.seed = seed;
    man.dataset_fingerprint = dagforge::fingerprint_hex(ds);
    man.trace_path = trace_path;
    man.best_dag_path = best_path;
    man.started_at = dagforge::iso8601_utc_now();
    const auto t0 = std::chrono::steady_clock::now();

    dagforge::Dag final_dag(ds.variable_count());
    if (a.algo == "st-continuous") {
        dagforge::ContinuousStConfig cfg;
        cfg.lr = a.lr.value_or(cfg.lr);
        cfg.lambda1 = a.lambda1;
        cfg.max_iters = a.steps;
        cfg.seed = seed;
        const dagforge::StResult res = dagforge::train_continuous_st(ds, cfg);
        dagforge::write_loss_trace_csv(trace_path, res.loss_trace);
        switch (prune.mode) {
            case PruneSpec::Mode::None: final_dag = res.graph.structure(); break;
            case PruneSpec::Mode::Threshold:
                final_dag = dagforge::prune_threshold(res.graph, prune.value);
                break;
            case PruneSpec::Mode::Ci:
                final_dag = dagforge::prune_ci(ds, res.graph.structure(), prune.value);
                break;
        }
        const double final_loss = res.loss_trace.empty() ? 0.0 : res.loss_trace.back();
        man.config = {{"algorithm", "st-continuous"},
                      {"lr", cfg.lr},
                      {"lambda1", cfg.lambda1},
                      {"max_iters", cfg.max_iters},
                      {"plateau_rel_tol", cfg.plateau_rel_tol},
                      {"plateau_window", cfg.plateau_window},
                      {"init_scale", cfg.init_scale},
                      {"seed", seed},
                      {"final_loss", final_loss},
                      {"prune", prune_json(prune)}};
        man.best_reward = -final_loss;  // negated loss, comparable direction-wise
    } else {
        dagforge::TrainConfig cfg;
        cfg.algorithm = dagforge::parse_algo(a.algo);
        cfg.batch_size = a.batch;
        cfg.total_steps = a.steps;
        cfg.learning_rate = a.lr;
        cfg.entropy_coef = a.entropy_coef;
        cfg.advantage_normalization = !a.no_adv_norm;
        cfg.patience = a.patience;
        cfg.seed = seed;
        cfg.truth = truth;
        dagforge::ScoreConfig score_cfg;
        score_cfg.kind = dagforge::parse_score_kind(a.score);
        score_cfg.regressor = dagforge::parse_regressor(a.regressor);
        score_cfg.lambda0 = a.lambda0;
        std::optional<dagforge::ScoreCache> cache;
        if (!a.no_cache) cache.emplace(a.cache_capacity);

        const dagforge::TrainResult res =
            dagforge::train(ds, cfg, score_cfg, cache ? &*cache : nullptr);
        dagforge::write_trace_csv(trace_path, res.trace);
        man.best_reward = res.best_reward;
        switch (prune.mode) {
            case PruneSpec::Mode::None: final_dag = res.best_dag; break;
            case PruneSpec::Mode::Threshold:
                final_dag = dagforge::prune_threshold(
                    dagforge::estimate_weights(ds, res.best_dag), prune.value);
                break;
            case PruneSpec::Mode::Ci:
                final_dag = dagforge::prune_ci(ds, res.best_dag, prune.value);
                break;
        }
        man.config = {{"train", dagforge::train_config_json(cfg)},
                      {"score", dagforge::score_config_json(score_cfg)},
                      {"prune", prune_json(prune)},
                      {"cache", cache ? json{{"capacity", a.cache_capacity}} : json(nullptr)}};
    }
    dagforge::write_adjacency_csv(best_path, final_dag);
    if (truth) man.result = dagforge::evaluate(final_dag, *truth);
    man.wall_seconds = elapsed_seconds(t0);
    man.finished_at = dagforge::iso8601_utc_now();
    return final_dag;
}

int cmd_run(const RunArgs& a) {
    const dagforge::Dataset ds = dagforge::read_dataset_csv(a.data_path);
    std::optional<dagforge::Dag> truth;
    if (!a.truth_path.empty()) {
        truth = dagforge::read_adjacency_csv(a.truth_path);
        if (truth->node_count != ds.variable_count())
            throw std::invalid_argument("truth graph has " + std::to_string(truth->node_count) +
                                        " nodes but the dataset has " +
                                        std::to_string(ds.variable_count()) + " variables");
    }
    const std::uint64_t seed = resolve_master_seed(a.seed);
    std::filesystem::create_directories(a.out_dir);
    const std::string base = (std::filesystem::path(a.out_dir) / a.prefix).string();

    dagforge::RunManifest man;
    man.dataset_path = a.data_path;
    execute_run(ds, truth ? &*truth : nullptr, a, seed, base, man);
    const std::string manifest_path = base + ".manifest.json";
    dagforge::write_json_file(manifest_path, json(man));

    std::cout << "best reward " << man.best_reward;
    if (man.result) std::cout << ", shd " << man.result->shd;
    std::cout << " (" << man.wall_seconds << " s)\n"
              << "wrote " << manifest_path << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& pred_path, const std::string& truth_path) {
    const dagforge::Dag pred = dagforge::read_adjacency_csv(pred_path);
    const dagforge::Dag truth = dagforge::read_adjacency_csv(truth_path);
    if (pred.node_count != truth.node_count)
        throw std::invalid_argument("shape mismatch: predicted has " +
                                    std::to_string(pred.node_count) + " nodes, truth has " +
                                    std::to_string(truth.node_count));
    std::cout << json(dagforge::evaluate(pred, truth)).dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string grid_path;
    std::string out_dir = "bench";
    int jobs = 0;  // 0 -> hardware concurrency
    std::optional<std::uint64_t> seed;
};

struct BenchRow {
    std::size_t run_index = 0;
    int dataset_index = 0;
    int algo_index = 0;
    int seed_index = 0;
    std::uint64_t seed = 0;
    json dataset_spec;
    json algo_spec;
    double best_reward = 0.0;
    double wall_seconds = 0.0;
    std::optional<dagforge::EvalResult> result;
    std::string status = "ok";
};

dagforge::GraphSpec graph_spec_from(const json& j) {
    dagforge::GraphSpec g;
    g.d = j.value("d", g.d);
    g.model = dagforge::parse_graph_model(j.value("graph", "er"));
    g.k = j.value("k", g.k);
    return g;
}

dagforge::SemSpec sem_spec_from(const json& j) {
    std::vector<double> range;
    if (j.contains("noise_var_range")) range = j.at("noise_var_range").get<std::vector<double>>();
    return sem_from(j.value("mech", "linear"), j.value("weights", "regular"),
                    j.value("noise", "gauss"), j.value("noise_var", 1.0), range,
                    j.value("n", 1000L), j.value("standardize", false));
}

RunArgs run_args_from(const json& j) {
    RunArgs a;
    a.algo = j.value("algo", a.algo);
    a.score = j.value("score", a.score);
    a.regressor = j.value("regressor", a.regressor);
    a.lambda0 = j.value("lambda0", a.lambda0);
    a.steps = j.value("steps", a.steps);
    a.batch = j.value("batch", a.batch);
    if (j.contains("lr") && !j.at("lr").is_null()) a.lr = j.at("lr").get<double>();
    a.entropy_coef = j.value("entropy_coef", a.entropy_coef);
    a.no_adv_norm = !j.value("advantage_normalization", true);
    a.patience = j.value("patience", a.patience);
    a.prune = j.value("prune", a.prune);
    a.lambda1 = j.value("lambda1", a.lambda1);
    a.cache_capacity = j.value("cache_capacity", a.cache_capacity);
    a.no_cache = !j.value("cache", true);
    return a;
}

std::string csv_escape_status(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out += (c == ',' || c == '\n' || c == '\r') ? ' ' : c;
    return out;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

int cmd_bench(const BenchArgs& a) {
    const json grid = dagforge::read_json_file(a.grid_path);
    const std::uint64_t master =
        a.seed ? *a.seed
               : (grid.contains("master_seed") ? grid.at("master_seed").get<std::uint64_t>()
                                               : resolve_master_seed(std::nullopt));
    const int num_seeds = grid.value("num_seeds", 1);
    const std::vector<json> datasets = grid.value("datasets", std::vector<json>{});
    const std::vector<json> algos = grid.value("algos", std::vector<json>{});
    if (num_seeds < 0) throw std::invalid_argument("bench: num_seeds must be >= 0");
    // Parse every cell up front so a typo fails the whole sweep, not row 37.
    for (const json& dj : datasets) {
        graph_spec_from(dj);
        sem_spec_from(dj);
    }
    for (const json& aj : algos) {
        const RunArgs ra = run_args_from(aj);
        parse_prune(ra.prune);
        if (ra.algo != "st-continuous") dagforge::parse_algo(ra.algo);
        dagforge::parse_score_kind(ra.score);
        dagforge::parse_regressor(ra.regressor);
    }

    std::filesystem::create_directories(a.out_dir);
    const std::size_t total = datasets.size() * algos.size() * static_cast<std::size_t>(num_seeds);
    std::vector<BenchRow> rows(total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex log_mutex;

    const auto run_cell = [&](std::size_t idx) {
        BenchRow row;
        row.run_index = idx;
        row.seed_index = static_cast<int>(idx % static_cast<std::size_t>(num_seeds));
        const std::size_t cell = idx / static_cast<std::size_t>(num_seeds);
        row.algo_index = static_cast<int>(cell % algos.size());
        row.dataset_index = static_cast<int>(cell / algos.size());
        row.dataset_spec = datasets[static_cast<std::size_t>(row.dataset_index)];
        row.algo_spec = algos[static_cast<std::size_t>(row.algo_index)];
        row.seed = dagforge::derive_seed(master, idx);

        char name[32];
        std::snprintf(name, sizeof name, "run_%04zu", idx);
        const std::string base = (std::filesystem::path(a.out_dir) / name).string();
        const std::string manifest_path = base + ".manifest.json";

        if (std::filesystem::exists(manifest_path)) {
            // Resume: trust the completion marker and lift the recorded result.
            const dagforge::RunManifest man =
                dagforge::read_json_file(manifest_path).get<dagforge::RunManifest>();
            row.best_reward = man.best_reward;
            row.wall_seconds = man.wall_seconds;
            row.result = man.result;
            row.status = man.status;
            return row;
        }

        dagforge::RunManifest man;
        try {
            const dagforge::GeneratedData gen =
                dagforge::generate_dataset(graph_spec_from(row.dataset_spec),
                                           sem_spec_from(row.dataset_spec),
                                           dagforge::derive_seed(row.seed, 0));
            dagforge::write_adjacency_csv(base + ".truth.csv", gen.graph);
            man.dataset_path = base + ".truth.csv (generated in-memory, spec in config)";
            man.config = {{"dataset", row.dataset_spec}, {"algo", row.algo_spec}};
            RunArgs ra = run_args_from(row.algo_spec);
            dagforge::RunManifest run_man;
            run_man.dataset_path = man.dataset_path;
            execute_run(gen.data, &gen.graph, ra, dagforge::derive_seed(row.seed, 1), base,
                        run_man);
            run_man.config = {{"dataset", row.dataset_spec}, {"run", run_man.config}};
            run_man.seed = row.seed;
            man = run_man;
        } catch (const std::exception& e) {
            man.status = std::string("error: ") + e.what();
            man.seed = row.seed;
            man.started_at = man.started_at.empty() ? dagforge::iso8601_utc_now() : man.started_at;
            man.finished_at = dagforge::iso8601_utc_now();
        }
        dagforge::write_json_file(manifest_path, json(man));
        row.best_reward = man.best_reward;
        row.wall_seconds = man.wall_seconds;
        row.result = man.result;
        row.status = man.status;
        return row;
    };

    const auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) return;
            rows[idx] = run_cell(idx);
            const std::size_t finished = done.fetch_add(1) + 1;
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << "[" << finished << "/" << total << "] run " << idx << " "
                      << (rows[idx].status == "ok"
                              ? (rows[idx].result
                                     ? "shd=" + std::to_string(rows[idx].result->shd)
                                     : std::string("ok"))
                              : rows[idx].status)
                      << " (" << fmt_double(rows[idx].wall_seconds) << " s)\n";
        }
    };

    int jobs = a.jobs;
    if (jobs <= 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(total, 1)));
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    // Single-writer results table, one row per grid cell per seed.
    const std::string results_path = (std::filesystem::path(a.out_dir) / "results.csv").string();
    std::ofstream out(results_path);
    if (!out) throw std::runtime_error(results_path + ": cannot open for writing");
    out << "run,dataset_index,algo_index,seed_index,seed,d,graph,k,mech,noise,n,weights,"
           "standardize,algo,score,steps,batch,prune,predicted,correct,reversed,extra,missing,"
           "shd,fdr,tpr,skeleton_precision,skeleton_recall,skeleton_f1,best_reward,wall_seconds,"
           "status\n";
    std::size_t ok_count = 0;
    for (const BenchRow& row : rows) {
        if (row.status == "ok") ++ok_count;
        const json& dj = row.dataset_spec;
        const json& aj = row.algo_spec;
        const auto opt = [](const std::optional<double>& v) {
            return v ? fmt_double(*v) : std::string();
        };
        out << row.run_index << ',' << row.dataset_index << ',' << row.algo_index << ','
            << row.seed_index << ',' << row.seed << ',' << dj.value("d", 10) << ','
            << dj.value("graph", "er") << ',' << dj.value("k", 2) << ','
            << dj.value("mech", "linear") << ',' << dj.value("noise", "gauss") << ','
            << dj.value("n", 1000L) << ',' << dj.value("weights", "regular") << ','
            << (dj.value("standardize", false) ? 1 : 0) << ',' << aj.value("algo", "ppo") << ','
            << aj.value("score", "bic-ev") << ',' << aj.value("steps", 20000L) << ','
            << aj.value("batch", 64) << ',' << aj.value("prune", "") << ',';
        if (row.result) {
            const dagforge::EvalResult& r = *row.result;
            out << r.predicted << ',' << r.correct << ',' << r.reversed << ',' << r.extra << ','
                << r.missing << ',' << r.shd << ',' << opt(r.fdr) << ',' << opt(r.tpr) << ','
                << opt(r.skeleton_precision) << ',' << opt(r.skeleton_recall) << ','
                << opt(r.skeleton_f1) << ',';
        } else {
            out << ",,,,,,,,,,,";
        }
        out << fmt_double(row.best_reward) << ',' << fmt_double(row.wall_seconds) << ','
            << csv_escape_status(row.status) << '\n';
    }
    out.close();
    if (!out) throw std::runtime_error(results_path + ": write failed");
    std::cout << "wrote " << results_path << " (" << rows.size() << " rows, " << ok_count
              << " ok)\n";
    if (total > 0 && ok_count == 0) return kExitNumeric;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dagforge: score-based causal structure discovery"};
    app.require_subcommand(1);

    GenerateArgs ga;
    CLI::App* gen = app.add_subcommand("generate", "Sample a random SEM and write a dataset");
    gen->add_option("--d", ga.d, "number of variables")->capture_default_str();
    gen->add_option("--graph", ga.graph, "graph model: er|sf")->capture_default_str();
    gen->add_option("--k", ga.k, "expected in-degree (er) / out-edges per node (sf)")
        ->capture_default_str();
    gen->add_option("--mech", ga.mech, "mechanism: linear|gp|mlp|pnl-gp")->capture_default_str();
    gen->add_option("--noise", ga.noise, "noise family: gauss|exp|gumbel|laplace|uniform")
        ->capture_default_str();
    gen->add_option("--noise-var", ga.noise_var, "gaussian noise variance")->capture_default_str();
    gen->add_option("--noise-var-range", ga.noise_var_range,
                    "LO HI: per-node gaussian variances drawn uniformly from [LO, HI]")
        ->expected(2);
    gen->add_option("--n", ga.n, "number of samples")->capture_default_str();
    gen->add_option("--weights", ga.weights, "linear weight range: regular|wide")
        ->capture_default_str();
    gen->add_flag("--standardize", ga.standardize, "z-score each column after simulation");
    gen->add_option("--seed", ga.seed, "RNG seed (default: $DAGFORGE_SEED or 0)");
    gen->add_option("--out", ga.out_dir, "output directory")->capture_default_str();
    gen->add_option("--prefix", ga.prefix, "output file prefix")->capture_default_str();

    RunArgs ra;
    CLI::App* run = app.add_subcommand("run", "Run structure discovery on a dataset CSV");
    run->add_option("--data", ra.data_path, "dataset CSV (rows = samples)")->required();
    run->add_option("--truth", ra.truth_path, "truth adjacency CSV (enables SHD in the trace)");
    run->add_option("--algo", ra.algo, "algorithm: ppo|a2c|vpg|st-continuous")
        ->capture_default_str();
    run->add_option("--score", ra.score, "score: bic-ev|bic-nv|ls")->capture_default_str();
    run->add_option("--regressor", ra.regressor, "per-node regressor: ols|gp")
        ->capture_default_str();
    run->add_option("--lambda0", ra.lambda0, "edge penalty for the ls score")
        ->capture_default_str();
    run->add_option("--steps", ra.steps, "training steps (st-continuous: max iterations)")
        ->capture_default_str();
    run->add_option("--batch", ra.batch, "DAG samples per step")->capture_default_str();
    run->add_option("--lr", ra.lr, "learning rate (default: 3e-4 ppo, 7e-4 a2c/vpg, 1e-3 st)");
    run->add_option("--entropy-coef", ra.entropy_coef, "entropy bonus weight")
        ->capture_default_str();
    run->add_flag("--no-adv-norm", ra.no_adv_norm, "disable advantage normalization");
    run->add_option("--patience", ra.patience,
                    "stop after this many steps without a new best reward (0 = off)")
        ->capture_default_str();
    run->add_option("--prune", ra.prune, "post-processing: none|threshold[:DELTA]|ci[:ALPHA]");
    run->add_option("--lambda1", ra.lambda1, "L1 penalty (st-continuous only)")
        ->capture_default_str();
    run->add_option("--seed", ra.seed, "RNG seed (default: $DAGFORGE_SEED or 0)");
    run->add_option("--cache-capacity", ra.cache_capacity,
                    "max cached per-node regressions (0 = unbounded)")
        ->capture_default_str();
    run->add_flag("--no-cache", ra.no_cache, "disable the per-node regression cache");
    run->add_option("--out", ra.out_dir, "output directory")->capture_default_str();
    run->add_option("--prefix", ra.prefix, "output file prefix")->capture_default_str();

    std::string eval_pred, eval_truth;
    CLI::App* eval = app.add_subcommand("eval", "Compare a predicted DAG against a truth DAG");
    eval->add_option("--pred", eval_pred, "predicted adjacency CSV")->required();
    eval->add_option("--truth", eval_truth, "truth adjacency CSV")->required();

    BenchArgs ba;
    CLI::App* bench = app.add_subcommand("bench", "Run a (dataset x algo x seed) sweep");
    bench->add_option("--grid", ba.grid_path, "grid spec JSON")->required();
    bench->add_option("--out", ba.out_dir, "output directory")->capture_default_str();
    bench->add_option("--jobs", ba.jobs, "worker threads (default: available cores)");
    bench->add_option("--seed", ba.seed,
                      "master seed (overrides the grid file; default: $DAGFORGE_SEED or 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(ga);
        if (run->parsed()) return cmd_run(ra);
        if (eval->parsed()) return cmd_eval(eval_pred, eval_truth);
        if (bench->parsed()) return cmd_bench(ba);
    } catch (const dagforge::NumericError& e) {
        std::cerr << "dagforge: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "dagforge: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;  // unreachable: a subcommand is required
}
