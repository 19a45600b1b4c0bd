#pragma once

#include <cstdint>
#include <ctime>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dagforge/dataset.hpp"
#include "dagforge/metrics.hpp"
#include "dagforge/scoring.hpp"
#include "dagforge/synth.hpp"
#include "dagforge/train.hpp"

namespace dagforge {

// ---- name <-> enum maps (shared by the CLI flags and the JSON files) -------

inline std::string to_name(ScoreKind k) {
    switch (k) {
        case ScoreKind::BIC_EV: return "bic-ev";
        case ScoreKind::BIC_NV: return "bic-nv";
        case ScoreKind::LS: return "ls";
    }
    throw std::logic_error("to_name(ScoreKind)");
}
inline ScoreKind parse_score_kind(const std::string& s) {
    if (s == "bic-ev") return ScoreKind::BIC_EV;
    if (s == "bic-nv") return ScoreKind::BIC_NV;
    if (s == "ls") return ScoreKind::LS;
    throw std::invalid_argument("unknown score kind '" + s + "' (bic-ev|bic-nv|ls)");
}

inline std::string to_name(RegressorKind r) {
    return r == RegressorKind::OLS ? "ols" : "gp";
}
inline RegressorKind parse_regressor(const std::string& s) {
    if (s == "ols") return RegressorKind::OLS;
    if (s == "gp") return RegressorKind::GP;
    throw std::invalid_argument("unknown regressor '" + s + "' (ols|gp)");
}

inline std::string to_name(Algo a) {
    switch (a) {
        case Algo::VPG: return "vpg";
        case Algo::A2C: return "a2c";
        case Algo::PPO: return "ppo";
    }
    throw std::logic_error("to_name(Algo)");
}
inline Algo parse_algo(const std::string& s) {
    if (s == "vpg") return Algo::VPG;
    if (s == "a2c") return Algo::A2C;
    if (s == "ppo") return Algo::PPO;
    throw std::invalid_argument("unknown algorithm '" + s + "' (vpg|a2c|ppo)");
}

inline std::string to_name(GraphModel m) { return m == GraphModel::ER ? "er" : "sf"; }
inline GraphModel parse_graph_model(const std::string& s) {
    if (s == "er") return GraphModel::ER;
    if (s == "sf") return GraphModel::SF;
    throw std::invalid_argument("unknown graph model '" + s + "' (er|sf)");
}

inline std::string to_name(Mechanism m) {
    switch (m) {
        case Mechanism::Linear: return "linear";
        case Mechanism::Gp: return "gp";
        case Mechanism::Mlp: return "mlp";
        case Mechanism::PnlGp: return "pnl-gp";
    }
    throw std::logic_error("to_name(Mechanism)");
}
inline Mechanism parse_mechanism(const std::string& s) {
    if (s == "linear") return Mechanism::Linear;
    if (s == "gp") return Mechanism::Gp;
    if (s == "mlp") return Mechanism::Mlp;
    if (s == "pnl-gp") return Mechanism::PnlGp;
    throw std::invalid_argument("unknown mechanism '" + s + "' (linear|gp|mlp|pnl-gp)");
}

inline std::string to_name(NoiseKind k) {
    switch (k) {
        case NoiseKind::Gauss: return "gauss";
        case NoiseKind::Exp: return "exp";
        case NoiseKind::Gumbel: return "gumbel";
        case NoiseKind::Laplace: return "laplace";
        case NoiseKind::Uniform: return "uniform";
    }
    throw std::logic_error("to_name(NoiseKind)");
}
inline NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "gauss") return NoiseKind::Gauss;
    if (s == "exp") return NoiseKind::Exp;
    if (s == "gumbel") return NoiseKind::Gumbel;
    if (s == "laplace") return NoiseKind::Laplace;
    if (s == "uniform") return NoiseKind::Uniform;
    throw std::invalid_argument("unknown noise '" + s + "' (gauss|exp|gumbel|laplace|uniform)");
}

// Weight ranges travel by name; only the two published ranges are nameable.
inline std::string to_name(const IntervalUnion& u) {
    const auto eq = [](const IntervalUnion& a, const IntervalUnion& b) {
        return a.intervals == b.intervals;
    };
    if (eq(u, IntervalUnion::regular())) return "regular";
    if (eq(u, IntervalUnion::wide())) return "wide";
    return "custom";
}
inline IntervalUnion parse_weight_range(const std::string& s) {
    if (s == "regular") return IntervalUnion::regular();
    if (s == "wide") return IntervalUnion::wide();
    throw std::invalid_argument("unknown weight range '" + s + "' (regular|wide)");
}

// ---- JSON serializers -------------------------------------------------------

inline void to_json(nlohmann::json& j, const EvalResult& r) {
    const auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    j = nlohmann::json{{"predicted", r.predicted},
                       {"correct", r.correct},
                       {"reversed", r.reversed},
                       {"extra", r.extra},
                       {"missing", r.missing},
                       {"shd", r.shd},
                       {"fdr", opt(r.fdr)},
                       {"tpr", opt(r.tpr)},
                       {"skeleton_precision", opt(r.skeleton_precision)},
                       {"skeleton_recall", opt(r.skeleton_recall)},
                       {"skeleton_f1", opt(r.skeleton_f1)}};
}

inline void from_json(const nlohmann::json& j, EvalResult& r) {
    const auto opt = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<double>();
    };
    j.at("predicted").get_to(r.predicted);
    j.at("correct").get_to(r.correct);
    j.at("reversed").get_to(r.reversed);
    j.at("extra").get_to(r.extra);
    j.at("missing").get_to(r.missing);
    j.at("shd").get_to(r.shd);
    r.fdr = opt("fdr");
    r.tpr = opt("tpr");
    r.skeleton_precision = opt("skeleton_precision");
    r.skeleton_recall = opt("skeleton_recall");
    r.skeleton_f1 = opt("skeleton_f1");
}

inline void to_json(nlohmann::json& j, const DatasetMeta& m) {
    j = nlohmann::json{{"graph_csv_path", m.graph_csv_path},
                       {"d", m.d},
                       {"n", m.n},
                       {"model", m.model},
                       {"k", m.k},
                       {"mechanism", m.mechanism},
                       {"noise", m.noise},
                       {"weight_range", m.weight_range},
                       {"seed", m.seed},
                       {"standardized", m.standardized}};
}

inline void from_json(const nlohmann::json& j, DatasetMeta& m) {
    j.at("graph_csv_path").get_to(m.graph_csv_path);
    j.at("d").get_to(m.d);
    j.at("n").get_to(m.n);
    j.at("model").get_to(m.model);
    j.at("k").get_to(m.k);
    j.at("mechanism").get_to(m.mechanism);
    j.at("noise").get_to(m.noise);
    j.at("weight_range").get_to(m.weight_range);
    j.at("seed").get_to(m.seed);
    j.at("standardized").get_to(m.standardized);
}

inline nlohmann::json score_config_json(const ScoreConfig& cfg) {
    return nlohmann::json{{"kind", to_name(cfg.kind)},
                          {"regressor", to_name(cfg.regressor)},
                          {"lambda0", cfg.lambda0},
                          {"gp",
                           {{"alpha", cfg.gp.alpha},
                            {"length_scale_grid", cfg.gp.length_scale_grid},
                            {"jitter", cfg.gp.jitter}}}};
}

inline nlohmann::json train_config_json(const TrainConfig& cfg) {
    return nlohmann::json{{"algorithm", to_name(cfg.algorithm)},
                          {"batch_size", cfg.batch_size},
                          {"total_steps", cfg.total_steps},
                          {"learning_rate", resolve_learning_rate(cfg)},
                          {"entropy_coef", cfg.entropy_coef},
                          {"advantage_normalization", cfg.advantage_normalization},
                          {"vpg_baseline", cfg.vpg_baseline},
                          {"ppo",
                           {{"clip", cfg.ppo.clip},
                            {"epochs", cfg.ppo.epochs},
                            {"minibatch", cfg.ppo.minibatch}}},
                          {"vf_coef", cfg.vf_coef},
                          {"gamma_clip", cfg.gamma_clip},
                          {"max_grad_norm", cfg.max_grad_norm},
                          {"patience", cfg.patience},
                          {"seed", cfg.seed}};
}

// Everything needed to tie one discovery run to its inputs and outputs.
struct RunManifest {
    nlohmann::json config;  // full config snapshot (train/score/prune or st)
    std::uint64_t seed = 0;
    std::string dataset_path;
    std::string dataset_fingerprint;  // FNV-1a over the matrix bytes, hex
    std::string started_at;           // ISO 8601 UTC
    std::string finished_at;
    double wall_seconds = 0.0;
    std::string trace_path;
    std::string best_dag_path;
    double best_reward = 0.0;
    std::optional<EvalResult> result;  // present when a truth graph was given
    std::string status = "ok";
};

inline void to_json(nlohmann::json& j, const RunManifest& m) {
    j = nlohmann::json{{"config", m.config},
                       {"seed", m.seed},
                       {"dataset_path", m.dataset_path},
                       {"dataset_fingerprint", m.dataset_fingerprint},
                       {"started_at", m.started_at},
                       {"finished_at", m.finished_at},
                       {"wall_seconds", m.wall_seconds},
                       {"trace_path", m.trace_path},
                       {"best_dag_path", m.best_dag_path},
                       {"best_reward", m.best_reward},
                       {"result", m.result ? nlohmann::json(*m.result) : nlohmann::json(nullptr)},
                       {"status", m.status}};
}

inline void from_json(const nlohmann::json& j, RunManifest& m) {
    m.config = j.at("config");
    j.at("seed").get_to(m.seed);
    j.at("dataset_path").get_to(m.dataset_path);
    j.at("dataset_fingerprint").get_to(m.dataset_fingerprint);
    j.at("started_at").get_to(m.started_at);
    j.at("finished_at").get_to(m.finished_at);
    j.at("wall_seconds").get_to(m.wall_seconds);
    j.at("trace_path").get_to(m.trace_path);
    j.at("best_dag_path").get_to(m.best_dag_path);
    j.at("best_reward").get_to(m.best_reward);
    if (!j.at("result").is_null()) m.result = j.at("result").get<EvalResult>();
    j.at("status").get_to(m.status);
}

inline std::string iso8601_utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string fingerprint_hex(const Dataset& ds) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(ds.fingerprint()));
    return buf;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error(path + ": write failed");
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace dagforge
