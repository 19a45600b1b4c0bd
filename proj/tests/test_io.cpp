#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "dagforge/io.hpp"
#include "dagforge/json_io.hpp"

using namespace dagforge;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out);
    out << text;
}

bool same_eval(const EvalResult& a, const EvalResult& b) {
    return a.predicted == b.predicted && a.correct == b.correct && a.reversed == b.reversed &&
           a.extra == b.extra && a.missing == b.missing && a.shd == b.shd && a.fdr == b.fdr &&
           a.tpr == b.tpr && a.skeleton_precision == b.skeleton_precision &&
           a.skeleton_recall == b.skeleton_recall && a.skeleton_f1 == b.skeleton_f1;
}

}  // namespace

TEST_CASE("matrix CSV round-trips every bit") {
    Eigen::MatrixXd m(3, 3);
    m << 1.0 / 3.0, -2.5e-308, 1.7976931348623157e308,  //
        0.0, -1.0, 123456789.123456789,                 //
        std::nextafter(1.0, 2.0), -3.0e-5, 42.0;
    const std::string path = "io_roundtrip.csv";
    write_matrix_csv(path, m);
    const Eigen::MatrixXd back = read_matrix_csv(path);
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 3);
    for (Eigen::Index r = 0; r < 3; ++r)
        for (Eigen::Index c = 0; c < 3; ++c) REQUIRE(back(r, c) == m(r, c));
}

TEST_CASE("a non-numeric first line is treated as a header") {
    const std::string path = "io_header.csv";
    spit(path, "alpha,beta,gamma\n1,2,3\n4,5,6\n");
    const Eigen::MatrixXd m = read_matrix_csv(path);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(1, 2) == 6.0);

    // ... but only the first: later text is an error, with its line number.
    spit(path, "1,2\n3,oops\n");
    CHECK_THROWS_WITH(read_matrix_csv(path), Catch::Matchers::ContainsSubstring(":2:") &&
                                                 Catch::Matchers::ContainsSubstring("non-numeric"));
}

TEST_CASE("blank lines and CRLF endings are tolerated") {
    const std::string path = "io_crlf.csv";
    spit(path, "1.5,2.5\r\n\r\n\n3.5, 4.5\r\n");
    const Eigen::MatrixXd m = read_matrix_csv(path);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 2);
    CHECK(m(1, 0) == 3.5);
    CHECK(m(1, 1) == 4.5);  // padded field still parses
}

TEST_CASE("ragged and empty files fail with a precise message") {
    const std::string path = "io_bad.csv";
    spit(path, "1,2\n3,4\n5\n");
    CHECK_THROWS_WITH(read_matrix_csv(path),
                      Catch::Matchers::ContainsSubstring("io_bad.csv:3") &&
                          Catch::Matchers::ContainsSubstring("expected 2 fields, got 1"));

    spit(path, "");
    CHECK_THROWS_WITH(read_matrix_csv(path), Catch::Matchers::ContainsSubstring("no data rows"));

    spit(path, "only,a,header\n");
    CHECK_THROWS_WITH(read_matrix_csv(path), Catch::Matchers::ContainsSubstring("no data rows"));

    CHECK_THROWS_WITH(read_matrix_csv("io_definitely_missing.csv"),
                      Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("dataset reader wraps content complaints as parse errors") {
    const std::string path = "io_nonfinite.csv";
    spit(path, "1,inf\n2,3\n");  // parses numerically but is rejected as data
    CHECK_THROWS_AS(read_dataset_csv(path), ParseError);
    spit(path, "1,nan\n2,3\n");
    CHECK_THROWS_AS(read_dataset_csv(path), ParseError);

    spit(path, "1,2\n3,4\n");
    const Dataset ds = read_dataset_csv(path);
    CHECK(ds.sample_count() == 2);
    CHECK(ds.variable_count() == 2);
}

TEST_CASE("adjacency CSV round-trips and rejects non-DAG input") {
    Dag diamond(4);
    diamond.adj(0, 1) = diamond.adj(0, 2) = diamond.adj(1, 3) = diamond.adj(2, 3) = 1;
    const std::string path = "io_adj.csv";
    write_adjacency_csv(path, diamond);
    CHECK(slurp(path) == "0,1,1,0\n0,0,0,1\n0,0,0,1\n0,0,0,0\n");
    const Dag back = read_adjacency_csv(path);
    CHECK(back.adj == diamond.adj);

    spit(path, "0,1\n1,0\n");  // 2-cycle
    CHECK_THROWS_AS(read_adjacency_csv(path), ParseError);
    spit(path, "0,2\n0,0\n");  // non-binary entry
    CHECK_THROWS_AS(read_adjacency_csv(path), ParseError);
    spit(path, "0,1,0\n0,0,1\n");  // not square
    CHECK_THROWS_AS(read_adjacency_csv(path), ParseError);
    spit(path, "1,0\n0,0\n");  // self-loop
    CHECK_THROWS_AS(read_adjacency_csv(path), ParseError);
}

TEST_CASE("training trace serializes with an empty column for unknown SHD") {
    std::vector<TraceRow> trace(2);
    trace[0].step = 100;
    trace[0].mean_reward = -1.25;
    trace[0].best_reward = -0.5;  // best_shd left NaN
    trace[1].step = 200;
    trace[1].mean_reward = 0.5;
    trace[1].best_reward = 0.75;
    trace[1].best_shd = 3.0;
    const std::string path = "io_trace.csv";
    write_trace_csv(path, trace);
    CHECK(slurp(path) ==
          "step,mean_reward,best_reward,best_shd\n"
          "100,-1.25,-0.5,\n"
          "200,0.5,0.75,3\n");
}

TEST_CASE("loss trace numbers its rows from zero") {
    const std::string path = "io_loss.csv";
    write_loss_trace_csv(path, {1.5, 0.75, 0.5});
    CHECK(slurp(path) == "iter,loss\n0,1.5\n1,0.75\n2,0.5\n");
    write_loss_trace_csv(path, {});
    CHECK(slurp(path) == "iter,loss\n");
}

TEST_CASE("evaluation results survive a JSON round-trip, nulls included") {
    EvalResult blank;  // every optional empty
    nlohmann::json jb = blank;
    CHECK(jb.at("fdr").is_null());
    CHECK(jb.at("skeleton_f1").is_null());
    CHECK(same_eval(jb.get<EvalResult>(), blank));

    EvalResult full;
    full.predicted = 5;
    full.correct = 3;
    full.reversed = 1;
    full.extra = 1;
    full.missing = 2;
    full.shd = 4;
    full.fdr = 0.4;
    full.tpr = 0.6;
    full.skeleton_precision = 0.8;
    full.skeleton_recall = 2.0 / 3.0;
    full.skeleton_f1 = 8.0 / 11.0;
    nlohmann::json jf = full;
    CHECK(jf.at("shd") == 4);
    CHECK(same_eval(jf.get<EvalResult>(), full));
}

TEST_CASE("dataset metadata JSON round-trip") {
    DatasetMeta meta;
    meta.graph_csv_path = "toy.graph.csv";
    meta.d = 12;
    meta.n = 500;
    meta.model = "sf";
    meta.k = 4;
    meta.mechanism = "pnl-gp";
    meta.noise = "laplace";
    meta.weight_range = "wide";
    meta.seed = 0xDEADBEEFULL;
    meta.standardized = true;

    const nlohmann::json j = meta;
    const DatasetMeta back = j.get<DatasetMeta>();
    CHECK(back.graph_csv_path == meta.graph_csv_path);
    CHECK(back.d == meta.d);
    CHECK(back.n == meta.n);
    CHECK(back.model == meta.model);
    CHECK(back.k == meta.k);
    CHECK(back.mechanism == meta.mechanism);
    CHECK(back.noise == meta.noise);
    CHECK(back.weight_range == meta.weight_range);
    CHECK(back.seed == meta.seed);
    CHECK(back.standardized == meta.standardized);
}

TEST_CASE("run manifest JSON round-trip with and without a result") {
    RunManifest m;
    m.config = {{"algo", "ppo"}, {"steps", 20000}};
    m.seed = 77;
    m.dataset_path = "d.csv";
    m.dataset_fingerprint = "00ff00ff00ff00ff";
    m.started_at = "2026-08-16T00:00:00Z";
    m.finished_at = "2026-08-16T00:01:00Z";
    m.wall_seconds = 60.0;
    m.trace_path = "t.csv";
    m.best_dag_path = "b.csv";
    m.best_reward = -1.5;
    m.status = "ok";

    nlohmann::json j1 = m;
    CHECK(j1.at("result").is_null());
    const RunManifest b1 = j1.get<RunManifest>();
    CHECK_FALSE(b1.result.has_value());
    CHECK(b1.seed == 77);
    CHECK(b1.config.at("algo") == "ppo");
    CHECK(b1.best_reward == -1.5);
    CHECK(b1.wall_seconds == 60.0);
    CHECK(b1.status == "ok");

    EvalResult r;
    r.shd = 2;
    r.fdr = 0.25;
    m.result = r;
    nlohmann::json j2 = m;
    const RunManifest b2 = j2.get<RunManifest>();
    REQUIRE(b2.result.has_value());
    CHECK(b2.result->shd == 2);
    CHECK(b2.result->fdr == 0.25);
    CHECK_FALSE(b2.result->tpr.has_value());
}

TEST_CASE("JSON files land on disk pretty-printed with a final newline") {
    const std::string path = "io_blob.json";
    write_json_file(path, {{"a", 1}, {"b", nullptr}});
    const std::string text = slurp(path);
    CHECK(text.back() == '\n');
    CHECK(text.find("  \"a\": 1") != std::string::npos);
    const nlohmann::json j = read_json_file(path);
    CHECK(j.at("a") == 1);
    CHECK(j.at("b").is_null());

    CHECK_THROWS(read_json_file("io_definitely_missing.json"));
}

TEST_CASE("enum names round-trip and unknown names are rejected") {
    for (ScoreKind k : {ScoreKind::BIC_EV, ScoreKind::BIC_NV, ScoreKind::LS})
        CHECK(parse_score_kind(to_name(k)) == k);
    for (RegressorKind r : {RegressorKind::OLS, RegressorKind::GP})
        CHECK(parse_regressor(to_name(r)) == r);
    for (Algo a : {Algo::VPG, Algo::A2C, Algo::PPO}) CHECK(parse_algo(to_name(a)) == a);
    for (GraphModel m : {GraphModel::ER, GraphModel::SF})
        CHECK(parse_graph_model(to_name(m)) == m);
    for (Mechanism m : {Mechanism::Linear, Mechanism::Gp, Mechanism::Mlp, Mechanism::PnlGp})
        CHECK(parse_mechanism(to_name(m)) == m);
    for (NoiseKind k : {NoiseKind::Gauss, NoiseKind::Exp, NoiseKind::Gumbel, NoiseKind::Laplace,
                        NoiseKind::Uniform})
        CHECK(parse_noise_kind(to_name(k)) == k);

    CHECK_THROWS_AS(parse_score_kind("bic"), std::invalid_argument);
    CHECK_THROWS_AS(parse_regressor("ridge"), std::invalid_argument);
    CHECK_THROWS_AS(parse_algo("trpo"), std::invalid_argument);
    CHECK_THROWS_AS(parse_graph_model("ba"), std::invalid_argument);
    CHECK_THROWS_AS(parse_mechanism("sigmoid"), std::invalid_argument);
    CHECK_THROWS_AS(parse_noise_kind("cauchy"), std::invalid_argument);
    CHECK_THROWS_AS(parse_weight_range("huge"), std::invalid_argument);
}

TEST_CASE("dataset fingerprints are stable and content-sensitive") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 1, 2, 3, 5;
    const std::string fa = fingerprint_hex(Dataset(a));
    CHECK(fa.size() == 16);
    CHECK(fa == fingerprint_hex(Dataset(a)));
    CHECK(fa != fingerprint_hex(Dataset(b)));
}
