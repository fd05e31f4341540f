#include "rcmdp/experiment.hpp"
#include "rcmdp/instances.hpp"
#include "rcmdp/io.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

using namespace rcmdp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rcmdp_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

ExperimentConfig tiny_config(const TempDir& dir) {
    ExperimentConfig cfg;
    cfg.instance = testutil::load_fixture("cons2.json");
    cfg.model = Contamination{0.1};
    cfg.radii = {0.1, 0.3};
    cfg.actor.total_iters = 4;
    cfg.actor.epsilon = 0.05;
    cfg.actor.critic.t_value_iters = 200;
    cfg.actor.critic.t_gain_iters = 50;
    cfg.seed = 91;
    cfg.out_dir = dir.file("out");
    cfg.repetitions = 2;
    cfg.quiet = true;
    return cfg;
}

} // namespace

TEST_CASE("instance files round-trip bit-exactly") {
    TempDir dir;
    const auto mdp = make_garnet(GarnetParams{4, 3, 3, 2, {}}, 17);
    save_instance(mdp, dir.file("inst.json"));
    const auto loaded = load_instance(dir.file("inst.json"));

    CHECK(loaded.n_states == mdp.n_states);
    CHECK(loaded.n_actions == mdp.n_actions);
    CHECK(loaded.cost == mdp.cost);
    CHECK(loaded.constraints == mdp.constraints);
    CHECK(loaded.thresholds == mdp.thresholds);
    CHECK(loaded.nominal_kernel == mdp.nominal_kernel);
    CHECK(loaded.initial_dist == mdp.initial_dist);
}

TEST_CASE("policy files round-trip bit-exactly") {
    TempDir dir;
    PolicyTable policy;
    policy.probs = {{0.125, 0.875}, {1.0 / 3.0, 2.0 / 3.0}};
    save_policy(policy, dir.file("pol.json"));
    const auto loaded = load_policy(dir.file("pol.json"));
    CHECK(loaded.probs == policy.probs);
}

TEST_CASE("generators are deterministic per seed") {
    const auto a = make_garnet(GarnetParams{5, 3, 2, 1, {}}, 7);
    const auto b = make_garnet(GarnetParams{5, 3, 2, 1, {}}, 7);
    const auto c = make_garnet(GarnetParams{5, 3, 2, 1, {}}, 8);
    CHECK(a.nominal_kernel == b.nominal_kernel);
    CHECK(a.cost == b.cost);
    CHECK(a.nominal_kernel != c.nominal_kernel);

    // branching 1 gives one-hot rows
    const auto hot = make_garnet(GarnetParams{4, 2, 1, 0, {}}, 3);
    for (const auto& per_state : hot.nominal_kernel)
        for (const auto& row : per_state) {
            int ones = 0;
            for (double x : row) {
                CHECK((x == 0.0 || x == 1.0));
                ones += x == 1.0;
            }
            CHECK(ones == 1);
        }
}

TEST_CASE("gridworld without slip is deterministic") {
    const auto mdp = make_gridworld(GridworldParams{3, 0.0, 1, 0.25}, 5);
    CHECK(mdp.n_states == 9);
    CHECK(mdp.n_actions == 4);
    for (const auto& per_state : mdp.nominal_kernel)
        for (const auto& row : per_state) {
            double mass = 0.0;
            int support = 0;
            for (double x : row) {
                mass += x;
                support += x > 0.0;
            }
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(support == 1);
        }
    // goal cell is free, all others cost 1
    for (int a = 0; a < 4; ++a) {
        CHECK(mdp.cost[8][a] == 0.0);
        CHECK(mdp.cost[0][a] == 1.0);
    }
}

TEST_CASE("config parsing resolves generator instances and validates fields") {
    const std::string text = R"({
      "instance": {"generator": {"kind": "random-garnet", "n_states": 3,
                                 "n_actions": 2, "branching": 2, "seed": 9}},
      "model": {"kind": "total-variation", "radius": 0.15},
      "critic": {"t_value_iters": 100, "t_gain_iters": 10},
      "seed": 5
    })";
    const auto cfg = parse_experiment_config(text, ".");
    CHECK(cfg.instance.n_states == 3);
    CHECK(cfg.radii == numvec{0.15});
    CHECK(cfg.actor.critic.t_value_iters == 100);
    CHECK(model_name(cfg.model) == "total-variation");

    CHECK_THROWS_AS(parse_experiment_config("{", "."), ParseError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"model": {"kind": "x"}})", "."),
                    ParseError);
    const std::string bad_reps = R"({
      "instance": {"generator": {"kind": "random-garnet", "seed": 1}},
      "model": {"kind": "contamination", "radius": 0.1},
      "repetitions": 0
    })";
    CHECK_THROWS_AS(parse_experiment_config(bad_reps, "."), ConfigError);
}

TEST_CASE("wasserstein metric shorthands expand to full matrices") {
    const std::string text = R"({"kind": "wasserstein", "radius": 0.2, "metric": "discrete"})";
    const auto model = parse_model_spec(text, 3);
    const auto& w = std::get<Wasserstein>(model);
    CHECK(w.metric == discrete_metric(3));
}

TEST_CASE("experiment runs write the promised files with a stable CSV schema") {
    TempDir dir;
    const auto cfg = tiny_config(dir);
    const auto dirs = run_experiment(cfg);
    REQUIRE(dirs.size() == 4); // 2 radii x 2 repetitions

    for (const auto& run_dir : dirs) {
        CHECK(fs::exists(fs::path(run_dir) / "trace.csv"));
        CHECK(fs::exists(fs::path(run_dir) / "summary.json"));
        CHECK(fs::exists(fs::path(run_dir) / "meta.json"));
        const auto csv = slurp(run_dir + "/trace.csv");
        CHECK(csv.rfind("t,active_index,g0_hat,g1_hat,F_hat\n", 0) == 0);
        // header + one line per iteration
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + cfg.actor.total_iters);
    }
    // no leftover temp files from the atomic writer
    for (const auto& entry : fs::recursive_directory_iterator(dir.file("out")))
        CHECK(entry.path().string().find(".tmp") == std::string::npos);
}

TEST_CASE("rerunning the echoed config reproduces traces byte-identically") {
    TempDir dir;
    auto cfg = tiny_config(dir);
    cfg.radii = {0.1};
    cfg.repetitions = 1;
    const auto dirs = run_experiment(cfg);
    REQUIRE(dirs.size() == 1);
    const std::string trace_a = slurp(dirs[0] + "/trace.csv");

    // parse the echo out of summary.json and run it into a fresh directory
    const std::string summary = slurp(dirs[0] + "/summary.json");
    const auto echo_start = summary.find("\"config\": {");
    REQUIRE(echo_start != std::string::npos);
    std::string echo = summary.substr(echo_start + 10);
    echo.erase(echo.rfind('}')); // drop the summary's closing brace

    auto replay = parse_experiment_config(echo, ".");
    replay.out_dir = dir.file("replay");
    const auto replay_dirs = run_experiment(replay);
    const std::string trace_b = slurp(replay_dirs[0] + "/trace.csv");
    CHECK(trace_a == trace_b);
}

TEST_CASE("repeated runs on separate threads are byte-identical") {
    TempDir dir;
    auto cfg = tiny_config(dir);
    cfg.threads = 4;
    const auto first = run_experiment(cfg);
    auto cfg2 = cfg;
    cfg2.out_dir = dir.file("out2");
    cfg2.threads = 1;
    const auto second = run_experiment(cfg2);
    REQUIRE(first.size() == second.size());
    for (size_t i = 0; i < first.size(); ++i)
        CHECK(slurp(first[i] + "/trace.csv") == slurp(second[i] + "/trace.csv"));
}

TEST_CASE("eval_policy agrees between oracle and critic modes at desk scale") {
    const auto mdp = testutil::load_fixture("chain3.json");
    const auto policy = PolicyTable::uniform(3, 2);
    const UncertaintyModel model = Contamination{0.1};
    CriticConfig critic_cfg;
    critic_cfg.t_value_iters = 20000;
    critic_cfg.t_gain_iters = 4000;

    const auto oracle = eval_policy(mdp, policy, model, 80.0, 0.0, EvalMode::Oracle,
                                    critic_cfg, 3);
    const auto critic = eval_policy(mdp, policy, model, 80.0, 0.0, EvalMode::Critic,
                                    critic_cfg, 3);
    REQUIRE(oracle.g_values.size() == critic.g_values.size());
    for (size_t i = 0; i < oracle.g_values.size(); ++i)
        CHECK(std::abs(oracle.g_values[i] - critic.g_values[i]) <= 2e-2);
}

TEST_CASE("eval_policy on a 1-state instance returns action-averaged signals") {
    TabularRcmdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.cost = {{0.2, 0.8}};
    mdp.constraints = {{{0.4, 0.6}}};
    mdp.thresholds = {0.6};
    mdp.nominal_kernel = {{{1.0}, {1.0}}};
    mdp.initial_dist = {1.0};

    const auto report = eval_policy(mdp, PolicyTable::uniform(1, 2),
                                    Contamination{0.3}, 80.0, 0.0, EvalMode::Oracle,
                                    CriticConfig{}, 0);
    CHECK(report.g_values[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.g_values[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.feasible[0]);
}
