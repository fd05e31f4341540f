#include "rcmdp/experiment.hpp"

#include "rcmdp/critic.hpp"
#include "rcmdp/errors.hpp"
#include "rcmdp/mdp.hpp"
#include "rcmdp/oracle.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

namespace rcmdp {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trace_csv(const RunTrace& trace, int n_indices, bool exact_column) {
    std::string out = "t,active_index";
    for (int i = 0; i < n_indices; ++i) out += ",g" + std::to_string(i) + "_hat";
    out += ",F_hat";
    if (exact_column) out += ",F_exact";
    out += "\n";
    for (const auto& rec : trace.records) {
        out += std::to_string(rec.t) + "," + std::to_string(rec.active_index);
        for (double g : rec.g_hat) out += "," + fmt(g);
        out += "," + fmt(rec.f_hat);
        if (exact_column) out += "," + fmt(rec.f_exact.value_or(0.0));
        out += "\n";
    }
    return out;
}

int worker_count(const ExperimentConfig& cfg, int total_runs) {
    int count = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (count < 1) count = 1;
    if (const char* cap = std::getenv("RCMDP_THREADS")) {
        const int limit = std::atoi(cap);
        if (limit >= 1) count = std::min(count, limit);
    }
    return std::min(count, total_runs);
}

struct RunJob {
    int radius_index;
    int repetition;
    double radius;
    std::uint64_t stream_index;
};

void execute_run(const ExperimentConfig& cfg, const RunJob& job,
                 const std::string& run_dir) {
    const UncertaintyModel model = with_radius(cfg.model, job.radius);
    GenerativeModel root(cfg.instance, cfg.seed);
    GenerativeModel gm = root.split(job.stream_index);
    const std::uint64_t run_seed = gm.seed();

    ActorConfig actor_cfg = cfg.actor;
    if (cfg.exact_oracle) actor_cfg.record_exact_f = true;

    const PolicyTable initial =
        cfg.initial_policy
            ? *cfg.initial_policy
            : PolicyTable::uniform(cfg.instance.n_states, cfg.instance.n_actions);

    const auto start = std::chrono::steady_clock::now();
    const RunResult result = run(cfg.instance, model, actor_cfg, gm, &initial);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const int n_indices = cfg.instance.constraint_count() + 1;
    atomic_write(run_dir + "/trace.csv",
                 trace_csv(result.trace, n_indices, cfg.exact_oracle));

    json summary;
    summary["radius"] = job.radius;
    summary["radius_index"] = job.radius_index;
    summary["repetition"] = job.repetition;
    summary["run_seed"] = run_seed;
    summary["best_t"] = result.trace.best_t;
    if (result.trace.best_t >= 0) {
        const auto& best = result.trace.records[result.trace.best_t];
        summary["f_best"] = best.f_hat;
        summary["g_best"] = best.g_hat;
    }
    summary["final_policy"] = result.policy.probs;
    if (cfg.exact_oracle) {
        const double lambda = lambda_of(actor_cfg);
        const ExactF returned =
            exact_f(cfg.instance, result.policy, model, lambda, actor_cfg.zeta);
        json oracle;
        oracle["g_values"] = returned.g_values;
        oracle["f"] = returned.f;
        oracle["active_index"] = returned.active_index;
        std::vector<bool> feasible;
        for (int i = 1; i < n_indices; ++i)
            feasible.push_back(returned.g_values[i] <= cfg.instance.thresholds[i - 1]);
        oracle["feasible"] = feasible;
        summary["oracle"] = oracle;

        // The initial policy re-evaluated at this radius: a fixed-policy
        // view of the radius sweep.
        const OracleEval fixed =
            robust_evaluate(cfg.instance, initial, cfg.instance.signal(0), model);
        summary["fixed_policy_eval"] = {{"policy", "initial"}, {"g0", fixed.g}};
    }
    summary["wall_clock_s"] = elapsed;
    summary["config"] = json::parse(experiment_config_to_json(cfg));
    atomic_write(run_dir + "/summary.json", summary.dump(2) + "\n");

    json meta;
    meta["rng_family"] = GenerativeModel::kRngFamily;
    meta["code_version"] = kCodeVersion;
    meta["root_seed"] = cfg.seed;
    meta["run_seed"] = run_seed;
    meta["radius"] = job.radius;
    meta["radius_index"] = job.radius_index;
    meta["repetition"] = job.repetition;
    atomic_write(run_dir + "/meta.json", meta.dump(2) + "\n");
}

} // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
    validate(cfg.instance).require_structural();
    check_model(cfg.model, cfg.instance.n_states);

    std::vector<RunJob> jobs;
    std::vector<std::string> run_dirs;
    for (int i = 0; i < static_cast<int>(cfg.radii.size()); ++i)
        for (int k = 0; k < cfg.repetitions; ++k) {
            const std::uint64_t stream =
                static_cast<std::uint64_t>(i) * cfg.repetitions + k;
            jobs.push_back({i, k, cfg.radii[i], stream});
            run_dirs.push_back(cfg.out_dir + "/r" + std::to_string(i) + "_rep" +
                               std::to_string(k));
        }

    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto work = [&] {
        for (;;) {
            const size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            try {
                execute_run(cfg, jobs[j], run_dirs[j]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int workers = worker_count(cfg, static_cast<int>(jobs.size()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return run_dirs;
}

EvalReport eval_policy(const TabularRcmdp& mdp, const PolicyTable& policy,
                       const UncertaintyModel& model, double lambda, double zeta,
                       EvalMode mode, const CriticConfig& critic_cfg,
                       std::uint64_t seed) {
    const int n_indices = mdp.constraint_count() + 1;
    EvalReport report;
    report.mode = mode;
    report.g_values.assign(n_indices, 0.0);

    if (mode == EvalMode::Oracle) {
        for (int i = 0; i < n_indices; ++i)
            report.g_values[i] = robust_evaluate(mdp, policy, mdp.signal(i), model).g;
    } else {
        GenerativeModel root(mdp, seed);
        for (int i = 0; i < n_indices; ++i) {
            GenerativeModel gm = root.split(static_cast<std::uint64_t>(i));
            report.g_values[i] =
                td_evaluate(gm, policy, mdp.signal(i), model, critic_cfg).g;
        }
    }
    for (int i = 1; i < n_indices; ++i)
        report.feasible.push_back(report.g_values[i] <= mdp.thresholds[i - 1]);
    const FValue fv = f_value(report.g_values, mdp.thresholds, lambda, zeta);
    report.f = fv.f;
    report.active_index = fv.active_index;
    return report;
}

std::string eval_report_to_json(const EvalReport& report, const numvec& thresholds) {
    json j;
    j["mode"] = report.mode == EvalMode::Oracle ? "oracle" : "critic";
    j["g_values"] = report.g_values;
    j["thresholds"] = thresholds;
    j["feasible"] = report.feasible;
    std::vector<int> violated;
    for (size_t i = 0; i < report.feasible.size(); ++i)
        if (!report.feasible[i]) violated.push_back(static_cast<int>(i + 1));
    j["violated_indices"] = violated;
    j["F"] = report.f;
    j["active_index"] = report.active_index;
    return j.dump(2) + "\n";
}

} // namespace rcmdp
