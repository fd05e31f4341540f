#include "rcmdp/io.hpp"

#include "rcmdp/errors.hpp"
#include "rcmdp/instances.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace rcmdp {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(what + ": " + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& what) {
    if (!j.contains(key)) throw ParseError(what + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(what + ": field '" + key + "': " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& what) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(what + ": field '" + key + "': " + e.what());
    }
}

TabularRcmdp instance_from_json(const json& j) {
    const std::string what = "instance";
    TabularRcmdp mdp;
    mdp.n_states = get_field<int>(j, "n_states", what);
    mdp.n_actions = get_field<int>(j, "n_actions", what);
    mdp.cost = get_field<sa_table>(j, "cost", what);
    mdp.constraints = get_or<std::vector<sa_table>>(j, "constraints", {}, what);
    mdp.thresholds = get_or<numvec>(j, "thresholds", {}, what);
    mdp.nominal_kernel = get_field<kernel_table>(j, "kernel", what);
    mdp.initial_dist = get_field<numvec>(j, "initial_dist", what);
    return mdp;
}

json instance_to_json(const TabularRcmdp& mdp) {
    json j;
    j["n_states"] = mdp.n_states;
    j["n_actions"] = mdp.n_actions;
    j["cost"] = mdp.cost;
    j["constraints"] = mdp.constraints;
    j["thresholds"] = mdp.thresholds;
    j["kernel"] = mdp.nominal_kernel;
    j["initial_dist"] = mdp.initial_dist;
    return j;
}

UncertaintyModel model_from_json(const json& j, int n_states) {
    const std::string what = "model";
    const auto kind = get_field<std::string>(j, "kind", what);
    const double radius = get_field<double>(j, "radius", what);
    UncertaintyModel model;
    if (kind == "contamination") {
        model = Contamination{radius};
    } else if (kind == "total-variation") {
        model = TotalVariation{radius};
    } else if (kind == "wasserstein") {
        Wasserstein w;
        w.radius = radius;
        w.order = get_or<double>(j, "order", 1.0, what);
        if (!j.contains("metric") || j.at("metric") == "line") {
            w.metric = line_metric(n_states);
        } else if (j.at("metric") == "discrete") {
            w.metric = discrete_metric(n_states);
        } else {
            w.metric = get_field<std::vector<numvec>>(j, "metric", what);
        }
        model = std::move(w);
    } else {
        throw ParseError("model: unknown kind '" + kind + "'");
    }
    check_model(model, n_states);
    return model;
}

json model_to_json(const UncertaintyModel& model) {
    json j;
    j["kind"] = model_name(model);
    j["radius"] = radius_of(model);
    if (const auto* w = std::get_if<Wasserstein>(&model)) {
        j["order"] = w->order;
        j["metric"] = w->metric;
    }
    return j;
}

StepSchedule schedule_from_json(const json& j, StepSchedule fallback,
                                const std::string& what) {
    StepSchedule s = fallback;
    s.c = get_or<double>(j, "c", fallback.c, what);
    s.exponent = get_or<double>(j, "exponent", fallback.exponent, what);
    return s;
}

CriticConfig critic_from_json(const json& j) {
    const std::string what = "critic";
    CriticConfig cfg;
    cfg.t_value_iters = get_or<long>(j, "t_value_iters", cfg.t_value_iters, what);
    cfg.t_gain_iters = get_or<long>(j, "t_gain_iters", cfg.t_gain_iters, what);
    if (j.contains("eta")) cfg.eta = schedule_from_json(j.at("eta"), cfg.eta, what);
    if (j.contains("beta")) cfg.beta = schedule_from_json(j.at("beta"), cfg.beta, what);
    cfg.anchor = get_or<int>(j, "anchor", cfg.anchor, what);
    if (j.contains("mlmc")) {
        cfg.mlmc.n_max = get_or<int>(j.at("mlmc"), "n_max", cfg.mlmc.n_max, what);
        cfg.mlmc.geom_p = get_or<double>(j.at("mlmc"), "geom_p", cfg.mlmc.geom_p, what);
    }
    cfg.g0 = get_or<double>(j, "g0", cfg.g0, what);
    cfg.exact_sigma = get_or<bool>(j, "exact_sigma", cfg.exact_sigma, what);
    cfg.blow_up_factor = get_or<double>(j, "blow_up_factor", cfg.blow_up_factor, what);
    return cfg;
}

json critic_to_json(const CriticConfig& cfg) {
    json j;
    j["t_value_iters"] = cfg.t_value_iters;
    j["t_gain_iters"] = cfg.t_gain_iters;
    j["eta"] = {{"c", cfg.eta.c}, {"exponent", cfg.eta.exponent}};
    j["beta"] = {{"c", cfg.beta.c}, {"exponent", cfg.beta.exponent}};
    j["anchor"] = cfg.anchor;
    j["mlmc"] = {{"n_max", cfg.mlmc.n_max}, {"geom_p", cfg.mlmc.geom_p}};
    j["g0"] = cfg.g0;
    j["exact_sigma"] = cfg.exact_sigma;
    j["blow_up_factor"] = cfg.blow_up_factor;
    return j;
}

ActorConfig actor_from_json(const json& j, const json& critic) {
    const std::string what = "actor";
    ActorConfig cfg;
    cfg.total_iters = get_or<long>(j, "total_iters", cfg.total_iters, what);
    cfg.epsilon = get_or<double>(j, "epsilon", cfg.epsilon, what);
    cfg.zeta = get_or<double>(j, "zeta", cfg.zeta, what);
    if (j.contains("lambda") && j.at("lambda") != "auto")
        cfg.lambda = get_field<double>(j, "lambda", what);
    if (j.contains("step_size") && j.at("step_size") != "auto")
        cfg.step_size = get_field<double>(j, "step_size", what);
    cfg.mismatch_const = get_or<double>(j, "mismatch_const", cfg.mismatch_const, what);
    const auto mode = get_or<std::string>(j, "best_iterate", "critic-estimates", what);
    if (mode == "critic-estimates")
        cfg.best_iterate_mode = BestIterateMode::CriticEstimates;
    else if (mode == "exact-oracle")
        cfg.best_iterate_mode = BestIterateMode::ExactOracle;
    else
        throw ParseError("actor: unknown best_iterate mode '" + mode + "'");
    cfg.exact_sigma = get_or<bool>(j, "exact_sigma", cfg.exact_sigma, what);
    cfg.critic = critic.is_null() ? CriticConfig{} : critic_from_json(critic);
    return cfg;
}

json actor_to_json(const ActorConfig& cfg) {
    json j;
    j["total_iters"] = cfg.total_iters;
    j["epsilon"] = cfg.epsilon;
    j["zeta"] = cfg.zeta;
    if (cfg.lambda)
        j["lambda"] = *cfg.lambda;
    else
        j["lambda"] = "auto";
    if (cfg.step_size)
        j["step_size"] = *cfg.step_size;
    else
        j["step_size"] = "auto";
    j["mismatch_const"] = cfg.mismatch_const;
    j["best_iterate"] = cfg.best_iterate_mode == BestIterateMode::ExactOracle
                            ? "exact-oracle"
                            : "critic-estimates";
    j["exact_sigma"] = cfg.exact_sigma;
    return j;
}

} // namespace

TabularRcmdp load_instance(const std::string& path) {
    return instance_from_json(parse_json(read_file(path), path));
}

void save_instance(const TabularRcmdp& mdp, const std::string& path) {
    atomic_write(path, instance_to_json(mdp).dump(2) + "\n");
}

PolicyTable load_policy(const std::string& path) {
    const json j = parse_json(read_file(path), path);
    PolicyTable policy;
    policy.probs = get_field<std::vector<numvec>>(j, "probs", path);
    return policy;
}

void save_policy(const PolicyTable& policy, const std::string& path) {
    json j;
    j["probs"] = policy.probs;
    atomic_write(path, j.dump(2) + "\n");
}

UncertaintyModel parse_model_spec(const std::string& json_text, int n_states) {
    return model_from_json(parse_json(json_text, "model"), n_states);
}

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir) {
    const std::string what = "config";
    const json j = parse_json(json_text, what);
    ExperimentConfig cfg;

    if (!j.contains("instance")) throw ParseError("config: missing 'instance'");
    const json& inst = j.at("instance");
    if (inst.contains("inline")) {
        cfg.instance = instance_from_json(inst.at("inline"));
    } else if (inst.contains("file")) {
        const auto rel = get_field<std::string>(inst, "file", what);
        const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel)
                                                       : fs::path(base_dir) / rel;
        cfg.instance = load_instance(p.string());
    } else if (inst.contains("generator")) {
        const json& gen = inst.at("generator");
        const auto kind = get_field<std::string>(gen, "kind", "generator");
        const auto gseed = get_or<std::uint64_t>(gen, "seed", 0, "generator");
        if (kind == "random-garnet") {
            GarnetParams params;
            params.n_states = get_or<int>(gen, "n_states", params.n_states, kind);
            params.n_actions = get_or<int>(gen, "n_actions", params.n_actions, kind);
            params.branching = get_or<int>(gen, "branching", params.branching, kind);
            params.n_constraints =
                get_or<int>(gen, "n_constraints", params.n_constraints, kind);
            params.thresholds = get_or<numvec>(gen, "thresholds", {}, kind);
            cfg.instance = make_garnet(params, gseed);
        } else if (kind == "gridworld") {
            GridworldParams params;
            params.n = get_or<int>(gen, "n", params.n, kind);
            params.slip = get_or<double>(gen, "slip", params.slip, kind);
            params.hazard_count =
                get_or<int>(gen, "hazard_count", params.hazard_count, kind);
            params.threshold = get_or<double>(gen, "threshold", params.threshold, kind);
            cfg.instance = make_gridworld(params, gseed);
        } else {
            throw ParseError("generator: unknown kind '" + kind + "'");
        }
    } else {
        throw ParseError("config: instance needs 'inline', 'file', or 'generator'");
    }

    if (!j.contains("model")) throw ParseError("config: missing 'model'");
    cfg.model = model_from_json(j.at("model"), cfg.instance.n_states);

    cfg.radii = get_or<numvec>(j, "radii", numvec{radius_of(cfg.model)}, what);
    if (cfg.radii.empty()) throw ConfigError("config: radius list must be nonempty");
    for (double r : cfg.radii) check_model(with_radius(cfg.model, r), cfg.instance.n_states);

    cfg.actor = actor_from_json(j.contains("actor") ? j.at("actor") : json::object(),
                                j.contains("critic") ? j.at("critic") : json());
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0, what);
    cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir, what);
    cfg.repetitions = get_or<int>(j, "repetitions", 1, what);
    if (cfg.repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
    cfg.exact_oracle = get_or<bool>(j, "exact_oracle", false, what);
    if (j.contains("initial_policy")) {
        PolicyTable p;
        p.probs = get_field<std::vector<numvec>>(j, "initial_policy", what);
        cfg.initial_policy = std::move(p);
    }
    cfg.threads = get_or<int>(j, "threads", 0, what);
    cfg.quiet = get_or<bool>(j, "quiet", false, what);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(read_file(path),
                                   fs::path(path).parent_path().string());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["instance"] = {{"inline", instance_to_json(cfg.instance)}};
    j["model"] = model_to_json(cfg.model);
    j["radii"] = cfg.radii;
    j["actor"] = actor_to_json(cfg.actor);
    j["critic"] = critic_to_json(cfg.actor.critic);
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["repetitions"] = cfg.repetitions;
    j["exact_oracle"] = cfg.exact_oracle;
    if (cfg.initial_policy) j["initial_policy"] = cfg.initial_policy->probs;
    j["threads"] = cfg.threads;
    j["quiet"] = cfg.quiet;
    return j.dump(2) + "\n";
}

void atomic_write(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

} // namespace rcmdp
