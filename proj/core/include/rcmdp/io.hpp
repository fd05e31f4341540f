#pragma once

#include "rcmdp/errors.hpp"
#include "rcmdp/actor.hpp"
#include "rcmdp/types.hpp"
#include "rcmdp/uncertainty.hpp"

#include <optional>
#include <string>

namespace rcmdp {

/// Experiment description: a resolved instance, a base uncertainty model
/// swept over `radii`, actor/critic settings, and output plumbing.
struct ExperimentConfig {
    TabularRcmdp instance;
    UncertaintyModel model;
    numvec radii;
    ActorConfig actor;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int repetitions = 1;
    /// Adds the F_exact trace column and oracle sections to summaries.
    bool exact_oracle = false;
    std::optional<PolicyTable> initial_policy;
    int threads = 0;
    bool quiet = false;
};

TabularRcmdp load_instance(const std::string& path);
void save_instance(const TabularRcmdp& mdp, const std::string& path);

PolicyTable load_policy(const std::string& path);
void save_policy(const PolicyTable& policy, const std::string& path);

/// Parses a config document. The instance may be given inline, as a file
/// path (resolved against base_dir), or as a generator spec; it is resolved
/// here so the config echo is self-contained.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir);
ExperimentConfig load_experiment_config(const std::string& path);

/// Full round-trippable echo of a resolved config, instance inline.
std::string experiment_config_to_json(const ExperimentConfig& cfg);

/// Uncertainty model from {"kind", "radius", ["order"], ["metric"]}; the
/// metric accepts "line", "discrete", or an explicit matrix.
UncertaintyModel parse_model_spec(const std::string& json_text, int n_states);

/// Writes via a temp file in the same directory plus rename, so interrupted
/// runs never leave truncated output.
void atomic_write(const std::string& path, const std::string& content);

} // namespace rcmdp
