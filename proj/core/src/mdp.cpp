#include "rcmdp/mdp.hpp"

#include "rcmdp/sampling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

namespace rcmdp {

namespace {

constexpr double kStationaryTol = 1e-10;
constexpr double kPoissonTol = 1e-9;
// Transition probabilities below this are treated as absent edges when
// probing irreducibility/aperiodicity.
constexpr double kEdgeTol = 1e-14;

Eigen::MatrixXd induced_chain(const FixedKernel& kernel, const PolicyTable& policy) {
    const int n = kernel.n_states();
    const int m = kernel.n_actions();
    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < m; ++a) {
            const double w = policy.probs[s][a];
            if (w == 0.0) continue;
            for (int t = 0; t < n; ++t)
                chain(s, t) += w * kernel.trans[s][a][t];
        }
    return chain;
}

// States reachable from `from` along edges with probability > kEdgeTol.
std::vector<bool> reachable(const Eigen::MatrixXd& chain, int from, bool reversed) {
    const int n = static_cast<int>(chain.rows());
    std::vector<bool> seen(n, false);
    std::vector<int> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < n; ++v) {
            const double p = reversed ? chain(v, u) : chain(u, v);
            if (p > kEdgeTol && !seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

bool strongly_connected(const Eigen::MatrixXd& chain) {
    const auto fwd = reachable(chain, 0, false);
    const auto bwd = reachable(chain, 0, true);
    for (size_t i = 0; i < fwd.size(); ++i)
        if (!fwd[i] || !bwd[i]) return false;
    return true;
}

// Period of an irreducible chain: gcd over edges (u,v) of level(u)+1-level(v)
// on a BFS layering. 1 means aperiodic.
int chain_period(const Eigen::MatrixXd& chain) {
    const int n = static_cast<int>(chain.rows());
    std::vector<int> level(n, -1);
    std::vector<int> queue{0};
    level[0] = 0;
    for (size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        for (int v = 0; v < n; ++v)
            if (chain(u, v) > kEdgeTol && level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
    }
    int g = 0;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (chain(u, v) > kEdgeTol && level[u] >= 0 && level[v] >= 0)
                g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    return g == 0 ? 1 : g;
}

void check_distribution(const numvec& p, double tol, const std::string& what,
                        std::vector<std::string>& out) {
    double sum = 0.0;
    for (double x : p) {
        if (x < -tol || !std::isfinite(x)) {
            out.push_back(what + ": negative or non-finite entry");
            return;
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol)
        out.push_back(what + ": mass " + std::to_string(sum) + " != 1");
}

numvec policy_weighted_signal(const PolicyTable& policy, const IndexedSignal& signal) {
    const int n = policy.n_states();
    const int m = policy.n_actions();
    numvec r(n, 0.0);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < m; ++a)
            r[s] += policy.probs[s][a] * signal.values[s][a];
    return r;
}

} // namespace

double PolicyTable::stochasticity_residual() const {
    double worst = 0.0;
    for (const auto& row : probs) {
        double sum = 0.0;
        for (double x : row) {
            sum += x;
            worst = std::max(worst, -x);
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

std::uint64_t PolicyTable::hash() const {
    // FNV-1a over the raw bytes of every probability.
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& row : probs)
        for (double x : row) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(x));
            std::memcpy(&bits, &x, sizeof(bits));
            for (int i = 0; i < 8; ++i) {
                h ^= (bits >> (8 * i)) & 0xffULL;
                h *= 1099511628211ULL;
            }
        }
    return h;
}

double IndexedSignal::span() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : values)
        for (double x : row) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    return values.empty() ? 0.0 : hi - lo;
}

IndexedSignal TabularRcmdp::signal(int index) const {
    if (index < 0 || index > constraint_count())
        throw ParamError("signal index " + std::to_string(index) + " out of range");
    return IndexedSignal{index, index == 0 ? cost : constraints[index - 1]};
}

bool ValidationReport::all_ergodic() const {
    for (const auto& c : policy_checks)
        if (!c.irreducible || !c.aperiodic) return false;
    return true;
}

void ValidationReport::require_structural() const {
    if (structural_ok) return;
    std::string msg = "structural validation failed:";
    for (const auto& v : structural_violations) msg += "\n  " + v;
    throw StructuralError(msg);
}

PolicyCheck check_chain(const FixedKernel& kernel, const PolicyTable& policy,
                        const std::string& label) {
    const Eigen::MatrixXd chain = induced_chain(kernel, policy);
    PolicyCheck check;
    check.policy = label;
    check.irreducible = strongly_connected(chain);
    check.aperiodic = check.irreducible && chain_period(chain) == 1;
    return check;
}

ValidationReport validate(const TabularRcmdp& mdp) {
    ValidationReport report;
    auto& bad = report.structural_violations;

    if (mdp.n_states < 1) bad.push_back("n_states must be positive");
    if (mdp.n_actions < 1) bad.push_back("n_actions must be positive");
    const int n = mdp.n_states;
    const int m = mdp.n_actions;

    auto check_table = [&](const sa_table& table, const std::string& what) {
        if (static_cast<int>(table.size()) != n) {
            bad.push_back(what + ": wrong state dimension");
            return;
        }
        for (int s = 0; s < n; ++s) {
            if (static_cast<int>(table[s].size()) != m) {
                bad.push_back(what + ": wrong action dimension at state " + std::to_string(s));
                return;
            }
            for (int a = 0; a < m; ++a) {
                const double x = table[s][a];
                if (!(x >= 0.0 && x <= 1.0))
                    bad.push_back(what + "[" + std::to_string(s) + "][" + std::to_string(a) +
                                  "] = " + std::to_string(x) + " outside [0,1]");
            }
        }
    };

    check_table(mdp.cost, "cost");
    for (int i = 0; i < mdp.constraint_count(); ++i)
        check_table(mdp.constraints[i], "constraint " + std::to_string(i + 1));
    if (mdp.thresholds.size() != mdp.constraints.size())
        bad.push_back("threshold count != constraint count");

    if (static_cast<int>(mdp.nominal_kernel.size()) != n) {
        bad.push_back("kernel: wrong state dimension");
    } else {
        for (int s = 0; s < n; ++s) {
            if (static_cast<int>(mdp.nominal_kernel[s].size()) != m) {
                bad.push_back("kernel: wrong action dimension at state " + std::to_string(s));
                continue;
            }
            for (int a = 0; a < m; ++a) {
                if (static_cast<int>(mdp.nominal_kernel[s][a].size()) != n) {
                    bad.push_back("kernel row (" + std::to_string(s) + "," + std::to_string(a) +
                                  "): wrong length");
                    continue;
                }
                check_distribution(mdp.nominal_kernel[s][a], kKernelTol,
                                   "kernel row (" + std::to_string(s) + "," +
                                       std::to_string(a) + ")",
                                   bad);
            }
        }
    }
    check_distribution(mdp.initial_dist, kKernelTol, "initial_dist", bad);

    report.structural_ok = bad.empty();
    if (!report.structural_ok) return report;

    // Ergodicity probe: uniform policy plus min(32, |A|^|S|) deterministic
    // policies. The deterministic sample is drawn from a fixed internal
    // seed so reports are reproducible.
    const FixedKernel nominal = mdp.nominal();
    report.policy_checks.push_back(
        check_chain(nominal, PolicyTable::uniform(n, m), "uniform"));

    double total = std::pow(static_cast<double>(m), n);
    const bool exhaustive = total <= 32.0;
    const int samples = exhaustive ? static_cast<int>(total) : 32;
    std::mt19937_64 rng(splitmix64(0x7c6d4db14ull));
    for (int k = 0; k < samples; ++k) {
        PolicyTable det;
        det.probs.assign(n, numvec(m, 0.0));
        long long code = k;
        std::string label = "deterministic[";
        for (int s = 0; s < n; ++s) {
            int a;
            if (exhaustive) {
                a = static_cast<int>(code % m);
                code /= m;
            } else {
                a = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
            }
            det.probs[s][a] = 1.0;
            label += (s ? "," : "") + std::to_string(a);
        }
        label += "]";
        report.policy_checks.push_back(check_chain(nominal, det, label));
    }

    for (const auto& check : report.policy_checks) {
        if (!check.irreducible)
            report.ergodicity_warnings.push_back("policy " + check.policy +
                                                 " induces a reducible chain");
        else if (!check.aperiodic)
            report.ergodicity_warnings.push_back("policy " + check.policy +
                                                 " induces a periodic chain");
    }
    return report;
}

numvec stationary_distribution(const FixedKernel& kernel, const PolicyTable& policy) {
    const int n = kernel.n_states();
    const Eigen::MatrixXd chain = induced_chain(kernel, policy);

    // d (M - I) = 0 with the last balance equation replaced by sum d = 1.
    Eigen::MatrixXd lhs = chain.transpose() - Eigen::MatrixXd::Identity(n, n);
    lhs.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
    if (!lu.isInvertible())
        throw SingularChain("stationary distribution: singular balance system "
                            "(chain likely reducible)");
    const Eigen::VectorXd d = lu.solve(rhs);

    const double residual = (chain.transpose() * d - d).lpNorm<Eigen::Infinity>();
    if (residual > kStationaryTol || d.minCoeff() < -kStationaryTol)
        throw SingularChain("stationary distribution: residual " + std::to_string(residual) +
                            " above tolerance");

    numvec out(n);
    for (int s = 0; s < n; ++s) out[s] = std::max(0.0, d(s));
    return out;
}

FixedEval evaluate_fixed(const FixedKernel& kernel, const PolicyTable& policy,
                         const IndexedSignal& signal, int anchor) {
    const int n = kernel.n_states();
    assert(anchor >= 0 && anchor < n);

    const numvec d = stationary_distribution(kernel, policy);
    const numvec r = policy_weighted_signal(policy, signal);
    const double g = std::inner_product(d.begin(), d.end(), r.begin(), 0.0);

    // (I - M) V = r - g 1 is rank n-1 with a consistent right-hand side;
    // pinning V(anchor) = 0 in place of the anchor's balance row makes it
    // uniquely solvable for irreducible chains.
    const Eigen::MatrixXd chain = induced_chain(kernel, policy);
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - chain;
    Eigen::VectorXd rhs(n);
    for (int s = 0; s < n; ++s) rhs(s) = r[s] - g;
    lhs.row(anchor).setZero();
    lhs(anchor, anchor) = 1.0;
    rhs(anchor) = 0.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
    if (!lu.isInvertible())
        throw SingularChain("relative value function: singular anchored system");
    const Eigen::VectorXd v = lu.solve(rhs);

    // The dropped anchor balance row must hold as well; it fails only if g
    // or the chain solve went wrong.
    double worst = 0.0;
    for (int s = 0; s < n; ++s) {
        double lhs_s = v(s) - (r[s] - g);
        for (int t = 0; t < n; ++t) lhs_s -= chain(s, t) * v(t);
        worst = std::max(worst, std::abs(lhs_s));
    }
    if (worst > kPoissonTol)
        throw SingularChain("relative value function: residual " + std::to_string(worst) +
                            " above tolerance");

    FixedEval eval;
    eval.g = g;
    eval.v.assign(n, 0.0);
    for (int s = 0; s < n; ++s) eval.v[s] = v(s);
    eval.v[anchor] = 0.0;
    return eval;
}

} // namespace rcmdp
