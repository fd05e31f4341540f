#include "rcmdp/uncertainty.hpp"

#include "rcmdp/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

namespace rcmdp {

namespace {

constexpr double kDualTol = 1e-8;

double dot(const numvec& a, const numvec& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Lowest index attaining max(v).
int argmax_low(const numvec& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double simplex_residual(const numvec& q) {
    double sum = 0.0, neg = 0.0;
    for (double x : q) {
        sum += x;
        neg = std::max(neg, -x);
    }
    return std::max(neg, std::abs(sum - 1.0));
}

SupportResult sigma_contamination(double radius, const numvec& p, const numvec& v) {
    SupportResult res;
    if (span_seminorm(v) == 0.0) {
        // Adversary indifferent; tie-break to the nominal row.
        res.worst_row = p;
        res.sigma = dot(p, v);
        return res;
    }
    const int top = argmax_low(v);
    res.sigma = (1.0 - radius) * dot(p, v) + radius * v[top];
    res.worst_row = p;
    for (double& x : res.worst_row) x *= 1.0 - radius;
    res.worst_row[top] += radius;
    return res;
}

// Exact L1-ball maximizer: up to `radius` mass moves from the lowest-v
// states (ascending v, lowest index first) onto the argmax-v state. Only
// strictly improving transfers are made, so a constant v keeps the row
// nominal.
SupportResult sigma_total_variation(double radius, const numvec& p, const numvec& v) {
    const int n = static_cast<int>(v.size());
    SupportResult res;
    res.worst_row = p;

    const int top = argmax_low(v);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return v[i] < v[j]; });

    double remaining = radius;
    for (int donor : order) {
        if (remaining <= 0.0) break;
        if (donor == top || v[donor] >= v[top]) continue;
        const double moved = std::min(remaining, res.worst_row[donor]);
        res.worst_row[donor] -= moved;
        res.worst_row[top] += moved;
        remaining -= moved;
    }
    res.sigma = dot(res.worst_row, v);
    return res;
}

struct HullVertex {
    double cost;
    double value;
    int state;
};

// Upper concave hull of the reachable (cost, value) pairs from source x,
// truncated to its increasing part. The zero-cost base prefers staying at
// x on value ties.
std::vector<HullVertex> destination_hull(const std::vector<numvec>& cost, int x,
                                         const numvec& v) {
    const int n = static_cast<int>(v.size());
    std::vector<HullVertex> pts;
    pts.reserve(n);
    for (int y = 0; y < n; ++y) pts.push_back({cost[x][y], v[y], y});
    std::sort(pts.begin(), pts.end(), [&](const HullVertex& a, const HullVertex& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.value != b.value) return a.value > b.value;
        // prefer the source itself, then low indices, among equals
        return (a.state == x ? -1 : a.state) < (b.state == x ? -1 : b.state);
    });

    std::vector<HullVertex> hull;
    for (const auto& pt : pts) {
        if (!hull.empty() && pt.cost == hull.back().cost) continue; // dominated
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            // pop b when (a -> pt) is at least as steep as (a -> b)
            const double lhs = (pt.value - a.value) * (b.cost - a.cost);
            const double rhs = (b.value - a.value) * (pt.cost - a.cost);
            if (lhs >= rhs)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(pt);
    }
    // keep only segments with positive slope
    size_t peak = 0;
    for (size_t k = 1; k < hull.size(); ++k)
        if (hull[k].value > hull[peak].value) peak = k;
    hull.resize(peak + 1);
    return hull;
}

struct HullSegment {
    double slope;
    int source;
    int seg; // position within the source's hull
};

/**
 * Transport LP, solved exactly. Moving one unit of mass from x to y gains
 * v(y) - v(current) and costs d(x,y)^l of the budget R^l; with the
 * per-source reachable pairs reduced to concave hulls the LP becomes a
 * fractional knapsack over hull segments, consumed in decreasing
 * gain-per-cost order. Within one source slopes decrease along the hull,
 * so the global order respects per-source order.
 */
SupportResult sigma_wasserstein_primal(const Wasserstein& model, const numvec& p,
                                       const numvec& v) {
    const int n = static_cast<int>(v.size());
    std::vector<numvec> cost(n, numvec(n, 0.0));
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            cost[x][y] = std::pow(model.metric[x][y], model.order);
    const double budget_total = std::pow(model.radius, model.order);

    std::vector<std::vector<HullVertex>> hulls(n);
    std::vector<HullSegment> segments;
    for (int x = 0; x < n; ++x) {
        if (p[x] <= 0.0) continue;
        hulls[x] = destination_hull(cost, x, v);
        for (size_t k = 0; k + 1 < hulls[x].size(); ++k) {
            const double dc = hulls[x][k + 1].cost - hulls[x][k].cost;
            const double dv = hulls[x][k + 1].value - hulls[x][k].value;
            segments.push_back({dv / dc, x, static_cast<int>(k)});
        }
    }
    std::sort(segments.begin(), segments.end(),
              [](const HullSegment& a, const HullSegment& b) {
                  if (a.slope != b.slope) return a.slope > b.slope;
                  if (a.source != b.source) return a.source < b.source;
                  return a.seg < b.seg;
              });

    // position of each source along its hull: completed vertex + fraction
    std::vector<int> at(n, 0);
    std::vector<double> frac(n, 0.0);
    double budget = budget_total;
    double sigma = 0.0;
    for (int x = 0; x < n; ++x)
        if (p[x] > 0.0) sigma += p[x] * hulls[x][0].value;

    for (const auto& seg : segments) {
        if (budget <= 0.0) break;
        const int x = seg.source;
        const auto& lo = hulls[x][seg.seg];
        const auto& hi = hulls[x][seg.seg + 1];
        const double full_cost = p[x] * (hi.cost - lo.cost);
        const double take = std::min(budget, full_cost);
        const double f = take / full_cost;
        sigma += f * p[x] * (hi.value - lo.value);
        budget -= take;
        if (f >= 1.0) {
            at[x] = seg.seg + 1;
            frac[x] = 0.0;
        } else {
            at[x] = seg.seg;
            frac[x] = f;
            break; // budget exhausted mid-segment
        }
    }

    SupportResult res;
    res.sigma = sigma;
    res.worst_row.assign(n, 0.0);
    for (int x = 0; x < n; ++x) {
        if (p[x] <= 0.0) continue;
        const int k = at[x];
        if (frac[x] > 0.0) {
            res.worst_row[hulls[x][k].state] += p[x] * (1.0 - frac[x]);
            res.worst_row[hulls[x][k + 1].state] += p[x] * frac[x];
        } else {
            res.worst_row[hulls[x][k].state] += p[x];
        }
    }
    return res;
}

} // namespace

std::vector<numvec> line_metric(int n_states) {
    std::vector<numvec> d(n_states, numvec(n_states, 0.0));
    for (int i = 0; i < n_states; ++i)
        for (int j = 0; j < n_states; ++j) d[i][j] = std::abs(i - j);
    return d;
}

std::vector<numvec> discrete_metric(int n_states) {
    std::vector<numvec> d(n_states, numvec(n_states, 1.0));
    for (int i = 0; i < n_states; ++i) d[i][i] = 0.0;
    return d;
}

double radius_of(const UncertaintyModel& model) {
    return std::visit([](const auto& m) { return m.radius; }, model);
}

UncertaintyModel with_radius(UncertaintyModel model, double radius) {
    std::visit([radius](auto& m) { m.radius = radius; }, model);
    return model;
}

std::string model_name(const UncertaintyModel& model) {
    if (std::holds_alternative<Contamination>(model)) return "contamination";
    if (std::holds_alternative<TotalVariation>(model)) return "total-variation";
    return "wasserstein";
}

void check_model(const UncertaintyModel& model, int n_states) {
    // Radius 0 is accepted everywhere as the degenerate nominal-only set.
    if (const auto* c = std::get_if<Contamination>(&model)) {
        if (!(c->radius >= 0.0 && c->radius < 1.0))
            throw ParamError("contamination radius must lie in [0,1)");
    } else if (const auto* t = std::get_if<TotalVariation>(&model)) {
        if (!(t->radius >= 0.0 && t->radius <= 1.0))
            throw ParamError("total-variation radius must lie in [0,1]");
    } else {
        const auto& w = std::get<Wasserstein>(model);
        if (!(w.radius >= 0.0)) throw ParamError("wasserstein radius must be nonnegative");
        if (!(w.order >= 1.0)) throw ParamError("wasserstein order must be >= 1");
        if (static_cast<int>(w.metric.size()) != n_states)
            throw ParamError("ground metric has wrong dimension");
        for (int i = 0; i < n_states; ++i) {
            if (static_cast<int>(w.metric[i].size()) != n_states)
                throw ParamError("ground metric has wrong dimension");
            if (w.metric[i][i] != 0.0)
                throw ParamError("ground metric must have a zero diagonal");
            for (int j = 0; j < n_states; ++j) {
                if (!(w.metric[i][j] >= 0.0))
                    throw ParamError("ground metric must be nonnegative");
                if (w.metric[i][j] != w.metric[j][i])
                    throw ParamError("ground metric must be symmetric");
            }
        }
    }
}

double span_seminorm(const numvec& v) {
    assert(!v.empty());
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

SupportResult sigma_exact(const UncertaintyModel& model, const numvec& nominal_row,
                          const numvec& v) {
    assert(nominal_row.size() == v.size());
    if (const auto* c = std::get_if<Contamination>(&model))
        return sigma_contamination(c->radius, nominal_row, v);
    if (const auto* t = std::get_if<TotalVariation>(&model))
        return sigma_total_variation(t->radius, nominal_row, v);
    return sigma_wasserstein_primal(std::get<Wasserstein>(model), nominal_row, v);
}

double sigma_wasserstein_dual(const Wasserstein& model, const numvec& row, const numvec& v) {
    const int n = static_cast<int>(v.size());
    std::vector<numvec> cost(n, numvec(n, 0.0));
    double min_pos_cost = std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            cost[x][y] = std::pow(model.metric[x][y], model.order);
            if (cost[x][y] > 0.0) min_pos_cost = std::min(min_pos_cost, cost[x][y]);
        }
    const double budget = std::pow(model.radius, model.order);

    // With zero budget mass still moves along zero-cost arcs.
    if (budget == 0.0) {
        double total = 0.0;
        for (int x = 0; x < n; ++x) {
            if (row[x] <= 0.0) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int y = 0; y < n; ++y)
                if (cost[x][y] == 0.0) best = std::max(best, v[y]);
            total += row[x] * best;
        }
        return total;
    }

    auto h = [&](double lambda) {
        double total = lambda * budget;
        for (int x = 0; x < n; ++x) {
            if (row[x] <= 0.0) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int y = 0; y < n; ++y) best = std::max(best, v[y] - lambda * cost[x][y]);
            total += row[x] * best;
        }
        return total;
    };

    double hi = 1.0;
    if (std::isfinite(min_pos_cost) && span_seminorm(v) > 0.0)
        hi = span_seminorm(v) / min_pos_cost + 1.0;

    // Coarse bracket on [0, hi], then golden-section refinement; h is
    // piecewise-linear convex in lambda.
    const int grid = 128;
    int best_i = 0;
    double best_h = h(0.0);
    for (int i = 1; i <= grid; ++i) {
        const double val = h(hi * i / grid);
        if (val < best_h) {
            best_h = val;
            best_i = i;
        }
    }
    double lo_l = hi * std::max(0, best_i - 1) / grid;
    double hi_l = hi * std::min(grid, best_i + 1) / grid;

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi_l - invphi * (hi_l - lo_l);
    double d = lo_l + invphi * (hi_l - lo_l);
    double hc = h(c), hd = h(d);
    while (hi_l - lo_l > kDualTol) {
        if (hc < hd) {
            hi_l = d;
            d = c;
            hd = hc;
            c = hi_l - invphi * (hi_l - lo_l);
            hc = h(c);
        } else {
            lo_l = c;
            c = d;
            hc = hd;
            d = lo_l + invphi * (hi_l - lo_l);
            hd = h(d);
        }
    }
    return std::min({best_h, hc, hd, h(0.5 * (lo_l + hi_l))});
}

FixedKernel worst_case_kernel(const UncertaintyModel& model, const TabularRcmdp& mdp,
                              const numvec& v) {
    FixedKernel kernel;
    kernel.trans.assign(mdp.n_states,
                        std::vector<numvec>(mdp.n_actions, numvec(mdp.n_states, 0.0)));
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            kernel.trans[s][a] = sigma_exact(model, mdp.nominal_kernel[s][a], v).worst_row;
    return kernel;
}

/**
 * Exact min-cost transport between p and q by successive shortest paths on
 * the bipartite residual graph (Bellman-Ford handles the negative reverse
 * arcs). Desk-scale sizes only.
 */
double transport_cost_pow(const numvec& p, const numvec& q,
                          const std::vector<numvec>& metric, double order) {
    const int n = static_cast<int>(p.size());
    constexpr double kMassTol = 1e-15;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<numvec> cost(n, numvec(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cost[i][j] = std::pow(metric[i][j], order);

    numvec surplus = p, deficit = q;
    std::vector<numvec> flow(n, numvec(n, 0.0));
    double total = 0.0;

    for (int guard = 0; guard < 4 * n * n + 16; ++guard) {
        double left = 0.0;
        for (double s : surplus) left += std::max(0.0, s);
        if (left <= kMassTol * n) break;

        // Bellman-Ford over nodes 0..n-1 (sources) and n..2n-1 (sinks),
        // seeded from every surplus source.
        std::vector<double> dist(2 * n, inf);
        std::vector<int> prev(2 * n, -1);
        for (int i = 0; i < n; ++i)
            if (surplus[i] > kMassTol) dist[i] = 0.0;
        for (int round = 0; round < 2 * n; ++round) {
            bool changed = false;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (dist[i] + cost[i][j] < dist[n + j] - 1e-18) {
                        dist[n + j] = dist[i] + cost[i][j];
                        prev[n + j] = i;
                        changed = true;
                    }
                    if (flow[i][j] > kMassTol &&
                        dist[n + j] - cost[i][j] < dist[i] - 1e-18) {
                        dist[i] = dist[n + j] - cost[i][j];
                        prev[i] = n + j;
                        changed = true;
                    }
                }
            if (!changed) break;
        }

        int sink = -1;
        for (int j = 0; j < n; ++j)
            if (deficit[j] > kMassTol && dist[n + j] < inf &&
                (sink < 0 || dist[n + j] < dist[n + sink]))
                sink = j;
        if (sink < 0) break; // disconnected mass; treat the rest as unmovable

        // Bottleneck along the path back to a surplus source.
        double amount = deficit[sink];
        for (int node = n + sink; prev[node] >= 0; node = prev[node]) {
            const int parent = prev[node];
            if (node < n) amount = std::min(amount, flow[node][parent - n]);
        }
        int source = n + sink;
        while (prev[source] >= 0) source = prev[source];
        amount = std::min(amount, surplus[source]);

        for (int node = n + sink; prev[node] >= 0; node = prev[node]) {
            const int parent = prev[node];
            if (node >= n) {
                flow[parent][node - n] += amount;
                total += amount * cost[parent][node - n];
            } else {
                flow[node][parent - n] -= amount;
                total -= amount * cost[node][parent - n];
            }
        }
        surplus[source] -= amount;
        deficit[sink] -= amount;
    }
    return total;
}

double set_membership_residual(const UncertaintyModel& model, const numvec& nominal_row,
                               const numvec& row) {
    const double simplex = simplex_residual(row);
    if (const auto* c = std::get_if<Contamination>(&model)) {
        if (c->radius == 0.0) {
            double l1 = 0.0;
            for (size_t i = 0; i < row.size(); ++i) l1 += std::abs(row[i] - nominal_row[i]);
            return std::max(simplex, 0.5 * l1);
        }
        // row must dominate (1-R) * nominal componentwise
        double below = 0.0;
        for (size_t i = 0; i < row.size(); ++i)
            below += std::max(0.0, (1.0 - c->radius) * nominal_row[i] - row[i]);
        return std::max(simplex, below);
    }
    if (const auto* t = std::get_if<TotalVariation>(&model)) {
        double l1 = 0.0;
        for (size_t i = 0; i < row.size(); ++i) l1 += std::abs(row[i] - nominal_row[i]);
        return std::max(simplex, std::max(0.0, 0.5 * l1 - t->radius));
    }
    const auto& w = std::get<Wasserstein>(model);
    const double moved = transport_cost_pow(nominal_row, row, w.metric, w.order);
    return std::max(simplex, std::max(0.0, moved - std::pow(w.radius, w.order)));
}

} // namespace rcmdp
