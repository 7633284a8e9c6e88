// Exact branch-and-bound over per-stage layer multisets.
//
// A layer's cost does not depend on how many branches it holds, so a stage plan
// is a multiset of candidates whose packing limits cover N^br. Candidates are
// visited in canonical order (packing limit descending, then alpha, beta) and
// each gets a multiplicity; filling layers greedily in that order keeps branch
// counts non-increasing, and puts the u = v = 1 candidate first so that every
// later layer can reuse its weights.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "pimorch/errors.hpp"
#include "pimorch/ilp.hpp"

namespace pimorch {

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

bool leq(double a, double b) { return a <= b + 1e-9 * std::max(1.0, std::abs(b)); }

class Deadline {
public:
    explicit Deadline(double seconds)
        : end_(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(seconds))) {}

    bool expired() {
        if (hit_.load(std::memory_order_relaxed)) return true;
        if (++ticks_ % 1024 != 0) return false;
        if (Clock::now() >= end_) hit_ = true;
        return hit_;
    }
    bool hit() const { return hit_; }

private:
    Clock::time_point end_;
    std::atomic<bool> hit_{false};
    std::atomic<std::uint64_t> ticks_{0};
};

struct Item {
    int entry = 0;
    int packing = 0;
    std::int64_t cost = 0;
    double weight = 0;  ///< blocks * block weight + patch-merge weight
    std::int64_t ws = 0;
    bool full = false;  ///< u = v = 1
};

struct StagePlan {
    std::vector<int> mult;  ///< per canonical item
    std::int64_t cost = 0;
    double weight = 0;
    std::int64_t ws = 0;
};

class StageSearch {
public:
    StageSearch(const StageTable& t, bool reuse, Deadline& dl) : table_(t), reuse_(reuse), dl_(dl) {
        for (std::size_t e = 0; e < t.entries.size(); ++e) {
            const auto& ce = t.entries[e];
            if (!ce.valid || ce.packing <= 0) continue;
            items_.push_back({static_cast<int>(e), ce.packing, ce.layer_cycles,
                              t.stage.blocks * ce.block_weight + ce.pm_weight, ce.workspace,
                              ce.u == 1 && ce.v == 1});
        }
        std::stable_sort(items_.begin(), items_.end(),
                         [](const Item& a, const Item& b) { return a.packing > b.packing; });
        n_ = t.stage.branches;
        const int k = static_cast<int>(items_.size());
        lb_.assign(static_cast<std::size_t>(k + 1) * (n_ + 1), kInf);
        lb_at(k, 0) = 0;
        for (int i = k - 1; i >= 0; --i) {
            for (int r = 0; r <= n_; ++r) {
                std::int64_t best = lb_at(i + 1, r);
                if (r > 0) {
                    const std::int64_t rest = lb_at(i, std::max(0, r - items_[i].packing));
                    if (rest < kInf) best = std::min(best, rest + items_[i].cost);
                }
                lb_at(i, r) = best;
            }
        }
        min_weight_ = std::numeric_limits<double>::infinity();
        for (const auto& it : items_) min_weight_ = std::min(min_weight_, it.weight);
        if (items_.empty()) min_weight_ = 0;
    }

    std::int64_t min_cost() const { return items_.empty() ? kInf : lb(0, n_); }
    double min_weight() const { return min_weight_; }
    bool empty() const { return items_.empty(); }

    /// Cheapest plan; ties go to smaller weight, then workspace, then discovery order.
    std::optional<StagePlan> cheapest() {
        frontier_mode_ = false;
        found_.clear();
        run(std::numeric_limits<double>::infinity());
        if (found_.empty()) return std::nullopt;
        return found_.front();
    }

    /// Pareto set over (cost, weight, workspace) among plans with weight + ws <= budget,
    /// in discovery order.
    std::vector<StagePlan> frontier(double budget) {
        frontier_mode_ = true;
        found_.clear();
        run(budget);
        return found_;
    }

    std::vector<LayerChoice> layers(const StagePlan& p) const {
        std::vector<LayerChoice> out;
        int rem = n_;
        for (std::size_t i = 0; i < items_.size(); ++i) {
            const auto& e = table_.entries[items_[i].entry];
            for (int m = 0; m < p.mult[i]; ++m) {
                const int c = std::min(items_[i].packing, rem);
                out.push_back({c, e.u, e.v});
                rem -= c;
            }
        }
        return out;
    }

private:
    std::int64_t& lb_at(int k, int r) { return lb_[static_cast<std::size_t>(k) * (n_ + 1) + r]; }
    std::int64_t lb(int k, int r) const { return lb_[static_cast<std::size_t>(k) * (n_ + 1) + r]; }

    void run(double budget) {
        budget_ = budget;
        mult_.assign(items_.size(), 0);
        if (items_.empty()) return;
        dfs(0, n_, 0, 0.0, false, 0);
    }

    bool pruned(std::int64_t bound, double weight, std::int64_t ws) const {
        for (const auto& p : found_) {
            if (frontier_mode_) {
                if (p.cost <= bound && leq(p.weight, weight) && p.ws <= ws) return true;
            } else {
                if (p.cost < bound) return true;
                if (p.cost == bound && leq(p.weight, weight) && p.ws <= ws) return true;
            }
        }
        return false;
    }

    void record(std::int64_t cost, double weight, std::int64_t ws) {
        if (!frontier_mode_) {
            if (!found_.empty()) {
                const auto& b = found_.front();
                const bool better =
                    cost < b.cost ||
                    (cost == b.cost && (weight < b.weight - 1e-9 * std::max(1.0, b.weight) ||
                                        (leq(weight, b.weight) && leq(b.weight, weight) && ws < b.ws)));
                if (!better) return;
            }
            found_.assign(1, StagePlan{mult_, cost, weight, ws});
            return;
        }
        if (pruned(cost, weight, ws)) return;
        StagePlan p{mult_, cost, weight, ws};
        {
            std::erase_if(found_, [&](const StagePlan& q) {
                return cost <= q.cost && leq(weight, q.weight) && ws <= q.ws;
            });
            found_.push_back(std::move(p));
        }
    }

    void dfs(int k, int rem, std::int64_t cost, double weight, bool full, std::int64_t ws) {
        if (rem == 0) {
            record(cost, weight, ws);
            return;
        }
        if (k == static_cast<int>(items_.size())) return;
        const std::int64_t bound = lb(k, rem);
        if (bound >= kInf) return;
        if (dl_.expired() && !found_.empty()) return;
        if (!leq(weight + static_cast<double>(ws), budget_)) return;
        if (pruned(cost + bound, weight, ws)) return;

        const Item& it = items_[k];
        const int top = (rem + it.packing - 1) / it.packing;
        for (int m = top; m >= 0; --m) {
            double w = weight;
            bool f = full;
            if (m > 0) {
                if (!reuse_) {
                    w += m * it.weight;
                } else if (!full) {
                    w += it.weight;
                    f = it.full;
                    if (it.full) w = it.weight;
                }
            }
            mult_[k] = m;
            dfs(k + 1, std::max(0, rem - m * it.packing), cost + m * it.cost, w, f,
                m > 0 ? std::max(ws, it.ws) : ws);
        }
        mult_[k] = 0;
    }

    const StageTable& table_;
    bool reuse_;
    Deadline& dl_;
    std::vector<Item> items_;
    int n_ = 0;
    std::vector<std::int64_t> lb_;
    double min_weight_ = 0;
    bool frontier_mode_ = false;
    double budget_ = 0;
    std::vector<int> mult_;
    std::vector<StagePlan> found_;
};

template <typename F>
auto run_stages(std::size_t n, int threads, F&& f) {
    using R = decltype(f(std::size_t{0}));
    std::vector<R> out(n);
    if (threads == 1 || n <= 1) {
        for (std::size_t s = 0; s < n; ++s) out[s] = f(s);
        return out;
    }
    std::vector<std::future<R>> fs;
    for (std::size_t s = 0; s < n; ++s) fs.push_back(std::async(std::launch::async, f, s));
    for (std::size_t s = 0; s < n; ++s) out[s] = fs[s].get();
    return out;
}

}  // namespace

Schedule solve(const IlpInstance& inst) {
    const double cap = static_cast<double>(inst.arch.node_cap);
    Deadline dl(inst.options.time_limit_s);
    const std::size_t S = inst.stages.size();

    std::vector<StageSearch> searches;
    searches.reserve(S);
    for (const auto& t : inst.stages) searches.emplace_back(t, inst.options.reuse, dl);
    std::int64_t lower = 0;
    for (std::size_t s = 0; s < S; ++s) {
        if (searches[s].empty()) {
            throw InfeasibleError("Constraint 1", "stage " + std::to_string(s + 1) +
                                                      " has no candidate that fits the grid");
        }
        lower += searches[s].min_cost();
    }

    auto finish = [&](const std::vector<StagePlan>& plans, bool timed_out) {
        std::vector<std::vector<LayerChoice>> layers;
        for (std::size_t s = 0; s < S; ++s) layers.push_back(searches[s].layers(plans[s]));
        Schedule out = evaluate_schedule(inst, layers);
        out.lower_bound = lower;
        out.status = timed_out ? SolveStatus::time_limit : SolveStatus::optimal;
        out.gap = out.objective > 0 ? static_cast<double>(out.objective - lower) / out.objective : 0.0;
        if (!timed_out) out.gap = 0;
        return out;
    };

    // Without a binding memory limit the per-stage optimum is global.
    auto cheapest = run_stages(S, inst.options.threads, [&](std::size_t s) {
        return *searches[s].cheapest();
    });
    {
        double weight = 0;
        std::int64_t ws = 0;
        for (const auto& p : cheapest) {
            weight += p.weight;
            ws = std::max(ws, p.ws);
        }
        if (leq(weight + static_cast<double>(ws), cap)) return finish(cheapest, dl.hit());
    }

    double min_weight_total = 0;
    for (const auto& s : searches) min_weight_total += s.min_weight();
    auto fronts = run_stages(S, inst.options.threads, [&](std::size_t s) {
        return searches[s].frontier(cap - (min_weight_total - searches[s].min_weight()));
    });

    std::vector<std::int64_t> rest_cost(S + 1, 0);
    std::vector<double> rest_weight(S + 1, 0);
    for (std::size_t s = S; s-- > 0;) {
        std::int64_t c = kInf;
        double w = std::numeric_limits<double>::infinity();
        for (const auto& p : fronts[s]) {
            c = std::min(c, p.cost);
            w = std::min(w, p.weight);
        }
        if (fronts[s].empty()) {
            c = kInf;
            w = std::numeric_limits<double>::infinity();
        }
        rest_cost[s] = c >= kInf || rest_cost[s + 1] >= kInf ? kInf : rest_cost[s + 1] + c;
        rest_weight[s] = rest_weight[s + 1] + w;
    }

    std::int64_t best = kInf;
    std::vector<StagePlan> best_plans;
    std::vector<StagePlan> current(S);
    auto combine = [&](auto&& self, std::size_t s, std::int64_t cost, double weight, std::int64_t ws) -> void {
        if (s == S) {
            if (cost < best && leq(weight + static_cast<double>(ws), cap)) {
                best = cost;
                best_plans = current;
            }
            return;
        }
        if (rest_cost[s] >= kInf || cost + rest_cost[s] >= best) return;
        if (!leq(weight + rest_weight[s] + static_cast<double>(ws), cap)) return;
        for (const auto& p : fronts[s]) {
            current[s] = p;
            self(self, s + 1, cost + p.cost, weight + p.weight, std::max(ws, p.ws));
        }
    };
    combine(combine, 0, 0, 0.0, 0);

    if (best_plans.empty()) {
        double min_mem = 0;
        std::int64_t min_ws = 0;
        for (std::size_t s = 0; s < S; ++s) {
            min_mem += searches[s].min_weight();
            std::int64_t w = kInf;
            for (const auto& e : inst.stages[s].entries) {
                if (e.valid) w = std::min(w, e.workspace);
            }
            min_ws = std::max(min_ws, w);
        }
        if (dl.hit()) {
            throw InfeasibleError("Constraint 5", "no schedule fitting the per-node memory was found "
                                                  "within the time limit");
        }
        throw InfeasibleError(
            "Constraint 5", "per-node memory needs at least " +
                                std::to_string(static_cast<std::int64_t>(std::ceil(min_mem + min_ws))) +
                                " B but the node capacity is " + std::to_string(inst.arch.node_cap) + " B");
    }
    return finish(best_plans, dl.hit());
}

}  // namespace pimorch
