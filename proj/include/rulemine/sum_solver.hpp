#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rulemine::solver {

// sum(vars) == target over bounded integer variables.
struct SumConstraint {
    std::vector<std::size_t> vars;
    std::int64_t target = 0;
    std::string name;
};

struct Problem {
    std::vector<std::int64_t> lo;
    std::vector<std::int64_t> hi;
    std::vector<SumConstraint> constraints;

    std::size_t add_var(std::int64_t lower, std::int64_t upper) {
        lo.push_back(lower);
        hi.push_back(upper);
        return lo.size() - 1;
    }
};

enum class ValueOrder { ascending, descending };

namespace detail {

// Bounds propagation to a fixpoint; false when some constraint cannot be met.
inline bool propagate(const Problem& p, std::vector<std::int64_t>& lo, std::vector<std::int64_t>& hi) {
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& c : p.constraints) {
            std::int64_t sum_lo = 0, sum_hi = 0;
            for (auto v : c.vars) {
                sum_lo += lo[v];
                sum_hi += hi[v];
            }
            if (c.target < sum_lo || c.target > sum_hi) return false;
            for (auto v : c.vars) {
                const auto new_lo = std::max(lo[v], c.target - (sum_hi - hi[v]));
                const auto new_hi = std::min(hi[v], c.target - (sum_lo - lo[v]));
                if (new_lo > new_hi) return false;
                if (new_lo != lo[v] || new_hi != hi[v]) {
                    sum_lo += new_lo - lo[v];
                    sum_hi += new_hi - hi[v];
                    lo[v] = new_lo;
                    hi[v] = new_hi;
                    changed = true;
                }
            }
        }
    }
    return true;
}

// Adds sum(B \\ A) = tB - tA for every pair of constraints with A a proper subset of B,
// up to a closure limit. nullopt when two constraints over the same variables disagree.
inline std::optional<std::vector<SumConstraint>> strengthen(const std::vector<SumConstraint>& in,
                                                            std::size_t limit = 4096) {
    std::map<std::vector<std::size_t>, std::int64_t> known;
    std::vector<std::vector<std::size_t>> order;
    auto add = [&](std::vector<std::size_t> vars, std::int64_t target) {
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        if (vars.empty()) return target == 0;
        auto [it, inserted] = known.emplace(vars, target);
        if (!inserted) return it->second == target;
        order.push_back(std::move(vars));
        return true;
    };
    for (const auto& c : in)
        if (!add(c.vars, c.target)) return std::nullopt;
    for (std::size_t b = 0; b < order.size() && order.size() < limit; ++b)
        for (std::size_t a = 0; a < order.size() && order.size() < limit; ++a) {
            if (a == b || order[a].size() >= order[b].size()) continue;
            const auto big = order[b], small = order[a];
            if (!std::includes(big.begin(), big.end(), small.begin(), small.end())) continue;
            std::vector<std::size_t> diff;
            std::set_difference(big.begin(), big.end(), small.begin(), small.end(), std::back_inserter(diff));
            if (!add(std::move(diff), known[big] - known[small])) return std::nullopt;
        }
    std::vector<SumConstraint> out = in;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const bool original = std::any_of(in.begin(), in.end(), [&](const SumConstraint& c) {
            auto v = c.vars;
            std::sort(v.begin(), v.end());
            return v == order[k];
        });
        if (!original) out.push_back({order[k], known[order[k]], "derived"});
    }
    return out;
}

template <class Visit>
bool search(const Problem& p, ValueOrder order, std::vector<std::int64_t> lo, std::vector<std::int64_t> hi,
            Visit& visit) {
    if (!propagate(p, lo, hi)) return true;
    // Narrowest domain first, lowest index on ties.
    std::size_t branch = lo.size();
    for (std::size_t v = 0; v < lo.size(); ++v)
        if (lo[v] < hi[v] && (branch == lo.size() || hi[v] - lo[v] < hi[branch] - lo[branch])) branch = v;
    if (branch == lo.size()) return visit(lo);
    const auto first = order == ValueOrder::ascending ? lo[branch] : hi[branch];
    const auto last = order == ValueOrder::ascending ? hi[branch] : lo[branch];
    const std::int64_t step = order == ValueOrder::ascending ? 1 : -1;
    for (auto value = first;; value += step) {
        auto lo2 = lo, hi2 = hi;
        lo2[branch] = hi2[branch] = value;
        if (!search(p, order, std::move(lo2), std::move(hi2), visit)) return false;
        if (value == last) break;
    }
    return true;
}

}  // namespace detail

// Depth-first, branching on the narrowest undecided variable. visit(solution) returns false to stop;
// the result is false iff the enumeration was stopped early.
template <class Visit>
bool enumerate(const Problem& p, ValueOrder order, Visit&& visit) {
    for (std::size_t v = 0; v < p.lo.size(); ++v)
        if (p.lo[v] > p.hi[v]) return true;
    auto strong = detail::strengthen(p.constraints);
    if (!strong) return true;
    const Problem q{p.lo, p.hi, std::move(*strong)};
    return detail::search(q, order, q.lo, q.hi, visit);
}

inline std::optional<std::vector<std::int64_t>> first_solution(const Problem& p,
                                                                ValueOrder order = ValueOrder::ascending) {
    std::optional<std::vector<std::int64_t>> found;
    enumerate(p, order, [&](const std::vector<std::int64_t>& s) {
        found = s;
        return false;
    });
    return found;
}

inline bool feasible(const Problem& p) { return first_solution(p).has_value(); }

// Deletion filter: indices of an irreducible infeasible subset of p.constraints.
// Empty when p is feasible.
inline std::vector<std::size_t> minimal_conflict(const Problem& p) {
    if (feasible(p)) return {};
    std::vector<std::size_t> keep(p.constraints.size());
    for (std::size_t k = 0; k < keep.size(); ++k) keep[k] = k;
    for (std::size_t k = 0; k < keep.size();) {
        Problem trial{p.lo, p.hi, {}};
        for (std::size_t j = 0; j < keep.size(); ++j)
            if (j != k) trial.constraints.push_back(p.constraints[keep[j]]);
        if (!feasible(trial))
            keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(k));
        else
            ++k;
    }
    return keep;
}

}  // namespace rulemine::solver
