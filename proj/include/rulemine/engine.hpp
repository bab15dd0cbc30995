#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "rulemine/bitvector.hpp"
#include "rulemine/datamodel.hpp"

namespace rulemine {

struct CountedItemset {
    Itemset items;
    std::uint64_t count = 0;

    friend bool operator==(const CountedItemset&, const CountedItemset&) = default;
};

// All frequent itemsets of one size, in strict lexicographic order.
struct FrequentLevel {
    std::size_t k = 0;
    std::vector<CountedItemset> itemsets;

    friend bool operator==(const FrequentLevel&, const FrequentLevel&) = default;
};

inline std::uint64_t count_support(const TransactionDatabase& db, const Itemset& itemset) {
    if (itemset.empty()) return db.size();
    if (itemset.size() == 1) return db.tidset(itemset[0]).count();
    if (itemset.size() == 2) return BitVector::and_count(db.tidset(itemset[0]), db.tidset(itemset[1]));
    BitVector acc = db.tidset(itemset[0]);
    for (std::size_t k = 1; k < itemset.size(); ++k) acc &= db.tidset(itemset[k]);
    return acc.count();
}

namespace detail {

// A (k+1)-candidate: itemsets[parent] extended by one larger item.
struct Candidate {
    std::size_t parent;
    ItemId extension;
    Itemset items;
};

inline bool same_prefix(const Itemset& a, const Itemset& b) {
    return std::equal(a.begin(), a.end() - 1, b.begin(), b.end() - 1);
}

inline bool level_contains(const std::vector<CountedItemset>& level, const std::vector<ItemId>& ids) {
    auto it = std::lower_bound(level.begin(), level.end(), ids, [](const CountedItemset& c, const std::vector<ItemId>& key) {
        return std::lexicographical_compare(c.items.begin(), c.items.end(), key.begin(), key.end());
    });
    return it != level.end() && std::equal(it->items.begin(), it->items.end(), ids.begin(), ids.end());
}

// Prefix join followed by the subset check. The two subsets that drop one of the last
// two items are the join parents, so only the remaining k-1 subsets are looked up.
inline std::vector<Candidate> join_and_prune(const FrequentLevel& level) {
    std::vector<Candidate> out;
    const auto& sets = level.itemsets;
    std::vector<ItemId> probe;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size() && same_prefix(sets[i].items, sets[j].items); ++j) {
            const auto& a = sets[i].items;
            const ItemId ext = sets[j].items[sets[j].items.size() - 1];
            std::vector<ItemId> ids(a.begin(), a.end());
            ids.push_back(ext);
            bool keep = true;
            for (std::size_t drop = 0; keep && drop + 2 < ids.size(); ++drop) {
                probe.assign(ids.begin(), ids.end());
                probe.erase(probe.begin() + static_cast<std::ptrdiff_t>(drop));
                keep = level_contains(sets, probe);
            }
            if (keep) out.push_back(Candidate{i, ext, Itemset(std::move(ids))});
        }
    }
    return out;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i, 0u);
        return;
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i, t);
        });
}

}  // namespace detail

// Candidates of size k+1 whose every k-subset is in `level`; sorted and duplicate-free.
inline std::vector<Itemset> generate_candidates(const FrequentLevel& level) {
    std::vector<Itemset> out;
    for (auto& c : detail::join_and_prune(level)) out.push_back(std::move(c.items));
    return out;
}

struct MiningOptions {
    unsigned threads = 1;
    // Extra constraint on itemsets. It must be anti-monotone (true for a set implies true
    // for all its subsets) or the level-wise search loses completeness.
    std::function<bool(const Itemset&)> admissible;
};

// Level-wise Apriori. Level k+1 counts are taken by intersecting the parent's cached
// tidset with one item tidset; results do not depend on the thread count.
inline std::vector<FrequentLevel> mine_frequent(const TransactionDatabase& db, std::uint64_t min_count,
                                                const std::function<bool(ItemId)>& item_filter = {},
                                                const MiningOptions& options = {}) {
    if (db.size() == 0) throw Error("cannot mine an empty database");
    if (min_count == 0) throw std::invalid_argument("min_count must be positive");
    auto admissible = [&](const Itemset& s) { return !options.admissible || options.admissible(s); };

    std::vector<FrequentLevel> result;
    FrequentLevel current{1, {}};
    std::vector<BitVector> tidsets;
    for (std::uint32_t i = 0; i < db.catalog().size(); ++i) {
        const ItemId id{i};
        if (item_filter && !item_filter(id)) continue;
        Itemset single{id};
        if (!admissible(single)) continue;
        const auto n = db.tidset(id).count();
        if (n < min_count) continue;
        current.itemsets.push_back({std::move(single), n});
        tidsets.push_back(db.tidset(id));
    }

    while (!current.itemsets.empty()) {
        auto candidates = detail::join_and_prune(current);
        std::erase_if(candidates, [&](const detail::Candidate& c) { return !admissible(c.items); });

        std::vector<std::uint64_t> counts(candidates.size(), 0);
        std::vector<BitVector> next_tidsets(candidates.size());
        std::vector<BitVector> scratch(std::max(1u, options.threads));
        detail::parallel_for(candidates.size(), options.threads, [&](std::size_t i, unsigned worker) {
            const auto& c = candidates[i];
            auto& buf = scratch[worker];
            counts[i] = BitVector::and_into(tidsets[c.parent], db.tidset(c.extension), buf);
            if (counts[i] >= min_count) next_tidsets[i] = buf;
        });

        FrequentLevel next{current.k + 1, {}};
        std::vector<BitVector> kept;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (counts[i] < min_count) continue;
            next.itemsets.push_back({std::move(candidates[i].items), counts[i]});
            kept.push_back(std::move(next_tidsets[i]));
        }
        result.push_back(std::move(current));
        current = std::move(next);
        tidsets = std::move(kept);
    }
    return result;
}

}  // namespace rulemine
