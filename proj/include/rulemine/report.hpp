#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rulemine/classify.hpp"
#include "rulemine/datamodel.hpp"
#include "rulemine/engine.hpp"
#include "rulemine/rules.hpp"

namespace rulemine {

enum class Rounding { truncate, round };

// Value in hundredths of a percent: truncated, or rounded half away from zero.
inline std::uint64_t percent_hundredths(const Percent& p, Rounding mode) {
    using Wide = unsigned __int128;
    const Wide scaled = Wide{p.numerator()} * 10000;
    const Wide den = p.denominator();
    if (mode == Rounding::truncate) return static_cast<std::uint64_t>(scaled / den);
    return static_cast<std::uint64_t>((2 * scaled + den) / (2 * den));
}

inline std::string format_hundredths(std::uint64_t h) {
    std::string frac = std::to_string(h % 100);
    if (frac.size() < 2) frac.insert(0, 1, '0');
    return std::to_string(h / 100) + "." + frac;
}

inline std::string format_percent(const Percent& p, Rounding mode) { return format_hundredths(percent_hundredths(p, mode)); }

// Transactions holding any of `items`; an empty list means every transaction.
inline BitVector group_tidset(const TransactionDatabase& db, const std::vector<ItemId>& items) {
    if (items.empty()) return BitVector::all_set(db.size());
    BitVector acc(db.size());
    for (auto id : items) acc |= db.tidset(id);
    return acc;
}

struct FrequencyGroup {
    std::string label;
    std::vector<ItemId> items;  // member if the transaction holds any of these
    bool aggregate = false;
    std::uint64_t size = 0;
};

struct FrequencyRow {
    ItemId facility;
    Percent overall{0, 1};
    std::vector<std::optional<Percent>> cells;  // empty when the group has no members
};

struct FrequencyTable {
    std::vector<FrequencyGroup> groups;
    std::vector<FrequencyRow> rows;
};

// One row per consequent-class item; one column per antecedent-class item plus any
// requested aggregates, each given as item labels of a single attribute
// (e.g. {"ownership=private", "ownership=semiprivate"}).
inline FrequencyTable stats_table(const TransactionDatabase& db,
                                  const std::vector<std::vector<std::string>>& aggregates = {}) {
    if (db.size() == 0) throw Error("cannot tabulate an empty database");
    const auto& catalog = db.catalog();
    FrequencyTable table;
    for (auto id : catalog.items_of_class(ItemClass::demographic))
        table.groups.push_back({catalog.label(id), {id}, false, 0});
    for (const auto& merge : aggregates) {
        if (merge.size() < 2) throw Error("an aggregate column needs at least two items");
        FrequencyGroup g{"", {}, true, 0};
        std::string attr;
        for (const auto& label : merge) {
            auto id = catalog.require_label(label);
            const auto& def = catalog.item(id);
            if (def.item_class != ItemClass::demographic) throw Error("aggregate item '" + label + "' is not a group item");
            if (!attr.empty() && def.attribute != attr) throw Error("aggregate items must share one attribute");
            attr = def.attribute;
            g.label += (g.items.empty() ? attr + "=" : std::string("+")) + def.value;
            g.items.push_back(id);
        }
        table.groups.push_back(std::move(g));
    }
    std::vector<BitVector> group_sets;
    for (auto& g : table.groups) {
        group_sets.push_back(group_tidset(db, g.items));
        g.size = group_sets.back().count();
    }
    for (auto f : catalog.items_of_class(ItemClass::facility)) {
        FrequencyRow row{f, Percent(db.tidset(f).count(), db.size()), {}};
        for (std::size_t k = 0; k < table.groups.size(); ++k) {
            const auto n = table.groups[k].size;
            if (n == 0)
                row.cells.emplace_back(std::nullopt);
            else
                row.cells.emplace_back(Percent(BitVector::and_count(db.tidset(f), group_sets[k]), n));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline std::string row_name(const ItemCatalog& catalog, ItemId id) {
    const auto& attr = catalog.attribute_of(id);
    return attr.kind == AttributeKind::binary ? attr.name : catalog.label(id);
}

inline std::string render_stats_csv(const FrequencyTable& table, const ItemCatalog& catalog,
                                    Rounding mode = Rounding::round) {
    std::ostringstream out;
    out << "facility,total_pct";
    for (const auto& g : table.groups) out << ',' << g.label;
    out << '\n';
    for (const auto& row : table.rows) {
        out << row_name(catalog, row.facility) << ',' << format_percent(row.overall, mode);
        for (const auto& cell : row.cells) {
            out << ',';
            if (cell) out << format_percent(*cell, mode);
        }
        out << '\n';
    }
    return out.str();
}

inline std::string join_labels(const ItemCatalog& catalog, const Itemset& items) {
    std::string out;
    for (auto id : items) {
        if (!out.empty()) out += " AND ";
        out += catalog.label(id);
    }
    return out;
}

struct ConsequentGroup {
    Itemset consequent;
    std::vector<ClassifiedRule> rules;
};

// Groups by consequent, largest group first (ties by consequent ids); rules inside a
// group are in canonical order.
inline std::vector<ConsequentGroup> group_by_consequent(const std::vector<ClassifiedRule>& classified) {
    std::map<Itemset, std::vector<ClassifiedRule>> by;
    for (const auto& r : classified) by[r.rule.consequent()].push_back(r);
    std::vector<ConsequentGroup> out;
    for (auto& [consequent, rules] : by) {
        std::stable_sort(rules.begin(), rules.end(),
                         [](const ClassifiedRule& a, const ClassifiedRule& b) { return canonical_less(a.rule, b.rule); });
        out.push_back({consequent, std::move(rules)});
    }
    std::stable_sort(out.begin(), out.end(), [](const ConsequentGroup& a, const ConsequentGroup& b) {
        return a.rules.size() > b.rules.size();
    });
    return out;
}

inline std::string render_groups(const std::vector<ConsequentGroup>& groups, const ItemCatalog& catalog) {
    std::ostringstream out;
    std::size_t n = 0;
    for (const auto& g : groups) {
        out << ++n << ". " << join_labels(catalog, g.consequent) << " (" << g.rules.size() << " rules)\n";
        std::size_t k = 0;
        for (const auto& r : g.rules)
            out << "   " << ++k << ". " << join_labels(catalog, r.rule.antecedent()) << "  ["
                << format_percent(r.rule.confidence(), Rounding::truncate) << "%, " << to_string(r.rule_class) << "]\n";
    }
    return out.str();
}

enum class RuleFormat { csv, text };

inline constexpr std::string_view kRuleCsvHeader =
    "rule_id,antecedent,consequent,confidence_pct,coverage_pct,support_pct,class";

// Rule ids are positions in the given order, starting at 1.
inline std::string render_rules(const std::vector<ClassifiedRule>& classified, const ItemCatalog& catalog,
                                RuleFormat format) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < classified.size(); ++k) {
        const auto& r = classified[k].rule;
        rows.push_back({std::to_string(k + 1), join_labels(catalog, r.antecedent()), join_labels(catalog, r.consequent()),
                        format_percent(r.confidence(), Rounding::truncate),
                        format_percent(r.coverage(), Rounding::truncate),
                        format_percent(r.support(), Rounding::truncate), std::string(to_string(classified[k].rule_class))});
    }
    std::ostringstream out;
    if (format == RuleFormat::csv) {
        out << kRuleCsvHeader << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
            out << '\n';
        }
        return out.str();
    }

    const std::vector<std::string> header{"#", "antecedent", "consequent", "conf%", "cover%", "supp%", "class"};
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const bool numeric = c == 0 || (c >= 3 && c <= 5);
            const std::string pad(width[c] - row[c].size(), ' ');
            line += numeric ? pad + row[c] : row[c] + (c + 1 < row.size() ? pad : "");
            if (c + 1 < row.size()) line += "  ";
        }
        out << line << '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    for (const auto& row : rows) emit(row);
    return out.str();
}

}  // namespace rulemine
