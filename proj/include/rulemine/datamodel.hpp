#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rulemine/bitvector.hpp"

namespace rulemine {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based, or 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ItemId {
    std::uint32_t index = 0;
    friend auto operator<=>(ItemId, ItemId) = default;
};

enum class ItemClass { demographic, facility };

enum class AttributeKind { categorical, binary, numeric_binned };

inline std::string_view to_string(ItemClass c) {
    return c == ItemClass::demographic ? "demographic" : "facility";
}

// Inclusive integer range [lo, hi]; hi empty means unbounded above.
struct Bin {
    long long lo = 0;
    std::optional<long long> hi;
    std::string label;

    bool contains(double v) const { return v >= static_cast<double>(lo) && (!hi || v <= static_cast<double>(*hi)); }
};

struct AttributeDef {
    std::string name;
    AttributeKind kind = AttributeKind::categorical;
    ItemClass item_class = ItemClass::demographic;
    std::vector<std::string> values;  // categorical values; bin labels for numeric
    std::vector<Bin> bins;            // numeric_binned only
    std::string description;          // binary only
    std::uint32_t first_item = 0;     // filled by ItemCatalog
};

struct ItemDef {
    std::string attribute;
    std::string value;
    ItemClass item_class = ItemClass::demographic;
    std::size_t attribute_index = 0;
};

// The item universe. Attributes are stored antecedent-class first, each in declaration
// order, and an item's id is its position in that flattened order.
class ItemCatalog {
public:
    static constexpr std::string_view kBinaryValue = "yes";

    ItemCatalog() = default;

    explicit ItemCatalog(std::vector<AttributeDef> attributes) {
        std::stable_partition(attributes.begin(), attributes.end(),
                              [](const AttributeDef& a) { return a.item_class == ItemClass::demographic; });
        for (std::size_t a = 0; a < attributes.size(); ++a) {
            auto& attr = attributes[a];
            for (std::size_t b = 0; b < a; ++b)
                if (attributes[b].name == attr.name) throw Error("duplicate attribute '" + attr.name + "'");
            if (attr.kind == AttributeKind::binary) attr.values = {std::string(kBinaryValue)};
            if (attr.kind == AttributeKind::numeric_binned) {
                attr.values.clear();
                for (const auto& bin : attr.bins) attr.values.push_back(bin.label);
            }
            if (attr.values.empty()) throw Error("attribute '" + attr.name + "' has no values");
            attr.first_item = static_cast<std::uint32_t>(items_.size());
            for (const auto& v : attr.values) {
                for (std::uint32_t k = attr.first_item; k < items_.size(); ++k)
                    if (items_[k].value == v) throw Error("duplicate value '" + v + "' in attribute '" + attr.name + "'");
                items_.push_back(ItemDef{attr.name, v, attr.item_class, a});
            }
        }
        attributes_ = std::move(attributes);
    }

    std::size_t size() const noexcept { return items_.size(); }
    const std::vector<ItemDef>& items() const noexcept { return items_; }
    const std::vector<AttributeDef>& attributes() const noexcept { return attributes_; }

    const ItemDef& item(ItemId id) const {
        if (id.index >= items_.size()) throw std::out_of_range("item id " + std::to_string(id.index) + " out of range");
        return items_[id.index];
    }
    const AttributeDef& attribute_of(ItemId id) const { return attributes_[item(id).attribute_index]; }

    std::optional<std::size_t> find_attribute(std::string_view name) const {
        for (std::size_t a = 0; a < attributes_.size(); ++a)
            if (attributes_[a].name == name) return a;
        return std::nullopt;
    }

    std::optional<ItemId> find(std::string_view attribute, std::string_view value) const {
        auto a = find_attribute(attribute);
        if (!a) return std::nullopt;
        const auto& attr = attributes_[*a];
        for (std::size_t k = 0; k < attr.values.size(); ++k)
            if (attr.values[k] == value) return ItemId{static_cast<std::uint32_t>(attr.first_item + k)};
        return std::nullopt;
    }

    // "attr=value" for valued attributes, "facility=<name>" for binary ones.
    std::string label(ItemId id) const {
        const auto& it = item(id);
        if (attributes_[it.attribute_index].kind == AttributeKind::binary) return "facility=" + it.attribute;
        return it.attribute + "=" + it.value;
    }

    std::optional<ItemId> find_label(std::string_view text) const {
        auto eq = text.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        auto lhs = text.substr(0, eq), rhs = text.substr(eq + 1);
        if (lhs == "facility") {
            auto a = find_attribute(rhs);
            if (a && attributes_[*a].kind == AttributeKind::binary)
                return ItemId{attributes_[*a].first_item};
        }
        return find(lhs, rhs);
    }

    ItemId require_label(std::string_view text) const {
        auto id = find_label(text);
        if (!id) throw Error("unknown item '" + std::string(text) + "'");
        return *id;
    }

    std::vector<ItemId> items_of_class(ItemClass c) const {
        std::vector<ItemId> out;
        for (std::uint32_t k = 0; k < items_.size(); ++k)
            if (items_[k].item_class == c) out.push_back(ItemId{k});
        return out;
    }

private:
    std::vector<AttributeDef> attributes_;
    std::vector<ItemDef> items_;
};

// Strictly increasing list of item ids.
class Itemset {
public:
    Itemset() = default;
    Itemset(std::initializer_list<ItemId> ids) : Itemset(std::vector<ItemId>(ids)) {}
    explicit Itemset(std::vector<ItemId> ids) : ids_(std::move(ids)) {
        for (std::size_t k = 1; k < ids_.size(); ++k)
            if (!(ids_[k - 1] < ids_[k])) throw std::invalid_argument("itemset ids must be strictly increasing");
    }

    static Itemset from_unsorted(std::vector<ItemId> ids) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return Itemset(std::move(ids));
    }

    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    std::span<const ItemId> ids() const noexcept { return ids_; }
    ItemId operator[](std::size_t k) const { return ids_.at(k); }
    auto begin() const noexcept { return ids_.begin(); }
    auto end() const noexcept { return ids_.end(); }

    bool contains(ItemId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

    bool disjoint(const Itemset& other) const {
        for (auto id : ids_)
            if (other.contains(id)) return false;
        return true;
    }

    Itemset with(ItemId id) const {
        auto ids = ids_;
        ids.insert(std::upper_bound(ids.begin(), ids.end(), id), id);
        return from_unsorted(std::move(ids));
    }

    Itemset without(ItemId id) const {
        auto ids = ids_;
        ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
        return Itemset(std::move(ids));
    }

    friend auto operator<=>(const Itemset&, const Itemset&) = default;
    friend bool operator==(const Itemset&, const Itemset&) = default;

private:
    std::vector<ItemId> ids_;
};

// An exact ratio numerator/denominator in [0, 1], shown as a percentage.
class Percent {
public:
    constexpr Percent(std::uint64_t numerator, std::uint64_t denominator) : num_(numerator), den_(denominator) {
        if (den_ == 0) throw std::invalid_argument("percent denominator must be positive");
        if (num_ > den_) throw std::invalid_argument("percent numerator exceeds denominator");
    }

    constexpr std::uint64_t numerator() const noexcept { return num_; }
    constexpr std::uint64_t denominator() const noexcept { return den_; }
    double to_double() const noexcept { return 100.0 * static_cast<double>(num_) / static_cast<double>(den_); }

    friend constexpr std::strong_ordering operator<=>(const Percent& a, const Percent& b) noexcept {
        using Wide = unsigned __int128;
        return Wide{a.num_} * b.den_ <=> Wide{b.num_} * a.den_;
    }
    friend constexpr bool operator==(const Percent& a, const Percent& b) noexcept { return (a <=> b) == 0; }

private:
    std::uint64_t num_;
    std::uint64_t den_;
};

struct Transaction {
    std::string record_id;
    BitVector members;  // bit i set iff item i present
};

// Transpose of the membership matrix: bit j of result[i] is set iff transaction j holds item i.
inline std::vector<BitVector> build_vertical_index(std::span<const Transaction> transactions, std::size_t n_items) {
    std::vector<BitVector> index(n_items, BitVector(transactions.size()));
    for (std::size_t j = 0; j < transactions.size(); ++j) {
        const auto& row = transactions[j].members;
        if (row.size() != n_items) throw std::invalid_argument("transaction width does not match catalog");
        for (std::size_t i = 0; i < n_items; ++i)
            if (row.test(i)) index[i].set(j);
    }
    return index;
}

class TransactionDatabase {
public:
    TransactionDatabase(std::shared_ptr<const ItemCatalog> catalog, std::vector<Transaction> transactions,
                        std::size_t excluded_count = 0)
        : catalog_(std::move(catalog)), transactions_(std::move(transactions)), excluded_(excluded_count) {
        if (!catalog_) throw std::invalid_argument("database needs a catalog");
        for (const auto& t : transactions_) {
            if (t.members.size() != catalog_->size())
                throw std::invalid_argument("transaction '" + t.record_id + "' width does not match catalog");
            for (const auto& attr : catalog_->attributes()) {
                std::size_t set = 0;
                for (std::size_t k = 0; k < attr.values.size(); ++k) set += t.members.test(attr.first_item + k);
                if (set > 1)
                    throw std::invalid_argument("transaction '" + t.record_id + "' has several values for '" +
                                                attr.name + "'");
            }
        }
        vertical_ = build_vertical_index(transactions_, catalog_->size());
    }

    const ItemCatalog& catalog() const noexcept { return *catalog_; }
    const std::shared_ptr<const ItemCatalog>& catalog_ptr() const noexcept { return catalog_; }
    std::size_t size() const noexcept { return transactions_.size(); }
    std::size_t excluded_count() const noexcept { return excluded_; }
    const std::vector<Transaction>& transactions() const noexcept { return transactions_; }
    const BitVector& tidset(ItemId id) const {
        if (id.index >= vertical_.size()) throw std::out_of_range("item id " + std::to_string(id.index) + " out of range");
        return vertical_[id.index];
    }
    const std::vector<BitVector>& vertical_index() const noexcept { return vertical_; }

private:
    std::shared_ptr<const ItemCatalog> catalog_;
    std::vector<Transaction> transactions_;
    std::size_t excluded_;
    std::vector<BitVector> vertical_;
};

// antecedent => consequent with the exact counts every metric derives from.
class Rule {
public:
    Rule(Itemset antecedent, Itemset consequent, std::uint64_t n_antecedent, std::uint64_t n_joint,
         std::uint64_t db_size)
        : antecedent_(std::move(antecedent)), consequent_(std::move(consequent)),
          n_a_(n_antecedent), n_ay_(n_joint), m_(db_size) {
        if (!antecedent_.disjoint(consequent_)) throw std::invalid_argument("antecedent and consequent overlap");
        if (n_a_ == 0) throw std::invalid_argument("rule antecedent count must be positive");
        if (n_ay_ > n_a_ || n_a_ > m_) throw std::invalid_argument("rule counts violate n_AY <= n_A <= m");
    }

    const Itemset& antecedent() const noexcept { return antecedent_; }
    const Itemset& consequent() const noexcept { return consequent_; }
    std::uint64_t antecedent_count() const noexcept { return n_a_; }
    std::uint64_t joint_count() const noexcept { return n_ay_; }
    std::uint64_t db_size() const noexcept { return m_; }

    Percent confidence() const { return {n_ay_, n_a_}; }
    Percent coverage() const { return {n_a_, m_}; }
    Percent support() const { return {n_ay_, m_}; }

    friend bool operator==(const Rule&, const Rule&) = default;

private:
    Itemset antecedent_;
    Itemset consequent_;
    std::uint64_t n_a_;
    std::uint64_t n_ay_;
    std::uint64_t m_;
};

// Ordered so that a higher-confidence class compares greater.
enum class RuleClass { rejected = 0, should_have = 1, must_have = 2 };

inline std::string_view to_string(RuleClass c) {
    switch (c) {
        case RuleClass::must_have: return "must_have";
        case RuleClass::should_have: return "should_have";
        case RuleClass::rejected: return "rejected";
    }
    return "rejected";
}

struct MiningConfig {
    Percent min_confidence{90, 100};
    std::uint64_t min_coverage_count = 1;
    std::size_t max_antecedent_size = 2;
    ItemClass antecedent_class = ItemClass::demographic;
    ItemClass consequent_class = ItemClass::facility;
    std::size_t consequent_size = 1;
    unsigned threads = 1;

    void validate() const {
        if (min_coverage_count == 0) throw std::invalid_argument("min_coverage_count must be positive");
        if (max_antecedent_size == 0) throw std::invalid_argument("max_antecedent_size must be at least 1");
        if (consequent_size == 0) throw std::invalid_argument("consequent_size must be at least 1");
        if (antecedent_class == consequent_class)
            throw std::invalid_argument("antecedent and consequent classes must differ");
    }
};

}  // namespace rulemine
