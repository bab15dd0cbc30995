#pragma once

#include <cctype>
#include <cstdint>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rulemine/datamodel.hpp"
#include "rulemine/text.hpp"

namespace rulemine {

// Parsed schema file. The catalog carries every per-attribute parsing rule
// (categorical value lists, bin edges); binary cells use the fixed yes/no tokens.
struct Schema {
    std::shared_ptr<const ItemCatalog> catalog;
};

namespace detail {

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    return true;
}

inline std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        if (line[k] == '"') quoted = !quoted;
        if (line[k] == '#' && !quoted) return line.substr(0, k);
    }
    return line;
}

// Pops the next whitespace-delimited word off `rest`.
inline std::string_view next_word(std::string_view& rest) {
    rest = text::trim(rest);
    auto end = rest.find_first_of(" \t");
    auto word = rest.substr(0, end);
    rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
    return word;
}

inline ItemClass parse_class_keyword(std::string_view word, std::size_t line) {
    if (word == "antecedent") return ItemClass::demographic;
    if (word == "consequent") return ItemClass::facility;
    throw ParseError(line, "unknown class keyword '" + std::string(word) + "'");
}

inline std::vector<std::string> parse_value_list(std::string_view list, std::size_t line) {
    std::vector<std::string> values;
    for (auto v : text::split(list, ',')) {
        if (!is_identifier(v)) throw ParseError(line, "invalid value '" + std::string(v) + "'");
        for (const auto& seen : values)
            if (seen == v) throw ParseError(line, "duplicate value '" + std::string(v) + "'");
        values.emplace_back(v);
    }
    return values;
}

inline std::vector<Bin> parse_bins(std::string_view list, std::size_t line) {
    std::vector<Bin> bins;
    for (auto spec : text::split(list, ',')) {
        auto eq = spec.find('=');
        auto dash = spec.find('-');
        if (eq == std::string_view::npos || dash == std::string_view::npos || dash > eq)
            throw ParseError(line, "malformed bin '" + std::string(spec) + "' (expected lo-hi=label or lo-=label)");
        Bin bin;
        auto lo = text::parse_int<long long>(spec.substr(0, dash));
        auto hi_text = text::trim(spec.substr(dash + 1, eq - dash - 1));
        bin.label = std::string(text::trim(spec.substr(eq + 1)));
        if (!lo || !is_identifier(bin.label)) throw ParseError(line, "malformed bin '" + std::string(spec) + "'");
        bin.lo = *lo;
        if (!hi_text.empty()) {
            auto hi = text::parse_int<long long>(hi_text);
            if (!hi || *hi < bin.lo) throw ParseError(line, "malformed bin '" + std::string(spec) + "'");
            bin.hi = *hi;
        }
        if (!bins.empty()) {
            const auto& prev = bins.back();
            if (!prev.hi || bin.lo <= *prev.hi)
                throw ParseError(line, "overlapping or unordered bins at '" + std::string(spec) + "'");
        }
        for (const auto& b : bins)
            if (b.label == bin.label) throw ParseError(line, "duplicate bin label '" + bin.label + "'");
        bins.push_back(std::move(bin));
    }
    return bins;
}

}  // namespace detail

inline Schema parse_schema(std::string_view text_in) {
    std::vector<AttributeDef> attrs;
    std::set<std::string, std::less<>> names;
    for (const auto& [number, raw] : text::lines(text_in)) {
        auto line = text::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        auto rest = line;
        auto keyword = detail::next_word(rest);
        AttributeDef attr;
        if (keyword == "facility") {
            attr.name = std::string(detail::next_word(rest));
            attr.kind = AttributeKind::binary;
            attr.item_class = ItemClass::facility;
            rest = text::trim(rest);
            if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"')
                throw ParseError(number, "facility needs a quoted description");
            attr.description = std::string(rest.substr(1, rest.size() - 2));
        } else if (keyword == "attribute") {
            attr.name = std::string(detail::next_word(rest));
            auto kind = detail::next_word(rest);
            attr.item_class = detail::parse_class_keyword(detail::next_word(rest), number);
            rest = text::trim(rest);
            if (kind == "categorical") {
                attr.kind = AttributeKind::categorical;
                if (!text::starts_with(rest, "values:")) throw ParseError(number, "expected 'values:'");
                attr.values = detail::parse_value_list(rest.substr(7), number);
            } else if (kind == "numeric") {
                attr.kind = AttributeKind::numeric_binned;
                if (!text::starts_with(rest, "bins:")) throw ParseError(number, "expected 'bins:'");
                attr.bins = detail::parse_bins(rest.substr(5), number);
            } else {
                throw ParseError(number, "unknown attribute kind '" + std::string(kind) + "'");
            }
        } else {
            throw ParseError(number, "unknown declaration '" + std::string(keyword) + "'");
        }
        if (!detail::is_identifier(attr.name) || attr.name == "record_id" || attr.name == "facility")
            throw ParseError(number, "invalid attribute name '" + attr.name + "'");
        if (!names.insert(attr.name).second) throw ParseError(number, "duplicate attribute '" + attr.name + "'");
        attrs.push_back(std::move(attr));
    }
    if (attrs.empty()) throw ParseError(0, "no attributes declared");
    return Schema{std::make_shared<const ItemCatalog>(std::move(attrs))};
}

// Label of the unique bin holding `value`; bin edges are inclusive on both ends.
inline const std::string& bin_numeric(double value, std::span<const Bin> bins) {
    for (const auto& bin : bins)
        if (bin.contains(value)) return bin.label;
    std::ostringstream msg;
    msg << "value " << value << " falls in no bin";
    throw Error(msg.str());
}

// Integer written back for a numeric bin when serialising: midpoint of a closed bin,
// lower edge of an open one.
inline long long representative_value(const Bin& bin) { return bin.hi ? bin.lo + (*bin.hi - bin.lo) / 2 : bin.lo; }

namespace detail {

inline std::optional<bool> parse_yes_no(std::string_view cell) {
    auto v = text::lower(cell);
    if (v == "y" || v == "1" || v == "yes") return true;
    if (v == "n" || v == "0" || v == "no") return false;
    return std::nullopt;
}

}  // namespace detail

// Rows whose binary (facility) cells are all empty are counted as excluded.
inline TransactionDatabase parse_transactions(const Schema& schema, std::string_view csv) {
    const auto& catalog = *schema.catalog;
    auto all_lines = text::lines(csv);
    std::size_t cursor = 0;
    while (cursor < all_lines.size() && text::trim(all_lines[cursor].content).empty()) ++cursor;
    if (cursor == all_lines.size()) throw ParseError(0, "missing header row");

    const auto header_line = all_lines[cursor++];
    auto header = text::split(header_line.content, ',');
    if (header.empty() || header[0] != "record_id")
        throw ParseError(header_line.number, "first column must be 'record_id'");
    std::vector<std::size_t> column_attr(header.size());
    std::vector<bool> seen(catalog.attributes().size(), false);
    for (std::size_t c = 1; c < header.size(); ++c) {
        auto a = catalog.find_attribute(header[c]);
        if (!a) throw ParseError(header_line.number, "unknown column '" + std::string(header[c]) + "'");
        if (seen[*a]) throw ParseError(header_line.number, "duplicate column '" + std::string(header[c]) + "'");
        seen[*a] = true;
        column_attr[c] = *a;
    }
    for (std::size_t a = 0; a < seen.size(); ++a)
        if (!seen[a]) throw ParseError(header_line.number, "missing column '" + catalog.attributes()[a].name + "'");

    std::vector<Transaction> transactions;
    std::unordered_set<std::string> ids;
    std::size_t excluded = 0;
    for (; cursor < all_lines.size(); ++cursor) {
        const auto& [number, content] = all_lines[cursor];
        if (text::trim(content).empty()) continue;
        auto cells = text::split(content, ',');
        if (cells.size() != header.size())
            throw ParseError(number, "expected " + std::to_string(header.size()) + " fields, found " +
                                         std::to_string(cells.size()));
        std::string id(cells[0]);
        if (id.empty()) throw ParseError(number, "empty record_id");
        if (!ids.insert(id).second) throw ParseError(number, "duplicate record_id '" + id + "'");

        BitVector members(catalog.size());
        std::size_t binary_total = 0, binary_empty = 0;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto& attr = catalog.attributes()[column_attr[c]];
            auto cell = cells[c];
            if (attr.kind == AttributeKind::binary) {
                ++binary_total;
                if (cell.empty()) {
                    ++binary_empty;
                    continue;
                }
                auto yes = detail::parse_yes_no(cell);
                if (!yes) throw ParseError(number, "unparseable yes/no cell '" + std::string(cell) + "' in column '" + attr.name + "'");
                if (*yes) members.set(attr.first_item);
                continue;
            }
            if (cell.empty()) continue;
            std::string value;
            if (attr.kind == AttributeKind::numeric_binned) {
                auto v = text::parse_number(cell);
                if (!v) throw ParseError(number, "unparseable number '" + std::string(cell) + "' in column '" + attr.name + "'");
                try {
                    value = bin_numeric(*v, attr.bins);
                } catch (const Error& e) {
                    throw ParseError(number, std::string(e.what()) + " for column '" + attr.name + "'");
                }
            } else {
                value = std::string(cell);
            }
            auto item = catalog.find(attr.name, value);
            if (!item) throw ParseError(number, "value '" + value + "' not declared for '" + attr.name + "'");
            members.set(item->index);
        }
        if (binary_total > 0 && binary_empty == binary_total) {
            ++excluded;
            continue;
        }
        if (binary_empty > 0) throw ParseError(number, "record '" + id + "' has partially empty facility cells");
        transactions.push_back(Transaction{std::move(id), std::move(members)});
    }
    return TransactionDatabase(schema.catalog, std::move(transactions), excluded);
}

// CSV that parse_transactions reads back into an identical database. Excluded rows are
// emitted as blank records named excluded_<k>.
inline std::string write_transactions(const TransactionDatabase& db) {
    const auto& catalog = db.catalog();
    std::ostringstream out;
    out << "record_id";
    for (const auto& attr : catalog.attributes()) out << ',' << attr.name;
    out << '\n';
    for (const auto& t : db.transactions()) {
        out << t.record_id;
        for (const auto& attr : catalog.attributes()) {
            out << ',';
            if (attr.kind == AttributeKind::binary) {
                out << (t.members.test(attr.first_item) ? 'Y' : 'N');
                continue;
            }
            for (std::size_t k = 0; k < attr.values.size(); ++k) {
                if (!t.members.test(attr.first_item + k)) continue;
                if (attr.kind == AttributeKind::numeric_binned)
                    out << representative_value(attr.bins[k]);
                else
                    out << attr.values[k];
            }
        }
        out << '\n';
    }
    for (std::size_t k = 1; k <= db.excluded_count(); ++k) {
        out << "excluded_" << k;
        for (std::size_t a = 0; a < catalog.attributes().size(); ++a) out << ',';
        out << '\n';
    }
    return out.str();
}

// One "attribute=value" reference as written in rule files.
struct ItemRef {
    std::string attribute;
    std::string value;

    std::string label() const { return attribute + "=" + value; }
    friend auto operator<=>(const ItemRef&, const ItemRef&) = default;
};

inline std::optional<ItemRef> parse_item_ref(std::string_view s) {
    s = text::trim(s);
    auto eq = s.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    ItemRef ref{std::string(text::trim(s.substr(0, eq))), std::string(text::trim(s.substr(eq + 1)))};
    if (!detail::is_identifier(ref.attribute) || !detail::is_identifier(ref.value)) return std::nullopt;
    return ref;
}

inline std::vector<ItemRef> parse_antecedent(std::string_view s, std::size_t line) {
    std::vector<ItemRef> out;
    for (auto part : text::split(s, " AND ")) {
        auto ref = parse_item_ref(part);
        if (!ref) throw ParseError(line, "malformed antecedent '" + std::string(s) + "'");
        out.push_back(std::move(*ref));
    }
    return out;
}

// A published rule; percentages are in hundredths of a percent (97.95 -> 9795).
struct GoldenRule {
    int rule_id = 0;
    std::vector<ItemRef> antecedent;
    ItemRef consequent;
    std::uint64_t confidence_h = 0;
    std::uint64_t support_h = 0;
};

inline constexpr std::string_view kGoldenHeader = "rule_id,antecedent,consequent,confidence_pct,support_pct";

inline std::vector<GoldenRule> parse_golden_rules(std::string_view csv) {
    auto all_lines = text::lines(csv);
    std::vector<GoldenRule> rules;
    bool header_seen = false;
    for (const auto& [number, content] : all_lines) {
        if (text::trim(content).empty()) continue;
        if (!header_seen) {
            if (text::trim(content) != kGoldenHeader)
                throw ParseError(number, "expected header '" + std::string(kGoldenHeader) + "'");
            header_seen = true;
            continue;
        }
        auto cells = text::split(content, ',');
        if (cells.size() != 5) throw ParseError(number, "expected 5 fields");
        GoldenRule rule;
        auto id = text::parse_int<int>(cells[0]);
        if (!id) throw ParseError(number, "bad rule_id '" + std::string(cells[0]) + "'");
        rule.rule_id = *id;
        rule.antecedent = parse_antecedent(cells[1], number);
        auto consequent = parse_item_ref(cells[2]);
        if (!consequent) throw ParseError(number, "malformed consequent '" + std::string(cells[2]) + "'");
        rule.consequent = std::move(*consequent);
        auto conf = text::parse_hundredths(cells[3]);
        auto supp = text::parse_hundredths(cells[4]);
        if (!conf || !supp) throw ParseError(number, "percentages need at most two decimals");
        if (*conf < 9000 || *conf > 10000) throw ParseError(number, "confidence must be in [90, 100]");
        if (*supp == 0 || *supp > 10000) throw ParseError(number, "support must be in (0, 100]");
        rule.confidence_h = *conf;
        rule.support_h = *supp;
        rules.push_back(std::move(rule));
    }
    if (!header_seen) throw ParseError(0, "missing header row");
    return rules;
}

}  // namespace rulemine
