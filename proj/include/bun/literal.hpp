#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bun {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Exact base-10 number: units * 10^-scale, kept normalized (scale == 0 or
// units not divisible by 10). Comparisons never round through binary floats,
// so rule verdicts are identical on every platform.
class Decimal {
public:
    Decimal() = default;
    Decimal(std::int64_t units, std::int32_t scale);

    static Decimal from_int(std::int64_t v) { return Decimal(v, 0); }
    static Decimal parse(std::string_view text);
    // Rounds half away from zero at frac_digits fractional digits.
    static Decimal from_double(double v, int frac_digits = 6);

    std::int64_t units() const { return units_; }
    std::int32_t scale() const { return scale_; }

    int compare(const Decimal& rhs) const;  // -1, 0, +1
    double to_double() const;
    std::string str() const;                // canonical, always carries a '.'

    bool operator==(const Decimal& rhs) const { return compare(rhs) == 0; }
    bool operator!=(const Decimal& rhs) const { return compare(rhs) != 0; }
    bool operator<(const Decimal& rhs) const { return compare(rhs) < 0; }

private:
    void normalize();

    std::int64_t units_ = 0;
    std::int32_t scale_ = 0;
};

enum class LiteralKind { String, Int, Decimal, Bool };
const char* to_string(LiteralKind k);

// One attribute value. The value space is deliberately flat: strings, 64-bit
// integers, exact decimals, booleans. No nesting.
class Literal {
public:
    Literal() : kind_(LiteralKind::Int) {}

    static Literal of_string(std::string v);
    static Literal of_int(std::int64_t v);
    static Literal of_decimal(Decimal v);
    static Literal of_bool(bool v);

    LiteralKind kind() const { return kind_; }
    const std::string& as_string() const;
    std::int64_t as_int() const;
    const Decimal& as_decimal() const;
    bool as_bool() const;

    bool is_numeric() const {
        return kind_ == LiteralKind::Int || kind_ == LiteralKind::Decimal;
    }
    Decimal numeric() const;  // int widened exactly

    // Semantic comparison used by the predicate evaluator. nullopt means the
    // kinds are not comparable (string vs number, bool vs anything else);
    // atoms over incomparable values evaluate false.
    std::optional<bool> equals(const Literal& rhs) const;
    std::optional<int> order(const Literal& rhs) const;

    // Canonical text form; round-trips through every parser in the project.
    std::string str() const;

    bool operator==(const Literal& rhs) const;  // structural
    bool operator!=(const Literal& rhs) const { return !(*this == rhs); }
    bool operator<(const Literal& rhs) const;   // total order for containers

private:
    LiteralKind kind_;
    std::string str_;
    std::int64_t int_ = 0;
    Decimal dec_;
    bool bool_ = false;
};

std::string quote_string(std::string_view raw);

using AttrMap = std::map<std::string, Literal>;
using NameSet = std::set<std::string>;

// Operation names: [A-Za-z_][A-Za-z0-9_]*
bool is_valid_name(std::string_view s);
// Identifiers, roles, tags, attribute paths: like names but '.' allowed.
bool is_valid_id(std::string_view s);

}  // namespace bun
