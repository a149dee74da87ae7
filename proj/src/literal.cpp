#include "bun/literal.hpp"

#include <algorithm>
#include <cmath>

namespace bun {

namespace {

__int128 pow10_128(int n) {
    __int128 r = 1;
    while (n-- > 0) r *= 10;
    return r;
}

}  // namespace

Decimal::Decimal(std::int64_t units, std::int32_t scale) : units_(units), scale_(scale) {
    if (scale < 0 || scale > 18) throw Error("decimal scale out of range: " + std::to_string(scale));
    normalize();
}

void Decimal::normalize() {
    if (units_ == 0) {
        scale_ = 0;
        return;
    }
    while (scale_ > 0 && units_ % 10 == 0) {
        units_ /= 10;
        --scale_;
    }
}

Decimal Decimal::parse(std::string_view text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        neg = text[i] == '-';
        ++i;
    }
    std::uint64_t mag = 0;
    int digits = 0;
    int scale = 0;
    bool seen_dot = false;
    bool any_digit = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (seen_dot) throw Error("malformed number: " + std::string(text));
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') throw Error("malformed number: " + std::string(text));
        any_digit = true;
        if (mag > (0x7fffffffffffffffULL - static_cast<std::uint64_t>(c - '0')) / 10)
            throw Error("number out of range: " + std::string(text));
        mag = mag * 10 + static_cast<std::uint64_t>(c - '0');
        ++digits;
        if (seen_dot) ++scale;
    }
    if (!any_digit || (seen_dot && scale == 0)) throw Error("malformed number: " + std::string(text));
    if (digits > 18 || scale > 18) throw Error("number has too many digits: " + std::string(text));
    auto units = static_cast<std::int64_t>(mag);
    return Decimal(neg ? -units : units, scale);
}

Decimal Decimal::from_double(double v, int frac_digits) {
    if (!std::isfinite(v)) throw Error("non-finite value cannot become a decimal");
    frac_digits = std::clamp(frac_digits, 0, 12);
    double scaled = v * std::pow(10.0, frac_digits);
    if (std::fabs(scaled) > 9.0e17) throw Error("value out of decimal range");
    return Decimal(static_cast<std::int64_t>(std::llround(scaled)), frac_digits);
}

int Decimal::compare(const Decimal& rhs) const {
    std::int32_t s = std::max(scale_, rhs.scale_);
    __int128 a = static_cast<__int128>(units_) * pow10_128(s - scale_);
    __int128 b = static_cast<__int128>(rhs.units_) * pow10_128(s - rhs.scale_);
    if (a < b) return -1;
    if (a > b) return 1;
    return 0;
}

double Decimal::to_double() const {
    return static_cast<double>(units_) * std::pow(10.0, -scale_);
}

std::string Decimal::str() const {
    bool neg = units_ < 0;
    std::uint64_t mag = neg ? 0ULL - static_cast<std::uint64_t>(units_)
                            : static_cast<std::uint64_t>(units_);
    std::string digits = std::to_string(mag);
    std::string out;
    if (scale_ == 0) {
        out = digits + ".0";
    } else {
        if (static_cast<int>(digits.size()) <= scale_)
            digits.insert(0, static_cast<std::size_t>(scale_) + 1 - digits.size(), '0');
        out = digits.substr(0, digits.size() - static_cast<std::size_t>(scale_)) + "." +
              digits.substr(digits.size() - static_cast<std::size_t>(scale_));
    }
    return neg ? "-" + out : out;
}

const char* to_string(LiteralKind k) {
    switch (k) {
        case LiteralKind::String: return "string";
        case LiteralKind::Int: return "integer";
        case LiteralKind::Decimal: return "decimal";
        case LiteralKind::Bool: return "boolean";
    }
    return "?";
}

Literal Literal::of_string(std::string v) {
    Literal l;
    l.kind_ = LiteralKind::String;
    l.str_ = std::move(v);
    return l;
}

Literal Literal::of_int(std::int64_t v) {
    Literal l;
    l.kind_ = LiteralKind::Int;
    l.int_ = v;
    return l;
}

Literal Literal::of_decimal(Decimal v) {
    Literal l;
    l.kind_ = LiteralKind::Decimal;
    l.dec_ = v;
    return l;
}

Literal Literal::of_bool(bool v) {
    Literal l;
    l.kind_ = LiteralKind::Bool;
    l.bool_ = v;
    return l;
}

const std::string& Literal::as_string() const {
    if (kind_ != LiteralKind::String) throw Error("literal is not a string");
    return str_;
}

std::int64_t Literal::as_int() const {
    if (kind_ != LiteralKind::Int) throw Error("literal is not an integer");
    return int_;
}

const Decimal& Literal::as_decimal() const {
    if (kind_ != LiteralKind::Decimal) throw Error("literal is not a decimal");
    return dec_;
}

bool Literal::as_bool() const {
    if (kind_ != LiteralKind::Bool) throw Error("literal is not a boolean");
    return bool_;
}

Decimal Literal::numeric() const {
    if (kind_ == LiteralKind::Int) return Decimal::from_int(int_);
    if (kind_ == LiteralKind::Decimal) return dec_;
    throw Error("literal is not numeric");
}

std::optional<bool> Literal::equals(const Literal& rhs) const {
    if (is_numeric() && rhs.is_numeric()) return numeric().compare(rhs.numeric()) == 0;
    if (kind_ != rhs.kind_) return std::nullopt;
    switch (kind_) {
        case LiteralKind::String: return str_ == rhs.str_;
        case LiteralKind::Bool: return bool_ == rhs.bool_;
        default: return std::nullopt;  // unreachable
    }
}

std::optional<int> Literal::order(const Literal& rhs) const {
    if (is_numeric() && rhs.is_numeric()) return numeric().compare(rhs.numeric());
    if (kind_ == LiteralKind::String && rhs.kind_ == LiteralKind::String) {
        int c = str_.compare(rhs.str_);
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    return std::nullopt;  // booleans and mixed kinds are unordered
}

std::string Literal::str() const {
    switch (kind_) {
        case LiteralKind::String: return quote_string(str_);
        case LiteralKind::Int: return std::to_string(int_);
        case LiteralKind::Decimal: return dec_.str();
        case LiteralKind::Bool: return bool_ ? "true" : "false";
    }
    return "?";
}

bool Literal::operator==(const Literal& rhs) const {
    if (kind_ != rhs.kind_) return false;
    switch (kind_) {
        case LiteralKind::String: return str_ == rhs.str_;
        case LiteralKind::Int: return int_ == rhs.int_;
        case LiteralKind::Decimal:
            return dec_.units() == rhs.dec_.units() && dec_.scale() == rhs.dec_.scale();
        case LiteralKind::Bool: return bool_ == rhs.bool_;
    }
    return false;
}

bool Literal::operator<(const Literal& rhs) const {
    if (kind_ != rhs.kind_) return static_cast<int>(kind_) < static_cast<int>(rhs.kind_);
    switch (kind_) {
        case LiteralKind::String: return str_ < rhs.str_;
        case LiteralKind::Int: return int_ < rhs.int_;
        case LiteralKind::Decimal: return dec_ < rhs.dec_;
        case LiteralKind::Bool: return bool_ < rhs.bool_;
    }
    return false;
}

std::string quote_string(std::string_view raw) {
    std::string out;
    out.reserve(raw.size() + 2);
    out.push_back('"');
    for (char c : raw) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

namespace {

bool head_ok(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool tail_ok(char c) { return head_ok(c) || (c >= '0' && c <= '9'); }

}  // namespace

bool is_valid_name(std::string_view s) {
    if (s.empty() || !head_ok(s[0])) return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) { return tail_ok(c); });
}

bool is_valid_id(std::string_view s) {
    if (s.empty() || !head_ok(s[0])) return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) { return tail_ok(c) || c == '.'; });
}

}  // namespace bun
