#include "nrpm/rational.hpp"

#include <charconv>
#include <numeric>

#include "nrpm/error.hpp"

namespace nrpm {

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
    if (denominator == 0) {
        throw InvalidArgument("rational with zero denominator");
    }
    if (denominator < 0) {
        numerator = -numerator;
        denominator = -denominator;
    }
    const std::int64_t g = std::gcd(numerator, denominator);
    num_ = numerator / g;
    den_ = denominator / g;
}

std::string Rational::to_string() const {
    if (den_ == 1) {
        return std::to_string(num_);
    }
    return std::to_string(num_) + "/" + std::to_string(den_);
}

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
    std::int64_t value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw ParseError("invalid rational '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        return {parse_int(text, text), 1};
    }
    const std::int64_t den = parse_int(text.substr(slash + 1), text);
    if (den == 0) {
        throw ParseError("invalid rational '" + std::string(text) + "': zero denominator");
    }
    return {parse_int(text.substr(0, slash), text), den};
}

Rational operator+(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
}

Rational operator-(const Rational& a, const Rational& b) {
    return a + (-b);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
}

Rational abs(const Rational& r) {
    return r.numerator() < 0 ? -r : r;
}

}  // namespace nrpm
