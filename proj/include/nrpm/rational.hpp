#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace nrpm {

/// Exact rational number with a positive denominator, always stored in
/// lowest terms. Used for monomial exponents so that hypothesis identity and
/// exponent deviations are exact.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t numerator, std::int64_t denominator = 1);

    [[nodiscard]] std::int64_t numerator() const { return num_; }
    [[nodiscard]] std::int64_t denominator() const { return den_; }

    [[nodiscard]] double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    [[nodiscard]] bool is_zero() const { return num_ == 0; }
    [[nodiscard]] bool is_integer() const { return den_ == 1; }

    /// "3/4", "2", "-1/3", "0"
    [[nodiscard]] std::string to_string() const;

    /// Accepts "a", "a/b" and "-a/b". Throws ParseError on malformed input.
    static Rational parse(std::string_view text);

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a) { return {-a.num_, a.den_}; }
    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

Rational abs(const Rational& r);

}  // namespace nrpm
