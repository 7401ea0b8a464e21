#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nrpm/dataset.hpp"
#include "nrpm/rational.hpp"

namespace nrpm {

/// Monomial exponent i and log2 exponent j of one parameter: x^i * log2(x)^j.
struct ExponentPair {
    Rational i;
    int j = 0;

    [[nodiscard]] bool is_zero() const { return i.is_zero() && j == 0; }
    friend bool operator==(const ExponentPair&, const ExponentPair&) = default;
    friend std::strong_ordering operator<=>(const ExponentPair& a, const ExponentPair& b) {
        if (auto c = a.i <=> b.i; c != 0) {
            return c;
        }
        return a.j <=> b.j;
    }
};

/// Per-parameter exponents, aligned with the parameter names.
using Exponents = std::vector<ExponentPair>;

/// Product over parameters of x^i * log2(x)^j, optionally multiplied by
/// (p-1)/p for the parameter `ranks_factor`. All-zero exponents without a
/// factor is the constant basis 1.
struct BasisFunction {
    Exponents exponents;
    std::optional<std::size_t> ranks_factor;

    static BasisFunction constant(std::size_t dimension);

    [[nodiscard]] bool is_constant() const;
    [[nodiscard]] double evaluate(const Coordinate& at) const;

    friend bool operator==(const BasisFunction&, const BasisFunction&) = default;
    /// Signature order: exponents lexicographically, then the factor.
    friend std::strong_ordering operator<=>(const BasisFunction& a, const BasisFunction& b);
};

struct Term {
    double coefficient = 0.0;
    BasisFunction basis;

    friend bool operator==(const Term&, const Term&) = default;
};

/// c0 + sum_k c_k * basis_k(x).
class PmnfModel {
public:
    PmnfModel() = default;
    /// Throws ValidationError on dimension mismatch, a constant-valued term,
    /// or two terms with the same basis.
    PmnfModel(std::vector<std::string> names, double constant, std::vector<Term> terms = {});

    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] std::size_t dimension() const { return names_.size(); }
    [[nodiscard]] double constant() const { return constant_; }
    [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }

    friend bool operator==(const PmnfModel&, const PmnfModel&) = default;

private:
    std::vector<std::string> names_;
    double constant_ = 0.0;
    std::vector<Term> terms_;
};

/// Role of a skeleton coefficient. alpha/beta/gamma are the latency, per-byte
/// transfer and per-byte computation slots of the MPI cost models.
enum class CoefficientLabel { generic, alpha, beta, gamma };

/// Coefficient-free model structure. basis()[0] is always the constant.
class Skeleton {
public:
    Skeleton() = default;
    /// Throws ValidationError unless basis[0] is the only constant basis, all
    /// bases are pairwise distinct and labels align with basis.
    Skeleton(std::vector<std::string> names, std::vector<BasisFunction> basis,
             std::vector<CoefficientLabel> labels);

    /// Constant basis followed by `extra`, dropping constants and repeated
    /// bases (the first occurrence keeps its label).
    static Skeleton with_constant(std::vector<std::string> names,
                                  std::vector<std::pair<BasisFunction, CoefficientLabel>> extra);

    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] std::size_t dimension() const { return names_.size(); }
    [[nodiscard]] const std::vector<BasisFunction>& basis() const { return basis_; }
    [[nodiscard]] const std::vector<CoefficientLabel>& labels() const { return labels_; }
    [[nodiscard]] std::size_t size() const { return basis_.size(); }

    friend bool operator==(const Skeleton&, const Skeleton&) = default;

private:
    std::vector<std::string> names_;
    std::vector<BasisFunction> basis_;
    std::vector<CoefficientLabel> labels_;
};

struct ExponentSets {
    std::vector<Rational> monomial;
    std::vector<int> log;
};

/// The 20 monomial exponents {0, 1/4, ..., 3} and log exponents {0, 1, 2}.
ExponentSets default_exponent_sets();

double evaluate(const PmnfModel& model, const Coordinate& at);
std::vector<double> evaluate_basis(const Skeleton& skel, const Coordinate& at);

/// Per parameter: the largest monomial exponent over all non-constant terms
/// (0 if none), paired with the largest log exponent among the terms that
/// attain it.
Exponents leading_exponents(const PmnfModel& model);
Exponents leading_exponents(const Skeleton& skel);
Exponents leading_exponents(std::span<const BasisFunction> basis, std::size_t dimension);

/// Structure of a model: constant plus one basis per term in signature
/// order, generic labels.
Skeleton skeleton_of(const PmnfModel& model);
/// Binds coefficients (aligned with skel.basis(), constant first) to a skeleton.
PmnfModel bind_coefficients(const Skeleton& skel, std::span<const double> coefficients);

/// Canonical text, e.g. "3 + 0.5 * n^(3/4) * log2(p)". Terms are ordered by
/// basis signature; coefficients use the shortest round-trip decimal form.
std::string render(const PmnfModel& model);
/// e.g. "c0 + α * log2(p) + β * n * p"
std::string render(const Skeleton& skel);
std::string render_exponent(const ExponentPair& e, std::string_view name);
std::string format_number(double value);

/// Parses the canonical grammar (and products/sums written in any order) over
/// the given parameter names. Numeric factors multiply the coefficient
/// (default 1); repeated bases are summed. Throws ParseError.
PmnfModel parse_model(std::string_view text, const std::vector<std::string>& names);

}  // namespace nrpm
