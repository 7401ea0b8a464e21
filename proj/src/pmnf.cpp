#include "nrpm/pmnf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "nrpm/error.hpp"

namespace nrpm {

BasisFunction BasisFunction::constant(std::size_t dimension) {
    return BasisFunction{Exponents(dimension), std::nullopt};
}

bool BasisFunction::is_constant() const {
    return !ranks_factor && std::all_of(exponents.begin(), exponents.end(),
                                        [](const ExponentPair& e) { return e.is_zero(); });
}

double BasisFunction::evaluate(const Coordinate& at) const {
    if (at.size() != exponents.size()) {
        throw InvalidArgument("coordinate has " + std::to_string(at.size()) + " components, expected " +
                              std::to_string(exponents.size()));
    }
    double value = 1.0;
    for (std::size_t l = 0; l < exponents.size(); ++l) {
        const auto& e = exponents[l];
        if (!e.i.is_zero()) {
            value *= std::pow(at[l], e.i.to_double());
        }
        if (e.j != 0) {
            value *= std::pow(std::log2(at[l]), e.j);
        }
    }
    if (ranks_factor) {
        const double p = at[*ranks_factor];
        value *= (p - 1.0) / p;
    }
    return value;
}

std::strong_ordering operator<=>(const BasisFunction& a, const BasisFunction& b) {
    if (auto c = std::lexicographical_compare_three_way(a.exponents.begin(), a.exponents.end(),
                                                        b.exponents.begin(), b.exponents.end());
        c != 0) {
        return c;
    }
    return a.ranks_factor <=> b.ranks_factor;
}

namespace {

void check_basis_dimension(const BasisFunction& b, std::size_t dimension) {
    if (b.exponents.size() != dimension) {
        throw ValidationError("basis function dimension does not match the parameter count");
    }
    if (b.ranks_factor && *b.ranks_factor >= dimension) {
        throw ValidationError("(p-1)/p factor refers to a missing parameter");
    }
    for (const auto& e : b.exponents) {
        if (e.j < 0) {
            throw ValidationError("negative log exponent");
        }
    }
}

}  // namespace

PmnfModel::PmnfModel(std::vector<std::string> names, double constant, std::vector<Term> terms)
    : names_(std::move(names)), constant_(constant), terms_(std::move(terms)) {
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        check_basis_dimension(terms_[k].basis, names_.size());
        if (terms_[k].basis.is_constant()) {
            throw ValidationError("model term without any non-zero exponent");
        }
        for (std::size_t q = 0; q < k; ++q) {
            if (terms_[q].basis == terms_[k].basis) {
                throw ValidationError("two model terms share the same exponent signature");
            }
        }
    }
}

Skeleton::Skeleton(std::vector<std::string> names, std::vector<BasisFunction> basis,
                   std::vector<CoefficientLabel> labels)
    : names_(std::move(names)), basis_(std::move(basis)), labels_(std::move(labels)) {
    if (basis_.empty() || !basis_.front().is_constant()) {
        throw ValidationError("skeleton must start with the constant basis");
    }
    if (labels_.size() != basis_.size()) {
        throw ValidationError("skeleton labels do not align with its basis");
    }
    for (std::size_t k = 0; k < basis_.size(); ++k) {
        check_basis_dimension(basis_[k], names_.size());
        if (k > 0 && basis_[k].is_constant()) {
            throw ValidationError("skeleton holds the constant basis more than once");
        }
        for (std::size_t q = 0; q < k; ++q) {
            if (basis_[q] == basis_[k]) {
                throw ValidationError("skeleton holds a repeated basis function");
            }
        }
    }
}

Skeleton Skeleton::with_constant(std::vector<std::string> names,
                                 std::vector<std::pair<BasisFunction, CoefficientLabel>> extra) {
    std::vector<BasisFunction> basis{BasisFunction::constant(names.size())};
    std::vector<CoefficientLabel> labels{CoefficientLabel::generic};
    for (auto& [b, label] : extra) {
        if (b.is_constant() || std::find(basis.begin(), basis.end(), b) != basis.end()) {
            continue;
        }
        basis.push_back(std::move(b));
        labels.push_back(label);
    }
    return Skeleton(std::move(names), std::move(basis), std::move(labels));
}

ExponentSets default_exponent_sets() {
    return ExponentSets{
        {Rational(0), Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(2, 3), Rational(3, 4),
         Rational(4, 5), Rational(1), Rational(5, 4), Rational(4, 3), Rational(3, 2), Rational(5, 3),
         Rational(7, 4), Rational(2), Rational(9, 4), Rational(7, 3), Rational(5, 2), Rational(8, 3),
         Rational(11, 4), Rational(3)},
        {0, 1, 2},
    };
}

double evaluate(const PmnfModel& model, const Coordinate& at) {
    if (at.size() != model.dimension()) {
        throw InvalidArgument("coordinate dimension does not match the model");
    }
    double value = model.constant();
    for (const auto& t : model.terms()) {
        value += t.coefficient * t.basis.evaluate(at);
    }
    return value;
}

std::vector<double> evaluate_basis(const Skeleton& skel, const Coordinate& at) {
    if (at.size() != skel.dimension()) {
        throw InvalidArgument("coordinate dimension does not match the skeleton");
    }
    std::vector<double> row;
    row.reserve(skel.size());
    for (const auto& b : skel.basis()) {
        row.push_back(b.evaluate(at));
    }
    return row;
}

Exponents leading_exponents(std::span<const BasisFunction> basis, std::size_t dimension) {
    Exponents lead(dimension);
    for (std::size_t l = 0; l < dimension; ++l) {
        bool any = false;
        for (const auto& b : basis) {
            if (b.is_constant()) {
                continue;
            }
            const auto& e = b.exponents[l];
            if (!any || e.i > lead[l].i || (e.i == lead[l].i && e.j > lead[l].j)) {
                lead[l] = e;
                any = true;
            }
        }
    }
    return lead;
}

Exponents leading_exponents(const PmnfModel& model) {
    std::vector<BasisFunction> basis;
    basis.reserve(model.terms().size());
    for (const auto& t : model.terms()) {
        basis.push_back(t.basis);
    }
    return leading_exponents(basis, model.dimension());
}

Exponents leading_exponents(const Skeleton& skel) {
    return leading_exponents(skel.basis(), skel.dimension());
}

Skeleton skeleton_of(const PmnfModel& model) {
    std::vector<std::pair<BasisFunction, CoefficientLabel>> extra;
    for (const auto& t : model.terms()) {
        extra.emplace_back(t.basis, CoefficientLabel::generic);
    }
    // canonical order, so equal structures compare equal
    std::sort(extra.begin(), extra.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return Skeleton::with_constant(model.names(), std::move(extra));
}

PmnfModel bind_coefficients(const Skeleton& skel, std::span<const double> coefficients) {
    if (coefficients.size() != skel.size()) {
        throw InvalidArgument("coefficient count does not match the skeleton");
    }
    std::vector<Term> terms;
    for (std::size_t k = 1; k < skel.size(); ++k) {
        terms.push_back(Term{coefficients[k], skel.basis()[k]});
    }
    return PmnfModel(skel.names(), coefficients[0], std::move(terms));
}

// ---------------------------------------------------------------------------
// Rendering

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string render_exponent(const ExponentPair& e, std::string_view name) {
    std::string out;
    if (!e.i.is_zero()) {
        out += name;
        if (e.i == Rational(1)) {
            // bare name
        } else if (e.i.is_integer() && e.i.numerator() > 1) {
            out += "^" + e.i.to_string();
        } else {
            out += "^(" + e.i.to_string() + ")";
        }
    }
    if (e.j != 0) {
        if (!out.empty()) {
            out += " * ";
        }
        out += "log2(" + std::string(name) + ")";
        if (e.j != 1) {
            out += "^" + std::to_string(e.j);
        }
    }
    return out;
}

namespace {

std::string render_basis(const BasisFunction& b, const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t l = 0; l < b.exponents.size(); ++l) {
        const auto piece = render_exponent(b.exponents[l], names[l]);
        if (piece.empty()) {
            continue;
        }
        if (!out.empty()) {
            out += " * ";
        }
        out += piece;
    }
    if (b.ranks_factor) {
        const auto& p = names[*b.ranks_factor];
        if (!out.empty()) {
            out += " * ";
        }
        out += "(" + p + "-1)/" + p;
    }
    return out;
}

}  // namespace

std::string render(const PmnfModel& model) {
    std::vector<const Term*> order;
    for (const auto& t : model.terms()) {
        order.push_back(&t);
    }
    std::sort(order.begin(), order.end(), [](const Term* a, const Term* b) { return a->basis < b->basis; });

    std::string out;
    auto append = [&](double coefficient, const std::string& body) {
        if (out.empty()) {
            out = format_number(coefficient);
        } else {
            out += coefficient < 0 || (coefficient == 0 && std::signbit(coefficient)) ? " - " : " + ";
            out += format_number(std::fabs(coefficient));
        }
        if (!body.empty()) {
            out += " * " + body;
        }
    };
    if (model.constant() != 0.0 || model.terms().empty()) {
        append(model.constant(), "");
    }
    for (const Term* t : order) {
        append(t->coefficient, render_basis(t->basis, model.names()));
    }
    return out;
}

std::string render(const Skeleton& skel) {
    std::map<CoefficientLabel, int> counts;
    for (auto label : skel.labels()) {
        ++counts[label];
    }
    std::map<CoefficientLabel, int> seen;
    std::string out = "c0";
    int generic = 0;
    for (std::size_t k = 1; k < skel.size(); ++k) {
        const auto label = skel.labels()[k];
        std::string symbol;
        switch (label) {
            case CoefficientLabel::generic: symbol = "c" + std::to_string(++generic); break;
            case CoefficientLabel::alpha: symbol = "α"; break;
            case CoefficientLabel::beta: symbol = "β"; break;
            case CoefficientLabel::gamma: symbol = "γ"; break;
        }
        if (label != CoefficientLabel::generic && counts[label] > 1) {
            symbol += std::to_string(++seen[label]);
        }
        out += " + " + symbol + " * " + render_basis(skel.basis()[k], skel.names());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { number, ident, star, plus, minus, caret, lparen, rparen, slash, end };

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
};

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t k = 0;
    while (k < s.size()) {
        const char c = s[k];
        if (c == ' ' || c == '\t' || c == '\n') {
            ++k;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t end = k;
            while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) {
                ++end;
            }
            if (end < s.size() && (s[end] == 'e' || s[end] == 'E')) {
                std::size_t e = end + 1;
                if (e < s.size() && (s[e] == '+' || s[e] == '-')) {
                    ++e;
                }
                if (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) {
                    end = e;
                    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) {
                        ++end;
                    }
                }
            }
            Token t{Tok::number, std::string(s.substr(k, end - k))};
            auto [ptr, ec] = std::from_chars(s.data() + k, s.data() + end, t.number);
            if (ec != std::errc{} || ptr != s.data() + end) {
                throw ParseError("invalid number '" + t.text + "'");
            }
            out.push_back(std::move(t));
            k = end;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = k;
            while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_')) {
                ++end;
            }
            out.push_back({Tok::ident, std::string(s.substr(k, end - k))});
            k = end;
            continue;
        }
        Tok kind;
        switch (c) {
            case '*': kind = Tok::star; break;
            case '+': kind = Tok::plus; break;
            case '-': kind = Tok::minus; break;
            case '^': kind = Tok::caret; break;
            case '(': kind = Tok::lparen; break;
            case ')': kind = Tok::rparen; break;
            case '/': kind = Tok::slash; break;
            default: throw ParseError(std::string("unexpected character '") + c + "' in model");
        }
        out.push_back({kind, std::string(1, c)});
        ++k;
    }
    out.push_back({Tok::end, ""});
    return out;
}

class ModelParser {
public:
    ModelParser(std::string_view text, const std::vector<std::string>& names)
        : tokens_(tokenize(text)), names_(names) {}

    PmnfModel parse() {
        double constant = 0.0;
        std::vector<Term> terms;
        bool negative = false;
        if (peek().kind == Tok::minus) {
            negative = true;
            next();
        }
        while (true) {
            auto [coefficient, basis] = parse_term();
            if (negative) {
                coefficient = -coefficient;
            }
            if (basis.is_constant()) {
                constant += coefficient;
            } else {
                auto it = std::find_if(terms.begin(), terms.end(),
                                       [&](const Term& t) { return t.basis == basis; });
                if (it == terms.end()) {
                    terms.push_back(Term{coefficient, std::move(basis)});
                } else {
                    it->coefficient += coefficient;
                }
            }
            if (peek().kind == Tok::plus || peek().kind == Tok::minus) {
                negative = next().kind == Tok::minus;
                continue;
            }
            break;
        }
        expect(Tok::end, "end of model");
        return PmnfModel(names_, constant, std::move(terms));
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_++]; }

    const Token& expect(Tok kind, const char* what) {
        if (peek().kind != kind) {
            throw ParseError(std::string("model: expected ") + what + " near '" + peek().text + "'");
        }
        return next();
    }

    std::size_t param(const std::string& name) const {
        for (std::size_t l = 0; l < names_.size(); ++l) {
            if (names_[l] == name) {
                return l;
            }
        }
        throw ParseError("model: unknown parameter '" + name + "'");
    }

    std::int64_t integer() {
        bool neg = false;
        if (peek().kind == Tok::minus) {
            neg = true;
            next();
        }
        const auto& t = expect(Tok::number, "integer");
        if (t.number != std::floor(t.number) || t.text.find_first_of(".eE") != std::string::npos) {
            throw ParseError("model: expected an integer, got '" + t.text + "'");
        }
        const auto v = static_cast<std::int64_t>(t.number);
        return neg ? -v : v;
    }

    Rational exponent() {
        if (peek().kind == Tok::lparen) {
            next();
            const std::int64_t num = integer();
            std::int64_t den = 1;
            if (peek().kind == Tok::slash) {
                next();
                den = integer();
                if (den == 0) {
                    throw ParseError("model: zero denominator in exponent");
                }
            }
            expect(Tok::rparen, "')'");
            return Rational(num, den);
        }
        return Rational(integer());
    }

    std::pair<double, BasisFunction> parse_term() {
        double coefficient = 1.0;
        BasisFunction basis = BasisFunction::constant(names_.size());
        while (true) {
            const Token& t = next();
            if (t.kind == Tok::number) {
                coefficient *= t.number;
            } else if (t.kind == Tok::ident && t.text == "log2" && peek().kind == Tok::lparen) {
                next();
                const std::size_t l = param(expect(Tok::ident, "parameter name").text);
                expect(Tok::rparen, "')'");
                int j = 1;
                if (peek().kind == Tok::caret) {
                    next();
                    j = static_cast<int>(integer());
                    if (j < 0) {
                        throw ParseError("model: negative log exponent");
                    }
                }
                basis.exponents[l].j += j;
            } else if (t.kind == Tok::ident) {
                const std::size_t l = param(t.text);
                Rational i(1);
                if (peek().kind == Tok::caret) {
                    next();
                    i = exponent();
                }
                basis.exponents[l].i = basis.exponents[l].i + i;
            } else if (t.kind == Tok::lparen) {
                // (p-1)/p
                const std::string p = expect(Tok::ident, "parameter name").text;
                expect(Tok::minus, "'-'");
                if (integer() != 1) {
                    throw ParseError("model: only the (p-1)/p factor is supported");
                }
                expect(Tok::rparen, "')'");
                expect(Tok::slash, "'/'");
                if (expect(Tok::ident, "parameter name").text != p) {
                    throw ParseError("model: only the (p-1)/p factor is supported");
                }
                if (basis.ranks_factor) {
                    throw ParseError("model: repeated (p-1)/p factor");
                }
                basis.ranks_factor = param(p);
            } else {
                throw ParseError("model: unexpected '" + t.text + "'");
            }
            if (peek().kind != Tok::star) {
                break;
            }
            next();
        }
        return {coefficient, std::move(basis)};
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    const std::vector<std::string>& names_;
};

}  // namespace

PmnfModel parse_model(std::string_view text, const std::vector<std::string>& names) {
    return ModelParser(text, names).parse();
}

}  // namespace nrpm
