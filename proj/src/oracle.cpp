// Brute-force reference search. Deliberately shares no fitting or scoring
// code with modeler.cpp: every fold is refitted explicitly with an SVD
// solver, lines are found by grouping coordinates, and the candidate family
// is enumerated from scratch.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "nrpm/error.hpp"
#include "nrpm/modeler.hpp"

namespace nrpm {

namespace {

constexpr std::size_t kMaxFamily = 7 * 60 * 60;

Eigen::VectorXd svd_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    Eigen::VectorXd norms(a.cols());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double n = a.col(c).norm();
        norms(c) = n > 0.0 ? n : 1.0;
    }
    const Eigen::MatrixXd scaled = a * norms.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.rank() == a.cols()) {
        return svd.solve(y).cwiseQuotient(norms);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> raw(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return raw.solve(y);
}

struct Row {
    std::vector<double> x;
    double y;
};

double basis_value(const std::vector<std::pair<std::size_t, ExponentPair>>& factors, const std::vector<double>& x) {
    double v = 1.0;
    for (const auto& [l, e] : factors) {
        v *= std::pow(x[l], e.i.to_double()) * std::pow(std::log2(x[l]), e.j);
    }
    return v;
}

using Factors = std::vector<std::pair<std::size_t, ExponentPair>>;

// Leave-one-out score with explicit refits.
double naive_cv(const std::vector<Factors>& basis, const std::vector<Row>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(basis.size() + 1);
    double total = 0.0;
    for (Eigen::Index out = 0; out < n; ++out) {
        Eigen::MatrixXd a(n - 1, k);
        Eigen::VectorXd y(n - 1);
        Eigen::Index w = 0;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == out) {
                continue;
            }
            a(w, 0) = 1.0;
            for (Eigen::Index c = 1; c < k; ++c) {
                a(w, c) = basis_value(basis[static_cast<std::size_t>(c - 1)], rows[static_cast<std::size_t>(r)].x);
            }
            y(w) = rows[static_cast<std::size_t>(r)].y;
            ++w;
        }
        const Eigen::VectorXd coef = svd_least_squares(a, y);
        const auto& held = rows[static_cast<std::size_t>(out)];
        double prediction = coef(0);
        for (Eigen::Index c = 1; c < k; ++c) {
            prediction += coef(c) * basis_value(basis[static_cast<std::size_t>(c - 1)], held.x);
        }
        const double denom = std::fabs(prediction) + std::fabs(held.y);
        total += denom == 0.0 ? 0.0 : std::fabs(prediction - held.y) / denom;
    }
    return total / static_cast<double>(n);
}

std::vector<double> naive_fit(const std::vector<Factors>& basis, const std::vector<Row>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(basis.size() + 1);
    Eigen::MatrixXd a(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        a(r, 0) = 1.0;
        for (Eigen::Index c = 1; c < k; ++c) {
            a(r, c) = basis_value(basis[static_cast<std::size_t>(c - 1)], rows[static_cast<std::size_t>(r)].x);
        }
        y(r) = rows[static_cast<std::size_t>(r)].y;
    }
    const Eigen::VectorXd coef = svd_least_squares(a, y);
    return {coef.begin(), coef.end()};
}

// Candidate in canonical form: full per-parameter exponent vectors, sorted.
using Structure = std::vector<Exponents>;

Structure canonical(const std::vector<Factors>& basis, std::size_t m) {
    Structure s;
    for (const auto& f : basis) {
        Exponents e(m);
        for (const auto& [l, pair] : f) {
            e[l] = pair;
        }
        s.push_back(e);
    }
    std::sort(s.begin(), s.end());
    return s;
}

// (basis count, sum i, sum j, sorted signature), the documented tie order.
bool oracle_less(const Structure& a, const Structure& b) {
    if (a.size() != b.size()) {
        return a.size() < b.size();
    }
    auto sums = [](const Structure& s) {
        Rational si(0);
        int sj = 0;
        for (const auto& e : s) {
            for (const auto& p : e) {
                si = si + p.i;
                sj += p.j;
            }
        }
        return std::pair{si, sj};
    };
    const auto [ai, aj] = sums(a);
    const auto [bi, bj] = sums(b);
    if (ai != bi) {
        return ai < bi;
    }
    if (aj != bj) {
        return aj < bj;
    }
    // The constant basis (all zeros) sorts first in both, so comparing the
    // non-constant lists with a zero vector prepended is the same order.
    Structure pa = a;
    Structure pb = b;
    pa.insert(pa.begin(), Exponents(a.empty() ? 0 : a.front().size()));
    pb.insert(pb.begin(), Exponents(b.empty() ? 0 : b.front().size()));
    return pa < pb;
}

struct Scored {
    std::vector<Factors> basis;
    Structure structure;
    double score;
};

std::size_t pick(const std::vector<Scored>& all) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : all) {
        best = std::min(best, s.score);
    }
    std::size_t winner = all.size();
    for (std::size_t k = 0; k < all.size(); ++k) {
        if (all[k].score <= best + kScoreTieTolerance &&
            (winner == all.size() || oracle_less(all[k].structure, all[winner].structure))) {
            winner = k;
        }
    }
    return winner;
}

std::vector<ExponentPair> single_terms(const ExponentSets& sets) {
    std::vector<ExponentPair> out;
    for (const auto& i : sets.monomial) {
        for (int j : sets.log) {
            if (!(i.is_zero() && j == 0)) {
                out.push_back(ExponentPair{i, j});
            }
        }
    }
    return out;
}

PmnfModel to_model(const ParameterSpace& space, const std::vector<Factors>& basis, const std::vector<double>& coef) {
    std::vector<Term> terms;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        BasisFunction b = BasisFunction::constant(space.dimension());
        for (const auto& [l, e] : basis[k]) {
            b.exponents[l] = e;
        }
        terms.push_back(Term{coef[k + 1], b});
    }
    return PmnfModel(space.names(), coef[0], std::move(terms));
}

// Best single-parameter structures for `param`, ranked by mean score over
// the groups of rows that agree on every other coordinate.
std::vector<ExponentPair> ranked_terms(const ParameterSpace& space, const std::vector<Row>& rows, std::size_t param,
                                       const ExponentSets& sets, std::size_t top_k) {
    std::map<std::vector<double>, std::vector<Row>> lines;
    for (const auto& r : rows) {
        auto key = r.x;
        key[param] = 0.0;
        lines[key].push_back(r);
    }
    std::vector<Scored> scored;
    std::vector<std::vector<Factors>> options{{}};
    for (const auto& e : single_terms(sets)) {
        options.push_back({Factors{{param, e}}});
    }
    for (const auto& basis : options) {
        double mean = 0.0;
        for (const auto& [key, line] : lines) {
            mean += naive_cv(basis, line);
        }
        mean /= static_cast<double>(lines.size());
        scored.push_back(Scored{basis, canonical(basis, space.dimension()), mean});
    }
    std::vector<ExponentPair> out;
    for (std::size_t rank = 0; rank < std::max<std::size_t>(top_k, 1) && !scored.empty(); ++rank) {
        const std::size_t w = pick(scored);
        if (!scored[w].basis.empty()) {
            out.push_back(scored[w].basis.front().front().second);
        }
        scored.erase(scored.begin() + static_cast<std::ptrdiff_t>(w));
    }
    return out;
}

}  // namespace

PmnfModel exhaustive_oracle(const ParameterSpace& space, std::span<const double> grid_values, OracleFamily family,
                            const SearchOptions& options) {
    if (grid_values.size() != space.grid_size()) {
        throw InvalidArgument("oracle: data does not cover the parameter grid");
    }
    const std::size_t m = space.dimension();
    std::vector<Row> rows;
    for (std::size_t k = 0; k < grid_values.size(); ++k) {
        rows.push_back(Row{space.coordinate(k).values, grid_values[k]});
    }

    std::vector<std::vector<Factors>> family_members;
    if (family == OracleFamily::single) {
        if (m != 1) {
            throw InvalidArgument("oracle: the single family needs a one-parameter space");
        }
        family_members.push_back({});
        for (const auto& e : single_terms(options.exponents)) {
            family_members.push_back({Factors{{0, e}}});
        }
    } else {
        if (m < 2 || m > 3) {
            throw InvalidArgument("oracle: the restricted multi-parameter family needs 2 or 3 parameters");
        }
        std::vector<std::vector<ExponentPair>> choices(m);
        for (std::size_t l = 0; l < m; ++l) {
            choices[l] = ranked_terms(space, rows, l, options.exponents, options.top_k);
        }
        std::set<Structure> seen;
        // Every assignment of one ranked term (or none) per parameter; the
        // subsets of the resulting products with at most m members.
        std::vector<std::size_t> pick_index(m, 0);
        while (true) {
            Factors chosen;
            for (std::size_t l = 0; l < m; ++l) {
                if (pick_index[l] > 0) {
                    chosen.emplace_back(l, choices[l][pick_index[l] - 1]);
                }
            }
            std::vector<Factors> products;
            for (std::size_t mask = 1; mask < (std::size_t{1} << chosen.size()); ++mask) {
                Factors f;
                for (std::size_t t = 0; t < chosen.size(); ++t) {
                    if ((mask >> t) & 1U) {
                        f.push_back(chosen[t]);
                    }
                }
                products.push_back(f);
            }
            for (std::size_t mask = 0; mask < (std::size_t{1} << products.size()); ++mask) {
                std::vector<Factors> basis;
                for (std::size_t t = 0; t < products.size(); ++t) {
                    if ((mask >> t) & 1U) {
                        basis.push_back(products[t]);
                    }
                }
                if (basis.size() > m) {
                    continue;
                }
                if (seen.insert(canonical(basis, m)).second) {
                    family_members.push_back(basis);
                }
                if (family_members.size() > kMaxFamily) {
                    throw InvalidArgument("oracle: candidate family too large");
                }
            }
            std::size_t l = 0;
            for (; l < m; ++l) {
                if (++pick_index[l] <= choices[l].size()) {
                    break;
                }
                pick_index[l] = 0;
            }
            if (l == m) {
                break;
            }
        }
    }
    if (family_members.size() > kMaxFamily) {
        throw InvalidArgument("oracle: candidate family too large");
    }

    std::vector<Scored> scored;
    for (const auto& basis : family_members) {
        if (rows.size() < basis.size() + 2) {
            throw ModelingError("oracle: insufficient data");
        }
        scored.push_back(Scored{basis, canonical(basis, m), naive_cv(basis, rows)});
    }
    const auto& winner = scored[pick(scored)];
    // Present terms in signature order, as the searches do after binding.
    std::vector<Factors> ordered = winner.basis;
    return to_model(space, ordered, naive_fit(ordered, rows));
}

}  // namespace nrpm
