#include "jamset/degree_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jamset/error.hpp"

namespace jamset {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Degree parse_degree_key(const std::string& key) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(key, &used);
    } catch (const std::exception&) {
        throw ConfigError("degree key '" + key + "' is not an integer");
    }
    if (used != key.size() || v < 0) throw ConfigError("degree key '" + key + "' is not a non-negative integer");
    return static_cast<Degree>(v);
}

template <class V>
std::map<Degree, V> parse_degree_map(const json& j, const char* field) {
    if (!j.is_object()) throw ConfigError(std::string("'") + field + "' must be an object of degree -> value");
    std::map<Degree, V> out;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw ConfigError(std::string("'") + field + "' values must be numbers");
        if constexpr (std::is_integral_v<V>) {
            if (!value.is_number_integer() || value.template get<long long>() < 0)
                throw ConfigError(std::string("'") + field + "' values must be non-negative integers");
        }
        out[parse_degree_key(key)] = value.template get<V>();
    }
    return out;
}

template <class V>
json degree_map_to_json(const std::map<Degree, V>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[std::to_string(k)] = v;
    return out;
}

Count require_count(const json& j, const char* field) {
    if (!j.contains(field)) throw ConfigError(std::string("missing field '") + field + "'");
    const auto& v = j.at(field);
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<Count>();
    // 1e5 style literals arrive as floats
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0 && d == std::floor(d) && d < 1e15) return static_cast<Count>(d);
    }
    throw ConfigError(std::string("field '") + field + "' must be a non-negative integer");
}

double require_number(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_number())
        throw ConfigError(std::string("missing numeric field '") + field + "'");
    return j.at(field).get<double>();
}

std::map<Degree, Count> tally(const std::vector<Degree>& degrees) {
    std::map<Degree, Count> counts;
    for (Degree d : degrees) ++counts[d];
    return counts;
}

Degree sample_from(const std::vector<std::pair<Degree, double>>& cdf, Rng& rng) {
    const double u = rng.uniform();
    for (const auto& [k, c] : cdf)
        if (u < c) return k;
    return cdf.back().first;
}

Count floor_pow(Count n, double e) {
    // guard against pow returning 999.9999 for an exact power
    const double v = std::pow(static_cast<double>(n), e);
    return static_cast<Count>(std::floor(v + 1e-9 * std::max(1.0, v)));
}

} // namespace

// ===========================================================================
// DegreeSequence
// ===========================================================================

DegreeSequence::DegreeSequence(std::map<Degree, Count> counts) : counts_(std::move(counts)) {
    for (auto it = counts_.begin(); it != counts_.end();) {
        if (it->second == 0)
            it = counts_.erase(it);
        else
            ++it;
    }
    if (counts_.empty()) throw ConfigError("degree sequence is empty");
    for (const auto& [k, c] : counts_) {
        n_ += c;
        half_edges_ += k * c;
        m2_ += k * (k == 0 ? 0 : k - 1) * c;
    }
    if (half_edges_ % 2 != 0)
        throw ParityError("half-edge total " + std::to_string(half_edges_) + " is odd");
}

DegreeSequence DegreeSequence::from_counts(std::map<Degree, Count> counts) {
    return DegreeSequence(std::move(counts));
}

DegreeSequence DegreeSequence::from_degrees(std::span<const Degree> degrees) {
    return DegreeSequence(tally({degrees.begin(), degrees.end()}));
}

Count DegreeSequence::count(Degree k) const {
    const auto it = counts_.find(k);
    return it == counts_.end() ? 0 : it->second;
}

Degree DegreeSequence::max_degree() const { return counts_.rbegin()->first; }

std::vector<std::uint32_t> DegreeSequence::degrees() const {
    if (max_degree() > std::numeric_limits<std::uint32_t>::max() ||
        n_ > std::numeric_limits<std::uint32_t>::max())
        throw ConfigError("degree sequence too large for 32-bit vertex ids");
    std::vector<std::uint32_t> out;
    out.reserve(n_);
    for (const auto& [k, c] : counts_) out.insert(out.end(), c, static_cast<std::uint32_t>(k));
    return out;
}

// ===========================================================================
// Specs
// ===========================================================================

SequenceSpec sequence_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("sequence spec must be an object with a string 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "counts") {
        if (!j.contains("counts")) throw ConfigError("counts spec needs 'counts'");
        return CountsSpec{parse_degree_map<Count>(j.at("counts"), "counts")};
    }
    if (kind == "degrees") {
        if (!j.contains("degrees") || !j.at("degrees").is_array()) throw ConfigError("degrees spec needs an array 'degrees'");
        std::vector<Degree> d;
        for (const auto& v : j.at("degrees")) {
            if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("degrees must be non-negative integers");
            d.push_back(v.get<Degree>());
        }
        return CountsSpec{tally(d)};
    }
    if (kind == "regular") return RegularSpec{require_count(j, "d"), require_count(j, "n")};
    if (kind == "star") return StarSpec{require_count(j, "n")};
    if (kind == "poisson") return PoissonSpec{require_number(j, "c"), require_count(j, "n")};
    if (kind == "sampled") {
        if (!j.contains("p")) throw ConfigError("sampled spec needs 'p'");
        return SampledSpec{parse_degree_map<double>(j.at("p"), "p"), require_count(j, "n")};
    }
    if (kind == "twoblock") {
        if (j.contains("sizes")) {
            const auto& s = j.at("sizes");
            const auto& d = j.at("degrees");
            if (!s.is_array() || s.size() != 2 || !d.is_array() || d.size() != 2)
                throw ConfigError("twoblock needs two-element 'sizes' and 'degrees'");
            return TwoBlockSpec{{s[0].get<Count>(), s[1].get<Count>()}, {d[0].get<Degree>(), d[1].get<Degree>()}};
        }
        PowerTwoBlockSpec p;
        p.n = require_count(j, "n");
        if (j.contains("size_a_exp")) p.size_a_exp = require_number(j, "size_a_exp");
        if (j.contains("size_a_frac")) p.size_a_frac = require_number(j, "size_a_frac");
        if (p.size_a_exp.has_value() == p.size_a_frac.has_value())
            throw ConfigError("twoblock needs exactly one of 'size_a_exp', 'size_a_frac' (or explicit 'sizes')");
        p.deg_a_exp = require_number(j, "deg_a_exp");
        p.deg_b_exp = require_number(j, "deg_b_exp");
        return p;
    }
    throw ConfigError("unknown sequence kind '" + kind + "'");
}

json to_json(const SequenceSpec& spec) {
    return std::visit(
        overloaded{
            [](const CountsSpec& s) { return json{{"kind", "counts"}, {"counts", degree_map_to_json(s.counts)}}; },
            [](const RegularSpec& s) { return json{{"kind", "regular"}, {"d", s.d}, {"n", s.n}}; },
            [](const StarSpec& s) { return json{{"kind", "star"}, {"n", s.n}}; },
            [](const TwoBlockSpec& s) {
                return json{{"kind", "twoblock"}, {"sizes", s.sizes}, {"degrees", s.degrees}};
            },
            [](const PowerTwoBlockSpec& s) {
                json out{{"kind", "twoblock"}, {"n", s.n}, {"deg_a_exp", s.deg_a_exp}, {"deg_b_exp", s.deg_b_exp}};
                if (s.size_a_exp) out["size_a_exp"] = *s.size_a_exp;
                if (s.size_a_frac) out["size_a_frac"] = *s.size_a_frac;
                return out;
            },
            [](const SampledSpec& s) { return json{{"kind", "sampled"}, {"p", degree_map_to_json(s.p)}, {"n", s.n}}; },
            [](const PoissonSpec& s) { return json{{"kind", "poisson"}, {"c", s.c}, {"n", s.n}}; },
        },
        spec);
}

SequenceSpec with_n(const SequenceSpec& spec, Count n) {
    return std::visit(
        overloaded{
            [](const CountsSpec&) -> SequenceSpec { throw ConfigError("counts spec has no size parameter"); },
            [](const TwoBlockSpec&) -> SequenceSpec { throw ConfigError("explicit twoblock spec has no size parameter"); },
            [n](auto s) -> SequenceSpec {
                s.n = n;
                return s;
            },
        },
        spec);
}

bool consumes_rng(const SequenceSpec& spec) {
    return std::holds_alternative<SampledSpec>(spec) || std::holds_alternative<PoissonSpec>(spec);
}

DegreeSequence build_sequence(const SequenceSpec& spec, Rng& rng) {
    return std::visit(
        overloaded{
            [](const CountsSpec& s) { return DegreeSequence::from_counts(s.counts); },
            [](const RegularSpec& s) {
                if (s.n == 0) throw ConfigError("regular spec with n = 0");
                if ((s.d * s.n) % 2 != 0)
                    throw ParityError("regular(d=" + std::to_string(s.d) + ", n=" + std::to_string(s.n) +
                                      "): d*n is odd");
                return DegreeSequence::from_counts({{s.d, s.n}});
            },
            [](const StarSpec& s) {
                if (s.n < 2) throw ConfigError("star needs n >= 2");
                std::map<Degree, Count> c;
                c[1] += s.n - 1;
                c[s.n - 1] += 1;
                return DegreeSequence::from_counts(std::move(c));
            },
            [](const TwoBlockSpec& s) {
                std::map<Degree, Count> c;
                c[s.degrees[0]] += s.sizes[0];
                c[s.degrees[1]] += s.sizes[1];
                return DegreeSequence::from_counts(std::move(c));
            },
            [](const PowerTwoBlockSpec& s) {
                if (s.n < 2) throw ConfigError("twoblock needs n >= 2");
                Count a = s.size_a_frac ? static_cast<Count>(std::llround(*s.size_a_frac * static_cast<double>(s.n)))
                                        : floor_pow(s.n, *s.size_a_exp);
                a = std::clamp<Count>(a, 1, s.n - 1);
                const Degree da = floor_pow(s.n, s.deg_a_exp);
                const Degree db = floor_pow(s.n, s.deg_b_exp);
                std::map<Degree, Count> c;
                c[db] += s.n - a;
                if ((a * da + (s.n - a) * db) % 2 != 0) {
                    c[da] += a - 1;
                    c[da + 1] += 1;
                } else {
                    c[da] += a;
                }
                return DegreeSequence::from_counts(std::move(c));
            },
            [&rng](const SampledSpec& s) {
                if (s.n == 0) throw ConfigError("sampled spec with n = 0");
                const LimitModel model = limit_model(s.p);
                std::vector<std::pair<Degree, double>> cdf;
                double acc = 0.0;
                for (const auto& [k, pk] : model.p()) {
                    acc += pk;
                    cdf.emplace_back(k, acc);
                }
                std::vector<Degree> d(s.n);
                Count total = 0;
                for (auto& x : d) {
                    x = sample_from(cdf, rng);
                    total += x;
                }
                if (total % 2 != 0) ++d[rng.below(s.n)];
                return DegreeSequence::from_counts(tally(d));
            },
            [&rng](const PoissonSpec& s) {
                if (s.n == 0) throw ConfigError("poisson spec with n = 0");
                if (!(s.c > 0.0)) throw ConfigError("poisson spec needs c > 0");
                std::vector<Degree> d(s.n);
                Count total = 0;
                for (auto& x : d) {
                    x = rng.poisson(s.c);
                    total += x;
                }
                if (total % 2 != 0) ++d[rng.below(s.n)];
                return DegreeSequence::from_counts(tally(d));
            },
        },
        spec);
}

Empirical empirical(const DegreeSequence& seq) {
    Empirical out;
    const double n = static_cast<double>(seq.n());
    for (const auto& [k, c] : seq.counts()) out.phat[k] = static_cast<double>(c) / n;
    out.lambda_n = static_cast<double>(seq.half_edges()) / n;
    return out;
}

// ===========================================================================
// LimitModel
// ===========================================================================

LimitModel::LimitModel(std::map<Degree, double> p, std::optional<double> lambda, double tail_tol)
    : p_(std::move(p)), tail_tol_(tail_tol) {
    if (!(tail_tol > 0.0)) throw ConfigError("tail_tol must be positive");
    double total = 0.0;
    for (const auto& [k, pk] : p_) {
        if (!(pk >= 0.0) || !std::isfinite(pk)) throw ConfigError("probabilities must be finite and non-negative");
        total += pk;
        mean_ += static_cast<double>(k) * pk;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ConfigError("probabilities sum to " + std::to_string(total) + ", not 1");
    for (auto it = p_.begin(); it != p_.end();) {
        if (it->second == 0.0)
            it = p_.erase(it);
        else
            ++it;
    }
    lambda_ = lambda.value_or(mean_);
    if (std::isnan(lambda_) || !(lambda_ > 0.0)) throw ConfigError("lambda must be positive");
    if (lambda_ < mean_ - 1e-12)
        throw ConfigError("lambda = " + std::to_string(lambda_) + " is below the mean " + std::to_string(mean_) +
                          " of p (lambda >= sum k p_k is required)");
}

double LimitModel::p(Degree k) const {
    const auto it = p_.find(k);
    return it == p_.end() ? 0.0 : it->second;
}

LimitModel limit_model(std::map<Degree, double> p, std::optional<double> lambda, double tail_tol) {
    return LimitModel(std::move(p), lambda, tail_tol);
}

LimitModel regular_limit(Degree d) { return LimitModel({{d, 1.0}}, std::nullopt); }

LimitModel poisson_limit(double c, double tail_tol) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("poisson limit needs finite c > 0");
    if (!(tail_tol > 0.0)) throw ConfigError("tail_tol must be positive");
    std::map<Degree, double> p;
    double pk = std::exp(-c);
    double total = 0.0;
    for (Degree k = 0;; ++k) {
        if (k > 0) pk *= c / static_cast<double>(k);
        p[k] = pk;
        total += pk;
        // sum_{j>k} p_j <= p_{k+1} / (1 - c/(k+2)) once k + 2 > c
        const double next = pk * c / static_cast<double>(k + 1);
        const double ratio = c / static_cast<double>(k + 2);
        if (ratio < 1.0 && next / (1.0 - ratio) < tail_tol / 2) break;
        if (k > 100000) throw NumericalError("poisson materialization did not converge");
    }
    for (auto& [k, v] : p) v /= total;
    return LimitModel(std::move(p), std::nullopt, tail_tol);
}

LimitModel limit_model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("model spec must be an object with a string 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    const double tail_tol = j.contains("tail_tol") ? require_number(j, "tail_tol") : kDefaultTailTol;
    if (kind == "regular") return regular_limit(require_count(j, "d"));
    if (kind == "poisson") return poisson_limit(require_number(j, "c"), tail_tol);
    if (kind == "star") return LimitModel({{1, 1.0}}, 2.0, tail_tol);
    if (kind == "counts-limit") {
        if (!j.contains("p")) throw ConfigError("counts-limit model needs 'p'");
        std::optional<double> lambda;
        if (j.contains("lambda")) {
            const auto& l = j.at("lambda");
            if (l.is_string() && (l.get<std::string>() == "inf" || l.get<std::string>() == "infinity"))
                lambda = std::numeric_limits<double>::infinity();
            else if (l.is_number())
                lambda = l.get<double>();
            else
                throw ConfigError("'lambda' must be a number or \"inf\"");
        }
        return LimitModel(parse_degree_map<double>(j.at("p"), "p"), lambda, tail_tol);
    }
    throw ConfigError("unknown model kind '" + kind + "'");
}

} // namespace jamset
