#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nnw/core.hpp"
#include "nnw/parallel.hpp"
#include "nnw/quadrature.hpp"

namespace nnw {

/// Sorted, pairwise-disjoint closed intervals.
class IntervalSet {
public:
    IntervalSet() = default;

    explicit IntervalSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
        for (std::size_t i = 0; i < intervals_.size(); ++i) {
            const Interval& iv = intervals_[i];
            if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi)
                throw std::invalid_argument("IntervalSet: malformed interval at position " + std::to_string(i));
            if (i > 0 && !(intervals_[i - 1].hi < iv.lo))
                throw std::invalid_argument("IntervalSet: intervals must be sorted and disjoint");
            total_length_ += iv.length();
        }
    }

    [[nodiscard]] const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    [[nodiscard]] std::size_t size() const noexcept { return intervals_.size(); }
    [[nodiscard]] double total_length() const noexcept { return total_length_; }

    [[nodiscard]] bool contains(double x) const noexcept {
        auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                                   [](double v, const Interval& iv) { return v < iv.lo; });
        if (it == intervals_.begin()) return false;
        return std::prev(it)->contains(x);
    }

    /// True when every interval of `inner` lies inside some interval of this set.
    [[nodiscard]] bool covers(const IntervalSet& inner) const noexcept {
        return std::all_of(inner.intervals_.begin(), inner.intervals_.end(), [&](const Interval& iv) {
            return std::any_of(intervals_.begin(), intervals_.end(),
                               [&](const Interval& outer) { return outer.lo <= iv.lo && iv.hi <= outer.hi; });
        });
    }

private:
    std::vector<Interval> intervals_;
    double total_length_ = 0.0;
};

inline constexpr int max_fat_cantor_depth = 24;

/// Smith-Volterra-Cantor construction on [0, 1]: at step l an open interval of
/// absolute length 4^-l centred on each remaining interval is removed.
[[nodiscard]] inline IntervalSet fat_cantor_build(int depth) {
    if (depth < 1) throw std::invalid_argument("fat_cantor_build: depth must be >= 1");
    if (depth > max_fat_cantor_depth)
        throw std::invalid_argument("fat_cantor_build: depth " + std::to_string(depth) + " exceeds " +
                                    std::to_string(max_fat_cantor_depth) +
                                    " (removed lengths fall below double resolution of the endpoints)");
    std::vector<Interval> current{{0.0, 1.0}};
    double removed = 1.0;
    for (int level = 1; level <= depth; ++level) {
        removed /= 4.0;
        std::vector<Interval> next;
        next.reserve(current.size() * 2);
        for (const Interval& iv : current) {
            const double mid = 0.5 * (iv.lo + iv.hi);
            const double left_hi = mid - removed / 2.0;
            const double right_lo = mid + removed / 2.0;
            if (!(iv.lo < left_hi && left_hi < right_lo && right_lo < iv.hi))
                throw std::invalid_argument("fat_cantor_build: interval lengths underflow at level " +
                                            std::to_string(level));
            next.push_back({iv.lo, left_hi});
            next.push_back({right_lo, iv.hi});
        }
        current = std::move(next);
    }
    return IntervalSet(std::move(current));
}

class DistributionSpec;

struct Beta {
    double alpha;
    double beta;
};
struct Gaussian {
    double mean;
    double variance;
};
struct Uniform {
    double a;
    double b;
};
struct FatCantorUniform {
    int depth;
    std::shared_ptr<const IntervalSet> set;
};
struct Product {
    std::vector<DistributionSpec> factors;
};

/// A 1-D distribution or an independent product of them.
class DistributionSpec {
public:
    using Kind = std::variant<Beta, Gaussian, Uniform, FatCantorUniform, Product>;

    static DistributionSpec beta(double alpha, double beta) {
        if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
            throw std::invalid_argument("beta: parameters must be positive and finite");
        return DistributionSpec(Beta{alpha, beta}, 1);
    }
    static DistributionSpec gaussian(double mean, double variance) {
        if (!std::isfinite(mean)) throw std::invalid_argument("gaussian: mean must be finite");
        if (!(variance > 0.0) || !std::isfinite(variance))
            throw std::invalid_argument("gaussian: variance must be positive and finite");
        return DistributionSpec(Gaussian{mean, variance}, 1);
    }
    static DistributionSpec uniform(double a, double b) {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
            throw std::invalid_argument("uniform: require finite a < b");
        return DistributionSpec(Uniform{a, b}, 1);
    }
    static DistributionSpec fat_cantor(int depth) {
        return DistributionSpec(FatCantorUniform{depth, std::make_shared<IntervalSet>(fat_cantor_build(depth))}, 1);
    }
    static DistributionSpec product(std::vector<DistributionSpec> factors) {
        if (factors.empty()) throw std::invalid_argument("product: needs at least one factor");
        std::size_t d = 0;
        for (const auto& f : factors) d += f.dim();
        return DistributionSpec(Product{std::move(factors)}, d);
    }

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

    template <typename T>
    [[nodiscard]] const T* as() const noexcept {
        return std::get_if<T>(&kind_);
    }

    /// Config-syntax rendering, e.g. "beta(alpha=1.25, beta=1)".
    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Beta>)
                    os << "beta(alpha=" << k.alpha << ", beta=" << k.beta << ")";
                else if constexpr (std::is_same_v<T, Gaussian>)
                    os << "gaussian(mean=" << k.mean << ", variance=" << k.variance << ")";
                else if constexpr (std::is_same_v<T, Uniform>)
                    os << "uniform(a=" << k.a << ", b=" << k.b << ")";
                else if constexpr (std::is_same_v<T, FatCantorUniform>)
                    os << "fat_cantor(depth=" << k.depth << ")";
                else {
                    os << "product(";
                    for (std::size_t i = 0; i < k.factors.size(); ++i)
                        os << (i ? ", " : "") << k.factors[i].describe();
                    os << ")";
                }
            },
            kind_);
        return os.str();
    }

private:
    DistributionSpec(Kind kind, std::size_t dim) : kind_(std::move(kind)), dim_(dim) {}

    Kind kind_;
    std::size_t dim_;
};

namespace detail {

inline void flatten_leaves(const DistributionSpec& d, std::vector<const DistributionSpec*>& out) {
    if (const auto* p = d.as<Product>()) {
        for (const auto& f : p->factors) flatten_leaves(f, out);
    } else {
        out.push_back(&d);
    }
}

[[nodiscard]] inline std::vector<const DistributionSpec*> leaves(const DistributionSpec& d) {
    std::vector<const DistributionSpec*> out;
    flatten_leaves(d, out);
    return out;
}

// a * log(x) with 0 * log(0) = 0
[[nodiscard]] inline double xlogy(double a, double x) noexcept { return a == 0.0 ? 0.0 : a * std::log(x); }

[[nodiscard]] inline double log_density_1d(const DistributionSpec& d, double x) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Beta>) {
                if (x < 0.0 || x > 1.0) return neg_inf;
                const double log_b = std::lgamma(k.alpha) + std::lgamma(k.beta) - std::lgamma(k.alpha + k.beta);
                return xlogy(k.alpha - 1.0, x) + xlogy(k.beta - 1.0, 1.0 - x) - log_b;
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                const double z = x - k.mean;
                return -0.5 * std::log(2.0 * std::numbers::pi * k.variance) - z * z / (2.0 * k.variance);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return (x < k.a || x > k.b) ? neg_inf : -std::log(k.b - k.a);
            } else if constexpr (std::is_same_v<T, FatCantorUniform>) {
                return k.set->contains(x) ? -std::log(k.set->total_length()) : neg_inf;
            } else {
                throw std::logic_error("log_density_1d: product is not 1-D");
            }
        },
        d.kind());
}

[[nodiscard]] inline double density_1d(const DistributionSpec& d, double x) {
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Beta>) {
                if (x < 0.0 || x > 1.0) return 0.0;
                const double b = std::exp(std::lgamma(k.alpha) + std::lgamma(k.beta) - std::lgamma(k.alpha + k.beta));
                return std::pow(x, k.alpha - 1.0) * std::pow(1.0 - x, k.beta - 1.0) / b;
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                const double z = x - k.mean;
                return std::exp(-z * z / (2.0 * k.variance)) / std::sqrt(2.0 * std::numbers::pi * k.variance);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return (x < k.a || x > k.b) ? 0.0 : 1.0 / (k.b - k.a);
            } else if constexpr (std::is_same_v<T, FatCantorUniform>) {
                return k.set->contains(x) ? 1.0 / k.set->total_length() : 0.0;
            } else {
                throw std::logic_error("density_1d: product is not 1-D");
            }
        },
        d.kind());
}

[[nodiscard]] inline IntervalSet support_1d(const DistributionSpec& d) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        [&](const auto& k) -> IntervalSet {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Beta>)
                return IntervalSet({{0.0, 1.0}});
            else if constexpr (std::is_same_v<T, Gaussian>)
                return IntervalSet({{-inf, inf}});
            else if constexpr (std::is_same_v<T, Uniform>)
                return IntervalSet({{k.a, k.b}});
            else if constexpr (std::is_same_v<T, FatCantorUniform>)
                return *k.set;
            else
                throw std::invalid_argument("support: product distributions have no 1-D support");
        },
        d.kind());
}

// Draws one coordinate per leaf; distribution objects live for one block so
// any internal caching stays inside the block's stream.
class LeafSampler {
public:
    explicit LeafSampler(const DistributionSpec& d) {
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Beta>)
                    state_ = BetaState{std::gamma_distribution<double>(k.alpha, 1.0),
                                       std::gamma_distribution<double>(k.beta, 1.0)};
                else if constexpr (std::is_same_v<T, Gaussian>)
                    state_ = std::normal_distribution<double>(k.mean, std::sqrt(k.variance));
                else if constexpr (std::is_same_v<T, Uniform>)
                    state_ = std::uniform_real_distribution<double>(k.a, k.b);
                else if constexpr (std::is_same_v<T, FatCantorUniform>)
                    state_ = CantorState{k.set.get()};
                else
                    throw std::logic_error("LeafSampler: product is not a leaf");
            },
            d.kind());
    }

    template <typename Engine>
    double draw(Engine& eng) {
        return std::visit(
            [&](auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, BetaState>) {
                    for (;;) {
                        const double x = s.a(eng);
                        const double y = s.b(eng);
                        if (x + y > 0.0) return x / (x + y);
                    }
                } else if constexpr (std::is_same_v<T, CantorState>) {
                    const auto& ivs = s.set->intervals();
                    // the construction gives equal-length intervals at the final depth
                    std::uniform_int_distribution<std::size_t> pick(0, ivs.size() - 1);
                    const Interval& iv = ivs[pick(eng)];
                    std::uniform_real_distribution<double> u(iv.lo, iv.hi);
                    return std::clamp(u(eng), iv.lo, iv.hi);
                } else {
                    return s(eng);
                }
            },
            state_);
    }

private:
    struct BetaState {
        std::gamma_distribution<double> a;
        std::gamma_distribution<double> b;
    };
    struct CantorState {
        const IntervalSet* set;
    };
    std::variant<BetaState, std::normal_distribution<double>, std::uniform_real_distribution<double>, CantorState>
        state_;
};

}  // namespace detail

inline constexpr std::size_t sample_block_size = 4096;

/// n iid draws. Point i comes from block i / sample_block_size, whose engine is
/// seeded from (seed, block), so output depends only on (dist, n, seed).
[[nodiscard]] inline PointSet sample_points(const DistributionSpec& dist, std::size_t n, std::uint64_t seed,
                                            unsigned threads = 1) {
    if (n == 0) throw std::invalid_argument("sample_points: n must be >= 1");
    const auto leaves = detail::leaves(dist);
    const std::size_t p = leaves.size();
    PointSet out(n, p);
    parallel_chunks(n, sample_block_size, threads, [&](std::size_t block, std::size_t begin, std::size_t end) {
        std::mt19937_64 eng(derive_seed(seed, block));
        std::vector<detail::LeafSampler> samplers;
        samplers.reserve(p);
        for (const auto* leaf : leaves) samplers.emplace_back(*leaf);
        for (std::size_t i = begin; i < end; ++i) {
            auto row = out.row(i);
            for (std::size_t c = 0; c < p; ++c) row[c] = samplers[c].draw(eng);
        }
    });
    return out;
}

[[nodiscard]] inline double log_density_at(const DistributionSpec& dist, std::span<const double> x) {
    if (x.size() != dist.dim())
        throw std::invalid_argument("density_at: point dimension " + std::to_string(x.size()) +
                                    " != distribution dimension " + std::to_string(dist.dim()));
    const auto leaves = detail::leaves(dist);
    double acc = 0.0;
    for (std::size_t c = 0; c < leaves.size(); ++c) acc += detail::log_density_1d(*leaves[c], x[c]);
    return acc;
}

[[nodiscard]] inline double density_at(const DistributionSpec& dist, std::span<const double> x) {
    if (x.size() != dist.dim())
        throw std::invalid_argument("density_at: point dimension " + std::to_string(x.size()) +
                                    " != distribution dimension " + std::to_string(dist.dim()));
    if (dist.dim() == 1) return detail::density_1d(dist, x[0]);
    const auto leaves = detail::leaves(dist);
    double acc = 1.0;
    for (std::size_t c = 0; c < leaves.size(); ++c) acc *= detail::density_1d(*leaves[c], x[c]);
    return acc;
}

[[nodiscard]] inline double density_at(const DistributionSpec& dist, double x) {
    return density_at(dist, std::span<const double>(&x, 1));
}

/// Support of a 1-D distribution; Gaussian support is (-inf, inf).
[[nodiscard]] inline IntervalSet support(const DistributionSpec& dist) { return detail::support_1d(dist); }

[[nodiscard]] inline bool in_support(const DistributionSpec& dist, std::span<const double> x) {
    const auto leaves = detail::leaves(dist);
    if (x.size() != leaves.size()) return false;
    for (std::size_t c = 0; c < leaves.size(); ++c)
        if (!detail::support_1d(*leaves[c]).contains(x[c])) return false;
    return true;
}

/// Target measure mu0 and sampling measure mu1.
struct DistributionPair {
    DistributionSpec mu0;
    DistributionSpec mu1;

    /// Validates dimensions and support(mu0) within support(mu1), coordinate-wise.
    static DistributionPair make(DistributionSpec mu0, DistributionSpec mu1) {
        if (mu0.dim() != mu1.dim())
            throw std::invalid_argument("DistributionPair: dimension mismatch (" + std::to_string(mu0.dim()) +
                                        " vs " + std::to_string(mu1.dim()) + ")");
        const auto l0 = detail::leaves(mu0);
        const auto l1 = detail::leaves(mu1);
        for (std::size_t c = 0; c < l0.size(); ++c)
            if (!detail::support_1d(*l1[c]).covers(detail::support_1d(*l0[c])))
                throw std::invalid_argument("DistributionPair: support of mu0 (" + l0[c]->describe() +
                                            ") not contained in support of mu1 (" + l1[c]->describe() + ")");
        return DistributionPair{std::move(mu0), std::move(mu1)};
    }
};

enum class RatioKind { finite, infinite, both_zero };

struct RatioValue {
    double value;
    RatioKind kind;
};

/// f0(x) / f1(x). f1 = 0 < f0 gives kind infinite; 0/0 gives value 0 with kind both_zero.
[[nodiscard]] inline RatioValue density_ratio_at(const DistributionPair& pair, std::span<const double> x) {
    const double f0 = density_at(pair.mu0, x);
    const double f1 = density_at(pair.mu1, x);
    if (f1 > 0.0 && std::isfinite(f1)) {
        const double r = f0 / f1;
        if (std::isinf(r)) return {r, RatioKind::infinite};
        return {r, RatioKind::finite};
    }
    if (f0 > 0.0) return {std::numeric_limits<double>::infinity(), RatioKind::infinite};
    return {0.0, RatioKind::both_zero};
}

[[nodiscard]] inline RatioValue density_ratio_at(const DistributionPair& pair, double x) {
    return density_ratio_at(pair, std::span<const double>(&x, 1));
}

struct RenyiResult {
    double value = 0.0;     ///< D_q(mu0 || mu1); +inf when the integral diverges
    double integral = 0.0;  ///< int (f0/f1)^q dmu1, or the KL integral when q = 1
    QuadratureStatus status = QuadratureStatus::converged;

    [[nodiscard]] bool finite() const noexcept { return status != QuadratureStatus::diverged; }
};

namespace detail {

// Pieces of support(mu0), split at the interval ends of support(mu1). A piece
// outside support(mu1) flags divergence.
[[nodiscard]] inline std::vector<Interval> renyi_pieces(const DistributionSpec& mu0, const DistributionSpec& mu1,
                                                        bool& outside) {
    const IntervalSet s0 = support_1d(mu0);
    const IntervalSet s1 = support_1d(mu1);
    outside = !s1.covers(s0);
    std::vector<Interval> pieces;
    for (const Interval& iv : s0.intervals()) {
        std::vector<double> cuts{iv.lo, iv.hi};
        for (const Interval& o : s1.intervals()) {
            if (iv.lo < o.lo && o.lo < iv.hi) cuts.push_back(o.lo);
            if (iv.lo < o.hi && o.hi < iv.hi) cuts.push_back(o.hi);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) pieces.push_back({cuts[i], cuts[i + 1]});
    }
    return pieces;
}

[[nodiscard]] inline RenyiResult renyi_1d(const DistributionSpec& mu0, const DistributionSpec& mu1, double q0,
                                          const QuadratureOptions& opt) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    bool outside = false;
    const auto pieces = renyi_pieces(mu0, mu1, outside);
    if (outside) return {inf, inf, QuadratureStatus::diverged};

    const bool kl = (q0 == 1.0);
    auto integrand = [&](double x) -> double {
        const double lf0 = log_density_1d(mu0, x);
        if (lf0 == -inf) return 0.0;
        const double lf1 = log_density_1d(mu1, x);
        if (lf1 == -inf) return inf;
        if (kl) return std::exp(lf0) * (lf0 - lf1);
        return std::exp(q0 * lf0 - (q0 - 1.0) * lf1);
    };
    const QuadratureResult q = integrate_pieces(integrand, pieces, opt);
    RenyiResult r;
    r.status = q.status;
    r.integral = q.value;
    if (q.status == QuadratureStatus::diverged) {
        r.value = inf;
        return r;
    }
    r.value = kl ? q.value : std::log(q.value) / (q0 - 1.0);
    return r;
}

}  // namespace detail

/// Renyi divergence D_q0(mu0 || mu1) = log(int (f0/f1)^q0 dmu1) / (q0 - 1); q0 = 1 gives KL.
/// Products of matching arity are handled coordinate-wise (divergences of independent factors add).
[[nodiscard]] inline RenyiResult renyi_divergence(const DistributionPair& pair, double q0,
                                                  const QuadratureOptions& opt = {}) {
    if (!(q0 >= 1.0) || !std::isfinite(q0)) throw std::invalid_argument("renyi_divergence: q0 must be >= 1");
    const auto l0 = detail::leaves(pair.mu0);
    const auto l1 = detail::leaves(pair.mu1);
    if (l0.size() != l1.size()) throw std::invalid_argument("renyi_divergence: dimension mismatch");
    RenyiResult total;
    total.integral = 1.0;
    for (std::size_t c = 0; c < l0.size(); ++c) {
        const RenyiResult r = detail::renyi_1d(*l0[c], *l1[c], q0, opt);
        if (r.status == QuadratureStatus::diverged) return r;
        if (r.status == QuadratureStatus::not_converged) total.status = QuadratureStatus::not_converged;
        total.value += r.value;
        total.integral = (q0 == 1.0) ? total.value : total.integral * r.integral;
    }
    return total;
}

// --- config syntax -----------------------------------------------------------

namespace detail {

class DistributionParser {
public:
    explicit DistributionParser(std::string_view text) : text_(text) {}

    DistributionSpec parse() {
        DistributionSpec d = parse_spec();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing text");
        return d;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("distribution '" + std::string(text_) + "': " + what + " at offset " +
                                    std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!consume(c)) fail(std::string("expected '") + c + "'");
    }

    std::string identifier() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected identifier");
        std::string id(text_.substr(start, pos_ - start));
        std::transform(id.begin(), id.end(), id.begin(), [](unsigned char ch) { return std::tolower(ch); });
        return id;
    }

    double number() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+'))
            ++pos_;
        const std::string tok(text_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) fail("malformed number '" + tok + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("malformed number '" + tok + "'");
        }
    }

    std::map<std::string, double> params(const std::string& kind) {
        std::map<std::string, double> out;
        if (consume(')')) return out;
        do {
            const std::string name = identifier();
            expect('=');
            if (!out.emplace(name, number()).second) fail(kind + ": duplicate parameter '" + name + "'");
        } while (consume(','));
        expect(')');
        return out;
    }

    static double take(std::map<std::string, double>& ps, const std::string& kind, const std::string& name) {
        auto it = ps.find(name);
        if (it == ps.end()) throw std::invalid_argument(kind + ": missing parameter '" + name + "'");
        const double v = it->second;
        ps.erase(it);
        return v;
    }

    static void no_extra(const std::map<std::string, double>& ps, const std::string& kind) {
        if (!ps.empty()) throw std::invalid_argument(kind + ": unknown parameter '" + ps.begin()->first + "'");
    }

    DistributionSpec parse_spec() {
        const std::string kind = identifier();
        expect('(');
        if (kind == "product") {
            std::vector<DistributionSpec> factors;
            do factors.push_back(parse_spec());
            while (consume(','));
            expect(')');
            return DistributionSpec::product(std::move(factors));
        }
        auto ps = params(kind);
        if (kind == "beta") {
            const double a = take(ps, kind, "alpha");
            const double b = take(ps, kind, "beta");
            no_extra(ps, kind);
            return DistributionSpec::beta(a, b);
        }
        if (kind == "gaussian" || kind == "normal") {
            const double m = ps.count("mean") ? take(ps, kind, "mean") : 0.0;
            const double v = take(ps, kind, "variance");
            no_extra(ps, kind);
            return DistributionSpec::gaussian(m, v);
        }
        if (kind == "uniform") {
            const double a = take(ps, kind, "a");
            const double b = take(ps, kind, "b");
            no_extra(ps, kind);
            return DistributionSpec::uniform(a, b);
        }
        if (kind == "fat_cantor") {
            const double depth = take(ps, kind, "depth");
            no_extra(ps, kind);
            if (depth != std::floor(depth)) throw std::invalid_argument("fat_cantor: depth must be an integer");
            return DistributionSpec::fat_cantor(static_cast<int>(depth));
        }
        fail("unknown distribution kind '" + kind + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses "kind(name=value, ...)" or "product(spec, spec, ...)".
[[nodiscard]] inline DistributionSpec parse_distribution(std::string_view text) {
    return detail::DistributionParser(text).parse();
}

}  // namespace nnw
