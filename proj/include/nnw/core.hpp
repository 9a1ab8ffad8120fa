#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnw {

/// Row-major n x p block of finite reals.
class PointSet {
public:
    PointSet() = default;

    PointSet(std::size_t n, std::size_t p) : n_(n), p_(p), data_(n * p, 0.0) {}

    PointSet(std::size_t n, std::size_t p, std::vector<double> data)
        : n_(n), p_(p), data_(std::move(data)) {
        if (data_.size() != n_ * p_)
            throw std::invalid_argument("PointSet: data size " + std::to_string(data_.size()) +
                                        " != n*p = " + std::to_string(n_ * p_));
    }

    /// 1-D convenience constructor.
    static PointSet from_values(std::vector<double> values) {
        const std::size_t n = values.size();
        return PointSet(n, 1, std::move(values));
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] std::size_t dim() const noexcept { return p_; }
    [[nodiscard]] bool empty() const noexcept { return n_ == 0; }

    [[nodiscard]] std::span<const double> operator[](std::size_t i) const noexcept {
        return {data_.data() + i * p_, p_};
    }
    [[nodiscard]] std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * p_, p_}; }

    [[nodiscard]] const std::vector<double>& raw() const noexcept { return data_; }

    /// Throws unless n >= 1, p >= 1 and every entry is finite.
    void validate() const {
        if (n_ == 0) throw std::invalid_argument("PointSet: empty point set");
        if (p_ == 0) throw std::invalid_argument("PointSet: zero dimension");
        for (std::size_t k = 0; k < data_.size(); ++k)
            if (!std::isfinite(data_[k]))
                throw std::invalid_argument("PointSet: non-finite entry at row " + std::to_string(k / p_) +
                                            ", column " + std::to_string(k % p_));
    }

private:
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::vector<double> data_;
};

// splitmix64 finalizer; used for seed derivation and tie keys.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

/// Independent stream seed for (master, stream id).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return mix64(master, stream);
}

[[nodiscard]] inline std::uint64_t hash_point(std::span<const double> x) noexcept {
    std::uint64_t h = 0x51ed270b27b7a1c5ULL;
    for (double v : x) {
        if (v == 0.0) v = 0.0;  // fold -0.0 onto +0.0
        h = mix64(h, std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

namespace detail {

struct TwoSum {
    double sum;
    double err;
};

[[nodiscard]] inline TwoSum two_sum(double a, double b) noexcept {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

}  // namespace detail

/// Dot product evaluated as if in twice the working precision (Ogita-Rump-Oishi Dot2).
[[nodiscard]] inline double accurate_dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("accurate_dot: length mismatch");
    double s = 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double p = a[i] * b[i];
        const double perr = std::fma(a[i], b[i], -p);
        const auto [t, serr] = detail::two_sum(s, p);
        s = t;
        c += serr + perr;
    }
    return s + c;
}

[[nodiscard]] inline double accurate_sum(std::span<const double> a) {
    double s = 0.0;
    double c = 0.0;
    for (double v : a) {
        const auto [t, e] = detail::two_sum(s, v);
        s = t;
        c += e;
    }
    return s + c;
}

/// (hi + lo) / d with one correction step; returns the exact quotient whenever it is representable
/// and hi + lo carries it to well beyond double precision.
[[nodiscard]] inline double accurate_divide(double numerator_hi, double numerator_lo, double d) noexcept {
    const double q = numerator_hi / d;
    const double r = std::fma(-q, d, numerator_hi) + numerator_lo;
    return q + r / d;
}

/// sum_i w_i * v_i / total with the weighted sum carried in double-double.
[[nodiscard]] inline double accurate_weighted_mean(std::span<const double> weights, std::span<const double> values,
                                                   double total) {
    if (weights.size() != values.size()) throw std::invalid_argument("accurate_weighted_mean: length mismatch");
    double s = 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double p = weights[i] * values[i];
        const double perr = std::fma(weights[i], values[i], -p);
        const auto [t, serr] = detail::two_sum(s, p);
        s = t;
        c += serr + perr;
    }
    const auto [hi, lo] = detail::two_sum(s, c);
    return accurate_divide(hi, lo, total);
}

[[nodiscard]] inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    return accurate_sum(v) / static_cast<double>(v.size());
}

/// Unbiased sample variance (n - 1 denominator); 0 for a single value.
[[nodiscard]] inline double sample_variance(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("sample_variance: empty input");
    if (v.size() == 1) return 0.0;
    const double mu = mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mu) * (v[i] - mu);
    return accurate_sum(sq) / static_cast<double>(v.size() - 1);
}

}  // namespace nnw
