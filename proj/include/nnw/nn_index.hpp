#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnw/core.hpp"
#include "nnw/parallel.hpp"

namespace nnw {

struct Neighbor {
    std::size_t index;
    double distance;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact Euclidean k-NN over an immutable point set.
///
/// Neighbors are ordered by distance. Points at exactly equal distance are
/// ordered by a key hashed from (tie_seed, query coordinates, point index), which
/// acts as a pseudo-random permutation of the tied points that is stateless and
/// therefore identical across threads and runs. The tree and the brute-force scan
/// compute squared distances with the same arithmetic, so both paths agree
/// bit-for-bit, ties included.
class NNIndex {
public:
    static constexpr std::size_t tree_max_dim = 16;
    static constexpr std::size_t tree_min_points = 256;
    static constexpr std::size_t leaf_size = 8;

    NNIndex(PointSet points, std::uint64_t tie_seed)
        : points_(std::make_shared<const PointSet>(std::move(points))), tie_seed_(tie_seed) {
        points_->validate();
        if (points_->dim() <= tree_max_dim && points_->size() >= tree_min_points) build_tree();
    }

    [[nodiscard]] const PointSet& points() const noexcept { return *points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_->size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return points_->dim(); }
    [[nodiscard]] std::uint64_t tie_seed() const noexcept { return tie_seed_; }
    [[nodiscard]] bool uses_tree() const noexcept { return !nodes_.empty(); }

    [[nodiscard]] std::vector<Neighbor> query_knn(std::span<const double> x, std::size_t k) const {
        check_query(x);
        if (k == 0) throw std::invalid_argument("query_knn: k must be >= 1");
        if (k > size())
            throw std::invalid_argument("query_knn: k = " + std::to_string(k) + " exceeds point count " +
                                        std::to_string(size()));
        Search s(*this, x, k);
        if (uses_tree())
            search_node(0, s);
        else
            for (std::size_t i = 0; i < size(); ++i) s.offer(i, squared_distance(x, (*points_)[i]));
        std::vector<Neighbor> out;
        out.reserve(s.best.size());
        for (const auto& c : s.best) out.push_back({c.index, std::sqrt(c.d2)});
        return out;
    }

    /// Index of the nearest point (tie policy applied).
    [[nodiscard]] std::size_t nearest(std::span<const double> x) const {
        check_query(x);
        Search s(*this, x, 1);
        if (uses_tree())
            search_node(0, s);
        else
            for (std::size_t i = 0; i < size(); ++i) s.offer(i, squared_distance(x, (*points_)[i]));
        return s.best.front().index;
    }

    [[nodiscard]] static double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
        double acc = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) {
            const double d = a[c] - b[c];
            acc += d * d;
        }
        return acc;
    }

    /// Secondary ordering key among points at equal distance from x.
    [[nodiscard]] static std::uint64_t tie_key(std::uint64_t tie_seed, std::uint64_t query_hash,
                                               std::size_t index) noexcept {
        return mix64(mix64(tie_seed, query_hash), static_cast<std::uint64_t>(index));
    }

private:
    struct Node {
        std::size_t begin = 0;  // range in order_ for leaves
        std::size_t end = 0;
        std::size_t split_dim = 0;
        double split_value = 0.0;
        std::size_t left = 0;  // children; 0 marks a leaf (root is never a child)
        std::size_t right = 0;
    };

    struct Candidate {
        double d2;
        std::size_t index;
        mutable std::uint64_t key;
        mutable bool has_key;
    };

    struct Search {
        Search(const NNIndex& idx, std::span<const double> q, std::size_t k_)
            : owner(idx), x(q), k(k_), query_hash(hash_point(q)) {
            best.reserve(k + 1);
        }

        std::uint64_t key_of(const Candidate& c) const {
            if (!c.has_key) {
                c.key = tie_key(owner.tie_seed_, query_hash, c.index);
                c.has_key = true;
            }
            return c.key;
        }

        bool less(const Candidate& a, const Candidate& b) const {
            if (a.d2 != b.d2) return a.d2 < b.d2;
            const std::uint64_t ka = key_of(a);
            const std::uint64_t kb = key_of(b);
            if (ka != kb) return ka < kb;
            return a.index < b.index;
        }

        [[nodiscard]] double worst() const noexcept {
            return best.size() < k ? std::numeric_limits<double>::infinity() : best.back().d2;
        }

        void offer(std::size_t index, double d2) {
            if (best.size() == k && d2 > best.back().d2) return;
            Candidate c{d2, index, 0, false};
            if (best.size() == k && !less(c, best.back())) return;
            auto pos = std::upper_bound(best.begin(), best.end(), c,
                                        [this](const Candidate& a, const Candidate& b) { return less(a, b); });
            best.insert(pos, c);
            if (best.size() > k) best.pop_back();
        }

        const NNIndex& owner;
        std::span<const double> x;
        std::size_t k;
        std::uint64_t query_hash;
        std::vector<Candidate> best;
    };

    void check_query(std::span<const double> x) const {
        if (x.size() != dim())
            throw std::invalid_argument("query: point dimension " + std::to_string(x.size()) +
                                        " != index dimension " + std::to_string(dim()));
        for (double v : x)
            if (!std::isfinite(v)) throw std::invalid_argument("query: non-finite coordinate");
    }

    void build_tree() {
        order_.resize(size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        nodes_.reserve(2 * size() / leaf_size + 1);
        build_node(0, size());
        const std::size_t p = dim();
        packed_.resize(size() * p);
        for (std::size_t i = 0; i < size(); ++i) {
            const auto src = (*points_)[order_[i]];
            std::copy(src.begin(), src.end(), packed_.begin() + static_cast<std::ptrdiff_t>(i * p));
        }
    }

    std::size_t build_node(std::size_t begin, std::size_t end) {
        const std::size_t id = nodes_.size();
        nodes_.push_back({begin, end, 0, 0.0, 0, 0});
        if (end - begin <= leaf_size) return id;

        const std::size_t p = dim();
        std::size_t best_dim = 0;
        double best_spread = -1.0;
        for (std::size_t c = 0; c < p; ++c) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t i = begin; i < end; ++i) {
                const double v = (*points_)[order_[i]][c];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                best_dim = c;
            }
        }
        if (best_spread <= 0.0) return id;  // all points identical: keep as a leaf

        const std::size_t mid = begin + (end - begin) / 2;
        auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
        std::nth_element(first, order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                             return (*points_)[a][best_dim] < (*points_)[b][best_dim];
                         });
        const double split = (*points_)[order_[mid]][best_dim];
        const std::size_t left = build_node(begin, mid);
        const std::size_t right = build_node(mid, end);
        Node& n = nodes_[id];
        n.split_dim = best_dim;
        n.split_value = split;
        n.left = left;
        n.right = right;
        return id;
    }

    void search_node(std::size_t id, Search& s) const {
        const Node& n = nodes_[id];
        if (n.left == 0) {
            const std::size_t p = dim();
            for (std::size_t i = n.begin; i < n.end; ++i) {
                const std::span<const double> pt(packed_.data() + i * p, p);
                s.offer(order_[i], squared_distance(s.x, pt));
            }
            return;
        }
        // left holds coordinates <= split, right holds >= split
        const double diff = s.x[n.split_dim] - n.split_value;
        const std::size_t near = diff < 0.0 ? n.left : n.right;
        const std::size_t far = diff < 0.0 ? n.right : n.left;
        search_node(near, s);
        if (diff * diff <= s.worst()) search_node(far, s);
    }

    std::shared_ptr<const PointSet> points_;
    std::uint64_t tie_seed_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> order_;
    std::vector<double> packed_;
};

[[nodiscard]] inline NNIndex build_index(PointSet points, std::uint64_t tie_seed) {
    return NNIndex(std::move(points), tie_seed);
}

/// Nearest indexed point for every query row.
[[nodiscard]] inline std::vector<std::size_t> assign_nearest(const NNIndex& index, const PointSet& queries,
                                                             unsigned threads = 1) {
    if (queries.dim() != index.dim())
        throw std::invalid_argument("assign_nearest: query dimension " + std::to_string(queries.dim()) +
                                    " != index dimension " + std::to_string(index.dim()));
    std::vector<std::size_t> out(queries.size());
    parallel_chunks(queries.size(), 8192, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = index.nearest(queries[i]);
    });
    return out;
}

}  // namespace nnw
