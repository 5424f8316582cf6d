#pragma once

// Merge-and-reduce streaming for linear/affine subspace and k-means coresets.
//
// Epoch h reads 2^h points at precision gamma = eps/(10h). Whenever the buffer
// holds 2 * CoresetSize(gamma) points it is reduced and carried up a binary
// counter of buckets; each carry re-reduces the union and adds the offsets.
// At the end of an epoch the live buckets are folded into one summary S_h.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "tinycore/kmeans_coreset.hpp"
#include "tinycore/subspace_coreset.hpp"

namespace tinycore {

enum class StreamKind { linear, affine, kmeans };

struct StreamConfig {
    StreamKind kind = StreamKind::linear;
    int j = 1;        // subspace dimension (linear / affine)
    Index k = 1;      // centers (kmeans)
    double eps = 0.5;
    double delta = 0.1;
    std::uint64_t seed = 0;
    SensitivityConstants constants{};
};

struct StreamStats {
    std::int64_t points_seen = 0;
    std::int64_t reduces = 0;
    int max_depth = 0;                // most reduces any input point went through
    std::int64_t live_points = 0;     // rows held right now (buffer + buckets + summaries)
    std::int64_t peak_live_points = 0;
    std::int64_t flushes_this_epoch = 0;
};

// (1 + eps/(10h))^h, the accumulated slack of one epoch.
inline double epoch_slack(double eps, int h) { return std::pow(1.0 + eps / (10.0 * h), h); }

class MergeReduceStream {
public:
    struct Bucket {
        Coreset summary;  // carries its own offset
        int depth = 0;
    };

    explicit MergeReduceStream(StreamConfig cfg) : cfg_(cfg) {
        detail::require(cfg_.eps > 0.0 && cfg_.eps <= 1.0, "stream: eps must lie in (0, 1]");
        detail::require(cfg_.delta > 0.0 && cfg_.delta < 1.0, "stream: delta must lie in (0, 1)");
        if (cfg_.kind == StreamKind::kmeans) detail::require(cfg_.k >= 1, "stream: k must be >= 1");
        else detail::require(cfg_.j >= 1, "stream: j must be >= 1");
        start_epoch(1);
    }

    const StreamConfig& config() const { return cfg_; }
    int epoch() const { return h_; }
    double gamma() const { return cfg_.eps / (10.0 * h_); }
    Index dim() const { return dim_.value_or(0); }
    const StreamStats& stats() const { return stats_; }
    std::int64_t buffered() const { return static_cast<std::int64_t>(buffer_.size()); }
    std::int64_t constructions() const { return construction_ - 2; }

    // Rows the reducer targets at the current precision.
    std::int64_t coreset_size() const { return coreset_size(gamma()); }

    std::int64_t coreset_size(double precision) const {
        switch (cfg_.kind) {
            case StreamKind::linear:
                return coreset_size_linear(cfg_.j, precision);
            case StreamKind::affine:
                return 2 * coreset_size_linear(cfg_.j, precision);
            case StreamKind::kmeans: {
                // A-priori total sensitivity bound c_s (beta k + 1): the cluster
                // terms sum to the number of clusters, the distance terms to 1.
                const SensitivityConstants& c = cfg_.constants;
                const double total = c.c_s * (static_cast<double>(c.beta) * static_cast<double>(cfg_.k) + 1.0);
                const std::int64_t vc = kmeans_dim_bound(std::max<Index>(dim(), 1), cfg_.k, c.c_dim);
                return vc_sample_size(total, vc, precision, cfg_.delta, c.c_vc);
            }
        }
        return 1;
    }

    // Occupied bucket levels in the current epoch, lowest first (bit i = level i+1).
    std::uint64_t occupied_levels() const {
        std::uint64_t mask = 0;
        for (std::size_t i = 0; i < buckets_.size() && i < 64; ++i)
            if (buckets_[i]) mask |= std::uint64_t{1} << i;
        return mask;
    }

    std::size_t summaries() const { return past_.size(); }

    void insert(const Vector& point) {
        if (!dim_) {
            detail::require_input(point.size() >= 1, "stream: points must have dimension >= 1");
            dim_ = point.size();
            if (cfg_.kind != StreamKind::kmeans)
                detail::require(static_cast<Index>(cfg_.j) <= *dim_ - 1, "stream: j must be <= d - 1");
        }
        if (point.size() != *dim_) throw InvalidInput("stream: point dimension does not match the stream");
        detail::require_input(point.allFinite(), "stream: point coordinates must be finite");
        buffer_.push_back(point);
        ++stats_.points_seen;
        ++in_epoch_;
        ++stats_.live_points;
        stats_.peak_live_points = std::max(stats_.peak_live_points, stats_.live_points);
        if (static_cast<std::int64_t>(buffer_.size()) >= 2 * coreset_size()) flush();
        if (in_epoch_ >= (std::int64_t{1} << std::min(h_, 62))) end_epoch();
    }

    // Union of every summary and the raw buffer, offsets added, no final reduce.
    Coreset snapshot() const {
        if (stats_.points_seen == 0) throw EmptyState("stream: no points have been inserted");
        std::optional<Coreset> all;
        auto add = [&](const Coreset& c) { all = all ? merge(*all, c) : c; };
        for (const Bucket& b : past_) add(b.summary);
        for (const auto& b : buckets_)
            if (b) add(b->summary);
        if (!buffer_.empty()) add(buffer_coreset());
        return *all;
    }

    // One reduce at the full eps over the snapshot.
    Coreset query() const { return reduce(snapshot(), cfg_.eps, static_cast<std::uint64_t>(construction_)); }

    // Every point fed so far is represented with unit weight and zero offset
    // while nothing has been reduced yet.
    bool exact() const { return stats_.reduces == 0; }

private:
    Coreset buffer_coreset() const {
        Matrix rows(static_cast<Index>(buffer_.size()), *dim_);
        for (std::size_t i = 0; i < buffer_.size(); ++i) rows.row(static_cast<Index>(i)) = buffer_[i].transpose();
        return Coreset(std::move(rows), Vector::Ones(static_cast<Index>(buffer_.size())), 0.0);
    }

    // The input's offset is carried over on top of whatever the reduce adds.
    Coreset reduce(const Coreset& in, double precision, std::uint64_t construction) const {
        const PointSet ps(in.points, in.weights);
        Coreset out;
        switch (cfg_.kind) {
            case StreamKind::linear:
                out = linear_subspace_coreset(ps, cfg_.j, precision);
                break;
            case StreamKind::affine:
                out = affine_subspace_coreset_weighted(ps, cfg_.j, precision);
                break;
            case StreamKind::kmeans: {
                const double jj = static_cast<double>(construction);
                const double budget = cfg_.delta / (jj * jj);
                const Index k = std::min<Index>(cfg_.k, ps.size());
                out = kmeans_coreset(ps, k, precision, budget, mix_seed(cfg_.seed, construction), cfg_.constants);
                break;
            }
        }
        out.delta += in.delta;
        return out;
    }

    Bucket reduce_counted(const Coreset& in, int depth) {
        Bucket b{reduce(in, gamma(), static_cast<std::uint64_t>(construction_)), depth + 1};
        ++construction_;
        ++stats_.reduces;
        stats_.max_depth = std::max(stats_.max_depth, b.depth);
        return b;
    }

    void flush() {
        Bucket t = reduce_counted(buffer_coreset(), 0);
        buffer_.clear();
        std::size_t i = 0;
        while (i < buckets_.size() && buckets_[i]) {
            t = reduce_counted(merge(t.summary, buckets_[i]->summary), std::max(t.depth, buckets_[i]->depth));
            buckets_[i].reset();
            ++i;
        }
        if (i == buckets_.size()) buckets_.emplace_back();
        buckets_[i] = std::move(t);
        ++stats_.flushes_this_epoch;
        recount();
    }

    void end_epoch() {
        std::optional<Bucket> folded;
        for (auto& b : buckets_) {
            if (!b) continue;
            if (!folded) {
                folded = std::move(*b);
            } else {
                folded = reduce_counted(merge(folded->summary, b->summary), std::max(folded->depth, b->depth));
            }
            b.reset();
        }
        if (folded) past_.push_back(std::move(*folded));
        start_epoch(h_ + 1);
        recount();
    }

    void start_epoch(int h) {
        h_ = h;
        in_epoch_ = 0;
        buckets_.clear();
        stats_.flushes_this_epoch = 0;
    }

    void recount() {
        std::int64_t live = static_cast<std::int64_t>(buffer_.size());
        for (const Bucket& b : past_) live += b.summary.size();
        for (const auto& b : buckets_)
            if (b) live += b->summary.size();
        stats_.live_points = live;
        stats_.peak_live_points = std::max(stats_.peak_live_points, live);
    }

    StreamConfig cfg_;
    std::optional<Index> dim_;
    int h_ = 1;
    std::int64_t in_epoch_ = 0;
    std::int64_t construction_ = 2;  // failure budget of construction j is delta / j^2
    std::vector<Vector> buffer_;
    std::vector<std::optional<Bucket>> buckets_;
    std::vector<Bucket> past_;
    StreamStats stats_;
};

}  // namespace tinycore
