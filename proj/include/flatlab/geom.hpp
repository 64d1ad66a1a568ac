#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <vector>

#include "flatlab/curve.hpp"

namespace flatlab {

struct SizeWidthReport {
    QuadNum size_lower{0};
    QuadNum size_upper{0};
    QuadNum width{0};   // spread across vertical leaves
    QuadNum height{0};  // spread across horizontal leaves
    bool size_exact{false};  // bounds bracket the exact breakpoint diameter
};

namespace detail {

// Andrew's monotone chain, exact.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> p) {
    std::sort(p.begin(), p.end(), lex_less);
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return p;
    std::vector<Vec2> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && orient(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && orient(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return h;
}

// Hulls of aligned power-of-two blocks of a point list (leaves of `block`
// points); a range is the hull of the blocks it covers plus its partial ends.
class BlockHulls {
public:
    BlockHulls(const std::vector<Vec2>& pts, std::size_t block) : pts_(pts), block_(block) {
        std::vector<std::vector<Vec2>> level;
        for (std::size_t b = 0; b * block_ < pts.size(); ++b) {
            auto first = pts.begin() + static_cast<std::ptrdiff_t>(b * block_);
            auto last = pts.begin() + static_cast<std::ptrdiff_t>(std::min(pts.size(), (b + 1) * block_));
            level.push_back(convex_hull(std::vector<Vec2>(first, last)));
        }
        levels_.push_back(std::move(level));
        while (levels_.back().size() > 1) {
            const auto& below = levels_.back();
            std::vector<std::vector<Vec2>> up;
            for (std::size_t i = 0; i + 1 < below.size(); i += 2) {
                std::vector<Vec2> u = below[i];
                u.insert(u.end(), below[i + 1].begin(), below[i + 1].end());
                up.push_back(convex_hull(std::move(u)));
            }
            levels_.push_back(std::move(up));
        }
    }

    // points lo..hi inclusive
    std::vector<Vec2> range(std::size_t lo, std::size_t hi) const {
        std::vector<Vec2> out;
        std::size_t i = lo;
        while (i <= hi) {
            if (i % block_ != 0 || i + block_ - 1 > hi) {
                out.push_back(pts_[i++]);
                continue;
            }
            // largest aligned block starting at i inside the range
            std::size_t b = i / block_, lvl = 0, span = block_;
            while (lvl + 1 < levels_.size() && b % 2 == 0 && (b / 2) < levels_[lvl + 1].size() && i + 2 * span - 1 <= hi) {
                b /= 2;
                span *= 2;
                ++lvl;
            }
            const auto& h = levels_[lvl][b];
            out.insert(out.end(), h.begin(), h.end());
            i += span;
        }
        return out;
    }

private:
    const std::vector<Vec2>& pts_;
    std::size_t block_;
    std::vector<std::vector<std::vector<Vec2>>> levels_;
};

inline QuadNum diameter2(const std::vector<Vec2>& pts) {
    auto h = convex_hull(pts);
    QuadNum best{0};
    for (std::size_t i = 0; i < h.size(); ++i)
        for (std::size_t j = i + 1; j < h.size(); ++j) best = max(best, norm2(h[i] - h[j]));
    return best;
}

// Largest max-min of a coordinate over windows [i, i + span] of pts, i < count.
template <class Coord>
QuadNum sliding_spread(const std::vector<Vec2>& pts, std::size_t count, std::size_t span, Coord coord) {
    std::deque<std::size_t> lo, hi;
    QuadNum best{0};
    std::size_t j = 0;
    for (std::size_t i = 0; i < count; ++i) {
        while (j <= i + span && j < pts.size()) {
            while (!lo.empty() && !(coord(pts[lo.back()]) < coord(pts[j]))) lo.pop_back();
            while (!hi.empty() && !(coord(pts[j]) < coord(pts[hi.back()]))) hi.pop_back();
            lo.push_back(j);
            hi.push_back(j);
            ++j;
        }
        while (lo.front() < i) lo.pop_front();
        while (hi.front() < i) hi.pop_front();
        best = max(best, coord(pts[hi.front()]) - coord(pts[lo.front()]));
    }
    return best;
}

inline QuadNum sqrt_lower(const QuadNum& x) {
    if (x.sign() == 0) return QuadNum(0);
    return QuadNum(sqrt_bounds(x, 40).lo);
}

inline QuadNum sqrt_upper(const QuadNum& x) {
    if (x.sign() == 0) return QuadNum(0);
    return QuadNum(sqrt_bounds(x, 40).hi);
}

}  // namespace detail

/// Size and width of a closed curve on a flat torus, where the universal cover
/// is the plane: one period of the lift, maximized over breakpoint basepoints.
/// Width and height are exact; size is exact up to the square root when the
/// curve has at most `exact_limit` segments, and bracketed otherwise.
inline SizeWidthReport plane_size_width(const PLCurve& c, std::size_t exact_limit = 256, std::size_t samples = 64) {
    SizeWidthReport r;
    std::size_t n = c.size();
    auto d = develop(c, 0, 2);
    const auto& pts = d.points;
    r.width = detail::sliding_spread(pts, n, n, [](const Vec2& v) -> const QuadNum& { return v.x; });
    r.height = detail::sliding_spread(pts, n, n, [](const Vec2& v) -> const QuadNum& { return v.y; });
    detail::BlockHulls blocks(pts, 32);
    auto window = [&](std::size_t i, std::size_t last) { return detail::diameter2(blocks.range(i, last + n)); };
    QuadNum lower2{0};
    if (n <= exact_limit) {
        for (std::size_t i = 0; i < n; ++i) lower2 = max(lower2, window(i, i));
        r.size_lower = detail::sqrt_lower(lower2);
        r.size_upper = detail::sqrt_upper(lower2);
        r.size_exact = true;
    } else {
        // basepoints in a block share a superset of their windows
        std::size_t step = std::max<std::size_t>(1, (n + samples - 1) / samples);
        QuadNum upper2{0};
        for (std::size_t i = 0; i < n; i += step) {
            lower2 = max(lower2, window(i, i));
            upper2 = max(upper2, window(i, std::min(n - 1, i + step - 1)));
        }
        r.size_lower = detail::sqrt_lower(lower2);
        r.size_upper = detail::sqrt_upper(upper2);
    }
    auto len = curve_length(c);
    if (QuadNum(len.hi) < r.size_upper) r.size_upper = QuadNum(len.hi);
    if (r.size_upper < r.size_lower) r.size_upper = r.size_lower;
    return r;
}

}  // namespace flatlab
