#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <vector>

#include "contourkit/errors.hpp"

namespace contourkit {

/// Axis-aligned pixel box, min-inclusive / max-exclusive.
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    bool operator==(const BoundingBox&) const = default;
};

/// W x H bitmap, bit-packed row-major (1 = foreground). Value type: copy is a
/// deep copy, operations never mutate their inputs.
class BinaryMask {
public:
    BinaryMask() = default;

    BinaryMask(int width, int height)
        : width_(width),
          height_(height),
          row_words_((width + 63) / 64),
          words_(static_cast<std::size_t>(row_words_) * height, 0) {
        if (width < 1 || height < 1) {
            throw MaskError("BinaryMask dimensions must be at least 1x1");
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool same_dims(const BinaryMask& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool get(int x, int y) const {
        return (words_[word_index(x, y)] >> (x & 63)) & 1u;
    }

    void set(int x, int y, bool value) {
        const std::uint64_t bit = std::uint64_t{1} << (x & 63);
        if (value) {
            words_[word_index(x, y)] |= bit;
        } else {
            words_[word_index(x, y)] &= ~bit;
        }
    }

    /// Number of foreground pixels.
    std::int64_t count() const {
        std::int64_t n = 0;
        for (std::uint64_t w : words_) n += std::popcount(w);
        return n;
    }

    bool empty() const {
        for (std::uint64_t w : words_) {
            if (w != 0) return false;
        }
        return true;
    }

    bool operator==(const BinaryMask& other) const {
        return width_ == other.width_ && height_ == other.height_ && words_ == other.words_;
    }
    bool operator!=(const BinaryMask& other) const { return !(*this == other); }

    /// Tight foreground bounding box. Throws MaskError when the mask is empty.
    BoundingBox bounding_box() const {
        int ymin = -1, ymax = -1;
        for (int y = 0; y < height_; ++y) {
            if (!row_empty(y)) {
                if (ymin < 0) ymin = y;
                ymax = y;
            }
        }
        if (ymin < 0) throw MaskError("empty mask has no bbox");
        int xmin = width_, xmax = -1;
        for (int y = ymin; y <= ymax; ++y) {
            const std::uint64_t* row = row_ptr(y);
            for (int w = 0; w < row_words_; ++w) {
                if (row[w] == 0) continue;
                xmin = std::min(xmin, w * 64 + std::countr_zero(row[w]));
                break;
            }
            for (int w = row_words_ - 1; w >= 0; --w) {
                if (row[w] == 0) continue;
                xmax = std::max(xmax, w * 64 + 63 - std::countl_zero(row[w]));
                break;
            }
        }
        return BoundingBox{xmin, ymin, xmax + 1, ymax + 1};
    }

    /// Foreground min/max column of one row; returns false when the row is empty.
    bool row_extent(int y, int& xmin, int& xmax) const {
        const std::uint64_t* row = row_ptr(y);
        xmin = -1;
        for (int w = 0; w < row_words_; ++w) {
            if (row[w] == 0) continue;
            xmin = w * 64 + std::countr_zero(row[w]);
            break;
        }
        if (xmin < 0) return false;
        for (int w = row_words_ - 1; w >= 0; --w) {
            if (row[w] == 0) continue;
            xmax = w * 64 + 63 - std::countl_zero(row[w]);
            break;
        }
        return true;
    }

    /// Unpacks one row into bytes (0/1).
    void row_to_bytes(int y, std::uint8_t* out) const {
        for (int x = 0; x < width_; ++x) out[x] = get(x, y) ? 1 : 0;
    }

    static BinaryMask from_bytes(int width, int height, const std::uint8_t* data) {
        BinaryMask m(width, height);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                if (data[static_cast<std::size_t>(y) * width + x]) m.set(x, y, true);
            }
        }
        return m;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

private:
    std::size_t word_index(int x, int y) const {
        return static_cast<std::size_t>(y) * row_words_ + (x >> 6);
    }
    const std::uint64_t* row_ptr(int y) const {
        return words_.data() + static_cast<std::size_t>(y) * row_words_;
    }
    bool row_empty(int y) const {
        const std::uint64_t* row = row_ptr(y);
        for (int w = 0; w < row_words_; ++w) {
            if (row[w] != 0) return false;
        }
        return true;
    }

    int width_ = 0;
    int height_ = 0;
    int row_words_ = 0;
    std::vector<std::uint64_t> words_;

    friend BinaryMask mask_and(const BinaryMask&, const BinaryMask&);
    friend BinaryMask mask_or(const BinaryMask&, const BinaryMask&);
    friend BinaryMask mask_subtract(const BinaryMask&, const BinaryMask&);
    friend std::int64_t intersection_count(const BinaryMask&, const BinaryMask&);
    friend std::int64_t union_count(const BinaryMask&, const BinaryMask&);
};

inline void require_same_dims(const BinaryMask& a, const BinaryMask& b, const char* op) {
    if (!a.same_dims(b)) {
        throw MaskError(std::string(op) + ": mask dimensions differ");
    }
}

inline BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "mask_and");
    BinaryMask out = a;
    for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] &= b.words_[i];
    return out;
}

inline BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "mask_or");
    BinaryMask out = a;
    for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] |= b.words_[i];
    return out;
}

inline BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "mask_subtract");
    BinaryMask out = a;
    for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] &= ~b.words_[i];
    return out;
}

inline std::int64_t intersection_count(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "intersection_count");
    std::int64_t n = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) n += std::popcount(a.words_[i] & b.words_[i]);
    return n;
}

inline std::int64_t union_count(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "union_count");
    std::int64_t n = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) n += std::popcount(a.words_[i] | b.words_[i]);
    return n;
}

/// |a n b| / |a u b|; 1.0 when both masks are empty.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "iou");
    const std::int64_t u = union_count(a, b);
    if (u == 0) return 1.0;
    return static_cast<double>(intersection_count(a, b)) / static_cast<double>(u);
}

inline BoundingBox bounding_box(const BinaryMask& m) { return m.bounding_box(); }

/// Translates foreground by (dx, dy); pixels leaving the frame are dropped.
inline BinaryMask shift_clipped(const BinaryMask& m, int dx, int dy) {
    BinaryMask out(m.width(), m.height());
    if (m.empty()) return out;
    const BoundingBox box = m.bounding_box();
    const int y_lo = std::max(box.y0 + dy, 0);
    const int y_hi = std::min(box.y1 + dy, m.height());
    const int x_lo = std::max(box.x0 + dx, 0);
    const int x_hi = std::min(box.x1 + dx, m.width());
    for (int y = y_lo; y < y_hi; ++y) {
        for (int x = x_lo; x < x_hi; ++x) {
            if (m.get(x - dx, y - dy)) out.set(x, y, true);
        }
    }
    return out;
}

/// Mirrors the mask about its vertical center line.
inline BinaryMask hflip(const BinaryMask& m) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        int xmin, xmax;
        if (!m.row_extent(y, xmin, xmax)) continue;
        for (int x = xmin; x <= xmax; ++x) {
            if (m.get(x, y)) out.set(m.width() - 1 - x, y, true);
        }
    }
    return out;
}

/// W x H raster of probabilities in [0, 1]; the segmenter output currency.
class ProbabilityMask {
public:
    ProbabilityMask() = default;

    ProbabilityMask(int width, int height, float fill = 0.0f)
        : width_(width), height_(height),
          values_(static_cast<std::size_t>(width) * height, fill) {
        if (width < 1 || height < 1) {
            throw MaskError("ProbabilityMask dimensions must be at least 1x1");
        }
        if (fill < 0.0f || fill > 1.0f) throw MaskError("probability outside [0,1]");
    }

    int width() const { return width_; }
    int height() const { return height_; }

    float at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

    void set(int x, int y, float v) {
        if (v < 0.0f || v > 1.0f) throw MaskError("probability outside [0,1]");
        values_[static_cast<std::size_t>(y) * width_ + x] = v;
    }

    const std::vector<float>& values() const { return values_; }

    bool operator==(const ProbabilityMask& other) const {
        return width_ == other.width_ && height_ == other.height_ && values_ == other.values_;
    }

    /// Binarize: foreground iff p >= threshold.
    BinaryMask threshold(double t) const {
        BinaryMask out(width_, height_);
        for (int y = 0; y < height_; ++y) {
            for (int x = 0; x < width_; ++x) {
                if (at(x, y) >= t) out.set(x, y, true);
            }
        }
        return out;
    }

    static ProbabilityMask from_binary(const BinaryMask& m) {
        ProbabilityMask out(m.width(), m.height());
        for (int y = 0; y < m.height(); ++y) {
            for (int x = 0; x < m.width(); ++x) {
                if (m.get(x, y)) out.set(x, y, 1.0f);
            }
        }
        return out;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
};

inline ProbabilityMask hflip(const ProbabilityMask& m) {
    ProbabilityMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            out.set(m.width() - 1 - x, y, m.at(x, y));
        }
    }
    return out;
}

/// Per-pixel mean of two probability masks.
inline ProbabilityMask average(const ProbabilityMask& a, const ProbabilityMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw MaskError("average: mask dimensions differ");
    }
    ProbabilityMask out(a.width(), a.height());
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            out.set(x, y, 0.5f * (a.at(x, y) + b.at(x, y)));
        }
    }
    return out;
}

} // namespace contourkit
