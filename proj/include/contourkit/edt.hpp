#pragma once

#include <cstdint>
#include <vector>

namespace contourkit {

/// Sentinel for "no site in range". Any true squared distance on grids up to
/// 16k x 16k stays far below this.
constexpr std::int64_t kEdtInf = std::int64_t{1} << 30;

namespace detail {

/// 1D lower-envelope distance transform (Felzenszwalb & Huttenlocher):
/// d[q] = min_p (q-p)^2 + f[p]. Envelope boundaries are rationals num/den with
/// den > 0; comparisons use exact 64-bit cross products, so results are exact
/// integers and tie behavior is platform-independent.
inline void dt_1d(const std::int64_t* f, int n, std::int64_t* d,
                  int* v, std::int64_t* zn, std::int64_t* zd) {
    int k = 0;
    v[0] = 0;
    zd[0] = 0; // boundary 0 = -inf
    zd[1] = 0;
    for (int q = 1; q < n; ++q) {
        std::int64_t s_num = 0;
        std::int64_t s_den = 1;
        for (;;) {
            const std::int64_t p = v[k];
            s_num = (f[q] + static_cast<std::int64_t>(q) * q) - (f[p] + p * p);
            s_den = 2 * (q - p);
            // pop while s <= z[k]; z[0] is -inf so the bottom never pops
            if (k > 0 && s_num * zd[k] <= zn[k] * s_den) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        zn[k] = s_num;
        zd[k] = s_den;
        zd[k + 1] = 0; // +inf
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (zd[k + 1] != 0 && zn[k + 1] < static_cast<std::int64_t>(q) * zd[k + 1]) ++k;
        const std::int64_t dq = q - static_cast<std::int64_t>(v[k]);
        d[q] = dq * dq + f[v[k]];
    }
}

} // namespace detail

/// Exact squared Euclidean distance from every cell of a w x h grid to the
/// nearest site (site[i] != 0). Cells with no reachable site hold >= kEdtInf.
inline std::vector<std::int64_t> squared_edt(int w, int h, const std::uint8_t* site) {
    std::vector<std::int64_t> dist(static_cast<std::size_t>(w) * h);
    const int n = std::max(w, h);
    std::vector<std::int64_t> f(n), d(n), zn(n + 1), zd(n + 1);
    std::vector<int> v(n);

    // columns: distance along y
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            f[y] = site[static_cast<std::size_t>(y) * w + x] ? 0 : kEdtInf;
        }
        detail::dt_1d(f.data(), h, d.data(), v.data(), zn.data(), zd.data());
        for (int y = 0; y < h; ++y) dist[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    // rows: combine with distance along x
    for (int y = 0; y < h; ++y) {
        std::int64_t* row = dist.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) f[x] = row[x];
        detail::dt_1d(f.data(), w, d.data(), v.data(), zn.data(), zd.data());
        for (int x = 0; x < w; ++x) row[x] = d[x];
    }
    return dist;
}

} // namespace contourkit
