#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#if defined(__x86_64__) && defined(__GNUC__)
#include <immintrin.h>
#define CAPSEG_QS_X86 1
#endif

#include "capseg/error.hpp"
#include "capseg/superpixel.hpp"

// Floating-point results must not depend on which kernel runs, so this file
// is compiled with -ffp-contract=off and every kernel sums in the same order.

namespace capseg {

void validate(const QsParams& params) {
  if (!(params.kernel_size > 0)) throw Error(Errc::InvalidParam, "kernel_size must be > 0");
  if (!(params.max_dist > 0)) throw Error(Errc::InvalidParam, "max_dist must be > 0");
}

namespace {

constexpr int kMaxColorDist2 = 3 * 255 * 255;
constexpr int kLanes = 8;

// Pixels are packed as pairs of int16 so that one multiply-add over a pair of
// differences yields a sum of two squares.
inline std::uint32_t pack16(int lo, int hi) {
  return static_cast<std::uint32_t>(static_cast<std::uint16_t>(lo)) |
         (static_cast<std::uint32_t>(static_cast<std::uint16_t>(hi)) << 16);
}

inline std::int32_t pair_sq(std::uint32_t a, std::uint32_t b) {
  const int d0 = static_cast<std::int16_t>(a & 0xffff) - static_cast<std::int16_t>(b & 0xffff);
  const int d1 = static_cast<std::int16_t>(a >> 16) - static_cast<std::int16_t>(b >> 16);
  return d0 * d0 + d1 * d1;
}

// --- density -------------------------------------------------------------

struct DensityRow {
  const std::uint32_t* rg;  // (r, g)
  const std::uint32_t* b0;  // (b, 0)
  const double* space;      // spatial weight of each element
  double* density;          // receives each element's share
  int n;
};

// Element k lands in partial sum k % 8; the partials are reduced pairwise.
inline double reduce_lanes(const double* p) {
  return ((p[0] + p[1]) + (p[2] + p[3])) + ((p[4] + p[5]) + (p[6] + p[7]));
}

double density_row_scalar(const DensityRow& row, std::uint32_t qrg, std::uint32_t qb0,
                          const double* color) {
  double part[kLanes] = {};
  for (int k = 0; k < row.n; ++k) {
    const double v = row.space[k] * color[pair_sq(row.rg[k], qrg) + pair_sq(row.b0[k], qb0)];
    part[k % kLanes] += v;
    row.density[k] += v;
  }
  return reduce_lanes(part);
}

#ifdef CAPSEG_QS_X86
// Four elements starting at `at`; `count` < 4 only at the row end.
__attribute__((target("avx2"), always_inline)) inline void density_quad_avx2(
    const DensityRow& row, int at, int count, __m128i vrg, __m128i vb0, const double* color,
    __m256d& acc) {
  __m128i a, b;
  if (count == 4) {
    a = _mm_loadu_si128(reinterpret_cast<const __m128i*>(row.rg + at));
    b = _mm_loadu_si128(reinterpret_cast<const __m128i*>(row.b0 + at));
  } else {
    const __m128i live = _mm_cmpgt_epi32(_mm_set1_epi32(count), _mm_setr_epi32(0, 1, 2, 3));
    a = _mm_maskload_epi32(reinterpret_cast<const int*>(row.rg + at), live);
    b = _mm_maskload_epi32(reinterpret_cast<const int*>(row.b0 + at), live);
  }
  a = _mm_sub_epi16(a, vrg);
  b = _mm_sub_epi16(b, vb0);
  const __m128i c2 = _mm_add_epi32(_mm_madd_epi16(a, a), _mm_madd_epi16(b, b));
  if (count == 4) {
    const __m256d v =
        _mm256_mul_pd(_mm256_loadu_pd(row.space + at), _mm256_i32gather_pd(color, c2, 8));
    acc = _mm256_add_pd(acc, v);
    _mm256_storeu_pd(row.density + at, _mm256_add_pd(_mm256_loadu_pd(row.density + at), v));
  } else {
    const __m256i live =
        _mm256_cmpgt_epi64(_mm256_set1_epi64x(count), _mm256_setr_epi64x(0, 1, 2, 3));
    const __m256d space = _mm256_maskload_pd(row.space + at, live);
    const __m256d weight = _mm256_mask_i32gather_pd(_mm256_setzero_pd(), color, c2,
                                                    _mm256_castsi256_pd(live), 8);
    const __m256d v = _mm256_mul_pd(space, weight);
    acc = _mm256_add_pd(acc, v);
    _mm256_maskstore_pd(row.density + at, live,
                        _mm256_add_pd(_mm256_maskload_pd(row.density + at, live), v));
  }
}

__attribute__((target("avx2"))) double density_row_avx2(const DensityRow& row,
                                                        std::uint32_t qrg, std::uint32_t qb0,
                                                        const double* color) {
  const __m128i vrg = _mm_set1_epi32(static_cast<int>(qrg));
  const __m128i vb0 = _mm_set1_epi32(static_cast<int>(qb0));
  __m256d lo = _mm256_setzero_pd(), hi = _mm256_setzero_pd();
  int k = 0;
  for (; k + 8 <= row.n; k += 8) {
    density_quad_avx2(row, k, 4, vrg, vb0, color, lo);
    density_quad_avx2(row, k + 4, 4, vrg, vb0, color, hi);
  }
  const int rest = row.n - k;
  if (rest > 0) density_quad_avx2(row, k, std::min(rest, 4), vrg, vb0, color, lo);
  if (rest > 4) density_quad_avx2(row, k + 4, rest - 4, vrg, vb0, color, hi);
  alignas(32) double part[kLanes];
  _mm256_store_pd(part, lo);
  _mm256_store_pd(part + 4, hi);
  return reduce_lanes(part);
}

__attribute__((target("avx512f,avx512bw,avx512vl"))) double density_row_avx512(const DensityRow& row,
                                                                      std::uint32_t qrg,
                                                                      std::uint32_t qb0,
                                                                      const double* color) {
  const __m256i vrg = _mm256_set1_epi32(static_cast<int>(qrg));
  const __m256i vb0 = _mm256_set1_epi32(static_cast<int>(qb0));
  __m512d acc = _mm512_setzero_pd();
  for (int k = 0; k < row.n; k += 8) {
    const __mmask8 live = row.n - k >= 8 ? __mmask8(0xff) : __mmask8((1u << (row.n - k)) - 1u);
    const __m256i a = _mm256_sub_epi16(_mm256_maskz_loadu_epi32(live, row.rg + k), vrg);
    const __m256i b = _mm256_sub_epi16(_mm256_maskz_loadu_epi32(live, row.b0 + k), vb0);
    const __m256i c2 = _mm256_add_epi32(_mm256_madd_epi16(a, a), _mm256_madd_epi16(b, b));
    const __m512d weight = _mm512_mask_i32gather_pd(_mm512_setzero_pd(), live, c2, color, 8);
    const __m512d v = _mm512_mul_pd(_mm512_maskz_loadu_pd(live, row.space + k), weight);
    acc = _mm512_add_pd(acc, v);
    _mm512_mask_storeu_pd(row.density + k, live,
                          _mm512_add_pd(_mm512_maskz_loadu_pd(live, row.density + k), v));
  }
  alignas(64) double part[kLanes];
  _mm512_store_pd(part, acc);
  return reduce_lanes(part);
}
#endif

// --- link search ---------------------------------------------------------

struct LinkRow {
  const std::int32_t* rank;
  const std::uint32_t* rg;  // (r, g)
  const std::uint32_t* bx;  // (b, x)
  int n;
};

inline std::int32_t link_value(const LinkRow& row, int k, std::uint32_t qrg, std::uint32_t qbx) {
  return pair_sq(row.rg[k], qrg) + pair_sq(row.bx[k], qbx);
}

// Smallest dr^2 + dg^2 + db^2 + dx^2 over elements ranked above the query.
std::int32_t link_row_scalar(const LinkRow& row, std::int32_t ri, std::uint32_t qrg,
                             std::uint32_t qbx) {
  std::int32_t best = std::numeric_limits<std::int32_t>::max();
  for (int k = 0; k < row.n; ++k) {
    if (row.rank[k] > ri) best = std::min(best, link_value(row, k, qrg, qbx));
  }
  return best;
}

#ifdef CAPSEG_QS_X86
__attribute__((target("avx2"))) std::int32_t link_row_avx2(const LinkRow& row, std::int32_t ri,
                                                           std::uint32_t qrg, std::uint32_t qbx) {
  const __m256i big = _mm256_set1_epi32(std::numeric_limits<std::int32_t>::max());
  const __m256i vri = _mm256_set1_epi32(ri);
  const __m256i vrg = _mm256_set1_epi32(static_cast<int>(qrg));
  const __m256i vbx = _mm256_set1_epi32(static_cast<int>(qbx));
  const __m256i iota = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  __m256i best = big;
  for (int k = 0; k < row.n; k += 8) {
    const __m256i live = _mm256_cmpgt_epi32(_mm256_set1_epi32(row.n - k), iota);
    const __m256i a = _mm256_sub_epi16(
        _mm256_maskload_epi32(reinterpret_cast<const int*>(row.rg + k), live), vrg);
    const __m256i b = _mm256_sub_epi16(
        _mm256_maskload_epi32(reinterpret_cast<const int*>(row.bx + k), live), vbx);
    const __m256i d = _mm256_add_epi32(_mm256_madd_epi16(a, a), _mm256_madd_epi16(b, b));
    const __m256i above =
        _mm256_and_si256(live, _mm256_cmpgt_epi32(_mm256_maskload_epi32(row.rank + k, live), vri));
    best = _mm256_min_epi32(best, _mm256_blendv_epi8(big, d, above));
  }
  alignas(32) std::int32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), best);
  return *std::min_element(lanes, lanes + 8);
}

__attribute__((target("avx512f,avx512bw,avx512vl"))) std::int32_t link_row_avx512(const LinkRow& row,
                                                                         std::int32_t ri,
                                                                         std::uint32_t qrg,
                                                                         std::uint32_t qbx) {
  const __m512i vri = _mm512_set1_epi32(ri);
  const __m512i vrg = _mm512_set1_epi32(static_cast<int>(qrg));
  const __m512i vbx = _mm512_set1_epi32(static_cast<int>(qbx));
  __m512i best = _mm512_set1_epi32(std::numeric_limits<std::int32_t>::max());
  for (int k = 0; k < row.n; k += 16) {
    const __mmask16 live =
        row.n - k >= 16 ? __mmask16(0xffff) : __mmask16((1u << (row.n - k)) - 1u);
    const __m512i a = _mm512_sub_epi16(_mm512_maskz_loadu_epi32(live, row.rg + k), vrg);
    const __m512i b = _mm512_sub_epi16(_mm512_maskz_loadu_epi32(live, row.bx + k), vbx);
    const __m512i d = _mm512_add_epi32(_mm512_madd_epi16(a, a), _mm512_madd_epi16(b, b));
    const __mmask16 above =
        _mm512_mask_cmpgt_epi32_mask(live, _mm512_maskz_loadu_epi32(live, row.rank + k), vri);
    best = _mm512_mask_min_epi32(best, above, best, d);
  }
  return _mm512_reduce_min_epi32(best);
}
#endif

using DensityRowFn = double (*)(const DensityRow&, std::uint32_t, std::uint32_t, const double*);
using LinkRowFn = std::int32_t (*)(const LinkRow&, std::int32_t, std::uint32_t, std::uint32_t);

struct Kernels {
  DensityRowFn density = density_row_scalar;
  LinkRowFn link = link_row_scalar;
};

std::atomic<int> g_simd_level{2};

Kernels pick_kernels() {
  Kernels k;
#ifdef CAPSEG_QS_X86
  const int level = g_simd_level.load();
  __builtin_cpu_init();
  if (level >= 2 && __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512bw") &&
      __builtin_cpu_supports("avx512vl")) {
    k.density = density_row_avx512;
    k.link = link_row_avx512;
  } else if (level >= 1 && __builtin_cpu_supports("avx2")) {
    k.density = density_row_avx2;
    k.link = link_row_avx2;
  }
#endif
  return k;
}

struct Packed {
  std::vector<std::uint32_t> rg, b0, bx;
};

Packed pack_frame(const Frame& frame) {
  const auto pixels = frame.pixels();
  const std::size_t n = pixels.size();
  const auto w = static_cast<std::size_t>(frame.width());
  Packed p;
  p.rg.resize(n);
  p.b0.resize(n);
  p.bx.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.rg[i] = pack16(pixels[i].r, pixels[i].g);
    p.b0[i] = pack16(pixels[i].b, 0);
    p.bx[i] = pack16(pixels[i].b, static_cast<int>(i % w));
  }
  return p;
}

// Parzen estimate over (x, y, R, G, B) with a Gaussian of bandwidth sigma,
// truncated to a window of half-width ceil(3 sigma). The kernel factors into
// spatial and colour terms, both tabulated; each unordered pair is visited
// once and credited to both ends.
std::vector<double> parzen_density(const Frame& frame, const Packed& packed, double sigma,
                                   const Kernels& kernels) {
  const int w = frame.width();
  const int h = frame.height();
  const int half = static_cast<int>(std::ceil(3.0 * sigma));
  const double inv = 1.0 / (2.0 * sigma * sigma);

  std::vector<double> color_weight(kMaxColorDist2 + 1);
  for (int c = 0; c <= kMaxColorDist2; ++c) {
    color_weight[static_cast<std::size_t>(c)] = std::exp(-c * inv);
  }

  const int span = 2 * half + 1;
  std::vector<double> space_weight(static_cast<std::size_t>(span) * span);
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      space_weight[static_cast<std::size_t>((dy + half) * span + dx + half)] =
          std::exp(-(dx * dx + dy * dy) * inv);
    }
  }

  std::vector<double> density(frame.size(), 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      double acc = 0.0;
      // Forward half-window: same row to the right, then the rows below.
      for (int dy = 0; dy <= half && y + dy < h; ++dy) {
        const int x0 = dy == 0 ? x + 1 : std::max(0, x - half);
        const int x1 = std::min(w - 1, x + half);
        if (x0 > x1) continue;
        const std::size_t j = static_cast<std::size_t>(y + dy) * w + x0;
        const DensityRow row{
            packed.rg.data() + j, packed.b0.data() + j,
            space_weight.data() + static_cast<std::size_t>((dy + half) * span + half + x0 - x),
            density.data() + j, x1 - x0 + 1};
        acc += kernels.density(row, packed.rg[i], packed.b0[i], color_weight.data());
      }
      density[i] += acc;
    }
  }
  return density;
}

}  // namespace

namespace detail {
void quickshift_simd_level(int level) { g_simd_level = level; }
}  // namespace detail

// Link search: every pixel of the (2 floor(tau) + 1)^2 window around i is
// examined, so the cost grows with tau. The parent is the nearest pixel in
// (x, y, R, G, B) that ranks above i, ties to the lower index, provided it
// lies within tau.
QuickshiftForest quickshift_forest(const Frame& frame, const QsParams& params) {
  validate(params);
  const int w = frame.width();
  const int h = frame.height();
  if (w > 32767) throw Error(Errc::InvalidParam, "quick shift supports widths up to 32767");

  const Kernels kernels = pick_kernels();
  const Packed packed = pack_frame(frame);

  QuickshiftForest forest;
  forest.width = w;
  forest.height = h;
  forest.density = parzen_density(frame, packed, params.kernel_size, kernels);
  const std::size_t n = frame.size();
  forest.parent.resize(n);
  forest.parent_distance.assign(n, 0.0);

  // rank[a] > rank[b] exactly when a ranks above b.
  std::vector<std::int32_t> rank(n);
  {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return qs_ranks_above(forest, b, a); });
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = static_cast<std::int32_t>(k);
  }

  const auto& rg = packed.rg;
  const auto& bx = packed.bx;
  const long long tau2 = static_cast<long long>(std::floor(params.max_dist * params.max_dist));
  const int reach = static_cast<int>(std::min<double>(std::floor(params.max_dist), std::max(w, h)));

  // Candidate rows are the outer loop so each one stays in cache while every
  // pixel of the query row scans its slice.
  std::vector<long long> best_d2(static_cast<std::size_t>(w));
  std::vector<int> best_row(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::fill(best_d2.begin(), best_d2.end(), std::numeric_limits<long long>::max());
    std::fill(best_row.begin(), best_row.end(), -1);
    const std::size_t qrow = static_cast<std::size_t>(y) * w;
    const int y0 = std::max(0, y - reach), y1 = std::min(h - 1, y + reach);
    for (int yy = y0; yy <= y1; ++yy) {
      const long long dy2 = static_cast<long long>(yy - y) * (yy - y);
      const std::size_t crow = static_cast<std::size_t>(yy) * w;
      for (int x = 0; x < w; ++x) {
        const std::size_t i = qrow + x;
        const int x0 = std::max(0, x - reach), x1 = std::min(w - 1, x + reach);
        const std::size_t j = crow + x0;
        const LinkRow row{rank.data() + j, rg.data() + j, bx.data() + j, x1 - x0 + 1};
        const std::int32_t m = kernels.link(row, rank[i], rg[i], bx[i]);
        if (m == std::numeric_limits<std::int32_t>::max()) continue;
        const long long d2 = m + dy2;
        // Rows come in increasing index order, so a tie keeps the earlier row.
        if (d2 <= tau2 && d2 < best_d2[x]) {
          best_d2[x] = d2;
          best_row[x] = yy;
        }
      }
    }
    for (int x = 0; x < w; ++x) {
      const std::size_t i = qrow + x;
      std::size_t best = i;
      if (best_row[x] >= 0) {
        const int x0 = std::max(0, x - reach), x1 = std::min(w - 1, x + reach);
        const std::size_t j = static_cast<std::size_t>(best_row[x]) * w + x0;
        const LinkRow row{rank.data() + j, rg.data() + j, bx.data() + j, x1 - x0 + 1};
        const long long dy = best_row[x] - y;
        for (int k = 0; k < row.n; ++k) {
          if (row.rank[k] > rank[i] && link_value(row, k, rg[i], bx[i]) + dy * dy == best_d2[x]) {
            best = j + static_cast<std::size_t>(k);
            break;
          }
        }
      }
      forest.parent[i] = static_cast<std::int32_t>(best);
      forest.parent_distance[i] = best == i ? 0.0 : std::sqrt(static_cast<double>(best_d2[x]));
    }
  }
  return forest;
}

SuperpixelMap quickshift_segment(const Frame& frame, const QsParams& params) {
  const QuickshiftForest forest = quickshift_forest(frame, params);
  const std::size_t n = forest.parent.size();

  // Parents always rank strictly above their children, so resolving pixels in
  // descending rank order finds every parent's root before its children.
  std::vector<std::int32_t> root(n, -1);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return qs_ranks_above(forest, a, b); });
  for (std::size_t i : order) {
    const auto p = static_cast<std::size_t>(forest.parent[i]);
    root[i] = p == i ? static_cast<std::int32_t>(i) : root[p];
  }

  Raster<std::int32_t> labels(forest.width, forest.height, std::vector<std::int32_t>(root));
  return enforce_connectivity(labels, 0.0);
}

}  // namespace capseg
