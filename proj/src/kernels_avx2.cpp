// Compiled with -mavx2 only; callers check isa_available() first.
#include <immintrin.h>

#include <limits>

#include "kernels.hpp"

namespace kcov::detail {

// Four corners per iteration; sites <= 64 so every bitmask is one word.
void corner_run_avx2(const ClassifyArgs& a, int iy, int ix_begin, int ix_end, const CornerGrid& out) {
    const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d h = _mm256_set1_pd(a.h);
    const __m256d ox = _mm256_set1_pd(a.origin_x);
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    const __m256d cy = _mm256_set1_pd(a.origin_y + iy * a.h);

    __m256d u[kSimdMaxSites];
    __m256d l[kSimdMaxSites];
    __m256d best[kSimdMaxOrder];

    std::uint64_t* gset_out = out.gset_at(0, iy);
    std::uint64_t* closer_out = out.closer_at(0, iy);
    const int vec_end = ix_begin + (ix_end - ix_begin) / 4 * 4;
    for (int ix = ix_begin; ix < vec_end; ix += 4) {
        const __m256d fx = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(ix)), lane);
        const __m256d cx = _mm256_add_pd(ox, _mm256_mul_pd(fx, h));

        for (int t = 0; t < a.k; ++t) best[t] = inf;
        for (int j = 0; j < a.sites; ++j) {
            const __m256d dx = _mm256_sub_pd(cx, _mm256_set1_pd(a.sx[j]));
            const __m256d dy = _mm256_sub_pd(cy, _mm256_set1_pd(a.sy[j]));
            const __m256d d = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
            const __m256d r = _mm256_set1_pd(a.sr[j]);
            u[j] = _mm256_add_pd(d, r);
            l[j] = _mm256_sub_pd(d, r);
            // Insertion into the per-lane sorted list of the k smallest u.
            __m256d v = u[j];
            for (int t = 0; t < a.k; ++t) {
                const __m256d lo = _mm256_min_pd(best[t], v);
                v = _mm256_max_pd(best[t], v);
                best[t] = lo;
            }
        }
        const __m256d uk = best[a.k - 1];
        const __m256d lo_owner = l[a.owner];
        __m256i gset = _mm256_setzero_si256();
        __m256i closer = _mm256_setzero_si256();
        __m256i members = _mm256_setzero_si256();
        __m256i straddle = _mm256_setzero_si256();
        for (int j = 0; j < a.sites; ++j) {
            const __m256i bit = _mm256_set1_epi64x(static_cast<long long>(std::uint64_t{1} << j));
            const __m256i in = _mm256_castpd_si256(_mm256_cmp_pd(u[j], uk, _CMP_LE_OQ));
            const __m256i below = _mm256_castpd_si256(_mm256_cmp_pd(l[j], uk, _CMP_LT_OQ));
            const __m256i cc = _mm256_castpd_si256(_mm256_cmp_pd(u[j], lo_owner, _CMP_LT_OQ));
            gset = _mm256_or_si256(gset, _mm256_and_si256(in, bit));
            closer = _mm256_or_si256(closer, _mm256_and_si256(cc, bit));
            members = _mm256_sub_epi64(members, in);  // in lanes are all ones, i.e. -1
            straddle = _mm256_or_si256(straddle, _mm256_andnot_si256(in, below));
        }
        const __m256i owner_bit = _mm256_set1_epi64x(static_cast<long long>(std::uint64_t{1} << a.owner));
        const __m256i has_owner = _mm256_cmpeq_epi64(_mm256_and_si256(gset, owner_bit), owner_bit);
        const __m256i full = _mm256_cmpeq_epi64(members, _mm256_set1_epi64x(a.k));
        const __m256i valid = _mm256_andnot_si256(straddle, _mm256_and_si256(has_owner, full));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(gset_out + ix), _mm256_and_si256(gset, valid));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(closer_out + ix), closer);
    }
    if (vec_end < ix_end) corner_run_scalar(a, iy, vec_end, ix_end, out);
}

}  // namespace kcov::detail
