#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "statlab/algebra.hpp"

namespace statlab {

/// Certified bounds lower <= ||x||_red <= upper.
struct NormBracket {
    double lower = 0.0;
    double upper = 0.0;
    int moments_used = 0;
    std::string lower_method;
    std::string upper_method;
    bool capped = false;  // moment computation stopped at the support cap
};

struct MomentOptions {
    std::size_t support_cap = 5'000'000;
    /// Throw ResourceLimitError when the cap prevents reaching n_moments.
    bool strict = true;
    unsigned threads = 0;  // 0: process default
};

/// Available trace moments M_j = tau_0((x*x)^j), keyed by j. M_0 = 1.
struct MomentTable {
    std::map<int, double> values;
    std::string method;
    bool capped = false;
};

/// Exact moments for elements supported in ball(1), j = 0..n_moments, via
/// first-passage decomposition of closed walks on the Cayley tree.
MomentTable tree_moments(const AlgebraElement& x, int n_moments);

/// Moments at sums of two powers of two from repeated squaring of x*x, up to
/// the support cap.
MomentTable squaring_moments(const AlgebraElement& x, int n_moments, const MomentOptions& opts);

/// Picks tree_moments when supp(x) is in ball(1), squaring_moments otherwise.
MomentTable trace_moments(const AlgebraElement& x, int n_moments, const MomentOptions& opts = {});

struct LowerBound {
    double value = 0.0;
    int moments_used = 0;
    std::string method;
    bool capped = false;
};

/// max over available a > b >= 0 with a <= n_moments of
/// (M_a / M_b)^(1 / (2(a - b))). Since x*x >= 0 has spectral measure on
/// [0, ||x||^2] for the trace vector, M_a <= ||x||^(2(a-b)) M_b, so each ratio
/// is a certified lower bound; b = 0 gives tau_0((x*x)^a)^(1/2a).
LowerBound certify_lower(const AlgebraElement& x, int n_moments, const MomentOptions& opts = {});
double norm_lower_bound(const AlgebraElement& x, int n_moments, const MomentOptions& opts = {});

struct UpperBound {
    double value = 0.0;
    std::string method;
    double l1 = 0.0;
    double haagerup = 0.0;
    double free_basis = -1.0;  // < 0 when not applicable
};

/// min of: the l1 norm; Haagerup's bound sum_n (n+1)||x_n||_2 over length
/// layers; and, when the non-identity support (one word per inverse pair) is
/// a free basis of the subgroup it generates, the same bound taken in that
/// basis, |x(e)| + 2||x - x(e)||_2.
UpperBound certify_upper(const AlgebraElement& x);
double norm_upper_bound(const AlgebraElement& x);

double haagerup_bound(const AlgebraElement& x);

NormBracket certify_norm(const AlgebraElement& x, int n_moments, const MomentOptions& opts = {});

} // namespace statlab
