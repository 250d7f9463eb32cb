#include "statlab/norm_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "statlab/errors.hpp"
#include "statlab/stallings.hpp"

namespace statlab {

namespace {

constexpr std::size_t kFreeBasisLetterLimit = 50'000'000;

void record(MomentTable& t, int j, Complex m)
{
    t.values[j] = m.real();
}

} // namespace

MomentTable tree_moments(const AlgebraElement& x, int n_moments)
{
    if (n_moments < 1)
        throw PreconditionError("n_moments must be >= 1");
    if (x.max_length() > 1)
        throw PreconditionError("tree_moments needs support in ball(1)");

    const int A = x.context().alphabet_size();
    const int N = 2 * n_moments;

    // Step weights alternate x*, x, x*, ... for tau_0((x* x)^m).
    // c[p][l] is the weight of letter l at a step of parity p; ce[p] the
    // weight of staying put.
    std::vector<std::vector<Complex>> c(2, std::vector<Complex>(static_cast<std::size_t>(A)));
    Complex ce[2];
    for (const auto& t : x.terms()) {
        if (t.word.is_identity()) {
            ce[1] = t.coeff;
            ce[0] = std::conj(t.coeff);
        } else {
            Letter l = t.word[0];
            c[1][l] = t.coeff;
            c[0][inverse_letter(l)] = std::conj(t.coeff);
        }
    }

    // F[p][s][n]: weight of walks that start at a child in direction s at
    // parity p and first reach its parent after exactly n steps.
    auto idx = [&](int p, int s, int n) {
        return (static_cast<std::size_t>(p) * static_cast<std::size_t>(A) + static_cast<std::size_t>(s)) *
                   static_cast<std::size_t>(N + 1) +
               static_cast<std::size_t>(n);
    };
    std::vector<Complex> F(2 * static_cast<std::size_t>(A) * static_cast<std::size_t>(N + 1));
    std::vector<Complex> R(2 * static_cast<std::size_t>(N + 1));
    auto ridx = [&](int p, int n) { return static_cast<std::size_t>(p) * static_cast<std::size_t>(N + 1) + static_cast<std::size_t>(n); };

    for (int n = 1; n <= N; ++n) {
        for (int p = 0; p < 2; ++p) {
            const int q = p ^ 1;
            for (int s = 0; s < A; ++s) {
                const int back = inverse_letter(static_cast<Letter>(s));
                Complex v = (n == 1) ? c[p][static_cast<std::size_t>(back)] : Complex{};
                v += ce[p] * F[idx(q, s, n - 1)];
                for (int r = 0; r < A; ++r) {
                    if (r == back)
                        continue;
                    const Complex w = c[p][static_cast<std::size_t>(r)];
                    if (w == Complex{})
                        continue;
                    Complex inner{};
                    for (int m = 1; m <= n - 2; ++m)
                        inner += F[idx(q, r, m)] * F[idx((p + 1 + m) & 1, s, n - 1 - m)];
                    v += w * inner;
                }
                F[idx(p, s, n)] = v;
            }
        }
    }

    R[ridx(0, 0)] = R[ridx(1, 0)] = 1.0;
    for (int n = 1; n <= N; ++n) {
        for (int p = 0; p < 2; ++p) {
            const int q = p ^ 1;
            Complex v = ce[p] * R[ridx(q, n - 1)];
            for (int r = 0; r < A; ++r) {
                const Complex w = c[p][static_cast<std::size_t>(r)];
                if (w == Complex{})
                    continue;
                Complex inner{};
                for (int m = 1; m <= n - 1; ++m)
                    inner += F[idx(q, r, m)] * R[ridx((p + 1 + m) & 1, n - 1 - m)];
                v += w * inner;
            }
            R[ridx(p, n)] = v;
        }
    }

    MomentTable t;
    t.method = "tree-recursion";
    for (int j = 0; j <= n_moments; ++j)
        record(t, j, R[ridx(0, 2 * j)]);
    return t;
}

MomentTable squaring_moments(const AlgebraElement& x, int n_moments, const MomentOptions& opts)
{
    if (n_moments < 1)
        throw PreconditionError("n_moments must be >= 1");
    MomentTable t;
    t.method = "repeated-squaring";
    t.values[0] = 1.0;
    t.values[1] = x.l2_norm() * x.l2_norm();
    if (n_moments == 1)
        return t;

    ConvolveOptions conv{opts.support_cap, opts.threads ? opts.threads : default_threads()};
    std::vector<AlgebraElement> powers;
    try {
        powers.push_back(convolve(involution(x), x, conv));
    } catch (const ResourceLimitError&) {
        if (opts.strict)
            throw;
        t.capped = true;
        return t;
    }

    for (int i = 0;; ++i) {
        const int pi = 1 << i;
        for (int j = 0; j <= i; ++j) {
            const int a = pi + (1 << j);
            if (a <= n_moments)
                record(t, a, trace_of_product(powers[static_cast<std::size_t>(i)],
                                              powers[static_cast<std::size_t>(j)]));
        }
        if ((pi << 1) + 1 > n_moments)
            break;
        try {
            powers.push_back(convolve(powers.back(), powers.back(), conv));
        } catch (const ResourceLimitError& e) {
            if (opts.strict)
                throw ResourceLimitError(std::string("norm_lower_bound: ") + e.what() +
                                             "; moments beyond " + std::to_string(2 * pi) +
                                             " unreachable",
                                         opts.support_cap);
            t.capped = true;
            break;
        }
    }
    return t;
}

MomentTable trace_moments(const AlgebraElement& x, int n_moments, const MomentOptions& opts)
{
    if (x.max_length() <= 1)
        return tree_moments(x, n_moments);
    return squaring_moments(x, n_moments, opts);
}

LowerBound certify_lower(const AlgebraElement& x, int n_moments, const MomentOptions& opts)
{
    MomentTable table = trace_moments(x, n_moments, opts);
    LowerBound lb;
    lb.method = table.method;
    lb.capped = table.capped;
    for (const auto& [a, ma] : table.values) {
        if (a == 0 || a > n_moments || !(ma > 0.0))
            continue;
        lb.moments_used = std::max(lb.moments_used, a);
        for (const auto& [b, mb] : table.values) {
            if (b >= a)
                break;
            if (!(mb > 0.0))
                continue;
            double v = std::pow(ma / mb, 1.0 / (2.0 * (a - b)));
            lb.value = std::max(lb.value, v);
        }
    }
    return lb;
}

double norm_lower_bound(const AlgebraElement& x, int n_moments, const MomentOptions& opts)
{
    return certify_lower(x, n_moments, opts).value;
}

double haagerup_bound(const AlgebraElement& x)
{
    double total = 0.0;
    double layer = 0.0;
    std::size_t len = 0;
    for (const auto& t : x.terms()) {
        if (t.word.length() != len) {
            total += static_cast<double>(len + 1) * std::sqrt(layer);
            layer = 0.0;
            len = t.word.length();
        }
        layer += std::norm(t.coeff);
    }
    total += static_cast<double>(len + 1) * std::sqrt(layer);
    return total;
}

UpperBound certify_upper(const AlgebraElement& x)
{
    UpperBound ub;
    ub.l1 = x.l1_norm();
    ub.haagerup = haagerup_bound(x);
    ub.value = ub.l1;
    ub.method = "l1";
    if (ub.haagerup < ub.value) {
        ub.value = ub.haagerup;
        ub.method = "haagerup";
    }

    std::set<Word> reps;
    std::size_t letters = 0;
    double rest = 0.0;
    Complex at_e{};
    for (const auto& t : x.terms()) {
        if (t.word.is_identity()) {
            at_e = t.coeff;
            continue;
        }
        rest += std::norm(t.coeff);
        Word inv = t.word.inverse();
        reps.insert(std::min(t.word, inv));
        letters += t.word.length();
    }
    if (!reps.empty() && letters <= kFreeBasisLetterLimit) {
        std::vector<Word> basis(reps.begin(), reps.end());
        if (is_free_basis(basis, x.context().alphabet_size())) {
            ub.free_basis = std::abs(at_e) + 2.0 * std::sqrt(rest);
            if (ub.free_basis < ub.value) {
                ub.value = ub.free_basis;
                ub.method = "free-basis-haagerup";
            }
        }
    }
    return ub;
}

double norm_upper_bound(const AlgebraElement& x) { return certify_upper(x).value; }

NormBracket certify_norm(const AlgebraElement& x, int n_moments, const MomentOptions& opts)
{
    LowerBound lb = certify_lower(x, n_moments, opts);
    UpperBound ub = certify_upper(x);
    NormBracket b;
    b.lower = lb.value;
    b.upper = ub.value;
    b.moments_used = lb.moments_used;
    b.lower_method = lb.method;
    b.upper_method = ub.method;
    b.capped = lb.capped;
    return b;
}

} // namespace statlab
