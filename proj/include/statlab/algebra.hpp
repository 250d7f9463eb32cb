#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "statlab/word.hpp"

namespace statlab {

using Complex = std::complex<double>;

struct Term {
    Word word;
    Complex coeff;
};

/// Finitely supported element sum_w c_w lambda_w of C[F_k], viewed inside the
/// reduced C*-algebra. Terms are kept sorted in shortlex order with unique
/// words; exact zeros are never stored, tiny values only go at normalized().
class AlgebraElement {
public:
    explicit AlgebraElement(FreeGroupContext ctx = {}) : ctx_(ctx) {}

    static AlgebraElement delta(FreeGroupContext ctx, const Word& w, Complex c = 1.0);
    static AlgebraElement identity(FreeGroupContext ctx) { return delta(ctx, Word{}); }
    /// Duplicate words are summed in input order.
    static AlgebraElement from_terms(FreeGroupContext ctx, std::vector<Term> terms);

    const FreeGroupContext& context() const noexcept { return ctx_; }
    std::span<const Term> terms() const noexcept { return terms_; }
    std::size_t support_size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }
    Complex coefficient(const Word& w) const;
    /// Longest word in the support (0 for zero or scalar elements).
    std::size_t max_length() const noexcept;

    /// Drops coefficients of modulus below `threshold`.
    AlgebraElement normalized(double threshold = 1e-15) const;

    double l1_norm() const noexcept;
    double l2_norm() const noexcept;

    AlgebraElement& operator+=(const AlgebraElement& other);
    AlgebraElement& operator-=(const AlgebraElement& other);
    AlgebraElement& operator*=(Complex s);
    friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
    friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
    friend AlgebraElement operator*(Complex s, AlgebraElement a) { return a *= s; }

    friend bool operator==(const AlgebraElement& a, const AlgebraElement& b);

private:
    friend class ElementBuilder;

    FreeGroupContext ctx_;
    std::vector<Term> terms_;
};

/// Throws ContextMismatch when the two ranks differ.
void require_same_context(const FreeGroupContext& a, const FreeGroupContext& b, const char* op);

struct ConvolveOptions {
    std::size_t support_cap = 5'000'000;
    unsigned threads = 1;
};

/// Process-wide default for ConvolveOptions::threads (set by the CLI).
void set_default_threads(unsigned threads);
unsigned default_threads();

/// x * y: coeff(w) = sum_{uv = w} x(u) y(v). The left support is cut into
/// fixed-size chunks whose partial tables are merged in chunk order, so the
/// floating-point result does not depend on the thread count. Throws
/// ResourceLimitError if the product support exceeds the cap.
AlgebraElement convolve(const AlgebraElement& x, const AlgebraElement& y,
                        const ConvolveOptions& opts = {});

/// x*: coeff(w) = conj(x(w^-1)).
AlgebraElement involution(const AlgebraElement& x);

/// tau_0(x) = coefficient at the identity.
Complex canonical_trace(const AlgebraElement& x);

/// tau_0(x y) without forming the product: sum_w x(w) y(w^-1).
Complex trace_of_product(const AlgebraElement& x, const AlgebraElement& y);

/// Ad_g(x) = lambda_g x lambda_g^-1: coeff(w) = x(g^-1 w g).
AlgebraElement adjoint_action(const Word& g, const AlgebraElement& x);

} // namespace statlab
