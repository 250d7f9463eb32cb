#include "statlab/algebra.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_map>

#include "statlab/errors.hpp"

namespace statlab {

namespace {

std::atomic<unsigned> g_default_threads{1};

bool word_less(const Term& a, const Term& b) { return a.word < b.word; }

/// Sorts and merges duplicate words, summing in the original order.
std::vector<Term> canonicalize(std::vector<Term> terms)
{
    std::stable_sort(terms.begin(), terms.end(), word_less);
    std::vector<Term> out;
    out.reserve(terms.size());
    for (auto& t : terms) {
        if (!out.empty() && out.back().word == t.word)
            out.back().coeff += t.coeff;
        else
            out.push_back(std::move(t));
    }
    std::erase_if(out, [](const Term& t) { return t.coeff == Complex{0.0, 0.0}; });
    return out;
}

/// Ordered merge of two canonical term lists; a's coefficient comes first in
/// every sum.
std::vector<Term> merge_sum(const std::vector<Term>& a, const std::vector<Term>& b, double sign)
{
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].word < b[j].word)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].word < a[i].word) {
            out.push_back({b[j].word, sign * b[j].coeff});
            ++j;
        } else {
            Complex c = a[i].coeff + sign * b[j].coeff;
            if (c != Complex{0.0, 0.0})
                out.push_back({a[i].word, c});
            ++i;
            ++j;
        }
    }
    return out;
}

constexpr std::size_t kChunk = 64;

std::vector<Term> convolve_chunk(std::span<const Term> left, std::span<const Term> right,
                                 std::size_t cap)
{
    std::unordered_map<Word, Complex, WordHash> acc;
    acc.reserve(std::min(left.size() * right.size(), cap) + 1);
    for (const Term& u : left) {
        for (const Term& v : right) {
            acc[multiply(u.word, v.word)] += u.coeff * v.coeff;
            if (acc.size() > cap)
                throw ResourceLimitError("convolution support exceeds the cap of " +
                                             std::to_string(cap) + " words",
                                         cap);
        }
    }
    std::vector<Term> out;
    out.reserve(acc.size());
    for (auto& [w, c] : acc)
        out.push_back({w, c});
    std::sort(out.begin(), out.end(), word_less);
    std::erase_if(out, [](const Term& t) { return t.coeff == Complex{0.0, 0.0}; });
    return out;
}

} // namespace

void require_same_context(const FreeGroupContext& a, const FreeGroupContext& b, const char* op)
{
    if (a.rank != b.rank)
        throw ContextMismatch(std::string(op) + ": rank " + std::to_string(a.rank) + " vs " +
                              std::to_string(b.rank));
}

void set_default_threads(unsigned threads) { g_default_threads = std::max(1u, threads); }
unsigned default_threads() { return g_default_threads; }

AlgebraElement AlgebraElement::delta(FreeGroupContext ctx, const Word& w, Complex c)
{
    check_word(w, ctx);
    AlgebraElement x(ctx);
    if (c != Complex{0.0, 0.0})
        x.terms_.push_back({w, c});
    return x;
}

AlgebraElement AlgebraElement::from_terms(FreeGroupContext ctx, std::vector<Term> terms)
{
    for (const auto& t : terms)
        check_word(t.word, ctx);
    AlgebraElement x(ctx);
    x.terms_ = canonicalize(std::move(terms));
    return x;
}

Complex AlgebraElement::coefficient(const Word& w) const
{
    auto it = std::lower_bound(terms_.begin(), terms_.end(), w,
                               [](const Term& t, const Word& key) { return t.word < key; });
    return (it != terms_.end() && it->word == w) ? it->coeff : Complex{};
}

std::size_t AlgebraElement::max_length() const noexcept
{
    return terms_.empty() ? 0 : terms_.back().word.length();
}

AlgebraElement AlgebraElement::normalized(double threshold) const
{
    AlgebraElement out(ctx_);
    out.terms_.reserve(terms_.size());
    for (const auto& t : terms_)
        if (std::abs(t.coeff) >= threshold)
            out.terms_.push_back(t);
    return out;
}

double AlgebraElement::l1_norm() const noexcept
{
    double s = 0.0;
    for (const auto& t : terms_)
        s += std::abs(t.coeff);
    return s;
}

double AlgebraElement::l2_norm() const noexcept
{
    double s = 0.0;
    for (const auto& t : terms_)
        s += std::norm(t.coeff);
    return std::sqrt(s);
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other)
{
    require_same_context(ctx_, other.ctx_, "add");
    terms_ = merge_sum(terms_, other.terms_, 1.0);
    return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other)
{
    require_same_context(ctx_, other.ctx_, "subtract");
    terms_ = merge_sum(terms_, other.terms_, -1.0);
    return *this;
}

AlgebraElement& AlgebraElement::operator*=(Complex s)
{
    if (s == Complex{0.0, 0.0}) {
        terms_.clear();
        return *this;
    }
    for (auto& t : terms_)
        t.coeff *= s;
    return *this;
}

bool operator==(const AlgebraElement& a, const AlgebraElement& b)
{
    if (a.ctx_ != b.ctx_ || a.terms_.size() != b.terms_.size())
        return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
        if (a.terms_[i].word != b.terms_[i].word || a.terms_[i].coeff != b.terms_[i].coeff)
            return false;
    return true;
}

/// Grants the free functions below access to the canonical term storage.
class ElementBuilder {
public:
    static AlgebraElement make(FreeGroupContext ctx, std::vector<Term> sorted_terms)
    {
        AlgebraElement x(ctx);
        x.terms_ = std::move(sorted_terms);
        return x;
    }
};

AlgebraElement convolve(const AlgebraElement& x, const AlgebraElement& y, const ConvolveOptions& opts)
{
    require_same_context(x.context(), y.context(), "convolve");
    auto left = x.terms();
    auto right = y.terms();
    if (left.empty() || right.empty())
        return AlgebraElement(x.context());

    const std::size_t n_chunks = (left.size() + kChunk - 1) / kChunk;
    std::vector<std::vector<Term>> parts(n_chunks);
    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_chunks)));

    auto work = [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(left.size(), lo + kChunk);
        parts[c] = convolve_chunk(left.subspan(lo, hi - lo), right, opts.support_cap);
    };

    if (threads == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            work(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t c = next++; c < n_chunks; c = next++)
                        work(c);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool)
            th.join();
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    // Balanced pairwise merge whose shape depends only on the chunk count.
    while (parts.size() > 1) {
        std::vector<std::vector<Term>> next;
        next.reserve((parts.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
            next.push_back(merge_sum(parts[i], parts[i + 1], 1.0));
            if (next.back().size() > opts.support_cap)
                throw ResourceLimitError("convolution support exceeds the cap of " +
                                             std::to_string(opts.support_cap) + " words",
                                         opts.support_cap);
        }
        if (parts.size() % 2 == 1)
            next.push_back(std::move(parts.back()));
        parts = std::move(next);
    }
    return ElementBuilder::make(x.context(), std::move(parts.front()));
}

AlgebraElement involution(const AlgebraElement& x)
{
    std::vector<Term> out;
    out.reserve(x.support_size());
    for (const auto& t : x.terms())
        out.push_back({t.word.inverse(), std::conj(t.coeff)});
    std::sort(out.begin(), out.end(), word_less);
    return ElementBuilder::make(x.context(), std::move(out));
}

Complex canonical_trace(const AlgebraElement& x) { return x.coefficient(Word{}); }

Complex trace_of_product(const AlgebraElement& x, const AlgebraElement& y)
{
    require_same_context(x.context(), y.context(), "trace_of_product");
    const AlgebraElement& small = x.support_size() <= y.support_size() ? x : y;
    const AlgebraElement& large = x.support_size() <= y.support_size() ? y : x;
    // tau(xy) = tau(yx), so the roles can be swapped freely.
    Complex s{};
    for (const auto& t : small.terms()) {
        Complex c = large.coefficient(t.word.inverse());
        if (c != Complex{})
            s += t.coeff * c;
    }
    return s;
}

AlgebraElement adjoint_action(const Word& g, const AlgebraElement& x)
{
    check_word(g, x.context());
    const Word ginv = g.inverse();
    std::vector<Term> out;
    out.reserve(x.support_size());
    for (const auto& t : x.terms())
        out.push_back({multiply(g, multiply(t.word, ginv)), t.coeff});
    std::sort(out.begin(), out.end(), word_less);
    return ElementBuilder::make(x.context(), std::move(out));
}

} // namespace statlab
