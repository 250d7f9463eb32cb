#include "statlab/word.hpp"

#include <algorithm>

#include "statlab/errors.hpp"

namespace statlab {

FreeGroupContext FreeGroupContext::checked(int rank)
{
    if (rank < 1 || rank > kMaxRank)
        throw MalformedInput("free group rank must be in [1, 26], got " + std::to_string(rank));
    return FreeGroupContext{rank};
}

Word Word::generator(int index, bool inverse)
{
    if (index < 1 || index > kMaxRank)
        throw MalformedInput("generator index out of range: " + std::to_string(index));
    return Word(std::string(1, static_cast<char>(make_letter(index, inverse))));
}

Word Word::parse(std::string_view text)
{
    if (text == "1")
        return Word{};
    if (text.empty())
        throw MalformedInput("empty word string (the identity is written \"1\")");
    std::vector<Letter> letters;
    letters.reserve(text.size());
    for (char c : text) {
        if (c >= 'a' && c <= 'z')
            letters.push_back(make_letter(c - 'a' + 1, false));
        else if (c >= 'A' && c <= 'Z')
            letters.push_back(make_letter(c - 'A' + 1, true));
        else
            throw MalformedInput("invalid character '" + std::string(1, c) + "' in word \"" +
                                 std::string(text) + "\"");
    }
    return reduce(letters);
}

Word Word::parse(std::string_view text, const FreeGroupContext& ctx)
{
    Word w = parse(text);
    // Cancelled letters must also be in range.
    for (char c : text) {
        if (c == '1')
            continue;
        int idx = (c >= 'a' && c <= 'z') ? c - 'a' + 1 : c - 'A' + 1;
        if (idx > ctx.rank)
            throw MalformedInput("generator '" + std::string(1, c) + "' outside rank " +
                                 std::to_string(ctx.rank));
    }
    return w;
}

std::string Word::str() const
{
    if (codes_.empty())
        return "1";
    std::string out;
    out.reserve(codes_.size());
    for (char c : codes_) {
        auto l = static_cast<Letter>(c);
        char base = letter_is_inverse(l) ? 'A' : 'a';
        out.push_back(static_cast<char>(base + letter_index(l) - 1));
    }
    return out;
}

std::vector<Letter> Word::letters() const
{
    return {codes_.begin(), codes_.end()};
}

int Word::max_index() const noexcept
{
    int m = 0;
    for (char c : codes_)
        m = std::max(m, letter_index(static_cast<Letter>(c)));
    return m;
}

Word Word::inverse() const
{
    std::string out(codes_.rbegin(), codes_.rend());
    for (char& c : out)
        c = static_cast<char>(inverse_letter(static_cast<Letter>(c)));
    return Word(std::move(out));
}

Word Word::prefix(std::size_t n) const
{
    return Word(codes_.substr(0, std::min(n, codes_.size())));
}

Word Word::suffix_from(std::size_t start) const
{
    return start >= codes_.size() ? Word{} : Word(codes_.substr(start));
}

std::strong_ordering operator<=>(const Word& a, const Word& b) noexcept
{
    if (auto c = a.codes_.size() <=> b.codes_.size(); c != 0)
        return c;
    // std::string compares chars via char_traits<char>, which compares as
    // unsigned char; codes are < 52 anyway.
    int r = a.codes_.compare(b.codes_);
    return r < 0 ? std::strong_ordering::less
                 : (r > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

Word reduce(std::span<const Letter> letters)
{
    std::string stack;
    stack.reserve(letters.size());
    for (Letter l : letters) {
        if (!stack.empty() && static_cast<Letter>(stack.back()) == inverse_letter(l))
            stack.pop_back();
        else
            stack.push_back(static_cast<char>(l));
    }
    return Word(std::move(stack));
}

Word reduce(std::span<const Generator> letters, const FreeGroupContext& ctx)
{
    std::vector<Letter> codes;
    codes.reserve(letters.size());
    for (const Generator& g : letters) {
        if (g.index < 1 || g.index > ctx.rank)
            throw MalformedInput("generator index " + std::to_string(g.index) +
                                 " outside rank " + std::to_string(ctx.rank));
        if (g.sign != 1 && g.sign != -1)
            throw MalformedInput("generator sign must be +1 or -1");
        codes.push_back(g.letter());
    }
    return reduce(codes);
}

void check_word(const Word& w, const FreeGroupContext& ctx)
{
    if (w.max_index() > ctx.rank)
        throw MalformedInput("word " + w.str() + " uses a generator outside rank " +
                             std::to_string(ctx.rank));
}

Word multiply(const Word& u, const Word& v)
{
    const std::string& a = u.codes_;
    const std::string& b = v.codes_;
    std::size_t m = 0;
    const std::size_t lim = std::min(a.size(), b.size());
    while (m < lim &&
           static_cast<Letter>(a[a.size() - 1 - m]) == inverse_letter(static_cast<Letter>(b[m])))
        ++m;
    std::string out;
    out.reserve(a.size() + b.size() - 2 * m);
    out.append(a, 0, a.size() - m);
    out.append(b, m, std::string::npos);
    return Word(std::move(out));
}

Word power(const Word& g, long exponent)
{
    Word base = exponent < 0 ? g.inverse() : g;
    unsigned long n = exponent < 0 ? static_cast<unsigned long>(-exponent)
                                   : static_cast<unsigned long>(exponent);
    Word result;
    while (n > 0) {
        if (n & 1u)
            result = multiply(result, base);
        n >>= 1u;
        if (n > 0)
            base = multiply(base, base);
    }
    return result;
}

Word conjugate(const Word& g, const Word& h)
{
    return multiply(h.inverse(), multiply(g, h));
}

std::size_t sphere_size(int rank, int n)
{
    if (n == 0)
        return 1;
    std::size_t s = static_cast<std::size_t>(2 * rank);
    for (int i = 1; i < n; ++i)
        s *= static_cast<std::size_t>(2 * rank - 1);
    return s;
}

std::size_t ball_size(int rank, int radius)
{
    std::size_t total = 0;
    for (int n = 0; n <= radius; ++n)
        total += sphere_size(rank, n);
    return total;
}

namespace {

void extend_sphere(int rank, std::size_t target, std::vector<Letter>& buf,
                   const std::function<void(const Word&)>& visit)
{
    if (buf.size() == target) {
        visit(reduce(buf));
        return;
    }
    for (int code = 0; code < 2 * rank; ++code) {
        auto l = static_cast<Letter>(code);
        if (!buf.empty() && buf.back() == inverse_letter(l))
            continue;
        buf.push_back(l);
        extend_sphere(rank, target, buf, visit);
        buf.pop_back();
    }
}

} // namespace

void for_each_in_ball(int rank, int radius, const std::function<void(const Word&)>& visit)
{
    std::vector<Letter> buf;
    for (int n = 0; n <= radius; ++n)
        extend_sphere(rank, static_cast<std::size_t>(n), buf, visit);
}

std::vector<Word> ball(int rank, int radius)
{
    std::vector<Word> out;
    out.reserve(ball_size(rank, radius));
    for_each_in_ball(rank, radius, [&](const Word& w) { out.push_back(w); });
    return out;
}

std::vector<Word> sphere(int rank, int n)
{
    std::vector<Word> out;
    out.reserve(sphere_size(rank, n));
    std::vector<Letter> buf;
    extend_sphere(rank, static_cast<std::size_t>(n), buf, [&](const Word& w) { out.push_back(w); });
    return out;
}

bool is_cyclically_reduced(const Word& g)
{
    return g.length() <= 1 || g.front() != inverse_letter(g.back());
}

CyclicDecomposition cyclic_reduction(const Word& g)
{
    std::size_t n = g.length();
    std::size_t t = 0;
    while (2 * t + 1 < n && g[t] == inverse_letter(g[n - 1 - t]))
        ++t;
    return {g.prefix(t), g.prefix(n - t).suffix_from(t)};
}

Word axis_prefix(const Word& g, std::size_t depth)
{
    if (g.is_identity())
        throw PreconditionError("axis_prefix: the identity has no axis");
    auto [w, c] = cyclic_reduction(g);
    std::vector<Letter> out;
    out.reserve(depth);
    for (std::size_t i = 0; i < w.length() && out.size() < depth; ++i)
        out.push_back(w[i]);
    while (out.size() < depth)
        for (std::size_t i = 0; i < c.length() && out.size() < depth; ++i)
            out.push_back(c[i]);
    // w is reduced and w*c has no cancellation, so this is already reduced.
    return reduce(out);
}

std::size_t common_prefix_length(const Word& a, const Word& b)
{
    std::size_t n = std::min(a.length(), b.length());
    std::size_t i = 0;
    while (i < n && a[i] == b[i])
        ++i;
    return i;
}

} // namespace statlab
