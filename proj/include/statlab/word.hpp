#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace statlab {

/// Packed generator letter: code = 2*(index-1) + (inverse ? 1 : 0).
/// Code order gives the fixed alphabet order a < A < b < B < ...
using Letter = std::uint8_t;

inline constexpr int kMaxRank = 26;

constexpr Letter inverse_letter(Letter l) noexcept { return static_cast<Letter>(l ^ 1u); }
constexpr int letter_index(Letter l) noexcept { return (l >> 1) + 1; }
constexpr bool letter_is_inverse(Letter l) noexcept { return (l & 1u) != 0; }
constexpr Letter make_letter(int index, bool inverse) noexcept
{
    return static_cast<Letter>(2 * (index - 1) + (inverse ? 1 : 0));
}

/// Generator s_index^sign of F_k.
struct Generator {
    int index = 1;  // 1-based
    int sign = +1;  // +1 or -1

    Letter letter() const noexcept { return make_letter(index, sign < 0); }
};

/// Rank of the ambient free group F_k.
struct FreeGroupContext {
    int rank = 2;

    /// Throws MalformedInput unless 1 <= rank <= 26.
    static FreeGroupContext checked(int rank);
    int alphabet_size() const noexcept { return 2 * rank; }
    friend bool operator==(const FreeGroupContext&, const FreeGroupContext&) = default;
};

/// A freely reduced word in F_k. The empty word is the identity.
///
/// Letters are stored packed in a std::string so short words stay inline and
/// hash quickly; the class never holds an unreduced sequence.
class Word {
public:
    Word() = default;

    static Word generator(int index, bool inverse = false);

    /// Parses the serialized form: 'a'..'z' are generators, 'A'..'Z' their
    /// inverses, "1" is the identity. The letter sequence is freely reduced.
    static Word parse(std::string_view text);
    static Word parse(std::string_view text, const FreeGroupContext& ctx);

    std::string str() const;

    std::size_t length() const noexcept { return codes_.size(); }
    bool empty() const noexcept { return codes_.empty(); }
    bool is_identity() const noexcept { return codes_.empty(); }
    Letter operator[](std::size_t i) const noexcept { return static_cast<Letter>(codes_[i]); }
    Letter front() const noexcept { return static_cast<Letter>(codes_.front()); }
    Letter back() const noexcept { return static_cast<Letter>(codes_.back()); }

    /// Raw packed letter codes; stable across runs, suitable as a hash key.
    std::string_view codes() const noexcept { return codes_; }
    std::vector<Letter> letters() const;

    /// Largest generator index used, 0 for the identity.
    int max_index() const noexcept;

    Word inverse() const;
    Word prefix(std::size_t n) const;
    Word suffix_from(std::size_t start) const;

    /// Shortlex order: length first, then letter codes.
    friend std::strong_ordering operator<=>(const Word& a, const Word& b) noexcept;
    friend bool operator==(const Word& a, const Word& b) noexcept = default;

private:
    friend Word reduce(std::span<const Letter> letters);
    friend Word multiply(const Word& u, const Word& v);
    explicit Word(std::string codes) : codes_(std::move(codes)) {}

    std::string codes_;
};

struct WordHash {
    std::size_t operator()(const Word& w) const noexcept
    {
        return std::hash<std::string_view>{}(w.codes());
    }
};

/// Free reduction of an arbitrary letter sequence (stack cancellation).
Word reduce(std::span<const Letter> letters);
/// Same, validating every generator index against the context rank.
Word reduce(std::span<const Generator> letters, const FreeGroupContext& ctx);

/// Throws MalformedInput if w uses a generator outside the context rank.
void check_word(const Word& w, const FreeGroupContext& ctx);

Word multiply(const Word& u, const Word& v);
Word power(const Word& g, long exponent);
/// h^-1 g h.
Word conjugate(const Word& g, const Word& h);

/// Number of reduced words of length exactly n in F_k.
std::size_t sphere_size(int rank, int n);
/// 1 + sum_{n=1..r} 2k(2k-1)^(n-1).
std::size_t ball_size(int rank, int radius);
/// Visits every reduced word of length <= radius once, in shortlex order.
void for_each_in_ball(int rank, int radius, const std::function<void(const Word&)>& visit);
std::vector<Word> ball(int rank, int radius);
std::vector<Word> sphere(int rank, int n);

/// g = conjugator * core * conjugator^-1 with core cyclically reduced.
struct CyclicDecomposition {
    Word conjugator;
    Word core;
};
CyclicDecomposition cyclic_reduction(const Word& g);
bool is_cyclically_reduced(const Word& g);

/// First `depth` letters of the attracting fixed point g^{+infinity}.
/// Throws PreconditionError for g = e.
Word axis_prefix(const Word& g, std::size_t depth);

/// Length of the longest common prefix.
std::size_t common_prefix_length(const Word& a, const Word& b);

} // namespace statlab
