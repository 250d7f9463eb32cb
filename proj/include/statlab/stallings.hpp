#pragma once

#include <cstddef>
#include <span>

#include "statlab/word.hpp"

namespace statlab {

/// Rank of the subgroup generated by `words`, read off the Stallings graph
/// obtained by folding the bouquet of loops: rank = edges - vertices + 1.
std::size_t subgroup_rank(std::span<const Word> words, int alphabet_size);

/// True iff the words generate all of F_k as a group, i.e. the folded graph
/// is the rose with every letter present.
bool generates_whole_group(std::span<const Word> words, int alphabet_size);

/// True iff the words are nontrivial and freely generate a free subgroup of
/// rank words.size(). Free groups are Hopfian, so rank equality suffices.
bool is_free_basis(std::span<const Word> words, int alphabet_size);

} // namespace statlab
