#include "statlab/stallings.hpp"

#include <deque>
#include <numeric>
#include <utility>
#include <vector>

namespace statlab {

namespace {

class FoldingGraph {
public:
    explicit FoldingGraph(int alphabet) : alphabet_(alphabet) { add_vertex(); }

    int add_vertex()
    {
        parent_.push_back(static_cast<int>(parent_.size()));
        adj_.resize(adj_.size() + static_cast<std::size_t>(alphabet_), -1);
        return parent_.back();
    }

    int find(int v)
    {
        while (parent_[static_cast<std::size_t>(v)] != v) {
            auto& p = parent_[static_cast<std::size_t>(v)];
            p = parent_[static_cast<std::size_t>(p)];
            v = p;
        }
        return v;
    }

    void add_edge(int from, Letter l, int to)
    {
        set_slot(from, l, to);
        set_slot(to, inverse_letter(l), from);
        drain();
    }

    bool is_full_rose()
    {
        for (int v = 0; v < static_cast<int>(parent_.size()); ++v)
            if (find(v) != 0)
                return false;
        for (int l = 0; l < alphabet_; ++l)
            if (slot(0, static_cast<Letter>(l)) == -1)
                return false;
        return true;
    }

    std::size_t rank()
    {
        std::size_t vertices = 0, edges = 0;
        for (int v = 0; v < static_cast<int>(parent_.size()); ++v) {
            if (find(v) != v)
                continue;
            ++vertices;
            for (int l = 0; l < alphabet_; l += 2)
                if (slot(v, static_cast<Letter>(l)) != -1)
                    ++edges;
        }
        return edges + 1 - vertices;
    }

private:
    int& slot(int v, Letter l)
    {
        return adj_[static_cast<std::size_t>(v) * static_cast<std::size_t>(alphabet_) + l];
    }

    void set_slot(int v, Letter l, int target)
    {
        v = find(v);
        int& s = slot(v, l);
        if (s == -1)
            s = target;
        else if (find(s) != find(target))
            pending_.emplace_back(s, target);
    }

    void drain()
    {
        while (!pending_.empty()) {
            auto [a, b] = pending_.front();
            pending_.pop_front();
            a = find(a);
            b = find(b);
            if (a == b)
                continue;
            if (a > b)
                std::swap(a, b);
            parent_[static_cast<std::size_t>(b)] = a;
            for (int l = 0; l < alphabet_; ++l) {
                int t = slot(b, static_cast<Letter>(l));
                if (t == -1)
                    continue;
                int& s = slot(a, static_cast<Letter>(l));
                if (s == -1)
                    s = t;
                else if (find(s) != find(t))
                    pending_.emplace_back(s, t);
            }
        }
    }

    int alphabet_;
    std::vector<int> parent_;
    std::vector<int> adj_;
    std::deque<std::pair<int, int>> pending_;
};

void add_loops(FoldingGraph& g, std::span<const Word> words)
{
    for (const Word& w : words) {
        if (w.is_identity())
            continue;
        int at = 0;
        for (std::size_t i = 0; i < w.length(); ++i) {
            int to = (i + 1 == w.length()) ? 0 : g.add_vertex();
            g.add_edge(at, w[i], to);
            at = to;
        }
    }
}

} // namespace

std::size_t subgroup_rank(std::span<const Word> words, int alphabet_size)
{
    FoldingGraph g(alphabet_size);
    add_loops(g, words);
    return g.rank();
}

bool generates_whole_group(std::span<const Word> words, int alphabet_size)
{
    FoldingGraph g(alphabet_size);
    add_loops(g, words);
    return g.is_full_rose();
}

bool is_free_basis(std::span<const Word> words, int alphabet_size)
{
    for (const Word& w : words)
        if (w.is_identity())
            return false;
    return subgroup_rank(words, alphabet_size) == words.size();
}

} // namespace statlab
