#include "a2lab/cube_tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace a2lab {

CubeTree CubeTree::from_labels(const std::vector<std::vector<Index>>& labels, double delta, const Measure& mu) {
    CubeTree t;
    if (labels.empty()) throw CoverGap("no generations");
    t.levels_ = static_cast<int>(labels.size()) - 1;
    t.delta_ = delta;
    t.points_ = labels[0].size();
    t.by_gen_.resize(labels.size());
    t.cube_of_.assign(labels.size(), std::vector<int>(t.points_, -1));
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k].size() != t.points_) throw CoverGap("generation " + std::to_string(k) + " has wrong size");
        std::map<Index, std::vector<Index>> groups;
        for (std::size_t x = 0; x < t.points_; ++x) {
            if (labels[k][x] < 0)
                throw CoverGap("point " + std::to_string(x) + ", generation " + std::to_string(k));
            groups[labels[k][x]].push_back(static_cast<Index>(x));
        }
        if (k == 0 && groups.size() != 1) throw CoverGap("generation 0 must be a single cube");
        for (auto& [lab, mem] : groups) {
            Cube c;
            c.generation = static_cast<int>(k);
            c.label = lab;
            c.members = std::move(mem);
            for (Index x : c.members) c.mass += mu.mass[x];
            const int id = static_cast<int>(t.cubes_.size());
            for (Index x : c.members) t.cube_of_[k][x] = id;
            if (k > 0) {
                c.parent = t.cube_of_[k - 1][c.members[0]];
                for (Index x : c.members)
                    if (t.cube_of_[k - 1][x] != c.parent)
                        throw CoverGap("cube " + std::to_string(lab) + " at generation " + std::to_string(k) +
                                       " straddles two parents");
                t.cubes_[static_cast<std::size_t>(c.parent)].sons.push_back(id);
            }
            t.by_gen_[k].push_back(id);
            t.cubes_.push_back(std::move(c));
        }
    }
    return t;
}

CubeTree CubeTree::from_sample(const LatticeSample& s, const Measure& mu) {
    return from_labels(s.assignment, s.delta, mu);
}

CubeTree CubeTree::regular(std::size_t n, int branching, int levels, double delta, const Measure& mu) {
    std::vector<std::vector<Index>> labels(static_cast<std::size_t>(levels) + 1, std::vector<Index>(n));
    std::size_t blocks = 1;
    for (int k = 0; k <= levels; ++k) {
        if (n % blocks != 0) throw CoverGap("point count not divisible by branching^levels");
        const std::size_t len = n / blocks;
        for (std::size_t x = 0; x < n; ++x) labels[k][x] = static_cast<Index>((x / len) * len);
        blocks *= static_cast<std::size_t>(branching);
    }
    return from_labels(labels, delta, mu);
}

double CubeTree::side(int k) const { return std::pow(delta_, k); }

int CubeTree::max_sons() const {
    std::size_t m = 0;
    for (const auto& c : cubes_) m = std::max(m, c.sons.size());
    return static_cast<int>(m);
}

int CubeTree::ancestor(int id, int j) const {
    while (j-- > 0 && cubes_[id].parent >= 0) id = cubes_[id].parent;
    return id;
}

bool CubeTree::contains(int a, int b) const {
    const int ga = cubes_[a].generation;
    if (cubes_[b].generation < ga) return false;
    return ancestor(b, cubes_[b].generation - ga) == a;
}

std::vector<int> CubeTree::subtree(int a) const {
    std::vector<int> out{a};
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int s : cubes_[out[i]].sons) out.push_back(s);
    return out;
}

std::vector<int> CubeTree::descendants_at(int a, int generation) const {
    std::vector<int> cur{a};
    for (int g = cubes_[a].generation; g < generation; ++g) {
        std::vector<int> next;
        for (int c : cur)
            for (int s : cubes_[c].sons) next.push_back(s);
        cur = std::move(next);
    }
    if (generation < cubes_[a].generation) return {};
    return cur;
}

}  // namespace a2lab
