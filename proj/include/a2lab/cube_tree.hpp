#pragma once
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/lattice.hpp"
#include "a2lab/metric_space.hpp"

namespace a2lab {

struct Cube {
    int generation = 0;
    Index label = -1;
    std::vector<Index> members;  // ascending
    int parent = -1;             // cube id, -1 at generation 0
    std::vector<int> sons;       // cube ids, ordered by label
    double mass = 0.0;
};

// Nested partitions of a finite set, one per generation 0..N, with
// generation 0 the whole set. Cube ids are ordered by (generation, label).
class CubeTree {
public:
    CubeTree() = default;
    // labels[k][x] = cube label of x at generation k
    static CubeTree from_labels(const std::vector<std::vector<Index>>& labels, double delta, const Measure& mu);
    static CubeTree from_sample(const LatticeSample& s, const Measure& mu);
    // Contiguous blocks: generation k splits [0,n) into branching^k equal runs
    // (n must be divisible by branching^levels).
    static CubeTree regular(std::size_t n, int branching, int levels, double delta, const Measure& mu);

    int levels() const { return levels_; }
    double delta() const { return delta_; }
    double side(int k) const;
    std::size_t points() const { return points_; }
    std::size_t size() const { return cubes_.size(); }
    const Cube& operator[](int id) const { return cubes_[static_cast<std::size_t>(id)]; }
    const std::vector<Cube>& cubes() const { return cubes_; }
    const std::vector<int>& generation(int k) const { return by_gen_[static_cast<std::size_t>(k)]; }
    int cube_of(int k, Index x) const { return cube_of_[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)]; }
    int root() const { return 0; }
    int max_sons() const;
    // j-th ancestor (j = 0 is the cube itself); the root if fewer exist
    int ancestor(int id, int j) const;
    // true when a is b or an ancestor of b
    bool contains(int a, int b) const;
    // ids of a and all its descendants, a first
    std::vector<int> subtree(int a) const;
    // descendants of a at an absolute generation
    std::vector<int> descendants_at(int a, int generation) const;

private:
    int levels_ = 0;
    double delta_ = 0.5;
    std::size_t points_ = 0;
    std::vector<Cube> cubes_;
    std::vector<std::vector<int>> by_gen_;
    std::vector<std::vector<int>> cube_of_;
};

}  // namespace a2lab
