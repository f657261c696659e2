#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "topox/complex.hpp"

namespace topox {

using Color = std::uint64_t;

// 64-bit FNV-1a over a sequence of words.
class Fnv64 {
public:
    void add(std::uint64_t x);
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 14695981039346656037ULL;
};

struct CwlOptions {
    int max_rounds = 50;
    bool use_lower = true;
};

struct CwlResult {
    std::array<std::vector<Color>, 3> colors;  // after the last round run
    int rounds = 0;                            // refinement rounds until the partition stopped refining
    std::array<int, 3> rounds_per_dim{0, 0, 0};  // last round that refined dimension k's partition
    std::array<int, 3> classes{0, 0, 0};
    std::map<Color, int> histogram() const;
};

// Runs until the cell partition stabilizes or max_rounds is hit.
CwlResult cwl_coloring(const CellComplex& c, const CwlOptions& opt = {});
// Runs exactly `rounds` rounds (no early stop), so histograms of different complexes are comparable.
std::array<std::vector<Color>, 3> cwl_colors(const CellComplex& c, int rounds, bool use_lower);
// True when some round up to max_rounds yields different color histograms.
bool cwl_distinguishes(const CellComplex& a, const CellComplex& b, const CwlOptions& opt = {});

}  // namespace topox
