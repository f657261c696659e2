#include "topox/cwl.hpp"

#include <algorithm>
#include <set>

namespace topox {

void Fnv64::add(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
        h_ ^= (x >> (8 * i)) & 0xffU;
        h_ *= 1099511628211ULL;
    }
}

namespace {

using Colors = std::array<std::vector<Color>, 3>;

Colors initial(const CellComplex& c) {
    Colors col;
    for (int k = 0; k < 3; ++k) {
        Fnv64 h;
        h.add(0xc011ULL + static_cast<std::uint64_t>(k));
        col[k].assign(c.n_cells(k), h.value());
    }
    return col;
}

Colors refine(const CellComplex& c, const NeighborhoodIndex& nb, const Colors& col, bool use_lower) {
    Colors out;
    for (int k = 0; k < 3; ++k) {
        const int n = c.n_cells(k);
        out[k].resize(n);
        for (int s = 0; s < n; ++s) {
            Fnv64 h;
            h.add(col[k][s]);
            std::vector<Color> b;
            if (k > 0)
                for (int x : nb.boundary[k][s]) b.push_back(col[k - 1][x]);
            std::sort(b.begin(), b.end());
            h.add(0xb0ULL);
            h.add(b.size());
            for (Color x : b) h.add(x);

            std::vector<std::pair<Color, Color>> up;
            if (k < 2)
                for (const auto& m : nb.upper[k][s]) up.emplace_back(col[k][m.cell], col[k + 1][m.via]);
            std::sort(up.begin(), up.end());
            h.add(0xa0ULL);
            h.add(up.size());
            for (auto [x, y] : up) {
                h.add(x);
                h.add(y);
            }

            if (use_lower) {
                std::vector<std::pair<Color, Color>> lo;
                if (k > 0)
                    for (const auto& m : nb.lower[k][s]) lo.emplace_back(col[k][m.cell], col[k - 1][m.via]);
                std::sort(lo.begin(), lo.end());
                h.add(0xd0ULL);
                h.add(lo.size());
                for (auto [x, y] : lo) {
                    h.add(x);
                    h.add(y);
                }
            }
            out[k][s] = h.value();
        }
    }
    return out;
}

int class_count(const std::vector<Color>& v) { return static_cast<int>(std::set<Color>(v.begin(), v.end()).size()); }

std::map<Color, int> histogram_of(const Colors& col) {
    std::map<Color, int> h;
    for (const auto& v : col)
        for (Color x : v) ++h[x];
    return h;
}

}  // namespace

std::map<Color, int> CwlResult::histogram() const { return histogram_of(colors); }

CwlResult cwl_coloring(const CellComplex& c, const CwlOptions& opt) {
    const NeighborhoodIndex nb = neighborhoods(c);
    CwlResult r;
    r.colors = initial(c);
    for (int k = 0; k < 3; ++k) r.classes[k] = class_count(r.colors[k]);
    for (int round = 1; round <= opt.max_rounds; ++round) {
        Colors next = refine(c, nb, r.colors, opt.use_lower);
        std::array<int, 3> cls{};
        bool refined = false;
        for (int k = 0; k < 3; ++k) {
            cls[k] = class_count(next[k]);
            if (cls[k] > r.classes[k]) {
                refined = true;
                r.rounds_per_dim[k] = round;
            }
        }
        r.colors = std::move(next);
        r.classes = cls;
        if (!refined) break;
        r.rounds = round;
    }
    return r;
}

Colors cwl_colors(const CellComplex& c, int rounds, bool use_lower) {
    const NeighborhoodIndex nb = neighborhoods(c);
    Colors col = initial(c);
    for (int i = 0; i < rounds; ++i) col = refine(c, nb, col, use_lower);
    return col;
}

bool cwl_distinguishes(const CellComplex& a, const CellComplex& b, const CwlOptions& opt) {
    const NeighborhoodIndex na = neighborhoods(a), nb = neighborhoods(b);
    Colors ca = initial(a), cb = initial(b);
    for (int i = 0; i <= opt.max_rounds; ++i) {
        if (histogram_of(ca) != histogram_of(cb)) return true;
        ca = refine(a, na, ca, opt.use_lower);
        cb = refine(b, nb, cb, opt.use_lower);
    }
    return false;
}

}  // namespace topox
