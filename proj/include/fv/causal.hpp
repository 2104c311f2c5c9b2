#pragma once

// Exact combinatorial causal structure of a finite 1+1-dimensional lattice:
// light cones, causal complements and hulls, domains of dependence, Cauchy
// slices and causal orderability of region families. Light speed is one site
// per layer; spatial boundaries clip cones (no wraparound). Everything here is
// a pure function on immutable values.

#include <compare>
#include <cstdint>
#include <set>
#include <vector>

namespace fv {

struct Lattice {
    int width = 0; // spatial sites 0..width-1
    int depth = 0; // time layers 0..depth-1

    Lattice() = default;
    Lattice(int w, int t);

    bool contains(int x, int t) const { return x >= 0 && x < width && t >= 0 && t < depth; }
    bool operator==(const Lattice&) const = default;
};

struct Cell {
    int x = 0;
    int t = 0;
    auto operator<=>(const Cell&) const = default;
};

using Region = std::set<Cell>;

// Achronal staircase slice: one cell (x, level[x]) per column, adjacent levels
// differing by at most one. A time-maximal causal path "crosses" the slice at
// the unique step where it passes from strictly below to on-or-above; with
// cell-membership crossings only the constant slices are met exactly once by
// every path, and find_separating_slice accordingly never returns a slanted one.
struct Slice {
    std::vector<int> level;

    bool contains(Cell c) const {
        return c.x >= 0 && c.x < static_cast<int>(level.size()) && level[c.x] == c.t;
    }
    bool operator==(const Slice&) const = default;
};

// A linear arrangement of a region family: regions[order[0]] earliest.
struct CausalOrder {
    std::vector<std::size_t> order;
};

Region causal_future(const Lattice& lat, const Region& r);
Region causal_past(const Lattice& lat, const Region& r);
Region causal_complement(const Lattice& lat, const Region& k);
Region causal_hull(const Lattice& lat, const Region& n);

// Cells p such that every inextendible causal path through p meets n. Causal
// paths advance one layer per step with |dx| <= 1 and span t=0..depth-1;
// spatial edges clip the step choices but do not terminate paths.
Region domain_of_dependence(const Lattice& lat, const Region& n);

Region whole_lattice(const Lattice& lat);

// true iff every cell of r2 is spacelike to every cell of r1
bool spacelike_separated(const Lattice& lat, const Region& r1, const Region& r2);

// K before K' requires causal_past(K) and causal_future(K') to be disjoint.
bool is_valid_causal_order(const Lattice& lat, const std::vector<Region>& regions,
                           const std::vector<std::size_t>& order);
std::vector<CausalOrder> enumerate_causal_orders(const Lattice& lat,
                                                 const std::vector<Region>& regions);
bool is_causally_orderable(const Lattice& lat, const std::vector<Region>& regions);

// Pointwise-earliest staircase slice avoiding J-(k1), J+(k2) and J+(l), with k1
// strictly below. Throws NoSliceFound when the lattice is too shallow.
Slice find_separating_slice(const Lattice& lat, const Region& k1, const Region& k2,
                            const Region& l);

std::vector<Slice> enumerate_slices(const Lattice& lat);

// every time-maximal causal path contains exactly one cell of the slice
bool slice_crossed_once_by_all_paths(const Lattice& lat, const Slice& s);

// strictly increasing in t, consecutive cells causally related
bool validate_probe_worldline(const std::vector<Cell>& cells);

bool is_connected(const Region& r); // 8-neighbour adjacency
Region connected_hull(const Lattice& lat, const Region& k);

} // namespace fv
