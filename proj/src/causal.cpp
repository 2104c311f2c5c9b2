#include "fv/causal.hpp"

#include "fv/errors.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <functional>
#include <numeric>

namespace fv {

Lattice::Lattice(int w, int t) : width(w), depth(t) {
    if (w < 2 || t < 1) throw DimensionMismatch("Lattice requires width >= 2 and depth >= 1");
}

Region causal_future(const Lattice& lat, const Region& r) {
    Region out;
    for (const Cell& c : r) {
        for (int t = c.t; t < lat.depth; ++t) {
            const int reach = t - c.t;
            const int x0 = std::max(0, c.x - reach);
            const int x1 = std::min(lat.width - 1, c.x + reach);
            for (int x = x0; x <= x1; ++x) out.insert({x, t});
        }
    }
    return out;
}

Region causal_past(const Lattice& lat, const Region& r) {
    Region out;
    for (const Cell& c : r) {
        for (int t = c.t; t >= 0; --t) {
            const int reach = c.t - t;
            const int x0 = std::max(0, c.x - reach);
            const int x1 = std::min(lat.width - 1, c.x + reach);
            for (int x = x0; x <= x1; ++x) out.insert({x, t});
        }
    }
    return out;
}

Region whole_lattice(const Lattice& lat) {
    Region out;
    for (int t = 0; t < lat.depth; ++t)
        for (int x = 0; x < lat.width; ++x) out.insert({x, t});
    return out;
}

Region causal_complement(const Lattice& lat, const Region& k) {
    const Region fut = causal_future(lat, k);
    const Region past = causal_past(lat, k);
    Region out;
    for (int t = 0; t < lat.depth; ++t)
        for (int x = 0; x < lat.width; ++x) {
            const Cell c{x, t};
            if (!fut.contains(c) && !past.contains(c)) out.insert(c);
        }
    return out;
}

Region causal_hull(const Lattice& lat, const Region& n) {
    const Region fut = causal_future(lat, n);
    const Region past = causal_past(lat, n);
    Region out;
    for (const Cell& c : fut)
        if (past.contains(c)) out.insert(c);
    return out;
}

namespace {

// can a causal path from c reach t=0 (dir=-1) or t=depth-1 (dir=+1)
// while avoiding n at every visited cell (including c)?
bool can_miss(const Lattice& lat, const Region& n, Cell c, int dir,
              std::vector<signed char>& memo) {
    const int idx = c.t * lat.width + c.x;
    if (memo[idx] != -1) return memo[idx] != 0;
    bool ok = false;
    if (!n.contains(c)) {
        const int next_t = c.t + dir;
        if (next_t < 0 || next_t >= lat.depth) {
            ok = true;
        } else {
            for (int dx = -1; dx <= 1 && !ok; ++dx) {
                const int nx = c.x + dx;
                if (nx >= 0 && nx < lat.width)
                    ok = can_miss(lat, n, {nx, next_t}, dir, memo);
            }
        }
    }
    memo[idx] = ok ? 1 : 0;
    return ok;
}

} // namespace

Region domain_of_dependence(const Lattice& lat, const Region& n) {
    std::vector<signed char> down(static_cast<std::size_t>(lat.width) * lat.depth, -1);
    std::vector<signed char> up(static_cast<std::size_t>(lat.width) * lat.depth, -1);
    Region out;
    for (int t = 0; t < lat.depth; ++t)
        for (int x = 0; x < lat.width; ++x) {
            const Cell c{x, t};
            // p is in D(n) iff no past-directed escape or no future-directed escape
            if (!can_miss(lat, n, c, -1, down) || !can_miss(lat, n, c, +1, up))
                out.insert(c);
        }
    return out;
}

bool spacelike_separated(const Lattice& lat, const Region& r1, const Region& r2) {
    const Region comp = causal_complement(lat, r1);
    return std::all_of(r2.begin(), r2.end(), [&](const Cell& c) { return comp.contains(c); });
}

bool is_valid_causal_order(const Lattice& lat, const std::vector<Region>& regions,
                           const std::vector<std::size_t>& order) {
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Region past_i = causal_past(lat, regions[order[i]]);
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const Region fut_j = causal_future(lat, regions[order[j]]);
            for (const Cell& c : past_i)
                if (fut_j.contains(c)) return false;
        }
    }
    return true;
}

std::vector<CausalOrder> enumerate_causal_orders(const Lattice& lat,
                                                 const std::vector<Region>& regions) {
    std::vector<std::size_t> perm(regions.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<CausalOrder> out;
    do {
        if (is_valid_causal_order(lat, regions, perm)) out.push_back(CausalOrder{perm});
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

bool is_causally_orderable(const Lattice& lat, const std::vector<Region>& regions) {
    return !enumerate_causal_orders(lat, regions).empty();
}

std::vector<Slice> enumerate_slices(const Lattice& lat) {
    std::vector<Slice> out;
    std::vector<int> level(static_cast<std::size_t>(lat.width));
    std::function<void(int)> rec = [&](int x) {
        if (x == lat.width) {
            out.push_back(Slice{level});
            return;
        }
        const int lo = x == 0 ? 0 : std::max(0, level[x - 1] - 1);
        const int hi = x == 0 ? lat.depth - 1 : std::min(lat.depth - 1, level[x - 1] + 1);
        for (int t = lo; t <= hi; ++t) {
            level[x] = t;
            rec(x + 1);
        }
    };
    rec(0);
    return out;
}

bool slice_crossed_once_by_all_paths(const Lattice& lat, const Slice& s) {
    // count_paths_with_crossings[k]: DP over layers tracking how many slice
    // cells the path has visited so far; valid iff no path ends with count != 1
    // two passes are overkill; do explicit DP with counts capped at 2
    std::vector<std::array<bool, 3>> reach(static_cast<std::size_t>(lat.width));
    auto hits = [&](int x, int t) { return s.contains({x, t}) ? 1 : 0; };
    for (int x = 0; x < lat.width; ++x) {
        reach[x] = {false, false, false};
        reach[x][hits(x, 0)] = true;
    }
    for (int t = 1; t < lat.depth; ++t) {
        std::vector<std::array<bool, 3>> next(static_cast<std::size_t>(lat.width),
                                              {false, false, false});
        for (int x = 0; x < lat.width; ++x) {
            const int h = hits(x, t);
            for (int dx = -1; dx <= 1; ++dx) {
                const int px = x + dx;
                if (px < 0 || px >= lat.width) continue;
                for (int k = 0; k <= 2; ++k)
                    if (reach[px][k]) next[x][std::min(2, k + h)] = true;
            }
        }
        reach = std::move(next);
    }
    for (int x = 0; x < lat.width; ++x)
        if (reach[x][0] || reach[x][2]) return false;
    return true;
}

Slice find_separating_slice(const Lattice& lat, const Region& k1, const Region& k2,
                            const Region& l) {
    const Region past1 = causal_past(lat, k1);
    if (std::any_of(k2.begin(), k2.end(), [&](const Cell& c) { return past1.contains(c); }))
        throw GeometryViolation("find_separating_slice: k2 intersects the causal past of k1");
    if (std::any_of(l.begin(), l.end(), [&](const Cell& c) { return past1.contains(c); }))
        throw GeometryViolation("find_separating_slice: l intersects the causal past of k1");

    Region avoid = past1;
    for (const Cell& c : causal_future(lat, k2)) avoid.insert(c);
    for (const Cell& c : causal_future(lat, l)) avoid.insert(c);

    bool found = false;
    std::vector<int> best;
    for (const Slice& s : enumerate_slices(lat)) {
        if (!slice_crossed_once_by_all_paths(lat, s)) continue;
        bool ok = true;
        for (int x = 0; x < lat.width && ok; ++x)
            if (avoid.contains({x, s.level[x]})) ok = false;
        for (const Cell& c : k1)
            if (c.t >= s.level[c.x]) ok = false; // k1 strictly below
        if (!ok) continue;
        if (!found) {
            best = s.level;
            found = true;
        } else {
            for (int x = 0; x < lat.width; ++x) best[x] = std::min(best[x], s.level[x]);
        }
    }
    if (!found) throw NoSliceFound("find_separating_slice: no valid slice on this lattice");
    return Slice{best};
}

bool validate_probe_worldline(const std::vector<Cell>& cells) {
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const int dt = cells[i].t - cells[i - 1].t;
        if (dt <= 0) return false;
        if (std::abs(cells[i].x - cells[i - 1].x) > dt) return false;
    }
    return true;
}

bool is_connected(const Region& r) {
    if (r.size() <= 1) return true;
    std::vector<Cell> cells(r.begin(), r.end());
    std::vector<bool> seen(cells.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    auto adjacent = [](const Cell& a, const Cell& b) {
        return std::abs(a.x - b.x) <= 1 && std::abs(a.t - b.t) <= 1 && !(a == b);
    };
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < cells.size(); ++j)
            if (!seen[j] && adjacent(cells[i], cells[j])) {
                seen[j] = true;
                ++count;
                stack.push_back(j);
            }
    }
    return count == cells.size();
}

Region connected_hull(const Lattice& lat, const Region& k) {
    if (k.empty()) return {};
    const Region hull = causal_hull(lat, k);
    // connected component of the hull containing k (8-neighbour adjacency)
    Region component;
    std::vector<Cell> stack(k.begin(), k.end());
    for (const Cell& c : k) component.insert(c);
    auto adjacent = [](const Cell& a, const Cell& b) {
        return std::abs(a.x - b.x) <= 1 && std::abs(a.t - b.t) <= 1 && !(a == b);
    };
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (const Cell& h : hull)
            if (!component.contains(h) && adjacent(c, h)) {
                component.insert(h);
                stack.push_back(h);
            }
    }
    return component;
}

} // namespace fv
