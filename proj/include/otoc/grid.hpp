#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

namespace otoc {

struct GridPos {
    int r = 0;
    int c = 0;
    bool operator==(const GridPos&) const = default;
    bool operator<(const GridPos& o) const { return r != o.r ? r < o.r : c < o.c; }
};

// Rectangular qubit lattice with optional disabled sites. Enabled sites get
// dense ids 0..n-1 in row-major order; all gate endpoints use dense ids.
class QubitGrid {
public:
    QubitGrid() = default;
    QubitGrid(int rows, int cols, std::vector<GridPos> disabled = {})
        : rows_(rows), cols_(cols), id_(static_cast<std::size_t>(rows) * cols, -1) {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("grid: non-positive shape");
        std::vector<bool> dis(static_cast<std::size_t>(rows) * cols, false);
        for (const auto& p : disabled) {
            if (!in_bounds(p)) throw std::invalid_argument("grid: disabled site out of bounds");
            dis[flat(p)] = true;
        }
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (!dis[flat({r, c})]) {
                    id_[flat({r, c})] = static_cast<int>(pos_.size());
                    pos_.push_back({r, c});
                }
        disabled_ = std::move(disabled);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int n_sites() const { return static_cast<int>(pos_.size()); }
    const std::vector<GridPos>& disabled() const { return disabled_; }

    bool in_bounds(GridPos p) const { return p.r >= 0 && p.r < rows_ && p.c >= 0 && p.c < cols_; }
    bool enabled(GridPos p) const { return in_bounds(p) && id_[flat(p)] >= 0; }

    int site_id(GridPos p) const {
        if (!enabled(p)) throw std::invalid_argument("grid: site disabled or out of bounds");
        return id_[flat(p)];
    }
    GridPos position(int id) const { return pos_.at(static_cast<std::size_t>(id)); }

    bool adjacent(int a, int b) const {
        GridPos pa = position(a), pb = position(b);
        return std::abs(pa.r - pb.r) + std::abs(pa.c - pb.c) == 1;
    }

    // BFS distances over enabled nearest-neighbor sites.
    std::vector<int> distances_from(int src) const {
        std::vector<int> d(pos_.size(), -1);
        std::vector<int> q{src};
        d[static_cast<std::size_t>(src)] = 0;
        for (std::size_t h = 0; h < q.size(); ++h) {
            GridPos p = position(q[h]);
            const GridPos nb[4] = {{p.r - 1, p.c}, {p.r + 1, p.c}, {p.r, p.c - 1}, {p.r, p.c + 1}};
            for (const auto& m : nb) {
                if (!enabled(m)) continue;
                int j = id_[flat(m)];
                if (d[static_cast<std::size_t>(j)] < 0) {
                    d[static_cast<std::size_t>(j)] = d[static_cast<std::size_t>(q[h])] + 1;
                    q.push_back(j);
                }
            }
        }
        return d;
    }

    bool operator==(const QubitGrid& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && id_ == o.id_;
    }

private:
    std::size_t flat(GridPos p) const { return static_cast<std::size_t>(p.r) * cols_ + p.c; }

    int rows_ = 0, cols_ = 0;
    std::vector<int> id_;
    std::vector<GridPos> pos_;
    std::vector<GridPos> disabled_;
};

}  // namespace otoc
