#include "ladr/grid.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ladr {

Kernel::Kernel(int size) : size_(size) {
    if (size < 1 || size % 2 == 0) {
        throw std::invalid_argument("Kernel: size must be odd and >= 1, got " +
                                    std::to_string(size));
    }
}

MaskGrid::MaskGrid(int height, int width, bool fill)
    : height_(height), width_(width),
      cells_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
             fill ? 1 : 0) {
    if (height < 1 || width < 1) {
        throw std::invalid_argument("MaskGrid: dimensions must be positive");
    }
}

MaskGrid MaskGrid::from_flat(std::span<const std::uint8_t> flat, int height, int width) {
    if (height < 1 || width < 1) {
        throw std::invalid_argument("MaskGrid::from_flat: dimensions must be positive");
    }
    if (flat.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw std::invalid_argument(
            "MaskGrid::from_flat: sequence length " + std::to_string(flat.size()) +
            " does not equal " + std::to_string(height) + "x" + std::to_string(width));
    }
    MaskGrid grid(height, width);
    std::copy(flat.begin(), flat.end(), grid.cells_.begin());
    for (auto& c : grid.cells_) c = c ? 1 : 0;
    return grid;
}

int MaskGrid::count() const {
    return std::accumulate(cells_.begin(), cells_.end(), 0,
                           [](int acc, std::uint8_t c) { return acc + (c ? 1 : 0); });
}

MaskGrid MaskGrid::complement() const {
    MaskGrid out(height_, width_);
    for (std::size_t i = 0; i < cells_.size(); ++i) out.cells_[i] = cells_[i] ? 0 : 1;
    return out;
}

MaskGrid dilate(const MaskGrid& field, Kernel kernel) {
    const int h = field.height();
    const int w = field.width();
    const int r = kernel.radius();
    MaskGrid out(h, w);
    for (int row = 0; row < h; ++row) {
        const int r0 = std::max(0, row - r);
        const int r1 = std::min(h - 1, row + r);
        for (int col = 0; col < w; ++col) {
            const int c0 = std::max(0, col - r);
            const int c1 = std::min(w - 1, col + r);
            bool hit = false;
            for (int rr = r0; rr <= r1 && !hit; ++rr) {
                for (int cc = c0; cc <= c1; ++cc) {
                    if (field.at(rr, cc)) { hit = true; break; }
                }
            }
            out.set(row * w + col, hit);
        }
    }
    return out;
}

std::vector<int> frontier(const MaskGrid& mask, Kernel kernel) {
    const MaskGrid reach = dilate(mask.complement(), kernel);
    std::vector<int> out;
    for (int i = 0; i < mask.size(); ++i) {
        if (mask.test(i) && reach.test(i)) out.push_back(i);
    }
    return out;
}

int observed_neighbor_count(const MaskGrid& mask, int flat_index, Kernel kernel) {
    if (flat_index < 0 || flat_index >= mask.size()) {
        throw std::invalid_argument("observed_neighbor_count: index out of range");
    }
    const int w = mask.width();
    const int row = flat_index / w;
    const int col = flat_index % w;
    const int r = kernel.radius();
    int count = 0;
    for (int rr = std::max(0, row - r); rr <= std::min(mask.height() - 1, row + r); ++rr) {
        for (int cc = std::max(0, col - r); cc <= std::min(w - 1, col + r); ++cc) {
            if (rr == row && cc == col) continue;
            if (!mask.at(rr, cc)) ++count;
        }
    }
    return count;
}

} // namespace ladr
