#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ladr {

// Odd square structuring window. Size 3 gives 8-connected adjacency; larger
// sizes widen the locality radius probed by frontier extraction.
class Kernel {
public:
    explicit Kernel(int size = 3);
    int size() const { return size_; }
    int radius() const { return size_ / 2; }

private:
    int size_;
};

// H x W boolean field over the token grid; true marks a masked cell. Flat
// index i maps to (row i / W, col i % W); every module shares this row-major
// convention. Grids are treated as immutable snapshots per decode step.
class MaskGrid {
public:
    MaskGrid(int height, int width, bool fill = false);

    // Row-major reshape of a flat boolean sequence; throws
    // std::invalid_argument when the length is not height*width.
    static MaskGrid from_flat(std::span<const std::uint8_t> flat, int height, int width);

    const std::vector<std::uint8_t>& to_flat() const { return cells_; }

    int height() const { return height_; }
    int width() const { return width_; }
    int size() const { return height_ * width_; }

    bool test(int flat_index) const { return cells_[static_cast<std::size_t>(flat_index)] != 0; }
    void set(int flat_index, bool value) {
        cells_[static_cast<std::size_t>(flat_index)] = value ? 1 : 0;
    }
    bool at(int row, int col) const { return test(row * width_ + col); }

    // Number of set cells.
    int count() const;

    MaskGrid complement() const;

    bool operator==(const MaskGrid& other) const = default;

private:
    int height_;
    int width_;
    std::vector<std::uint8_t> cells_;
};

// Binary dilation of the set cells by a k x k window. Out-of-grid cells are
// treated as unset (zero padding).
MaskGrid dilate(const MaskGrid& field, Kernel kernel);

// Masked cells with at least one observed (unmasked) cell inside their
// k x k window, excluding the centre; ascending flat indices. Computed as
// mask AND dilate(complement(mask)).
std::vector<int> frontier(const MaskGrid& mask, Kernel kernel);

// Observed cells inside the k x k window centred at flat_index, excluding
// the centre itself. Range [0, k*k - 1].
int observed_neighbor_count(const MaskGrid& mask, int flat_index, Kernel kernel);

} // namespace ladr
