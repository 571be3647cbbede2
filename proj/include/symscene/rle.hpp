#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace symscene {

// Dense binary mask stored row-major.
class BitGrid {
public:
    BitGrid() = default;
    BitGrid(std::uint32_t height, std::uint32_t width)
        : height_(height), width_(width), bits_(std::size_t{height} * width, 0) {}

    std::uint32_t height() const noexcept { return height_; }
    std::uint32_t width() const noexcept { return width_; }
    bool empty() const noexcept { return bits_.empty(); }

    bool at(std::uint32_t row, std::uint32_t col) const noexcept {
        return bits_[std::size_t{row} * width_ + col] != 0;
    }
    void set(std::uint32_t row, std::uint32_t col, bool value = true) noexcept {
        bits_[std::size_t{row} * width_ + col] = value ? 1 : 0;
    }

    std::size_t count() const noexcept;

    const std::vector<std::uint8_t>& raw() const noexcept { return bits_; }

    bool operator==(const BitGrid&) const = default;

private:
    std::uint32_t height_ = 0;
    std::uint32_t width_ = 0;
    std::vector<std::uint8_t> bits_;
};

// COCO uncompressed RLE: column-major pixel order, runs alternate
// background/foreground starting with background.
struct RleMask {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::vector<std::uint64_t> counts;

    bool operator==(const RleMask&) const = default;
};

// Throws FormatError when sum(counts) != height*width. instance_id, when
// given, is named in the error message.
BitGrid rle_decode(const RleMask& mask, std::optional<std::int64_t> instance_id = std::nullopt);

// Canonical encoding: leading background run (possibly 0), no zero-length
// interior runs, no trailing zero run.
RleMask rle_encode(const BitGrid& grid);

// Merges zero-length interior runs and drops trailing zeros without
// changing the decoded mask.
RleMask rle_canonicalize(const RleMask& mask);

// Sum of odd-indexed runs.
std::uint64_t rle_foreground_count(const RleMask& mask) noexcept;

}  // namespace symscene
