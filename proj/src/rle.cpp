#include "symscene/rle.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "symscene/errors.hpp"

namespace symscene {

std::size_t BitGrid::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BitGrid rle_decode(const RleMask& mask, std::optional<std::int64_t> instance_id) {
    const std::uint64_t total = std::uint64_t{mask.height} * mask.width;
    const std::uint64_t sum = std::accumulate(mask.counts.begin(), mask.counts.end(), std::uint64_t{0});
    if (sum != total) {
        std::string msg = "rle counts sum to " + std::to_string(sum) + " but mask has " +
                          std::to_string(total) + " pixels";
        if (instance_id) {
            msg = "instance " + std::to_string(*instance_id) + ": " + msg;
        }
        throw FormatError(msg);
    }

    BitGrid grid(mask.height, mask.width);
    std::uint64_t pos = 0;
    for (std::size_t run = 0; run < mask.counts.size(); ++run) {
        const std::uint64_t len = mask.counts[run];
        if (run % 2 == 1) {
            for (std::uint64_t p = pos; p < pos + len; ++p) {
                const auto col = static_cast<std::uint32_t>(p / mask.height);
                const auto row = static_cast<std::uint32_t>(p % mask.height);
                grid.set(row, col);
            }
        }
        pos += len;
    }
    return grid;
}

RleMask rle_encode(const BitGrid& grid) {
    RleMask out;
    out.height = grid.height();
    out.width = grid.width();

    bool current = false;
    std::uint64_t run = 0;
    for (std::uint32_t c = 0; c < grid.width(); ++c) {
        for (std::uint32_t r = 0; r < grid.height(); ++r) {
            const bool v = grid.at(r, c);
            if (v != current) {
                out.counts.push_back(run);
                run = 0;
                current = v;
            }
            ++run;
        }
    }
    if (run > 0 || out.counts.empty()) {
        out.counts.push_back(run);
    }
    return out;
}

RleMask rle_canonicalize(const RleMask& mask) {
    RleMask out;
    out.height = mask.height;
    out.width = mask.width;

    // Runs are appended with their parity; a run whose parity matches the
    // last emitted run is merged into it.
    for (std::size_t i = 0; i < mask.counts.size(); ++i) {
        const std::uint64_t len = mask.counts[i];
        if (len == 0) {
            continue;
        }
        const bool fg = i % 2 == 1;
        if (out.counts.empty()) {
            if (fg) {
                out.counts.push_back(0);
            }
            out.counts.push_back(len);
        } else if (fg == ((out.counts.size() - 1) % 2 == 1)) {
            out.counts.back() += len;
        } else {
            out.counts.push_back(len);
        }
    }
    if (out.counts.empty()) {
        out.counts.push_back(0);
    }
    return out;
}

std::uint64_t rle_foreground_count(const RleMask& mask) noexcept {
    std::uint64_t n = 0;
    for (std::size_t i = 1; i < mask.counts.size(); i += 2) {
        n += mask.counts[i];
    }
    return n;
}

}  // namespace symscene
