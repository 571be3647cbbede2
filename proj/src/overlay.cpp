#include "symscene/overlay.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

namespace symscene {

namespace {

constexpr std::array<Rgb, 8> kInstanceColors{{
    {255, 64, 64},
    {64, 220, 64},
    {64, 128, 255},
    {255, 200, 0},
    {255, 0, 255},
    {0, 230, 230},
    {255, 128, 0},
    {160, 96, 255},
}};
constexpr Rgb kArrow{255, 255, 255};
constexpr Rgb kArrowShadow{0, 0, 0};
constexpr Rgb kLabelBackground{0, 0, 0};

// Rows top to bottom, bit 4 is the leftmost column.
constexpr std::array<std::array<std::uint8_t, 7>, 10> kDigits{{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},
}};

class Canvas {
public:
    explicit Canvas(RgbImage& img) : img_(img) {}

    void plot(long x, long y, Rgb c) {
        if (x < 0 || y < 0 || x >= static_cast<long>(img_.width) || y >= static_cast<long>(img_.height)) return;
        img_.at(static_cast<std::uint32_t>(y), static_cast<std::uint32_t>(x)) = c;
    }

    // Bresenham.
    void line(long x0, long y0, long x1, long y1, Rgb c) {
        const long dx = std::labs(x1 - x0), sx = x0 < x1 ? 1 : -1;
        const long dy = -std::labs(y1 - y0), sy = y0 < y1 ? 1 : -1;
        long err = dx + dy;
        for (;;) {
            plot(x0, y0, c);
            if (x0 == x1 && y0 == y1) break;
            const long e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }

    // Dark copy one pixel down-right so light strokes stay visible on light regions.
    void shadowed_line(long x0, long y0, long x1, long y1, Rgb c) {
        line(x0 + 1, y0 + 1, x1 + 1, y1 + 1, kArrowShadow);
        line(x0, y0, x1, y1, c);
    }

    void rect(long x0, long y0, long x1, long y1, Rgb c) {
        line(x0, y0, x1, y0, c);
        line(x1, y0, x1, y1, c);
        line(x1, y1, x0, y1, c);
        line(x0, y1, x0, y0, c);
    }

    void fill(long x0, long y0, long x1, long y1, Rgb c) {
        for (long y = y0; y <= y1; ++y)
            for (long x = x0; x <= x1; ++x) plot(x, y, c);
    }

    void text(long x, long y, const std::string& digits, Rgb c) {
        const long width = static_cast<long>(digits.size()) * 6 - 1;
        fill(x - 1, y - 1, x + width, y + 7, kLabelBackground);
        for (char ch : digits) {
            const auto& glyph = kDigits[static_cast<std::size_t>(ch - '0')];
            for (long row = 0; row < 7; ++row)
                for (long col = 0; col < 5; ++col)
                    if (glyph[static_cast<std::size_t>(row)] & (0x10 >> col)) plot(x + col, y + row, c);
            x += 6;
        }
    }

private:
    RgbImage& img_;
};

}  // namespace

RgbImage render_overlay(const RgbImage& image, const SceneGraph& graph) {
    RgbImage out = image;
    if (graph.instances.empty()) return out;
    Canvas canvas(out);

    const double sx = image.width > 1 ? image.width - 1.0 : 1.0;
    const double sy = image.height > 1 ? image.height - 1.0 : 1.0;
    auto px = [&](double v) { return std::lround(v * sx); };
    auto py = [&](double v) { return std::lround(v * sy); };

    std::set<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& e : graph.relations) {
        pairs.insert({std::min(e.subject_id, e.object_id), std::max(e.subject_id, e.object_id)});
    }
    for (const auto& [a, b] : pairs) {
        const InstanceKnowledge* ka = graph.find(a);
        const InstanceKnowledge* kb = graph.find(b);
        if (!ka || !kb) continue;
        const double x0 = ka->centroid.x * sx, y0 = ka->centroid.y * sy;
        const double x1 = kb->centroid.x * sx, y1 = kb->centroid.y * sy;
        canvas.shadowed_line(std::lround(x0), std::lround(y0), std::lround(x1), std::lround(y1), kArrow);
        const double len = std::sqrt((x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0));
        if (len < 1.0) continue;
        const double ux = (x1 - x0) / len, uy = (y1 - y0) / len;
        for (const double side : {-1.0, 1.0}) {
            const double hx = x1 - 6.0 * ux + side * 3.0 * -uy;
            const double hy = y1 - 6.0 * uy + side * 3.0 * ux;
            canvas.shadowed_line(std::lround(x1), std::lround(y1), std::lround(hx), std::lround(hy), kArrow);
        }
    }

    for (std::size_t i = 0; i < graph.instances.size(); ++i) {
        const auto& k = graph.instances[i];
        const Rgb color = kInstanceColors[i % kInstanceColors.size()];
        canvas.rect(px(k.bbox.x_min), py(k.bbox.y_min), px(k.bbox.x_max), py(k.bbox.y_max), color);
        const long cx = px(k.centroid.x), cy = py(k.centroid.y);
        canvas.fill(cx - 1, cy - 1, cx + 1, cy + 1, color);
    }
    for (std::size_t i = 0; i < graph.instances.size(); ++i) {
        const auto& k = graph.instances[i];
        canvas.text(px(k.bbox.x_min) + 2, py(k.bbox.y_min) + 2, std::to_string(k.id),
                    kInstanceColors[i % kInstanceColors.size()]);
    }
    return out;
}

}  // namespace symscene
