#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symscene/rle.hpp"

namespace symscene {

// Dense relative depth, row-major, larger = farther.
struct DepthMap {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<float> values;

    float at(std::uint32_t row, std::uint32_t col) const noexcept {
        return values[std::size_t{row} * width + col];
    }

    bool operator==(const DepthMap&) const = default;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

// 8-bit, 3-channel, row-major image.
struct RgbImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<Rgb> pixels;

    Rgb at(std::uint32_t row, std::uint32_t col) const noexcept {
        return pixels[std::size_t{row} * width + col];
    }
    Rgb& at(std::uint32_t row, std::uint32_t col) noexcept {
        return pixels[std::size_t{row} * width + col];
    }

    bool operator==(const RgbImage&) const = default;
};

struct InstanceRecord {
    std::int64_t id = 0;
    std::string class_label;
    std::optional<double> score;
    RleMask rle;

    bool operator==(const InstanceRecord&) const = default;
};

struct SceneInput {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<InstanceRecord> instances;
    DepthMap depth;
    std::optional<RgbImage> rgb;
    std::optional<std::string> source_prompt;

    bool operator==(const SceneInput&) const = default;
};

// masks.json without the depth/rgb payloads.
struct MaskDocument {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::optional<std::string> prompt;
    std::vector<InstanceRecord> instances;
};

MaskDocument parse_masks_json(std::string_view doc);
std::string write_masks_json(const MaskDocument& doc);

// "DFM1", u32 width, u32 height, width*height float32, all little-endian.
DepthMap parse_depth_dfm(std::string_view doc);
std::string write_depth_dfm(const DepthMap& depth);

// Binary P6 with maxval 255.
RgbImage parse_ppm(std::string_view doc);
std::string write_ppm(const RgbImage& image);

// Parses and validates all documents eagerly. Every instance mask is decoded
// once to check its RLE sum and that it has at least one foreground pixel.
SceneInput read_scene(std::string_view mask_doc, std::string_view depth_doc,
                      std::optional<std::string_view> rgb_doc = std::nullopt);

// Re-checks SceneInput invariants (used by read_scene and by generators).
void validate_scene(const SceneInput& scene);

// Reverses depth ordering in place of the value range: d -> max + min - d.
// For inputs written in the inverse-depth (larger = closer) convention.
DepthMap inverted_depth(const DepthMap& depth);

MaskDocument mask_document_of(const SceneInput& scene);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace symscene
