#include "symscene/interchange.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "symscene/errors.hpp"

namespace symscene {

namespace {

using nlohmann::json;

std::string path_join(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string path_join(const std::string& base, std::size_t index) {
    return base + "/" + std::to_string(index);
}

const json& require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw FormatError(std::string("missing key \"") + key + "\"", path);
    }
    return *it;
}

std::uint64_t as_unsigned(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer()) {
        const auto s = v.get<std::int64_t>();
        if (s < 0) {
            throw FormatError("expected a non-negative integer, got " + std::to_string(s), path);
        }
        return static_cast<std::uint64_t>(s);
    }
    throw FormatError(std::string("expected a non-negative integer, got ") + v.type_name(), path);
}

std::uint32_t as_dim(const json& v, const std::string& path) {
    const auto d = as_unsigned(v, path);
    if (d == 0 || d > 1u << 20) {
        throw FormatError("image dimension out of range: " + std::to_string(d), path);
    }
    return static_cast<std::uint32_t>(d);
}

std::uint32_t load_u32_le(const char* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    }
    return v;
}

void store_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

InstanceRecord parse_instance(const json& j, const std::string& path) {
    if (!j.is_object()) {
        throw FormatError("instance must be an object", path);
    }
    InstanceRecord rec;
    rec.id = static_cast<std::int64_t>(as_unsigned(require(j, "id", path), path_join(path, "id")));

    const json& cls = require(j, "class", path);
    if (!cls.is_string()) {
        throw FormatError("class must be a string", path_join(path, "class"));
    }
    rec.class_label = cls.get<std::string>();

    if (auto it = j.find("score"); it != j.end() && !it->is_null()) {
        if (!it->is_number()) {
            throw FormatError("score must be a number or null", path_join(path, "score"));
        }
        const double s = it->get<double>();
        if (!(s >= 0.0 && s <= 1.0)) {
            throw ValidationError("score outside [0,1]", path_join(path, "score"));
        }
        rec.score = s;
    }

    const std::string rle_path = path_join(path, "rle");
    const json& rle = require(j, "rle", path);
    if (!rle.is_object()) {
        throw FormatError("rle must be an object", rle_path);
    }
    const json& size = require(rle, "size", rle_path);
    if (!size.is_array() || size.size() != 2) {
        throw FormatError("rle size must be [height, width]", path_join(rle_path, "size"));
    }
    rec.rle.height = as_dim(size[0], path_join(rle_path, "size/0"));
    rec.rle.width = as_dim(size[1], path_join(rle_path, "size/1"));

    const std::string counts_path = path_join(rle_path, "counts");
    const json& counts = require(rle, "counts", rle_path);
    if (!counts.is_array()) {
        throw FormatError("rle counts must be an array", counts_path);
    }
    rec.rle.counts.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        rec.rle.counts.push_back(as_unsigned(counts[i], path_join(counts_path, i)));
    }
    return rec;
}

}  // namespace

MaskDocument parse_masks_json(std::string_view doc) {
    json root;
    try {
        root = json::parse(doc.begin(), doc.end());
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what(), "byte " + std::to_string(e.byte));
    }
    if (!root.is_object()) {
        throw FormatError("masks document must be a JSON object", "");
    }

    MaskDocument out;
    const json& image = require(root, "image", "");
    if (!image.is_object()) {
        throw FormatError("image must be an object", "/image");
    }
    out.width = as_dim(require(image, "width", "/image"), "/image/width");
    out.height = as_dim(require(image, "height", "/image"), "/image/height");

    if (auto it = root.find("prompt"); it != root.end() && !it->is_null()) {
        if (!it->is_string()) {
            throw FormatError("prompt must be a string or null", "/prompt");
        }
        out.prompt = it->get<std::string>();
    }

    const json& instances = require(root, "instances", "");
    if (!instances.is_array()) {
        throw FormatError("instances must be an array", "/instances");
    }
    out.instances.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        out.instances.push_back(parse_instance(instances[i], path_join("/instances", i)));
    }
    return out;
}

std::string write_masks_json(const MaskDocument& doc) {
    nlohmann::ordered_json root;
    root["image"] = {{"width", doc.width}, {"height", doc.height}};
    root["prompt"] = doc.prompt ? nlohmann::ordered_json(*doc.prompt) : nlohmann::ordered_json(nullptr);
    root["instances"] = nlohmann::ordered_json::array();
    for (const auto& rec : doc.instances) {
        nlohmann::ordered_json inst;
        inst["id"] = rec.id;
        inst["class"] = rec.class_label;
        inst["score"] = rec.score ? nlohmann::ordered_json(*rec.score) : nlohmann::ordered_json(nullptr);
        inst["rle"] = {{"size", {rec.rle.height, rec.rle.width}}, {"counts", rec.rle.counts}};
        root["instances"].push_back(std::move(inst));
    }
    return root.dump() + "\n";
}

DepthMap parse_depth_dfm(std::string_view doc) {
    if (doc.size() < 12) {
        throw FormatError("depth file truncated: header needs 12 bytes, got " + std::to_string(doc.size()),
                          "byte " + std::to_string(doc.size()));
    }
    if (doc.substr(0, 4) != "DFM1") {
        throw FormatError("bad depth magic, expected DFM1", "byte 0");
    }
    DepthMap out;
    out.width = load_u32_le(doc.data() + 4);
    out.height = load_u32_le(doc.data() + 8);
    if (out.width == 0 || out.height == 0) {
        throw FormatError("depth dimensions must be positive", "byte 4");
    }
    const std::uint64_t n = std::uint64_t{out.width} * out.height;
    const std::uint64_t expected = 12 + 4 * n;
    if (doc.size() != expected) {
        throw FormatError("depth payload size mismatch: expected " + std::to_string(expected) +
                              " bytes, got " + std::to_string(doc.size()),
                          "byte " + std::to_string(std::min<std::uint64_t>(doc.size(), expected)));
    }
    out.values.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const float v = std::bit_cast<float>(load_u32_le(doc.data() + 12 + 4 * i));
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite depth value at pixel " + std::to_string(i),
                                  "byte " + std::to_string(12 + 4 * i));
        }
        out.values[i] = v;
    }
    return out;
}

std::string write_depth_dfm(const DepthMap& depth) {
    std::string out = "DFM1";
    out.reserve(12 + 4 * depth.values.size());
    store_u32_le(out, depth.width);
    store_u32_le(out, depth.height);
    for (float v : depth.values) {
        store_u32_le(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

RgbImage parse_ppm(std::string_view doc) {
    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw FormatError("ppm: " + msg, "byte " + std::to_string(pos));
    };
    auto skip_ws = [&] {
        while (pos < doc.size()) {
            const char c = doc[pos];
            if (c == '#') {
                while (pos < doc.size() && doc[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&]() -> std::uint64_t {
        skip_ws();
        if (pos >= doc.size() || doc[pos] < '0' || doc[pos] > '9') {
            fail("expected an unsigned integer");
        }
        std::uint64_t v = 0;
        while (pos < doc.size() && doc[pos] >= '0' && doc[pos] <= '9') {
            v = v * 10 + static_cast<std::uint64_t>(doc[pos] - '0');
            if (v > (1u << 20)) fail("header value too large");
            ++pos;
        }
        return v;
    };

    if (doc.substr(0, 2) != "P6") {
        fail("expected P6 magic");
    }
    pos = 2;
    const auto width = read_uint();
    const auto height = read_uint();
    const auto maxval = read_uint();
    if (width == 0 || height == 0) fail("dimensions must be positive");
    if (maxval != 255) fail("maxval must be 255");
    if (pos >= doc.size() || !(doc[pos] == ' ' || doc[pos] == '\t' || doc[pos] == '\n' || doc[pos] == '\r')) {
        fail("expected a single whitespace byte after maxval");
    }
    ++pos;
    const std::uint64_t n = width * height;
    if (doc.size() - pos != 3 * n) {
        fail("pixel payload size mismatch: expected " + std::to_string(3 * n) + " bytes, got " +
             std::to_string(doc.size() - pos));
    }

    RgbImage img;
    img.width = static_cast<std::uint32_t>(width);
    img.height = static_cast<std::uint32_t>(height);
    img.pixels.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto* p = reinterpret_cast<const unsigned char*>(doc.data() + pos + 3 * i);
        img.pixels[i] = Rgb{p[0], p[1], p[2]};
    }
    return img;
}

std::string write_ppm(const RgbImage& image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.reserve(out.size() + 3 * image.pixels.size());
    for (const Rgb& p : image.pixels) {
        out.push_back(static_cast<char>(p.r));
        out.push_back(static_cast<char>(p.g));
        out.push_back(static_cast<char>(p.b));
    }
    return out;
}

void validate_scene(const SceneInput& scene) {
    if (scene.depth.width != scene.width || scene.depth.height != scene.height) {
        throw ValidationError("depth dims " + std::to_string(scene.depth.width) + "x" +
                                  std::to_string(scene.depth.height) + " do not match image dims " +
                                  std::to_string(scene.width) + "x" + std::to_string(scene.height),
                              "depth");
    }
    if (scene.depth.values.size() != std::size_t{scene.width} * scene.height) {
        throw ValidationError("depth value count does not match dims", "depth");
    }
    for (std::size_t i = 0; i < scene.depth.values.size(); ++i) {
        if (!std::isfinite(scene.depth.values[i])) {
            throw ValidationError("non-finite depth value at pixel " + std::to_string(i), "depth");
        }
    }
    if (scene.rgb) {
        if (scene.rgb->width != scene.width || scene.rgb->height != scene.height) {
            throw ValidationError("rgb dims do not match image dims", "rgb");
        }
        if (scene.rgb->pixels.size() != std::size_t{scene.width} * scene.height) {
            throw ValidationError("rgb pixel count does not match dims", "rgb");
        }
    }

    std::set<std::int64_t> ids;
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
        const auto& rec = scene.instances[i];
        const std::string path = "/instances/" + std::to_string(i);
        if (rec.id < 0) {
            throw ValidationError("negative instance id", path + "/id");
        }
        if (!ids.insert(rec.id).second) {
            throw ValidationError("duplicate instance id " + std::to_string(rec.id), path + "/id");
        }
        if (rec.rle.height != scene.height || rec.rle.width != scene.width) {
            throw ValidationError("instance " + std::to_string(rec.id) + ": rle size [" +
                                      std::to_string(rec.rle.height) + ", " + std::to_string(rec.rle.width) +
                                      "] does not match image [" + std::to_string(scene.height) + ", " +
                                      std::to_string(scene.width) + "]",
                                  path + "/rle/size");
        }
        try {
            rle_decode(rec.rle, rec.id);
        } catch (const FormatError& e) {
            throw FormatError(e.what(), path + "/rle/counts");
        }
        if (rle_foreground_count(rec.rle) == 0) {
            throw ValidationError("instance " + std::to_string(rec.id) + ": mask has no foreground pixels",
                                  path + "/rle/counts");
        }
    }
}

SceneInput read_scene(std::string_view mask_doc, std::string_view depth_doc,
                      std::optional<std::string_view> rgb_doc) {
    MaskDocument masks = parse_masks_json(mask_doc);
    SceneInput scene;
    scene.width = masks.width;
    scene.height = masks.height;
    scene.source_prompt = std::move(masks.prompt);
    scene.instances = std::move(masks.instances);
    scene.depth = parse_depth_dfm(depth_doc);
    if (rgb_doc) {
        scene.rgb = parse_ppm(*rgb_doc);
    }
    validate_scene(scene);
    return scene;
}

DepthMap inverted_depth(const DepthMap& depth) {
    DepthMap out = depth;
    if (depth.values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(depth.values.begin(), depth.values.end());
    const double sum = static_cast<double>(*lo) + static_cast<double>(*hi);
    for (float& v : out.values) v = static_cast<float>(sum - static_cast<double>(v));
    return out;
}

MaskDocument mask_document_of(const SceneInput& scene) {
    return MaskDocument{scene.width, scene.height, scene.source_prompt, scene.instances};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading", path.string());
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed for " + path.string(), path.string());
    }
    return data;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing", path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for " + path.string(), path.string());
    }
}

}  // namespace symscene
