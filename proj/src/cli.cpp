#include "symscene/cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "symscene/errors.hpp"
#include "symscene/interchange.hpp"
#include "symscene/llm_client.hpp"
#include "symscene/overlay.hpp"
#include "symscene/prompt.hpp"
#include "symscene/query.hpp"
#include "symscene/relation_engine.hpp"
#include "symscene/scene_graph.hpp"
#include "symscene/scene_synth.hpp"

namespace symscene::cli {

namespace {

class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error("usage", message) {}
};

struct InputFlags {
    std::string masks;
    std::string depth;
    std::string rgb;
    std::string graph;
    std::string config;
    std::optional<double> tau_xy, tau_z_frac, inside_containment, beside_gap, near_dist, far_dist,
        occlusion_overlap;
    std::string depth_stat = "mean";
    bool depth_invert = false;
    bool restrict_to_prompt = false;
};

struct QueryFlags {
    bool count = false;
    bool relation = false;
    std::string attribute;
    std::string class_filter;
    std::string color_filter;
    std::string subject;
    std::string object;
};

void add_scene_inputs(CLI::App* cmd, InputFlags& f, bool allow_graph) {
    cmd->add_option("--masks", f.masks, "Instance masks (masks.json)");
    cmd->add_option("--depth", f.depth, "Depth map (depth.dfm)");
    cmd->add_option("--rgb", f.rgb, "Optional RGB image (binary PPM)");
    if (allow_graph) cmd->add_option("--graph", f.graph, "Existing scene_graph.json instead of raw inputs");
    cmd->add_option("--config", f.config, "Threshold config JSON");
    cmd->add_option("--tau-xy", f.tau_xy);
    cmd->add_option("--tau-z-frac", f.tau_z_frac);
    cmd->add_option("--inside-containment", f.inside_containment);
    cmd->add_option("--beside-gap", f.beside_gap);
    cmd->add_option("--near-dist", f.near_dist);
    cmd->add_option("--far-dist", f.far_dist);
    cmd->add_option("--occlusion-overlap", f.occlusion_overlap);
    cmd->add_option("--depth-stat", f.depth_stat, "Instance depth estimator: mean or median");
    cmd->add_flag("--depth-invert", f.depth_invert, "Input depth is larger = closer");
    cmd->add_flag("--restrict-to-prompt", f.restrict_to_prompt,
                  "Only relate instances whose class is named in the masks.json prompt");
}

void add_query_filters(CLI::App* cmd, QueryFlags& q) {
    cmd->add_option("--class", q.class_filter, "Class filter");
    cmd->add_option("--color", q.color_filter, "Palette color filter");
    cmd->add_option("--subject", q.subject, "Subject selector CLASS[:ORDINAL]");
    cmd->add_option("--object", q.object, "Object selector CLASS[:ORDINAL]");
}

ComposeOptions compose_options(const InputFlags& f) {
    ComposeOptions opts;
    if (!f.config.empty()) {
        opts.thresholds = parse_thresholds_json(read_file(f.config));
    }
    Thresholds& t = opts.thresholds;
    if (f.tau_xy) t.tau_xy = *f.tau_xy;
    if (f.tau_z_frac) t.tau_z_frac = *f.tau_z_frac;
    if (f.inside_containment) t.inside_containment = *f.inside_containment;
    if (f.beside_gap) t.beside_gap = *f.beside_gap;
    if (f.near_dist) t.near_dist = *f.near_dist;
    if (f.far_dist) t.far_dist = *f.far_dist;
    if (f.occlusion_overlap) t.occlusion_overlap = *f.occlusion_overlap;
    t.validate();
    opts.analysis.depth_stat = parse_depth_stat(f.depth_stat);
    opts.restrict_to_prompt = f.restrict_to_prompt;
    return opts;
}

SceneInput load_scene(const InputFlags& f) {
    if (f.masks.empty() || f.depth.empty()) {
        throw UsageError("--masks and --depth are required");
    }
    const std::string masks = read_file(f.masks);
    const std::string depth = read_file(f.depth);
    std::optional<std::string> rgb;
    if (!f.rgb.empty()) rgb = read_file(f.rgb);
    SceneInput scene = read_scene(masks, depth, rgb ? std::optional<std::string_view>(*rgb) : std::nullopt);
    if (f.depth_invert) scene.depth = inverted_depth(scene.depth);
    return scene;
}

SceneGraph load_graph(const InputFlags& f) {
    if (!f.graph.empty()) {
        if (!f.masks.empty() || !f.depth.empty()) throw UsageError("--graph excludes --masks/--depth");
        return read_scene_graph(read_file(f.graph));
    }
    return compose_scene(load_scene(f), compose_options(f));
}

void emit(std::ostream& out, const std::string& path, const std::string& bytes) {
    if (path.empty() || path == "-") {
        out << bytes;
    } else {
        write_file(path, bytes);
    }
}

std::optional<SymbolicQuery> relevance_query(const QueryFlags& q) {
    SymbolicQuery sq;
    bool any = false;
    if (!q.class_filter.empty()) sq.class_filter = q.class_filter, any = true;
    if (!q.color_filter.empty()) sq.color_filter = q.color_filter, any = true;
    if (!q.subject.empty()) sq.subject = InstanceSelector::parse(q.subject), any = true;
    if (!q.object.empty()) sq.object = InstanceSelector::parse(q.object), any = true;
    if (!any) return std::nullopt;
    sq.kind = sq.subject && sq.object ? QueryKind::relation : QueryKind::count;
    return sq;
}

SymbolicQuery build_query(const QueryFlags& q) {
    const int modes = (q.count ? 1 : 0) + (q.relation ? 1 : 0) + (q.attribute.empty() ? 0 : 1);
    if (modes != 1) throw UsageError("choose exactly one of --count, --relation, --attribute");
    SymbolicQuery sq;
    sq.kind = q.count ? QueryKind::count : q.relation ? QueryKind::relation : QueryKind::attribute;
    try {
        if (!q.class_filter.empty()) sq.class_filter = q.class_filter;
        if (!q.color_filter.empty()) sq.color_filter = q.color_filter;
        if (!q.subject.empty()) sq.subject = InstanceSelector::parse(q.subject);
        if (!q.object.empty()) sq.object = InstanceSelector::parse(q.object);
        if (!q.attribute.empty()) sq.attribute = q.attribute;
        sq.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return sq;
}

int exit_code_for(const Error& e) {
    const std::string& k = e.kind();
    if (k == "usage") return kUsage;
    if (k == "format" || k == "validation" || k == "config" || k == "generation") return kInvalidInput;
    if (k == "io") return kIo;
    if (k == "selector") return kSelector;
    if (k == "transport") return kTransport;
    return kInternal;
}

}  // namespace

Thresholds parse_thresholds_json(const std::string& doc) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(doc);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("malformed threshold config: ") + e.what(), "byte " + std::to_string(e.byte));
    }
    if (!j.is_object()) throw FormatError("threshold config must be a JSON object");
    Thresholds t;
    const std::pair<const char*, double*> fields[] = {
        {"tau_xy", &t.tau_xy},         {"tau_z_frac", &t.tau_z_frac}, {"inside_containment", &t.inside_containment},
        {"beside_gap", &t.beside_gap}, {"near_dist", &t.near_dist},   {"far_dist", &t.far_dist},
        {"occlusion_overlap", &t.occlusion_overlap},
    };
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& [name, slot] : fields) {
            if (key != name) continue;
            if (!value.is_number()) throw FormatError("threshold must be a number", "/" + key);
            *slot = value.get<double>();
            known = true;
        }
        if (!known) throw ConfigError("unknown threshold \"" + key + "\"", "/" + key);
    }
    t.validate();
    return t;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Symbolic scene knowledge from instance masks and monocular depth", "symscene"};
    app.require_subcommand(1);

    InputFlags analyze_in;
    std::string analyze_out;
    auto* analyze = app.add_subcommand("analyze", "Build scene_graph.json from masks + depth");
    add_scene_inputs(analyze, analyze_in, false);
    analyze->add_option("-o,--out", analyze_out, "Output path (stdout when omitted)");

    InputFlags query_in;
    QueryFlags query_flags;
    auto* query = app.add_subcommand("query", "Answer a symbolic COUNT / RELATION / ATTRIBUTE query");
    add_scene_inputs(query, query_in, true);
    add_query_filters(query, query_flags);
    query->add_flag("--count", query_flags.count);
    query->add_flag("--relation", query_flags.relation);
    query->add_option("--attribute", query_flags.attribute, "InstanceKnowledge field to report for --subject");

    InputFlags prompt_in;
    QueryFlags prompt_flags;
    std::string question;
    bool send = false;
    bool verbose = false;
    double timeout_s = 30.0;
    auto* prompt = app.add_subcommand("prompt", "Render the knowledge-augmented LLM prompt");
    add_scene_inputs(prompt, prompt_in, true);
    add_query_filters(prompt, prompt_flags);
    prompt->add_option("-q,--question", question, "Question text")->required();
    prompt->add_flag("--send", send, "Relay the prompt to the chat-completions endpoint");
    prompt->add_option("--timeout", timeout_s, "Request timeout in seconds");
    prompt->add_flag("-v,--verbose", verbose, "Log the HTTP exchange to stderr");

    InputFlags overlay_in;
    std::string overlay_out;
    auto* overlay = app.add_subcommand("overlay", "Draw boxes, ids and relation arrows on the RGB image");
    add_scene_inputs(overlay, overlay_in, false);
    overlay->add_option("-o,--out", overlay_out, "Output PPM")->required();

    std::string synth_out, fixture;
    std::uint64_t seed = 0;
    int n_shapes = 4;
    double margin = 2.0;
    std::uint32_t width = 256, height = 256;
    auto* synth = app.add_subcommand("synth", "Write a synthetic fixture (masks.json, depth.dfm, rgb.ppm, truth.json)");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--fixture", fixture, "Named fixture: three_shape or dogs");
    synth->add_option("--seed", seed);
    synth->add_option("--n", n_shapes);
    synth->add_option("--margin", margin);
    synth->add_option("--width", width);
    synth->add_option("--height", height);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << UsageError(e.what()).to_json() << "\n";
        return kUsage;
    }

    try {
        if (analyze->parsed()) {
            const SceneGraph g = compose_scene(load_scene(analyze_in), compose_options(analyze_in));
            emit(out, analyze_out, write_scene_graph(g));
        } else if (query->parsed()) {
            const SymbolicQuery q = build_query(query_flags);
            const SceneGraph g = load_graph(query_in);
            out << answer_query(g, q).to_json().dump() << "\n";
        } else if (prompt->parsed()) {
            std::optional<SymbolicQuery> q;
            try {
                q = relevance_query(prompt_flags);
            } catch (const ConfigError& e) {
                throw UsageError(e.what());
            }
            LlmEndpoint endpoint;
            if (send) {
                endpoint = LlmEndpoint::from_env();
                endpoint.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
                if (endpoint.api_key.empty()) {
                    // Config problem, but it belongs to the relay, so it exits with the transport code.
                    err << ConfigError("LLM_API_KEY is not set; refusing to send", "LLM_API_KEY").to_json() << "\n";
                    return kTransport;
                }
            }
            const SceneGraph g = load_graph(prompt_in);
            const PromptBundle bundle = build_prompt(g, question, q);
            out << bundle.rendered;
            if (send) {
                std::string answer;
                try {
                    answer = relay_to_llm(bundle, endpoint, verbose ? &err : nullptr);
                } catch (const ConfigError& e) {
                    err << e.to_json() << "\n";
                    return kTransport;
                }
                out << "---\n" << answer << "\n";
            }
        } else if (overlay->parsed()) {
            if (overlay_in.rgb.empty()) {
                throw ValidationError("overlay needs --rgb", "--rgb");
            }
            const SceneInput scene = load_scene(overlay_in);
            const SceneGraph g = compose_scene(scene, compose_options(overlay_in));
            write_file(overlay_out, write_ppm(render_overlay(*scene.rgb, g)));
        } else if (synth->parsed()) {
            SynthScene s;
            if (fixture == "three_shape") {
                s = fixture_three_shape();
            } else if (fixture == "dogs") {
                s = fixture_dogs();
            } else if (fixture.empty()) {
                s = random_scene(seed, n_shapes, margin, ImageDims{width, height});
            } else {
                throw UsageError("unknown fixture \"" + fixture + "\" (expected three_shape or dogs)");
            }
            const std::filesystem::path dir(synth_out);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message(), dir.string());
            write_file(dir / "masks.json", write_masks_json(mask_document_of(s.scene)));
            write_file(dir / "depth.dfm", write_depth_dfm(s.scene.depth));
            write_file(dir / "rgb.ppm", write_ppm(*s.scene.rgb));
            write_file(dir / "truth.json", write_truth_json(s.truth));
        }
    } catch (const Error& e) {
        err << e.to_json() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << Error("internal", e.what()).to_json() << "\n";
        return kInternal;
    }
    return kOk;
}

}  // namespace symscene::cli
