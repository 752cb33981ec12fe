#include "tomigo/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include "tomigo/error.hpp"
#include "tomigo/example_graphs.hpp"
#include "tomigo/prompts.hpp"

namespace tomigo {

using nlohmann::json;

std::string_view violation_kind_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::ImageUnrepresented: return "ImageUnrepresented";
        case ViolationKind::CoverageSpanNotInBrief: return "CoverageSpanNotInBrief";
        case ViolationKind::CoverageNodeMissing: return "CoverageNodeMissing";
        case ViolationKind::NoProvenance: return "NoProvenance";
    }
    return "?";
}

std::vector<ViolationKind> ConstraintReport::kinds() const {
    std::vector<ViolationKind> out;
    for (const auto& v : violations) out.push_back(v.kind);
    return out;
}

std::string ConstraintReport::describe() const {
    std::string out;
    for (const auto& v : violations) out += "- " + std::string(violation_kind_name(v.kind)) + ": " + v.detail + "\n";
    return out;
}

json constraint_report_to_json(const ConstraintReport& report) {
    json violations = json::array();
    for (const auto& v : report.violations) {
        json jv = {{"kind", violation_kind_name(v.kind)}, {"detail", v.detail}};
        if (v.image_index) jv["image"] = *v.image_index;
        if (!v.span.empty()) jv["span"] = v.span;
        if (!v.node.empty()) jv["node"] = v.node;
        violations.push_back(std::move(jv));
    }
    return {{"violations", std::move(violations)}, {"coverage_verified", report.coverage_verified}};
}

namespace {

std::string normalize_text(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

bool brief_contains_span(std::string_view brief, std::string_view span) {
    std::string needle = normalize_text(span);
    if (needle.empty()) return false;
    return normalize_text(brief).find(needle) != std::string::npos;
}

ConstraintReport check_synthesis_constraints(const ConceptGraph& graph, const DesignBrief& brief,
                                             std::size_t image_count, const CoverageMap& coverage) {
    ConstraintReport report;
    std::set<std::size_t> represented;
    for (const auto& n : graph.nodes) {
        for (const auto& p : n.provenance) {
            if (p.kind != ProvenanceKind::ImageRef) continue;
            try {
                represented.insert(std::stoul(p.detail));
            } catch (const std::exception&) {
            }
        }
    }
    for (std::size_t i = 0; i < image_count; ++i) {
        if (!represented.count(i)) {
            report.violations.push_back({ViolationKind::ImageUnrepresented,
                                         "no node draws on image " + std::to_string(i), i, {}, {}});
        }
    }
    std::size_t coverage_problems = 0;
    for (const auto& [span, node] : coverage) {
        if (!brief_contains_span(brief.text, span)) {
            ++coverage_problems;
            report.violations.push_back({ViolationKind::CoverageSpanNotInBrief,
                                         "\"" + span + "\" does not occur in the brief", std::nullopt, span, node});
        }
        if (!graph.contains(node)) {
            ++coverage_problems;
            report.violations.push_back({ViolationKind::CoverageNodeMissing,
                                         "\"" + span + "\" maps to missing node '" + node + "'", std::nullopt, span,
                                         node});
        }
    }
    for (const auto& n : graph.nodes) {
        if (n.provenance.empty()) {
            report.violations.push_back(
                {ViolationKind::NoProvenance, "node '" + n.id + "' cites no evidence", std::nullopt, {}, n.id});
        }
    }
    report.coverage_verified = !coverage.empty() && coverage_problems == 0;
    return report;
}

namespace {

Shape edge_shape() {
    return Shape::object({required("source", Shape::string()), required("target", Shape::string()),
                          required("reason", Shape::string())});
}

Shape analysis_shape() {
    return Shape::object(
        {required("nodes", Shape::list(Shape::object({required("id", Shape::string()), required("type", Shape::string()),
                                                      required("description", Shape::string())}))),
         required("edges", Shape::list(edge_shape()))});
}

Shape synthesis_shape() {
    auto evidence = Shape::object({optional_field("brief_quote", Shape::string()), optional_field("image", Shape::integer())});
    return Shape::object(
        {required("nodes", Shape::list(Shape::object({required("id", Shape::string()), required("type", Shape::string()),
                                                      required("description", Shape::string()),
                                                      optional_field("evidence", Shape::list(evidence))}))),
         required("edges", Shape::list(edge_shape())), required("coverage", Shape::map(Shape::string()))});
}

using ProvenanceFn = std::function<std::vector<Provenance>(const json& node, std::vector<std::string>& warnings)>;

struct Ingested {
    ConceptGraph graph;
    std::map<std::string, NodeId> id_map;
    std::vector<std::string> warnings;
};

// Provider ids are untrusted: nodes get fresh engine ids, invalid nodes and
// edges are dropped with a warning so the result always validates.
Ingested ingest(const json& payload, const SchemaDef& schema, NodeIdAllocator& ids, const ProvenanceFn& provenance) {
    Ingested out;
    for (const auto& jn : payload.at("nodes")) {
        std::string raw_id = jn.at("id").get<std::string>();
        std::string type = jn.at("type").get<std::string>();
        std::string description = jn.at("description").get<std::string>();
        if (!schema.contains(type)) {
            out.warnings.push_back("dropped node '" + raw_id + "': unknown type '" + type + "'");
            continue;
        }
        if (description.empty()) {
            out.warnings.push_back("dropped node '" + raw_id + "': empty description");
            continue;
        }
        if (out.id_map.count(raw_id)) {
            out.warnings.push_back("dropped node '" + raw_id + "': duplicate id");
            continue;
        }
        Node n;
        n.id = ids.issue();
        n.type_key = std::move(type);
        n.description = std::move(description);
        n.dirty = true;
        n.provenance = provenance(jn, out.warnings);
        out.id_map[raw_id] = n.id;
        out.graph.nodes.push_back(std::move(n));
    }
    for (const auto& je : payload.at("edges")) {
        std::string s = je.at("source").get<std::string>();
        std::string t = je.at("target").get<std::string>();
        std::string reason = je.at("reason").get<std::string>();
        auto si = out.id_map.find(s);
        auto ti = out.id_map.find(t);
        if (si == out.id_map.end() || ti == out.id_map.end()) {
            out.warnings.push_back("dropped edge " + s + "->" + t + ": unknown endpoint");
            continue;
        }
        if (si->second == ti->second) {
            out.warnings.push_back("dropped edge " + s + "->" + t + ": self-loop");
            continue;
        }
        if (reason.empty()) {
            out.warnings.push_back("dropped edge " + s + "->" + t + ": no reason");
            continue;
        }
        auto existing = std::find_if(out.graph.edges.begin(), out.graph.edges.end(), [&](const Edge& e) {
            return e.source == si->second && e.target == ti->second;
        });
        if (existing != out.graph.edges.end()) existing->reason = std::move(reason);
        else out.graph.edges.push_back({si->second, ti->second, std::move(reason)});
    }
    out.graph.normalize();
    return out;
}

std::string example_graphs_text() {
    std::string out;
    for (const auto& ex : bundled_example_graphs()) out += "Example: " + ex.title + "\n" + prompts::graph_view(ex.graph) + "\n";
    return out;
}

}  // namespace

ImageAnalysis analyze_image(Provider& provider, const SchemaDef& schema, const Image& image) {
    ProviderRequest req;
    req.kind = RequestKind::VisionStructured;
    req.stage = "image_analysis";
    req.expected_shape = analysis_shape();
    req.text("You analyse a reference image for a graphic design project and describe it as a design concept graph.\n"
             "Node types:\n" + prompts::schema_definitions(schema) +
             "\nCreate one node for every node type that is present in the image, with a concrete description of "
             "that design decision. Add edges describing how the nodes support each other in the image, each with a "
             "short reason.\n\n" + example_graphs_text());
    req.image(image);

    ProviderResponse resp = complete_structured(provider, req);
    NodeIdAllocator ids;
    Provenance cite = Provenance::image(image.index);
    Ingested ing = ingest(resp.parsed, schema, ids, [&](const json&, std::vector<std::string>&) {
        return std::vector<Provenance>{cite};
    });
    if (ing.graph.nodes.empty()) {
        throw Error(Errc::EmptyGraph, "analysis of image " + std::to_string(image.index) + " produced no nodes");
    }
    ing.warnings.insert(ing.warnings.begin(), resp.warnings.begin(), resp.warnings.end());
    return {std::move(ing.graph), std::move(ing.warnings)};
}

namespace {

ProviderRequest synthesis_request(const SchemaDef& schema, const DesignBrief& brief, const ImageSet& images,
                                  const std::vector<ConceptGraph>& per_image, bool repair,
                                  const std::string& previous_output, const std::string& feedback) {
    ProviderRequest req;
    req.kind = images.empty() ? RequestKind::TextStructured : RequestKind::VisionStructured;
    req.stage = repair ? "repair" : "synthesis";
    req.expected_shape = synthesis_shape();
    std::string text =
        "Combine a written brief and the analyses of the user's reference images into one design concept graph.\n"
        "Node types:\n" + prompts::schema_definitions(schema) +
        "\nDesign type: " + brief.design_type + "\nBrief: " + brief.text + "\n\n"
        "Assume everything the user provided is intentional:\n"
        "- Every decision explicitly mentioned in the brief must be represented by a node.\n"
        "- Every image must contribute at least one feature to the graph.\n"
        "- A feature is implied when it repeats across several images or is salient in one image.\n"
        "- Keep the decisions coherent with one overall goal and connect them with reasoning edges that point from "
        "the granular decision to the one it supports.\n"
        "For every node list its evidence: verbatim quotes from the brief (brief_quote) and/or image indices "
        "(image). In \"coverage\", map each explicitly mentioned phrase of the brief, quoted verbatim, to the id of "
        "the node that represents it.\n";
    for (std::size_t i = 0; i < per_image.size(); ++i) {
        text += "\nAnalysis of image " + std::to_string(i) + ":\n" + prompts::graph_view(per_image[i]) + "\n";
    }
    req.text(std::move(text));
    for (const auto& img : images) req.image(img);
    if (repair) {
        if (!previous_output.empty()) req.text("Your previous graph:\n" + previous_output);
        req.text("It violated these constraints; return a corrected graph:\n" + feedback);
    }
    return req;
}

// Maps evidence to provenance; quotes are re-anchored to the brief's own text.
std::vector<Provenance> evidence_to_provenance(const json& node, std::vector<std::string>& warnings,
                                               const DesignBrief& brief, std::size_t image_count) {
    std::vector<Provenance> out;
    if (!node.contains("evidence") || !node.at("evidence").is_array()) return out;
    const std::string id = node.value("id", std::string{});
    const std::string brief_lower = lower(brief.text);
    for (const auto& ev : node.at("evidence")) {
        if (ev.contains("brief_quote") && ev.at("brief_quote").is_string()) {
            std::string quote = ev.at("brief_quote").get<std::string>();
            auto pos = quote.empty() ? std::string::npos : brief_lower.find(lower(quote));
            if (pos == std::string::npos) {
                warnings.push_back("node '" + id + "': quote not found in brief: \"" + quote + "\"");
            } else {
                Provenance p = Provenance::brief_quote(brief.text.substr(pos, quote.size()));
                if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
            }
        }
        if (ev.contains("image") && ev.at("image").is_number_integer()) {
            auto idx = ev.at("image").get<std::int64_t>();
            if (idx < 0 || static_cast<std::size_t>(idx) >= image_count) {
                warnings.push_back("node '" + id + "': cites missing image " + std::to_string(idx));
            } else {
                Provenance p = Provenance::image(static_cast<std::size_t>(idx));
                if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
            }
        }
    }
    return out;
}

}  // namespace

SynthesisResult synthesize_concept(Provider& provider, const SchemaDef& schema, const DesignBrief& brief,
                                   const ImageSet& images, const std::vector<ConceptGraph>& per_image,
                                   int max_repair_rounds, NodeIdAllocator* ids) {
    if (per_image.size() != images.size()) {
        throw Error(Errc::PreconditionFailed, "per-image graphs do not correspond to images");
    }
    const NodeIdAllocator start = ids ? *ids : NodeIdAllocator{};
    std::optional<SynthesisResult> best;
    std::vector<std::string> warnings;
    std::string previous_output;
    std::string feedback;
    int calls = 0;
    for (int round = 0; round <= std::max(0, max_repair_rounds); ++round) {
        ProviderRequest req = synthesis_request(schema, brief, images, per_image, round > 0, previous_output, feedback);
        ++calls;
        ProviderResponse resp;
        try {
            resp = complete_structured(provider, req, {.max_attempts = 1, .validator = {}});
        } catch (const Error& e) {
            if (e.code() != Errc::MalformedOutput) throw;
            previous_output.clear();
            feedback = "- output could not be parsed: " + e.detail() + "\n";
            continue;
        }
        NodeIdAllocator local = start;
        std::vector<std::string> round_warnings = resp.warnings;
        Ingested ing = ingest(resp.parsed, schema, local, [&](const json& node, std::vector<std::string>& w) {
            return evidence_to_provenance(node, w, brief, images.size());
        });
        round_warnings.insert(round_warnings.end(), ing.warnings.begin(), ing.warnings.end());
        CoverageMap coverage;
        for (const auto& [span, raw] : resp.parsed.at("coverage").items()) {
            auto it = ing.id_map.find(raw.get<std::string>());
            coverage[span] = it == ing.id_map.end() ? "?" + raw.get<std::string>() : it->second;
        }
        ConstraintReport report = check_synthesis_constraints(ing.graph, brief, images.size(), coverage);
        for (auto& w : round_warnings) warnings.push_back("round " + std::to_string(round + 1) + ": " + w);
        if (!best || report.violations.size() <= best->report.violations.size()) {
            best = SynthesisResult{std::move(ing.graph), report, std::move(coverage), 0, round, {}};
        }
        if (report.empty()) break;
        previous_output = resp.raw;
        feedback = report.describe();
    }
    if (!best) throw Error(Errc::SynthesisFailed, "no parseable graph in " + std::to_string(calls) + " provider calls");
    best->rounds = calls;
    best->warnings = std::move(warnings);
    for (auto& n : best->graph.nodes) {
        if (n.provenance.empty()) n.provenance.push_back(Provenance::inferred("no evidence cited"));
    }
    best->graph.version = 1;
    if (ids) {
        *ids = start;
        ids->observe(best->graph);
    }
    return std::move(*best);
}

}  // namespace tomigo
