#include "tomigo/realign.hpp"

#include <algorithm>
#include <map>

#include "tomigo/error.hpp"

namespace tomigo {

using nlohmann::json;

std::string_view lineage_kind_name(LineageKind kind) {
    switch (kind) {
        case LineageKind::GenerateNew: return "GenerateNew";
        case LineageKind::Update: return "Update";
        case LineageKind::ApplyNode: return "ApplyNode";
    }
    return "?";
}

json artifact_to_json(const DesignArtifact& a) {
    json lineage = {{"kind", lineage_kind_name(a.lineage.kind)}};
    if (a.lineage.kind != LineageKind::GenerateNew) lineage["parent"] = a.lineage.parent_id;
    if (a.lineage.kind == LineageKind::ApplyNode) lineage["node"] = a.lineage.node_id;
    return {{"id", a.id},
            {"media_type", a.image.media_type},
            {"sha256", sha256_hex(a.image.bytes)},
            {"graph_version", a.graph_version},
            {"used_node_ids", a.used_node_ids},
            {"lineage", std::move(lineage)},
            {"created_at", a.created_at}};
}

DesignArtifact artifact_from_json(const json& j) {
    try {
        DesignArtifact a;
        a.id = j.at("id").get<std::string>();
        a.image.media_type = j.at("media_type").get<std::string>();
        a.graph_version = j.at("graph_version").get<std::uint64_t>();
        a.used_node_ids = j.at("used_node_ids").get<std::set<NodeId>>();
        a.created_at = j.value("created_at", std::int64_t{0});
        const auto& jl = j.at("lineage");
        const auto kind = jl.at("kind").get<std::string>();
        if (kind == "GenerateNew") a.lineage.kind = LineageKind::GenerateNew;
        else if (kind == "Update") a.lineage.kind = LineageKind::Update;
        else if (kind == "ApplyNode") a.lineage.kind = LineageKind::ApplyNode;
        else throw Error(Errc::ParseError, "unknown lineage '" + kind + "'");
        a.lineage.parent_id = jl.value("parent", std::string{});
        a.lineage.node_id = jl.value("node", std::string{});
        return a;
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
}

namespace {

// 0 for SubjectiveImpression, then Concepts, Content, Stylistic.
int visual_order(NodeRole role) { return 3 - role_rank(role); }

bool is_visual(const Node& n, const SchemaDef& schema) {
    auto role = schema.role_of(n.type_key);
    if (!role) return false;
    if (*role == NodeRole::Purpose) return n.type_key == types::SubjectiveImpression;
    return true;
}

}  // namespace

std::vector<Node> select_visual_nodes(const ConceptGraph& graph, const SchemaDef& schema) {
    std::vector<Node> out;
    for (const auto& n : graph.nodes) {
        if (is_visual(n, schema)) out.push_back(n);
    }
    std::sort(out.begin(), out.end(), [&](const Node& a, const Node& b) {
        int ra = visual_order(*schema.role_of(a.type_key));
        int rb = visual_order(*schema.role_of(b.type_key));
        return std::tie(ra, a.id) < std::tie(rb, b.id);
    });
    return out;
}

std::string build_generation_prompt(const ConceptGraph& graph, const SchemaDef& schema) {
    auto visual = select_visual_nodes(graph, schema);
    if (visual.empty()) throw Error(Errc::EmptyConcept, "graph has no visual nodes");
    std::string out = "Create a graphic design that realizes the following design decisions.\n";
    for (NodeRole role : kAllRoles) {
        std::string section;
        for (const auto& n : visual) {
            if (schema.role_of(n.type_key) == role) section += n.type_key + ": " + n.description + "\n";
        }
        if (!section.empty()) out += "\n## " + std::string(role_name(role)) + "\n" + section;
    }
    std::set<NodeId> selected;
    for (const auto& n : visual) selected.insert(n.id);
    std::vector<Edge> edges = graph.edges;
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.source, a.target) < std::tie(b.source, b.target); });
    std::string constraints;
    for (const auto& e : edges) {
        if (!selected.count(e.source) || !selected.count(e.target)) continue;
        constraints += "- " + graph.find(e.source)->description + " — because — " + e.reason + "\n";
    }
    if (!constraints.empty()) out += "\n## How the decisions support each other\n" + constraints;
    return out;
}

GenerationResult generate_design(Provider& provider, const ConceptGraph& graph, const SchemaDef& schema,
                                 const std::vector<Image>& reference_images, const ArtifactStamp& stamp) {
    std::string prompt = build_generation_prompt(graph, schema);
    ProviderRequest req;
    req.kind = RequestKind::ImageGeneration;
    req.stage = "generate";
    req.text(prompt);
    if (!reference_images.empty()) req.text("The attached images are the user's inspiration.");
    for (const auto& img : reference_images) req.image(img);
    Image image = complete_image(provider, req);

    DesignArtifact artifact;
    artifact.id = stamp.id;
    artifact.image = std::move(image);
    artifact.graph_version = graph.version;
    for (const auto& n : select_visual_nodes(graph, schema)) artifact.used_node_ids.insert(n.id);
    artifact.lineage = {LineageKind::GenerateNew, {}, {}};
    artifact.created_at = stamp.created_at;
    ConceptGraph marked = mark_generated(graph, artifact.used_node_ids);
    return {std::move(artifact), std::move(marked), std::move(prompt)};
}

DesignArtifact generate_baseline_design(Provider& provider, const std::string& design_type,
                                        const std::string& brief_text, const std::vector<Image>& reference_images,
                                        std::uint64_t graph_version, const ArtifactStamp& stamp) {
    ProviderRequest req;
    req.kind = RequestKind::ImageGeneration;
    req.stage = "generate";
    req.text("Create a " + (design_type.empty() ? std::string("graphic design") : design_type) + ". " + brief_text);
    for (const auto& img : reference_images) req.image(img);
    DesignArtifact artifact;
    artifact.id = stamp.id;
    artifact.image = complete_image(provider, req);
    artifact.graph_version = graph_version;
    artifact.created_at = stamp.created_at;
    return artifact;
}

GapAnalysis gap_analysis(Provider& provider, const DesignArtifact& design, const ConceptGraph& graph,
                         const SchemaDef& schema) {
    if (design.image.bytes.empty()) throw Error(Errc::PreconditionFailed, "design '" + design.id + "' has no image");
    auto visual = select_visual_nodes(graph, schema);
    std::string listing;
    for (const auto& n : visual) listing += "- " + n.id + " (" + n.type_key + "): " + n.description + "\n";

    ProviderRequest req;
    req.kind = RequestKind::VisionStructured;
    req.stage = "gap";
    req.expected_shape = Shape::object({required(
        "verdicts", Shape::list(Shape::object({required("node", Shape::string()), required("satisfied", Shape::boolean()),
                                               optional_field("gap", Shape::string()),
                                               optional_field("instruction", Shape::string())})))});
    req.text("Compare the attached design with each design decision below. For each node say whether the design "
             "satisfies it. When it does not, describe the gap and give one imperative instruction that would close "
             "it.\n" + listing);
    req.image(design.image);
    ProviderResponse resp = complete_structured(provider, req);

    GapAnalysis out;
    out.warnings = resp.warnings;
    std::set<NodeId> seen;
    for (const auto& v : resp.parsed.at("verdicts")) {
        NodeId id = v.at("node").get<std::string>();
        seen.insert(id);
        if (!graph.contains(id)) {
            out.warnings.push_back("dropped verdict for unknown node '" + id + "'");
            continue;
        }
        if (v.at("satisfied").get<bool>()) continue;
        NodeGap gap{id, v.value("gap", std::string{}), v.value("instruction", std::string{})};
        if (gap.instruction.empty()) gap.instruction = "Make the design show: " + graph.find(id)->description;
        out.gaps.push_back(std::move(gap));
    }
    for (const auto& n : visual) {
        if (!seen.count(n.id)) out.warnings.push_back("no verdict for node '" + n.id + "'");
    }
    return out;
}

namespace {

std::set<NodeId> surviving(const std::set<NodeId>& ids, const ConceptGraph& graph) {
    std::set<NodeId> out;
    for (const auto& id : ids) {
        if (graph.contains(id)) out.insert(id);
    }
    return out;
}

}  // namespace

GenerationResult update_design(Provider& provider, const DesignArtifact& design, const std::vector<NodeGap>& gaps,
                               const ConceptGraph& graph, const ArtifactStamp& stamp) {
    if (gaps.empty()) throw Error(Errc::PreconditionFailed, "update_design needs at least one gap");
    std::set<NodeId> gap_ids;
    std::string instructions = "Edit the attached design to close these gaps while keeping everything else:\n";
    for (const auto& g : gaps) {
        if (!graph.contains(g.node_id)) throw Error(Errc::MissingNode, "gap refers to missing node '" + g.node_id + "'");
        gap_ids.insert(g.node_id);
        instructions += "- " + g.instruction + "\n";
    }
    ProviderRequest req;
    req.kind = RequestKind::ImageEdit;
    req.stage = "update";
    req.text(instructions);
    req.image(design.image);
    Image image = complete_image(provider, req);

    DesignArtifact artifact;
    artifact.id = stamp.id;
    artifact.image = std::move(image);
    artifact.graph_version = graph.version;
    artifact.used_node_ids = surviving(design.used_node_ids, graph);
    artifact.used_node_ids.insert(gap_ids.begin(), gap_ids.end());
    artifact.lineage = {LineageKind::Update, design.id, {}};
    artifact.created_at = stamp.created_at;
    ConceptGraph marked = mark_generated(graph, gap_ids);
    return {std::move(artifact), std::move(marked), std::move(instructions)};
}

GenerationResult apply_node_to_design(Provider& provider, const DesignArtifact& design, const ConceptGraph& graph,
                                      const NodeId& node_id, const ArtifactStamp& stamp) {
    const Node* node = graph.find(node_id);
    if (!node) throw Error(Errc::MissingNode, "node '" + node_id + "' not in graph");

    ProviderRequest analyse;
    analyse.kind = RequestKind::VisionStructured;
    analyse.stage = "apply";
    analyse.expected_shape = Shape::object({required("instruction", Shape::string())});
    analyse.text("Analyse how this design decision can be realized or emphasized in the attached design, and "
                 "give one imperative editing instruction.\n" + node->type_key + ": " + node->description);
    analyse.image(design.image);
    StructuredOptions options;
    options.validator = [](const json& v) -> std::optional<std::string> {
        if (v.at("instruction").get<std::string>().empty()) return "instruction: empty";
        return std::nullopt;
    };
    ProviderResponse plan = complete_structured(provider, analyse, options);
    std::string instruction = plan.parsed.at("instruction").get<std::string>();

    ProviderRequest edit;
    edit.kind = RequestKind::ImageEdit;
    edit.stage = "apply";
    edit.text("Edit the attached design: " + instruction);
    edit.image(design.image);
    Image image = complete_image(provider, edit);

    DesignArtifact artifact;
    artifact.id = stamp.id;
    artifact.image = std::move(image);
    artifact.graph_version = graph.version;
    artifact.used_node_ids = surviving(design.used_node_ids, graph);
    artifact.used_node_ids.insert(node_id);
    artifact.lineage = {LineageKind::ApplyNode, design.id, node_id};
    artifact.created_at = stamp.created_at;
    ConceptGraph marked = mark_generated(graph, {node_id});
    return {std::move(artifact), std::move(marked), std::move(instruction)};
}

std::vector<std::string> lineage_chain(const std::vector<DesignArtifact>& designs, const std::string& id) {
    std::map<std::string, const DesignArtifact*> by_id;
    for (const auto& d : designs) by_id[d.id] = &d;
    std::vector<std::string> chain;
    std::string current = id;
    while (true) {
        auto it = by_id.find(current);
        if (it == by_id.end()) throw Error(Errc::IntegrityError, "design '" + current + "' not found");
        if (std::find(chain.begin(), chain.end(), current) != chain.end()) {
            throw Error(Errc::IntegrityError, "lineage cycle at '" + current + "'");
        }
        chain.push_back(current);
        if (it->second->lineage.kind == LineageKind::GenerateNew) return chain;
        current = it->second->lineage.parent_id;
    }
}

}  // namespace tomigo
