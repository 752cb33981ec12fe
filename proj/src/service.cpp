#include "tomigo/service.hpp"

#include <chrono>
#include <set>

#include "tomigo/error.hpp"

namespace tomigo {

Service::Service(ProjectStore& store, Provider& provider, ServiceOptions options)
    : store_(store), provider_(provider), options_(std::move(options)) {}

std::int64_t Service::now() const {
    if (options_.clock) return options_.clock();
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void Service::push_graph(Project& p, ConceptGraph g) const {
    if (g.version <= p.graph().version) g.version = p.graph().version + 1;
    NodeIdAllocator ids(p.next_node_id);
    ids.observe(g);
    p.next_node_id = ids.next();
    p.graph_versions.push_back(std::move(g));
}

ArtifactStamp Service::stamp(const Project& p) const {
    return {"d" + std::to_string(p.designs.size() + 1), now()};
}

std::string Service::create_project(const DesignBrief& brief, const ImageSet& images,
                                    std::optional<std::filesystem::path> dir) {
    auto created = store_.create(brief, std::move(dir), now());
    for (const auto& img : images) add_image(created->id, img.bytes, img.media_type);
    return created->id;
}

std::size_t Service::add_image(const std::string& id, std::string bytes, std::string media_type) {
    auto claim = store_.claim(id);
    std::string sniffed = sniff_media_type(bytes);
    if (sniffed.empty()) throw Error(Errc::InvalidRequest, "image is not a recognised PNG, JPEG, GIF or WebP");
    Project next = *store_.snapshot(id);
    Image img;
    img.index = next.images.size();
    img.media_type = media_type.empty() ? sniffed : std::move(media_type);
    img.bytes = std::move(bytes);
    next.images.push_back(std::move(img));
    store_.commit(claim, next);
    return next.images.size() - 1;
}

SynthesisResult Service::synthesize(const std::string& id) {
    auto claim = store_.claim(id);
    Project next = *store_.snapshot(id);
    const SchemaDef schema = next.schema();
    std::vector<ConceptGraph> per_image;
    std::vector<std::string> warnings;
    for (const auto& img : next.images) {
        ImageAnalysis analysis = analyze_image(provider_, schema, img);
        for (auto& w : analysis.warnings) warnings.push_back("image " + std::to_string(img.index) + ": " + w);
        per_image.push_back(std::move(analysis.graph));
    }
    NodeIdAllocator ids = next.id_allocator();
    SynthesisResult result =
        synthesize_concept(provider_, schema, next.brief, next.images, per_image, options_.max_repair_rounds, &ids);
    result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
    push_graph(next, result.graph);
    next.next_node_id = std::max(next.next_node_id, ids.next());
    result.graph = next.graph();
    store_.commit(claim, std::move(next));
    return result;
}

std::shared_ptr<const Project> Service::snapshot(const std::string& id) const { return store_.snapshot(id); }

PatchOutcome Service::patch_graph(const std::string& id, GraphPatch patch) {
    auto claim = store_.claim(id);
    Project next = *store_.snapshot(id);
    NodeIdAllocator ids = next.id_allocator();
    for (auto& o : patch.ops) {
        if (auto* add = std::get_if<op::AddNode>(&o)) {
            if (add->node.id.empty()) add->node.id = ids.issue();
            if (add->node.provenance.empty()) add->node.provenance.push_back(Provenance::user_edit());
        }
    }
    const SchemaDef schema = next.schema();
    PatchResult result = apply_patch(next.graph(), patch, &schema);
    next.next_node_id = std::max(next.next_node_id, ids.next());
    if (!result.applied.empty()) {
        push_graph(next, result.graph);
        store_.commit(claim, next);
    }
    return {next.graph(), std::move(result.conflicts)};
}

MessageOutcome Service::handle_user_message(const std::string& id, const std::string& text) {
    if (text.empty()) throw Error(Errc::InvalidRequest, "message text must be non-empty");
    auto claim = store_.claim(id);
    Project next = *store_.snapshot(id);
    std::int64_t ts = now();
    if (!next.history.empty()) ts = std::max(ts, next.history.back().timestamp);
    next.history.push_back({Author::User, text, ts, {}});
    store_.commit(claim, next);

    const SchemaDef schema = next.schema();
    NodeIdAllocator ids = next.id_allocator();
    Interpretation interp = interpret_message(provider_, next.history, next.graph(), schema, next.brief, ids,
                                              options_.history_window);
    PatchResult result = apply_patch(next.graph(), interp.patch, &schema);

    MessageOutcome out;
    out.patch = interp.patch;
    out.conflicts = result.conflicts;
    out.warnings = std::move(interp.warnings);
    std::set<std::string> edited_types;
    std::set<NodeId> changed;
    for (std::size_t i : result.applied) {
        const PatchOp& o = interp.patch.ops[i];
        if (std::holds_alternative<op::AddNode>(o) || std::holds_alternative<op::EditDescription>(o)) {
            NodeId subject = op_subject(o);
            changed.insert(subject);
            if (const Node* n = result.graph.find(subject)) edited_types.insert(n->type_key);
        }
    }
    out.changed_node_ids.assign(changed.begin(), changed.end());
    if (changed.empty()) {
        out.summary = "No design decisions changed.";
    } else {
        out.summary = "Updated design decisions:";
        for (const auto& nid : changed) out.summary += " " + nid + " (" + result.graph.find(nid)->type_key + ")";
        out.summary += ".";
    }
    for (const auto& r : result.conflicts.rejected) {
        out.summary += " " + op_subject(r.op) + " was not changed (" + std::string(conflict_reason_name(r.reason)) + ").";
    }

    next.history.back().edited_types.assign(edited_types.begin(), edited_types.end());
    next.history.push_back({Author::System, out.summary, std::max(now(), ts), {}});
    next.next_node_id = std::max(next.next_node_id, ids.next());
    if (!result.applied.empty()) push_graph(next, std::move(result.graph));
    store_.commit(claim, std::move(next));
    return out;
}

Question Service::next_question(const std::string& id) {
    auto claim = store_.claim(id);
    Project next = *store_.snapshot(id);
    const SchemaDef schema = next.schema();
    std::vector<std::string> recent;
    std::size_t first = next.questions.size() > options_.recent_question_window
                            ? next.questions.size() - options_.recent_question_window
                            : 0;
    for (std::size_t i = first; i < next.questions.size(); ++i) {
        const auto& keys = next.questions[i].target_type_keys;
        recent.insert(recent.end(), keys.begin(), keys.end());
    }
    auto targets = select_question_targets(schema, addressed_topics(next.history, next.graph()), recent);
    Question q = generate_clarifying_question(provider_, next.brief, next.history, next.graph(), schema, targets,
                                              options_.question_budget);
    next.questions.push_back(q);
    store_.commit(claim, std::move(next));
    return q;
}

std::string Service::generate(const std::string& id, bool baseline) {
    auto claim = store_.claim(id);
    Project next = *store_.snapshot(id);
    ArtifactStamp s = stamp(next);
    if (baseline) {
        next.designs.push_back(generate_baseline_design(provider_, next.brief.design_type, next.brief.text,
                                                        next.images, next.graph().version, s));
    } else {
        GenerationResult result = generate_design(provider_, next.graph(), next.schema(), next.images, s);
        next.designs.push_back(std::move(result.artifact));
        push_graph(next, std::move(result.graph));
    }
    store_.commit(claim, std::move(next));
    return s.id;
}

UpdateOutcome Service::update_design(const std::string& id, const std::string& design_id) {
    auto claim = store_.claim(id);
    Project next = *store_.snapshot(id);
    const DesignArtifact* design = next.find_design(design_id);
    if (!design) throw Error(Errc::NotFound, "design '" + design_id + "' not found");
    GapAnalysis analysis = gap_analysis(provider_, *design, next.graph(), next.schema());
    UpdateOutcome out;
    out.gaps = analysis.gaps;
    if (analysis.gaps.empty()) {
        out.design_id = design_id;
        out.aligned = true;
        return out;
    }
    ArtifactStamp s = stamp(next);
    GenerationResult result = tomigo::update_design(provider_, *design, analysis.gaps, next.graph(), s);
    next.designs.push_back(std::move(result.artifact));
    push_graph(next, std::move(result.graph));
    store_.commit(claim, std::move(next));
    out.design_id = s.id;
    return out;
}

std::string Service::apply_node(const std::string& id, const std::string& design_id, const NodeId& node_id) {
    auto claim = store_.claim(id);
    Project next = *store_.snapshot(id);
    const DesignArtifact* design = next.find_design(design_id);
    if (!design) throw Error(Errc::NotFound, "design '" + design_id + "' not found");
    ArtifactStamp s = stamp(next);
    GenerationResult result = apply_node_to_design(provider_, *design, next.graph(), node_id, s);
    next.designs.push_back(std::move(result.artifact));
    push_graph(next, std::move(result.graph));
    store_.commit(claim, std::move(next));
    return s.id;
}

Image Service::design_image(const std::string& id, const std::string& design_id) const {
    auto p = store_.snapshot(id);
    const DesignArtifact* design = p->find_design(design_id);
    if (!design) throw Error(Errc::NotFound, "design '" + design_id + "' not found");
    return design->image;
}

SchemaDef Service::register_type(const std::string& id, NodeTypeDef def) {
    auto claim = store_.claim(id);
    Project next = *store_.snapshot(id);
    SchemaDef schema = register_custom_type(next.schema(), def);
    def.builtin = false;
    next.custom_types.push_back(std::move(def));
    store_.commit(claim, std::move(next));
    return schema;
}

FullValidation Service::validate(const std::string& id) const {
    auto p = store_.snapshot(id);
    return {validate_graph(p->graph(), p->schema()), check_provenance(p->graph(), p->brief.text, p->images.size())};
}

std::string Service::export_graph(const std::string& id) const { return serialize_canonical(store_.snapshot(id)->graph()); }

}  // namespace tomigo
