#include "tomigo/store.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "tomigo/error.hpp"

namespace tomigo {

namespace fs = std::filesystem;
using nlohmann::json;

SchemaDef Project::schema() const {
    SchemaDef s = builtin_schema();
    for (const auto& t : custom_types) s = register_custom_type(s, t);
    return s;
}

const DesignArtifact* Project::find_design(std::string_view design_id) const {
    for (const auto& d : designs) {
        if (d.id == design_id) return &d;
    }
    return nullptr;
}

NodeIdAllocator Project::id_allocator() const {
    NodeIdAllocator ids(next_node_id);
    for (const auto& g : graph_versions) ids.observe(g);
    return ids;
}

namespace {

json image_meta(const Image& img) {
    return {{"index", img.index}, {"media_type", img.media_type}, {"sha256", sha256_hex(img.bytes)}};
}

json question_to_json(const Question& q) { return {{"text", q.text}, {"target_types", q.target_type_keys}}; }

std::string blob_name(const Image& img) {
    return sha256_hex(img.bytes) + "." + extension_for_media_type(img.media_type);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::StorageError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    auto doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::StorageError, "corrupt JSON in " + path.string());
    return doc;
}

std::string graph_file(std::uint64_t version) { return "graph.v" + std::to_string(version) + std::string(kGraphFileExtension); }

}  // namespace

json project_to_json(const Project& p) {
    json images = json::array();
    for (const auto& img : p.images) images.push_back(image_meta(img));
    json history = json::array();
    for (const auto& m : p.history) history.push_back(message_to_json(m));
    json versions = json::array();
    for (const auto& g : p.graph_versions) versions.push_back(g.version);
    json designs = json::array();
    for (const auto& d : p.designs) designs.push_back(artifact_to_json(d));
    json questions = json::array();
    for (const auto& q : p.questions) questions.push_back(question_to_json(q));
    json custom = json::array();
    for (const auto& t : p.custom_types) custom.push_back({{"key", t.key}, {"role", role_name(t.role)}, {"description", t.description}});
    return {{"id", p.id},
            {"brief", {{"design_type", p.brief.design_type}, {"text", p.brief.text}}},
            {"images", std::move(images)},
            {"history", std::move(history)},
            {"graph", graph_to_json(p.graph())},
            {"graph_versions", std::move(versions)},
            {"designs", std::move(designs)},
            {"questions", std::move(questions)},
            {"custom_types", std::move(custom)},
            {"created_at", p.created_at}};
}

ProjectStore::ProjectStore(fs::path root, bool scan) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error(Errc::StorageError, "cannot create " + root_.string() + ": " + ec.message());
    if (!scan) return;
    for (const auto& d : fs::directory_iterator(root_)) {
        if (d.is_directory() && fs::exists(d.path() / "manifest.json")) attach(d.path());
    }
}

std::shared_ptr<const Project> ProjectStore::create(const DesignBrief& brief, std::optional<fs::path> dir,
                                                    std::int64_t now) {
    if (brief.text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(Errc::InvalidBrief, "brief text must be non-empty");
    }
    fs::path target;
    std::string id;
    if (dir) {
        target = *dir;
        id = target.filename().string();
        if (id.empty()) id = target.parent_path().filename().string();
    } else {
        static thread_local std::mt19937_64 rng{std::random_device{}()};
        do {
            std::ostringstream ss;
            ss << "p" << std::hex << (rng() & 0xffffffffffULL);
            id = ss.str();
        } while (fs::exists(root_ / id));
        target = root_ / id;
    }
    if (fs::exists(target / "manifest.json")) throw Error(Errc::StorageError, "project already exists at " + target.string());
    {
        std::lock_guard lock(entries_mutex_);
        if (entries_.count(id)) throw Error(Errc::StorageError, "project id '" + id + "' already registered");
    }
    Project p;
    p.id = id;
    p.brief = brief;
    p.created_at = now;
    p.graph_versions.push_back(ConceptGraph{});
    std::error_code ec;
    fs::create_directories(target, ec);
    if (ec) throw Error(Errc::StorageError, "cannot create " + target.string() + ": " + ec.message());
    write_project(target, nullptr, p);

    auto e = std::make_unique<Entry>();
    e->dir = target;
    e->current = std::make_shared<const Project>(std::move(p));
    auto snapshot = e->current;
    std::lock_guard lock(entries_mutex_);
    entries_[id] = std::move(e);
    return snapshot;
}

std::string ProjectStore::attach(const fs::path& dir) {
    Project p = load(dir);
    std::string id = p.id;
    auto e = std::make_unique<Entry>();
    e->dir = dir;
    e->current = std::make_shared<const Project>(std::move(p));
    std::lock_guard lock(entries_mutex_);
    entries_[id] = std::move(e);
    return id;
}

ProjectStore::Entry& ProjectStore::entry(const std::string& id) const {
    std::lock_guard lock(entries_mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw Error(Errc::NotFound, "project '" + id + "' not found");
    return *it->second;
}

std::shared_ptr<const Project> ProjectStore::snapshot(const std::string& id) const {
    Entry& e = entry(id);
    std::lock_guard lock(e.current_mutex);
    return e.current;
}

std::vector<std::string> ProjectStore::ids() const {
    std::lock_guard lock(entries_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : entries_) out.push_back(id);
    return out;
}

fs::path ProjectStore::directory(const std::string& id) const { return entry(id).dir; }

ProjectStore::Claim ProjectStore::claim(const std::string& id) {
    Entry& e = entry(id);
    std::unique_lock lock(e.claim_mutex, std::try_to_lock);
    if (!lock.owns_lock()) {
        throw Error(Errc::ConcurrentMutation, "another mutation is in progress for project '" + id + "'");
    }
    return Claim(id, std::move(lock));
}

void ProjectStore::commit(const Claim& claim, Project next) {
    Entry& e = entry(claim.id());
    if (!claim.lock_.owns_lock() || claim.lock_.mutex() != &e.claim_mutex) {
        throw Error(Errc::PreconditionFailed, "commit without a claim on '" + claim.id() + "'");
    }
    const auto& versions = next.graph_versions;
    for (std::size_t i = 1; i < versions.size(); ++i) {
        if (versions[i].version <= versions[i - 1].version) {
            throw Error(Errc::IntegrityError, "graph versions must be strictly increasing");
        }
    }
    std::shared_ptr<const Project> previous = snapshot(claim.id());
    write_project(e.dir, previous.get(), next);
    std::lock_guard lock(e.current_mutex);
    e.current = std::make_shared<const Project>(std::move(next));
}

void ProjectStore::write_atomic(const fs::path& target, std::string_view bytes) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::StorageError, "cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw Error(Errc::StorageError, "short write to " + tmp.string());
    }
    if (fault_hook_) fault_hook_(target);
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(Errc::StorageError, "cannot rename " + tmp.string() + ": " + ec.message());
}

void ProjectStore::write_project(const fs::path& dir, const Project* previous, const Project& next) {
    std::error_code ec;
    fs::create_directories(dir / "images", ec);
    fs::create_directories(dir / "designs", ec);

    for (const auto& img : next.images) {
        fs::path blob = dir / "images" / blob_name(img);
        if (!fs::exists(blob)) write_atomic(blob, img.bytes);
    }
    for (const auto& d : next.designs) {
        fs::path blob = dir / "designs" / blob_name(d.image);
        if (!fs::exists(blob)) write_atomic(blob, d.image.bytes);
    }
    std::set<std::uint64_t> known;
    if (previous) {
        for (const auto& g : previous->graph_versions) known.insert(g.version);
    }
    for (const auto& g : next.graph_versions) {
        if (!known.count(g.version) || !fs::exists(dir / graph_file(g.version))) {
            write_atomic(dir / graph_file(g.version), serialize_canonical(g));
        }
    }
    if (!previous || previous->brief.text != next.brief.text || previous->brief.design_type != next.brief.design_type) {
        json brief = {{"design_type", next.brief.design_type}, {"text", next.brief.text}};
        write_atomic(dir / "brief.json", brief.dump(2) + "\n");
    }
    std::string history;
    for (const auto& m : next.history) history += message_to_json(m).dump() + "\n";
    write_atomic(dir / "history.jsonl", history);

    json manifest = project_to_json(next);
    manifest.erase("graph");
    manifest.erase("history");
    manifest.erase("brief");
    manifest["schema_version"] = kGraphSchemaVersion;
    manifest["history_count"] = next.history.size();
    manifest["next_node_id"] = next.next_node_id;
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

Project ProjectStore::load(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) throw Error(Errc::NotFound, "no project at " + dir.string());
    try {
        json manifest = read_json(dir / "manifest.json");
        json brief = read_json(dir / "brief.json");
        Project p;
        p.id = manifest.at("id").get<std::string>();
        p.created_at = manifest.value("created_at", std::int64_t{0});
        p.next_node_id = manifest.value("next_node_id", std::uint64_t{1});
        p.brief = {brief.at("design_type").get<std::string>(), brief.at("text").get<std::string>()};
        for (const auto& ji : manifest.at("images")) {
            Image img;
            img.index = ji.at("index").get<std::size_t>();
            img.media_type = ji.at("media_type").get<std::string>();
            img.bytes = read_file(dir / "images" / (ji.at("sha256").get<std::string>() + "." +
                                                    extension_for_media_type(img.media_type)));
            p.images.push_back(std::move(img));
        }
        for (const auto& v : manifest.at("graph_versions")) {
            p.graph_versions.push_back(deserialize(read_file(dir / graph_file(v.get<std::uint64_t>()))));
        }
        if (p.graph_versions.empty()) throw Error(Errc::StorageError, "project has no graph versions");
        std::size_t history_count = manifest.value("history_count", std::size_t{0});
        std::istringstream history(read_file(dir / "history.jsonl"));
        std::string line;
        while (p.history.size() < history_count && std::getline(history, line)) {
            p.history.push_back(message_from_json(json::parse(line)));
        }
        if (p.history.size() != history_count) throw Error(Errc::StorageError, "history.jsonl is truncated");
        for (const auto& jd : manifest.at("designs")) {
            DesignArtifact a = artifact_from_json(jd);
            a.image.bytes = read_file(dir / "designs" / (jd.at("sha256").get<std::string>() + "." +
                                                         extension_for_media_type(a.image.media_type)));
            p.designs.push_back(std::move(a));
        }
        for (const auto& jq : manifest.at("questions")) {
            p.questions.push_back({jq.at("text").get<std::string>(), jq.at("target_types").get<std::vector<std::string>>()});
        }
        for (const auto& jt : manifest.value("custom_types", json::array())) {
            p.custom_types.push_back({jt.at("key").get<std::string>(), parse_role(jt.at("role").get<std::string>()),
                                      jt.value("description", std::string{}), {}, false});
        }
        return p;
    } catch (const json::exception& e) {
        throw Error(Errc::StorageError, "corrupt project at " + dir.string() + ": " + e.what());
    }
}

}  // namespace tomigo
