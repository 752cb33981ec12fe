// tomigo: command-line front end for design-concept graph sessions.
//
//   tomigo --provider=mock --fixtures DIR --project DIR init --design-type "book cover" --brief "..."
//   tomigo --project DIR add-image ref.png
//   tomigo --project DIR synthesize | show | chat "more sparkles" | ask | generate
//   tomigo --project DIR validate | export --out graph.cgraph.json
//   tomigo serve --root DIR --port 8080

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tomigo/error.hpp"
#include "tomigo/http_provider.hpp"
#include "tomigo/mock_provider.hpp"
#include "tomigo/server.hpp"
#include "tomigo/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tomigo;

namespace {

constexpr const char* kMockStateFile = ".mock_state.json";
constexpr const char* kTranscriptFile = "transcript.jsonl";

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::InvalidRequest, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::StorageError, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct Options {
    std::string provider = "mock";
    std::string fixtures;
    std::string project;
};

// Provider plus the per-project bookkeeping that lets several CLI invocations
// behave like one session: the mock cursor and the transcript persist in the
// project directory.
class Session {
public:
    explicit Session(const Options& opts) {
        if (opts.provider == "mock") {
            // Without fixtures every provider call fails with MockExhausted;
            // commands that never call the provider still work.
            auto mock = std::make_unique<MockProvider>(opts.fixtures.empty() ? FixtureSet{}
                                                                             : FixtureSet::load(opts.fixtures));
            mock_ = mock.get();
            provider_ = std::move(mock);
        } else if (opts.provider == "http") {
            provider_ = std::make_unique<HttpProvider>(HttpProviderConfig::from_env());
        } else {
            throw Error(Errc::ConfigError, "unknown provider '" + opts.provider + "' (expected mock or http)");
        }
    }

    Provider& provider() { return *provider_; }

    void resume(const fs::path& dir) {
        dir_ = dir;
        if (!mock_ || !fs::exists(dir / kMockStateFile)) return;
        auto doc = json::parse(read_file(dir / kMockStateFile), nullptr, false);
        if (doc.is_object()) mock_->set_cursor(doc.get<MockProvider::Cursor>());
    }

    void save() {
        if (dir_.empty() || !fs::exists(dir_)) return;
        if (mock_) write_file(dir_ / kMockStateFile, json(mock_->cursor()).dump(2) + "\n");
        if (provider_->transcript().size() > 0) {
            std::ofstream out(dir_ / kTranscriptFile, std::ios::binary | std::ios::app);
            out << provider_->transcript().to_jsonl();
        }
    }

private:
    std::unique_ptr<Provider> provider_;
    MockProvider* mock_ = nullptr;
    fs::path dir_;
};

fs::path project_dir(const Options& opts) {
    if (opts.project.empty()) throw Error(Errc::ConfigError, "--project DIR is required");
    return fs::absolute(opts.project).lexically_normal();
}

std::string media_type_from_path(const fs::path& path) {
    std::string ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return {};
}

void print_graph(const Project& p) {
    const ConceptGraph& g = p.graph();
    const SchemaDef schema = p.schema();
    std::cout << "graph v" << g.version << ": " << g.nodes.size() << " nodes, " << g.edges.size() << " edges\n";
    for (NodeRole role : kAllRoles) {
        bool header = false;
        for (const auto& n : g.nodes) {
            auto r = schema.role_of(n.type_key);
            if (!r || *r != role) continue;
            if (!header) std::cout << "[" << role_name(role) << "]\n";
            header = true;
            std::cout << "  " << n.id << " " << n.type_key << (n.locked ? " (locked)" : "")
                      << (n.dirty ? " *" : "") << ": " << n.description << "\n";
        }
    }
    for (const auto& e : g.edges) std::cout << "  " << e.source << " -> " << e.target << ": " << e.reason << "\n";
}

void print_conflicts(const ConflictReport& conflicts) {
    for (const auto& r : conflicts.rejected) {
        std::cout << "rejected " << op_name(r.op) << " " << op_subject(r.op) << ": " << conflict_reason_name(r.reason)
                  << "\n";
    }
}

void print_validation(const FullValidation& v) {
    for (const auto& i : v.graph.errors) std::cout << "error " << issue_code_name(i.code) << ": " << i.detail << "\n";
    for (const auto& i : v.graph.warnings) std::cout << "warning " << issue_code_name(i.code) << ": " << i.detail << "\n";
    for (const auto& p : v.provenance) std::cout << "error Provenance: " << p << "\n";
    std::cout << (v.ok() ? "valid" : "invalid") << "\n";
}

volatile std::sig_atomic_t g_stop = 0;
Server* g_server = nullptr;

void handle_signal(int) {
    g_stop = 1;
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tomigo: design-concept graphs from a brief and reference images"};
    app.require_subcommand(1);
    Options opts;
    app.add_option("--provider", opts.provider, "Model backend: mock or http")
        ->check(CLI::IsMember({"mock", "http"}));
    app.add_option("--fixtures", opts.fixtures, "Fixture directory for the mock provider");
    app.add_option("--project", opts.project, "Project directory");

    std::string design_type, brief;
    std::vector<std::string> init_images;
    auto* init = app.add_subcommand("init", "Create a project from a brief");
    init->add_option("--design-type", design_type, "What is being designed, e.g. 'book cover'")->required();
    init->add_option("--brief", brief, "Written design brief")->required();
    init->add_option("--image", init_images, "Reference image (repeatable)")->check(CLI::ExistingFile);

    std::vector<std::string> image_paths;
    auto* add_image = app.add_subcommand("add-image", "Add reference images");
    add_image->add_option("files", image_paths, "Image files")->required()->check(CLI::ExistingFile);

    auto* synthesize = app.add_subcommand("synthesize", "Build the concept graph from brief and images");
    auto* show = app.add_subcommand("show", "Print the current concept graph");
    bool show_json = false;
    show->add_flag("--json", show_json, "Print the project snapshot as JSON");

    auto* node = app.add_subcommand("node", "Edit graph nodes");
    node->require_subcommand(1);
    std::string node_id, node_text, node_type;
    auto* node_edit = node->add_subcommand("edit", "Replace a node's description");
    node_edit->add_option("id", node_id)->required();
    node_edit->add_option("description", node_text)->required();
    auto* node_add = node->add_subcommand("add", "Add a node");
    node_add->add_option("type", node_type)->required();
    node_add->add_option("description", node_text)->required();
    auto* node_rm = node->add_subcommand("rm", "Remove a node and its edges");
    node_rm->add_option("id", node_id)->required();
    bool unlock = false;
    auto* node_lock = node->add_subcommand("lock", "Lock a node against automatic edits");
    node_lock->add_option("id", node_id)->required();
    node_lock->add_flag("--unlock", unlock, "Clear the lock instead");

    auto* edge = app.add_subcommand("edge", "Edit graph edges");
    edge->require_subcommand(1);
    std::string edge_source, edge_target, edge_reason;
    auto* edge_add = edge->add_subcommand("add", "Add or replace an edge");
    edge_add->add_option("source", edge_source)->required();
    edge_add->add_option("target", edge_target)->required();
    edge_add->add_option("reason", edge_reason)->required();
    auto* edge_rm = edge->add_subcommand("rm", "Remove an edge");
    edge_rm->add_option("source", edge_source)->required();
    edge_rm->add_option("target", edge_target)->required();

    std::string message;
    auto* chat = app.add_subcommand("chat", "Send a message about the design");
    chat->add_option("text", message)->required();

    auto* ask = app.add_subcommand("ask", "Ask the system for a clarifying question");

    bool baseline = false;
    auto* generate = app.add_subcommand("generate", "Generate a design from the graph");
    generate->add_flag("--baseline", baseline, "Generate from the brief alone, bypassing the graph");

    std::string design_id, out_path;
    auto* update = app.add_subcommand("update-design", "Realign a design with the current graph");
    update->add_option("design", design_id)->required();
    auto* apply = app.add_subcommand("apply-node", "Apply one node to an existing design");
    apply->add_option("design", design_id)->required();
    apply->add_option("node", node_id)->required();
    auto* image = app.add_subcommand("image", "Write a design's image to a file");
    image->add_option("design", design_id)->required();
    image->add_option("--out", out_path, "Output file")->required();

    std::string graph_file;
    auto* validate = app.add_subcommand("validate", "Check the current graph; exit 1 on errors");
    validate->add_option("--file", graph_file, "Check a graph file against the builtin schema instead")
        ->check(CLI::ExistingFile);
    auto* export_cmd = app.add_subcommand("export", "Print the canonical graph bytes");
    export_cmd->add_option("--out", out_path, "Write to a file instead of stdout");

    auto* schema_cmd = app.add_subcommand("schema", "Inspect or extend the node-type schema");
    schema_cmd->require_subcommand(1);
    auto* schema_export = schema_cmd->add_subcommand("export", "Print the schema as JSON");
    schema_export->add_option("--out", out_path, "Write to a file instead of stdout");
    std::string type_key, type_role, type_description;
    auto* schema_add = schema_cmd->add_subcommand("add-type", "Register a custom node type in the project");
    schema_add->add_option("key", type_key)->required();
    schema_add->add_option("role", type_role, "Purpose, Concepts, Content or Stylistic")->required();
    schema_add->add_option("description", type_description);

    std::string serve_root = "projects";
    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the REST API");
    serve->add_option("--root", serve_root, "Directory holding project directories");
    serve->add_option("--host", serve_host, "Listen address");
    serve->add_option("--port", serve_port, "Listen port");

    CLI11_PARSE(app, argc, argv);

    try {
        Session session(opts);

        if (serve->parsed()) {
            ProjectStore store(serve_root);
            Service service(store, session.provider());
            Server server(service);
            g_server = &server;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            std::cerr << "listening on " << serve_host << ":" << serve_port << "\n";
            bool ok = server.listen(serve_host, serve_port);
            g_server = nullptr;
            return ok || g_stop ? 0 : 1;
        }

        if (validate->parsed() && !graph_file.empty()) {
            FullValidation v{validate_graph(deserialize(read_file(graph_file)), builtin_schema()), {}};
            print_validation(v);
            return v.ok() ? 0 : 1;
        }

        if (schema_export->parsed() && opts.project.empty()) {
            std::string text = export_schema(builtin_schema());
            if (out_path.empty()) std::cout << text << "\n";
            else write_file(out_path, text + "\n");
            return 0;
        }

        fs::path dir = project_dir(opts);
        ProjectStore store(dir.parent_path(), false);
        Service service(store, session.provider());
        std::string id;
        if (init->parsed()) {
            ImageSet images;
            for (const auto& path : init_images) images.push_back({0, media_type_from_path(path), read_file(path), {}});
            id = service.create_project({design_type, brief}, images, dir);
            std::cout << id << "\n";
            session.resume(dir);
            session.save();
            return 0;
        }
        id = store.attach(dir);
        session.resume(dir);

        int rc = 0;
        try {
            if (add_image->parsed()) {
                for (const auto& path : image_paths) {
                    std::cout << service.add_image(id, read_file(path), media_type_from_path(path)) << "\n";
                }
            } else if (synthesize->parsed()) {
                SynthesisResult r = service.synthesize(id);
                for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
                std::cout << "rounds: " << r.rounds << "\n" << r.report.describe() << "\n";
                print_graph(*service.snapshot(id));
            } else if (show->parsed()) {
                if (show_json) std::cout << project_to_json(*service.snapshot(id)).dump(2) << "\n";
                else print_graph(*service.snapshot(id));
            } else if (node->parsed() || edge->parsed()) {
                GraphPatch patch;
                if (node_edit->parsed()) patch.ops.push_back(op::EditDescription{node_id, node_text, Provenance::user_edit()});
                if (node_add->parsed()) {
                    Node n;
                    n.type_key = node_type;
                    n.description = node_text;
                    patch.ops.push_back(op::AddNode{n});
                }
                if (node_rm->parsed()) patch.ops.push_back(op::RemoveNode{node_id});
                if (node_lock->parsed()) patch.ops.push_back(op::SetLock{node_id, !unlock});
                if (edge_add->parsed()) patch.ops.push_back(op::AddEdge{{edge_source, edge_target, edge_reason}});
                if (edge_rm->parsed()) patch.ops.push_back(op::RemoveEdge{edge_source, edge_target});
                PatchOutcome r = service.patch_graph(id, std::move(patch));
                print_conflicts(r.conflicts);
                std::cout << "graph v" << r.graph.version << "\n";
                if (!r.conflicts.rejected.empty()) rc = 1;
            } else if (chat->parsed()) {
                MessageOutcome r = service.handle_user_message(id, message);
                for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
                std::cout << r.summary << "\n";
            } else if (ask->parsed()) {
                std::cout << service.next_question(id).text << "\n";
            } else if (generate->parsed()) {
                std::cout << service.generate(id, baseline) << "\n";
            } else if (update->parsed()) {
                UpdateOutcome r = service.update_design(id, design_id);
                for (const auto& g : r.gaps) std::cout << "gap " << g.node_id << ": " << g.gap << "\n";
                std::cout << r.design_id << (r.aligned ? " (already aligned)" : "") << "\n";
            } else if (apply->parsed()) {
                std::cout << service.apply_node(id, design_id, node_id) << "\n";
            } else if (image->parsed()) {
                write_file(out_path, service.design_image(id, design_id).bytes);
            } else if (validate->parsed()) {
                FullValidation v = service.validate(id);
                print_validation(v);
                if (!v.ok()) rc = 1;
            } else if (export_cmd->parsed()) {
                std::string bytes = service.export_graph(id);
                if (out_path.empty()) std::cout << bytes;
                else write_file(out_path, bytes);
            } else if (schema_export->parsed()) {
                std::string text = export_schema(service.snapshot(id)->schema());
                if (out_path.empty()) std::cout << text << "\n";
                else write_file(out_path, text + "\n");
            } else if (schema_add->parsed()) {
                service.register_type(id, {type_key, parse_role(type_role), type_description, {}, false});
                std::cout << type_key << "\n";
            }
        } catch (...) {
            session.save();
            throw;
        }
        session.save();
        return rc;
    } catch (const Error& e) {
        std::cerr << "error: " << errc_name(e.code()) << ": " << e.detail() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
